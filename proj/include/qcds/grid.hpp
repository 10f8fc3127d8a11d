#pragma once

#include "qcds/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace qcds {

struct NodeSet {
  int dim = 0;
  std::vector<Bounds> bounds;
  std::vector<int> shape; // nodes per dimension
  Eigen::MatrixXd coords; // n x dim, row-major node ordering (last dim fastest)
  // Bit 2d set: node on the low face of dimension d; bit 2d+1: high face.
  std::vector<std::uint32_t> face_mask;

  int size() const { return static_cast<int>(coords.rows()); }
  bool on_boundary(int node) const { return face_mask[node] != 0; }
  bool on_face(int node, int d) const {
    return (face_mask[node] >> (2 * d)) & 3u;
  }
};

struct Patch {
  Eigen::VectorXd center;
  double radius = 0.0; // in scaled coordinates
  std::vector<int> members;
};

struct PatchCover {
  std::vector<Patch> patches;
  std::vector<std::vector<int>> node_to_patches;
  Eigen::VectorXd dim_scale; // distances use (x - c) ./ dim_scale
};

NodeSet generate_nodes(const std::vector<Bounds>& bounds,
                       const std::vector<int>& nodes_per_dim);

PatchCover build_cover(const NodeSet& nodes,
                       const std::vector<int>& patches_per_dim, double overlap,
                       bool anisotropic_scaling = true);

} // namespace qcds
