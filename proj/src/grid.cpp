#include "qcds/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace qcds {

NodeSet generate_nodes(const std::vector<Bounds>& bounds,
                       const std::vector<int>& nodes_per_dim) {
  const int dim = static_cast<int>(bounds.size());
  if (dim == 0 || nodes_per_dim.size() != bounds.size())
    throw std::invalid_argument("bounds/nodes_per_dim size mismatch");
  long n = 1;
  for (int d = 0; d < dim; ++d) {
    if (bounds[d].lo >= bounds[d].hi)
      throw std::invalid_argument("degenerate bounds");
    if (nodes_per_dim[d] < 3)
      throw std::invalid_argument("nodes_per_dim below 3");
    n *= nodes_per_dim[d];
  }
  NodeSet ns;
  ns.dim = dim;
  ns.bounds = bounds;
  ns.shape = nodes_per_dim;
  ns.coords.resize(n, dim);
  ns.face_mask.assign(n, 0);
  std::vector<int> idx(dim, 0);
  for (long k = 0; k < n; ++k) {
    std::uint32_t mask = 0;
    for (int d = 0; d < dim; ++d) {
      const int nd = nodes_per_dim[d];
      ns.coords(k, d) =
          bounds[d].lo + bounds[d].extent() * idx[d] / double(nd - 1);
      if (idx[d] == 0) mask |= 1u << (2 * d);
      if (idx[d] == nd - 1) mask |= 1u << (2 * d + 1);
    }
    ns.face_mask[k] = mask;
    for (int d = dim - 1; d >= 0; --d) {
      if (++idx[d] < nodes_per_dim[d]) break;
      idx[d] = 0;
    }
  }
  return ns;
}

PatchCover build_cover(const NodeSet& nodes,
                       const std::vector<int>& patches_per_dim,
                       double overlap, bool anisotropic_scaling) {
  const int dim = nodes.dim;
  if (static_cast<int>(patches_per_dim.size()) != dim)
    throw std::invalid_argument("patches_per_dim size mismatch");
  if (overlap <= 0) throw std::invalid_argument("overlap must be positive");

  PatchCover cover;
  cover.dim_scale = Eigen::VectorXd::Ones(dim);
  if (anisotropic_scaling) {
    double max_ext = 0;
    for (int d = 0; d < dim; ++d)
      max_ext = std::max(max_ext, nodes.bounds[d].extent());
    for (int d = 0; d < dim; ++d)
      cover.dim_scale[d] = nodes.bounds[d].extent() / max_ext;
  }

  // Cell-centered tensor placement; radius from the largest scaled
  // half-spacing so the union of balls covers the whole box.
  double half = 0;
  for (int d = 0; d < dim; ++d)
    half = std::max(half, nodes.bounds[d].extent() / cover.dim_scale[d] /
                              (2.0 * patches_per_dim[d]));
  const double radius = (1.0 + overlap) * half * std::sqrt(double(dim));

  long npatch = 1;
  for (int d = 0; d < dim; ++d) npatch *= patches_per_dim[d];
  cover.patches.resize(npatch);
  std::vector<int> idx(dim, 0);
  for (long j = 0; j < npatch; ++j) {
    Patch& p = cover.patches[j];
    p.center.resize(dim);
    for (int d = 0; d < dim; ++d)
      p.center[d] = nodes.bounds[d].lo + nodes.bounds[d].extent() *
                                             (idx[d] + 0.5) /
                                             double(patches_per_dim[d]);
    p.radius = radius;
    for (int d = dim - 1; d >= 0; --d) {
      if (++idx[d] < patches_per_dim[d]) break;
      idx[d] = 0;
    }
  }

  const long n = nodes.size();
  cover.node_to_patches.assign(n, {});
  for (long j = 0; j < npatch; ++j) {
    Patch& p = cover.patches[j];
    for (long k = 0; k < n; ++k) {
      double q = 0;
      for (int d = 0; d < dim; ++d) {
        double u = (nodes.coords(k, d) - p.center[d]) / cover.dim_scale[d];
        q += u * u;
      }
      if (q <= radius * radius) {
        p.members.push_back(int(k));
        cover.node_to_patches[k].push_back(int(j));
      }
    }
    if (static_cast<int>(p.members.size()) < dim + 1)
      throw std::runtime_error("patch with too few member nodes");
  }
  for (long k = 0; k < n; ++k)
    if (cover.node_to_patches[k].empty())
      throw std::runtime_error("node not covered by any patch");
  return cover;
}

} // namespace qcds
