#pragma once

#include "qcds/grid.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace qcds {

struct SpatialOperator {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  std::string description;
  int cond_warnings = 0;
};

// Coefficients of sum_{d,e} C(d,e) d2/dx_d dx_e + sum_d b(d) d/dx_d + c0,
// with C the full symmetric matrix (cross-term coefficients split evenly).
struct OperatorCoeffs {
  std::string description;
  std::function<void(const Eigen::VectorXd& x, Eigen::MatrixXd& C,
                     Eigen::VectorXd& b, double& c0)>
      eval;
};

enum class BoundaryPolicy { none, vanishing_second_derivative };

struct ShepardEntry {
  double w = 0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Wendland-generated Shepard data for every patch covering x.
std::vector<std::pair<int, ShepardEntry>> shepard_weights(
    const Eigen::VectorXd& x, const PatchCover& cover);

class PumSpace {
 public:
  PumSpace(NodeSet nodes, PatchCover cover, double shape_scale);

  const NodeSet& nodes() const { return nodes_; }
  const PatchCover& cover() const { return cover_; }
  int size() const { return nodes_.size(); }
  double epsilon() const { return eps_; }
  int cond_warnings() const { return cond_warnings_; }

  SpatialOperator assemble_operator(const OperatorCoeffs& coeffs,
                                    BoundaryPolicy policy,
                                    bool parallel = true) const;

  // Rows evaluate a nodal field at the given points (one row per point).
  Eigen::SparseMatrix<double, Eigen::RowMajor> evaluation_matrix(
      const Eigen::MatrixXd& points) const;

 private:
  struct NodeCoeffs; // per-node surgically adjusted coefficients

  void local_block(int patch, const std::vector<NodeCoeffs>& pc,
                   Eigen::MatrixXd& out) const;

  NodeSet nodes_;
  PatchCover cover_;
  double eps_ = 1.0;
  int cond_warnings_ = 0;
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> factors_;
  // Shepard data cached per (node, covering patch), parallel to
  // cover_.node_to_patches.
  std::vector<std::vector<ShepardEntry>> shepard_;
};

} // namespace qcds
