#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <memory>

namespace qcds {

// One-shot factorization of a sparse matrix reused across many solves.
// Desk-scale systems (a few thousand unknowns) go through dense LAPACK LU,
// which beats sparse factorization at the fill-in levels the collocation
// matrices produce; larger systems fall back to SparseLU.
class FactorizedMatrix {
 public:
  enum class Backend { automatic, dense, sparse };

  explicit FactorizedMatrix(
      const Eigen::SparseMatrix<double, Eigen::RowMajor>& M,
      Backend backend = Backend::automatic);
  ~FactorizedMatrix();
  FactorizedMatrix(FactorizedMatrix&&) noexcept;
  FactorizedMatrix& operator=(FactorizedMatrix&&) noexcept;

  // Solves in place, one column per right-hand side.
  void solve_in_place(Eigen::MatrixXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace qcds
