#include "qcds/linalg.hpp"

#include <Eigen/SparseLU>

#include <lapacke.h>

#include <stdexcept>
#include <vector>

namespace qcds {

struct FactorizedMatrix::Impl {
  bool dense = false;
  Eigen::MatrixXd lu; // column-major LAPACK factors
  std::vector<lapack_int> ipiv;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> slu;
};

FactorizedMatrix::FactorizedMatrix(
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& M, Backend backend)
    : impl_(std::make_unique<Impl>()) {
  const lapack_int n = static_cast<lapack_int>(M.rows());
  if (M.rows() != M.cols()) throw std::invalid_argument("matrix not square");
  bool dense = backend == Backend::dense ||
               (backend == Backend::automatic && n <= 9000);
  impl_->dense = dense;
  if (dense) {
    impl_->lu = Eigen::MatrixXd(M);
    impl_->ipiv.resize(n);
    lapack_int info = LAPACKE_dgetrf(LAPACK_COL_MAJOR, n, n,
                                     impl_->lu.data(), n, impl_->ipiv.data());
    if (info != 0)
      throw std::runtime_error("dense LU factorization failed (dgetrf info " +
                               std::to_string(info) + ")");
  } else {
    Eigen::SparseMatrix<double> col(M);
    impl_->slu.compute(col);
    if (impl_->slu.info() != Eigen::Success)
      throw std::runtime_error("sparse LU factorization failed");
  }
}

FactorizedMatrix::~FactorizedMatrix() = default;
FactorizedMatrix::FactorizedMatrix(FactorizedMatrix&&) noexcept = default;
FactorizedMatrix& FactorizedMatrix::operator=(FactorizedMatrix&&) noexcept =
    default;

void FactorizedMatrix::solve_in_place(Eigen::MatrixXd& rhs) const {
  if (impl_->dense) {
    const lapack_int n = static_cast<lapack_int>(impl_->lu.rows());
    lapack_int info = LAPACKE_dgetrs(
        LAPACK_COL_MAJOR, 'N', n, static_cast<lapack_int>(rhs.cols()),
        impl_->lu.data(), n, impl_->ipiv.data(), rhs.data(), n);
    if (info != 0) throw std::runtime_error("dense LU solve failed");
  } else {
    rhs = impl_->slu.solve(rhs).eval();
    if (impl_->slu.info() != Eigen::Success)
      throw std::runtime_error("sparse LU solve failed");
  }
  if (!rhs.allFinite())
    throw std::runtime_error("non-finite values in linear solve");
}

Eigen::MatrixXd FactorizedMatrix::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd out = rhs;
  solve_in_place(out);
  return out;
}

} // namespace qcds
