#include "qcds/bdf2.hpp"

#include <memory>
#include <stdexcept>

namespace qcds {

TimeSlab bdf2_march(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A,
                    const Eigen::MatrixXd& terminal, const SourceFn& source,
                    double t_start, double t_end, int steps,
                    FactorizedMatrix::Backend backend) {
  if (t_end > t_start) throw std::invalid_argument("t_end above t_start");
  if (steps < 0) throw std::invalid_argument("negative step count");
  TimeSlab slab;
  slab.times.reserve(steps + 1);
  slab.values.reserve(steps + 1);
  slab.times.push_back(t_start);
  slab.values.push_back(terminal);
  if (steps == 0) return slab;

  const double dtau = (t_start - t_end) / steps;
  const long n = A.rows();
  Eigen::SparseMatrix<double, Eigen::RowMajor> I(n, n);
  I.setIdentity();

  auto level_time = [&](int l) { return t_start - l * dtau; };

  {
    Eigen::SparseMatrix<double, Eigen::RowMajor> M1 = I - dtau * A;
    FactorizedMatrix euler(M1, backend);
    Eigen::MatrixXd rhs = slab.values[0];
    if (source) rhs += dtau * source(level_time(1), 1);
    euler.solve_in_place(rhs);
    slab.times.push_back(level_time(1));
    slab.values.push_back(std::move(rhs));
  }
  if (steps == 1) return slab;

  Eigen::SparseMatrix<double, Eigen::RowMajor> M2 = 3.0 * I - 2.0 * dtau * A;
  FactorizedMatrix bdf2(M2, backend);
  for (int l = 2; l <= steps; ++l) {
    Eigen::MatrixXd rhs =
        4.0 * slab.values[l - 1] - slab.values[l - 2];
    if (source) rhs += 2.0 * dtau * source(level_time(l), l);
    bdf2.solve_in_place(rhs);
    slab.times.push_back(level_time(l));
    slab.values.push_back(std::move(rhs));
  }
  return slab;
}

} // namespace qcds
