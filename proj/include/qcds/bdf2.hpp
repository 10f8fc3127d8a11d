#pragma once

#include "qcds/linalg.hpp"

#include <functional>
#include <vector>

namespace qcds {

// Nodal solution values per backward time level; columns of each value block
// are independent terminal conditions marched together.
struct TimeSlab {
  std::vector<double> times;           // strictly decreasing, [0] = t_start
  std::vector<Eigen::MatrixXd> values; // values[0] = terminal data

  const Eigen::MatrixXd& at_end() const { return values.back(); }
};

// Source evaluated at the new (earlier) time level during the march.
using SourceFn = std::function<Eigen::MatrixXd(double t_new, int level)>;

// Backward march of dU/dt + A U + src = 0 from t_start down to t_end:
// one implicit-Euler startup step, then BDF-2, reusing one factorization per
// scheme. steps = 0 returns the terminal only.
TimeSlab bdf2_march(
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& A,
    const Eigen::MatrixXd& terminal, const SourceFn& source, double t_start,
    double t_end, int steps,
    FactorizedMatrix::Backend backend = FactorizedMatrix::Backend::automatic);

} // namespace qcds
