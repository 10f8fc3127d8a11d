#include "qcds/operators.hpp"

#include <algorithm>
#include <cmath>

namespace qcds {

namespace {

// Expands an active-dimension point into the full 4-factor state.
struct StateMap {
  std::vector<int> active;
  std::array<double, 4> pinned;
  std::array<int, 4> pos; // factor -> active index, -1 if pinned

  explicit StateMap(const ModelConfig& cfg) : active(cfg.active) {
    pos.fill(-1);
    for (int f = 0; f < NUM_FACTORS; ++f) pinned[f] = cfg.pinned(f);
    for (size_t d = 0; d < active.size(); ++d) pos[active[d]] = int(d);
  }
  std::array<double, 4> state(const Eigen::VectorXd& x) const {
    std::array<double, 4> s = pinned;
    for (size_t d = 0; d < active.size(); ++d) s[active[d]] = x[d];
    return s;
  }
};

void add_u_terms(const ModelConfig& cfg, const StateMap& map,
                 const std::array<double, 4>& s, Eigen::MatrixXd& C,
                 Eigen::VectorXd& b, double& c0) {
  const double r = std::max(s[F_R], 0.0);
  const double rh = std::max(s[F_RHAT], 0.0);
  const double z = s[F_Z];
  const double y = s[F_Y];
  std::array<double, 4> vol{};
  vol[F_R] = cfg.domestic.sigma * std::sqrt(r);
  vol[F_RHAT] = cfg.foreign.sigma * std::sqrt(rh);
  vol[F_Z] = cfg.fx.sigma_z * z;
  vol[F_Y] = cfg.hazard.sigma_y;
  std::array<double, 4> drift{};
  drift[F_R] = cfg.domestic.a * (cfg.domestic.b - s[F_R]);
  drift[F_RHAT] = cfg.foreign.a * (cfg.foreign.b - s[F_RHAT]);
  drift[F_Z] = (s[F_R] - s[F_RHAT]) * z;
  drift[F_Y] = cfg.hazard.kappa * (cfg.hazard.theta - y);

  const auto& active = map.active;
  const int dim = static_cast<int>(active.size());
  for (int d = 0; d < dim; ++d) {
    const int fd = active[d];
    b[d] += drift[fd];
    for (int e = 0; e < dim; ++e) {
      const int fe = active[e];
      C(d, e) += 0.5 * cfg.corr(fd, fe) * vol[fd] * vol[fe];
    }
  }
  c0 += -s[F_R];
}

} // namespace

OperatorCoeffs u_coefficients(const ModelConfig& cfg) {
  StateMap map(cfg);
  OperatorCoeffs oc;
  oc.description = "post-default pricing operator (L - r)";
  oc.eval = [cfg, map](const Eigen::VectorXd& x, Eigen::MatrixXd& C,
                       Eigen::VectorXd& b, double& c0) {
    c0 = 0;
    add_u_terms(cfg, map, map.state(x), C, b, c0);
  };
  return oc;
}

OperatorCoeffs v_coefficients(const ModelConfig& cfg) {
  StateMap map(cfg);
  OperatorCoeffs oc;
  oc.description =
      "pre-default pricing operator (L - r - lambda - lambda*gamma_z*z d/dz)";
  oc.eval = [cfg, map](const Eigen::VectorXd& x, Eigen::MatrixXd& C,
                       Eigen::VectorXd& b, double& c0) {
    c0 = 0;
    std::array<double, 4> s = map.state(x);
    add_u_terms(cfg, map, s, C, b, c0);
    const double lambda = hazard_of(s[F_Y]);
    c0 -= lambda;
    if (map.pos[F_Z] >= 0)
      b[map.pos[F_Z]] -= lambda * cfg.jumps.gamma_z * s[F_Z];
  };
  return oc;
}

namespace {

Eigen::SparseMatrix<double, Eigen::RowMajor> identity_interp(int n) {
  Eigen::SparseMatrix<double, Eigen::RowMajor> I(n, n);
  I.setIdentity();
  return I;
}

} // namespace

PricingOperator build_u_operator(const ModelConfig& cfg, const PumSpace& space,
                                 bool parallel) {
  PricingOperator op;
  op.base = space.assemble_operator(
      u_coefficients(cfg), BoundaryPolicy::vanishing_second_derivative,
      parallel);
  op.shift_interp = identity_interp(space.size());
  op.shift_is_identity = true;
  return op;
}

PricingOperator build_v_operator(const ModelConfig& cfg, const PumSpace& space,
                                 bool parallel) {
  PricingOperator op;
  op.base = space.assemble_operator(
      v_coefficients(cfg), BoundaryPolicy::vanishing_second_derivative,
      parallel);
  StateMap map(cfg);
  const bool jump_rhat =
      cfg.jumps.gamma_rhat != 0.0 && map.pos[F_RHAT] >= 0;
  const bool jump_z = cfg.jumps.gamma_z != 0.0 && map.pos[F_Z] >= 0;
  if (!jump_rhat && !jump_z) {
    op.shift_interp = identity_interp(space.size());
    op.shift_is_identity = true;
    return op;
  }
  const NodeSet& nodes = space.nodes();
  Eigen::MatrixXd pts = nodes.coords;
  auto clampdim = [&](int d, double v) {
    return std::clamp(v, nodes.bounds[d].lo, nodes.bounds[d].hi);
  };
  for (int k = 0; k < nodes.size(); ++k) {
    if (jump_rhat) {
      const int d = map.pos[F_RHAT];
      pts(k, d) = clampdim(d, pts(k, d) * (1.0 + cfg.jumps.gamma_rhat));
    }
    if (jump_z) {
      const int d = map.pos[F_Z];
      pts(k, d) = clampdim(d, pts(k, d) * (1.0 + cfg.jumps.gamma_z));
    }
  }
  op.shift_interp = space.evaluation_matrix(pts);
  op.shift_is_identity = false;
  return op;
}

} // namespace qcds
