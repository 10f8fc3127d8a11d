#include "qcds/model.hpp"

#include <Eigen/Dense>

#include <sstream>

namespace qcds {

ModelConfig default_config() {
  ModelConfig c;
  c.domestic = {0.02, 0.08, 0.1, 0.01};
  c.foreign = {0.03, 0.08, 0.1, 0.08};
  c.hazard = {-4.089, 0.0001, -210.0, 0.4};
  c.fx = {1.15, 0.1};
  c.jumps = {0.0, 0.0};
  c.contract = {0.0, 5.0, 0.45, 0.25, 20};
  return c;
}

ModelConfig domestic_reference_config(const ModelConfig& cfg) {
  ModelConfig d = cfg;
  d.active = {F_R, F_Y};
  d.fx.z0 = 1.0;
  d.jumps = {0.0, 0.0};
  CorrelationMatrix c;
  c.set(F_R, F_Y, cfg.corr(F_R, F_Y));
  d.corr = c;
  for (int k = 0; k < 2; ++k) {
    int f = (k == 0) ? F_R : F_Y;
    d.numerics.nodes_per_dim[f] = cfg.numerics.reduced_nodes_per_dim[k];
    d.numerics.patches_per_dim[f] = cfg.numerics.reduced_patches_per_dim[k];
  }
  d.numerics.shape_scale = cfg.numerics.reduced_shape_scale;
  return d;
}

namespace {
void check(std::vector<std::string>& out, bool ok, const std::string& msg) {
  if (!ok) out.push_back(msg);
}
std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}
} // namespace

std::vector<std::string> validate(const ModelConfig& cfg) {
  std::vector<std::string> v;
  auto cir = [&](const CIRParams& p, const std::string& path) {
    check(v, p.x0 >= 0, path + ".x0 negative");
    check(v, p.a > 0, path + ".a not positive");
    check(v, p.b >= 0, path + ".b negative");
    check(v, p.sigma >= 0, path + ".sigma negative");
  };
  cir(cfg.domestic, "domestic");
  cir(cfg.foreign, "foreign");
  check(v, cfg.hazard.kappa >= 0, "hazard.kappa negative");
  check(v, cfg.hazard.sigma_y >= 0, "hazard.sigma_y negative");
  check(v, cfg.fx.z0 > 0, "fx.z0 not positive");
  check(v, cfg.fx.sigma_z >= 0, "fx.sigma_z negative");
  check(v, cfg.jumps.gamma_z >= -1, "jumps.gamma_z below -1");
  check(v, cfg.jumps.gamma_rhat >= -1, "jumps.gamma_rhat below -1");

  bool sym = true, unit = true, range = true;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(cfg.corr(i, i) - 1.0) > 1e-12) unit = false;
    for (int j = 0; j < 4; ++j) {
      if (std::abs(cfg.corr(i, j) - cfg.corr(j, i)) > 1e-12) sym = false;
      if (std::abs(cfg.corr(i, j)) > 1.0 + 1e-12) range = false;
    }
  }
  check(v, unit, "corr diagonal not unit");
  check(v, sym, "corr not symmetric");
  check(v, range, "corr entry outside [-1,1]");
  if (sym && unit && range) {
    Eigen::Matrix4d m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = cfg.corr(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
    check(v, es.eigenvalues().minCoeff() >= -1e-10,
          "corr not positive semidefinite");
  }

  const ContractTerms& ct = cfg.contract;
  check(v, ct.t >= 0 && ct.t < ct.T, "contract.t not in [0, T)");
  check(v, ct.recovery >= 0 && ct.recovery <= 1,
        "contract.recovery outside [0,1]");
  check(v, ct.m >= 1, "contract.m not positive");
  check(v, std::abs(ct.m * ct.coupon_interval - (ct.T - ct.t)) < 1e-9,
        "contract.m * coupon_interval != T - t");

  const NumericsConfig& n = cfg.numerics;
  check(v, !cfg.active.empty() && cfg.active.size() <= 4, "active set empty");
  for (int f : cfg.active) {
    check(v, f >= 0 && f < 4, "active factor index out of range");
    if (f < 0 || f >= 4) continue;
    check(v, n.nodes_per_dim[f] >= 3,
          "numerics.nodes_per_dim[" + num(f) + "] below 3");
    check(v, n.patches_per_dim[f] >= 1,
          "numerics.patches_per_dim[" + num(f) + "] below 1");
    check(v, n.bounds[f].lo < n.bounds[f].hi,
          "numerics.bounds[" + num(f) + "] degenerate");
  }
  check(v, n.overlap > 0, "numerics.overlap not positive");
  check(v, n.shape_scale > 0, "numerics.shape_scale not positive");
  check(v, n.reduced_shape_scale > 0,
        "numerics.reduced_shape_scale not positive");
  check(v, n.eval_shape_scale > 0, "numerics.eval_shape_scale not positive");
  check(v, n.time_steps >= 2, "numerics.time_steps below 2");
  check(v, n.quadrature_step_h > 0, "numerics.quadrature_step_h not positive");
  return v;
}

std::vector<std::string> warnings(const ModelConfig& cfg) {
  std::vector<std::string> w;
  auto feller = [&](const CIRParams& p, const std::string& path) {
    if (2 * p.a * p.b < p.sigma * p.sigma)
      w.push_back(path + ": Feller condition 2ab >= sigma^2 violated");
  };
  feller(cfg.domestic, "domestic");
  feller(cfg.foreign, "foreign");
  return w;
}

std::array<std::array<double, 4>, 4> cholesky(const CorrelationMatrix& corr) {
  std::array<std::array<double, 4>, 4> L{};
  const double tol = 1e-12;
  for (int j = 0; j < 4; ++j) {
    double d = corr(j, j);
    for (int k = 0; k < j; ++k) d -= L[j][k] * L[j][k];
    if (d < -tol) throw std::domain_error("not PSD");
    if (d <= tol) {
      L[j][j] = 0.0;
      continue;
    }
    L[j][j] = std::sqrt(d);
    for (int i = j + 1; i < 4; ++i) {
      double s = corr(i, j);
      for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      L[i][j] = s / L[j][j];
    }
  }
  // A semidefinite column with zero pivot must leave residuals small;
  // verify the factor actually reproduces the input.
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0;
      for (int k = 0; k < 4; ++k) s += L[i][k] * L[j][k];
      if (std::abs(s - corr(i, j)) > 1e-9) throw std::domain_error("not PSD");
    }
  return L;
}

} // namespace qcds
