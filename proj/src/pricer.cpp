#include "qcds/pricer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace qcds {

Geometry build_geometry(const ModelConfig& cfg) {
  std::vector<std::string> bad = validate(cfg);
  if (!bad.empty()) throw std::invalid_argument("invalid config: " + bad[0]);
  const NumericsConfig& num = cfg.numerics;
  std::vector<Bounds> bounds;
  std::vector<int> shape, patches;
  for (int f : cfg.active) {
    bounds.push_back(num.bounds[f]);
    shape.push_back(num.nodes_per_dim[f]);
    patches.push_back(num.patches_per_dim[f]);
  }
  Geometry g;
  g.cfg = cfg;
  NodeSet nodes = generate_nodes(bounds, shape);
  PatchCover cover =
      build_cover(nodes, patches, num.overlap, num.anisotropic_scaling);
  g.space = std::make_shared<PumSpace>(NodeSet(nodes), PatchCover(cover),
                                       num.shape_scale);

  const NodeSet& ns = g.space->nodes();
  const int n = ns.size();
  Eigen::MatrixXd spot(1, ns.dim);
  int zcol = -1, ycol = -1;
  for (size_t d = 0; d < cfg.active.size(); ++d) {
    spot(0, d) = cfg.pinned(cfg.active[d]);
    if (cfg.active[d] == F_Z) zcol = int(d);
    if (cfg.active[d] == F_Y) ycol = int(d);
  }
  if (num.eval_shape_scale == num.shape_scale) {
    g.spot_eval = g.space->evaluation_matrix(spot);
  } else {
    PumSpace eval_space(std::move(nodes), std::move(cover),
                        num.eval_shape_scale);
    g.spot_eval = eval_space.evaluation_matrix(spot);
  }
  if (zcol >= 0)
    g.z_field = ns.coords.col(zcol);
  else
    g.z_field = Eigen::VectorXd::Constant(n, cfg.fx.z0);
  if (ycol >= 0)
    g.lambda_field = ns.coords.col(ycol).array().exp();
  else
    g.lambda_field = Eigen::VectorXd::Constant(n, hazard_of(cfg.hazard.y0));
  return g;
}

double Curve::at(double t) const {
  if (tau.empty()) throw std::runtime_error("empty curve");
  if (t <= tau.front()) return val.front();
  if (t >= tau.back()) return val.back();
  auto it = std::upper_bound(tau.begin(), tau.end(), t);
  size_t i = it - tau.begin();
  double f = (t - tau[i - 1]) / (tau[i] - tau[i - 1]);
  return val[i - 1] + f * (val[i] - val[i - 1]);
}

WgCurves wg_curves(const Geometry& geom, const PricingOperator& vop) {
  const ModelConfig& cfg = geom.cfg;
  const double span = cfg.contract.T - cfg.contract.t;
  Eigen::MatrixXd terminal(geom.space->size(), 2);
  terminal.col(0) = geom.z_field;
  terminal.col(1) = (1.0 + cfg.jumps.gamma_z) *
                    geom.z_field.cwiseProduct(geom.lambda_field);
  TimeSlab slab = bdf2_march(vop.base.matrix, terminal, nullptr,
                             cfg.contract.T, cfg.contract.t,
                             cfg.numerics.time_steps);
  WgCurves out;
  const int levels = static_cast<int>(slab.times.size());
  out.w.tau.resize(levels);
  out.w.val.resize(levels);
  out.g.tau.resize(levels);
  out.g.val.resize(levels);
  for (int l = 0; l < levels; ++l) {
    const double duration = cfg.contract.T - slab.times[l];
    Eigen::MatrixXd spot = geom.spot_eval * slab.values[l];
    out.w.tau[l] = duration;
    out.w.val[l] = spot(0, 0);
    out.g.tau[l] = duration;
    out.g.val[l] = spot(0, 1);
  }
  (void)span;
  return out;
}

namespace {

PriceField march_single(const Geometry& geom, const PricingOperator& vop,
                        double nu, const Eigen::VectorXd& terminal) {
  const ModelConfig& cfg = geom.cfg;
  if (nu < cfg.contract.t || nu > cfg.contract.T + 1e-12)
    throw std::invalid_argument("maturity outside [t, T]");
  const double span = cfg.contract.T - cfg.contract.t;
  const int steps = static_cast<int>(
      std::lround(cfg.numerics.time_steps * (nu - cfg.contract.t) / span));
  TimeSlab slab = bdf2_march(vop.base.matrix, terminal, nullptr, nu,
                             cfg.contract.t, steps);
  PriceField out;
  out.field = slab.at_end();
  out.spot = (geom.spot_eval * out.field)(0, 0);
  return out;
}

} // namespace

PriceField price_w(const Geometry& geom, const PricingOperator& vop,
                   double nu) {
  return march_single(geom, vop, nu, geom.z_field);
}

PriceField price_g(const Geometry& geom, const PricingOperator& vop,
                   double nu) {
  const Eigen::VectorXd terminal =
      (1.0 + geom.cfg.jumps.gamma_z) *
      geom.z_field.cwiseProduct(geom.lambda_field);
  return march_single(geom, vop, nu, terminal);
}

namespace {

// Right-endpoint Riemann sum of curve over (lo, hi] with step h; the last
// sub-interval is shortened when h does not divide the period.
void accumulate_mass(const Curve& g, double t0, double lo, double hi, double h,
                     double& mass, double& time_weighted) {
  double nu = lo;
  while (nu < hi - 1e-12) {
    const double step = std::min(h, hi - nu);
    nu += step;
    const double gv = g.at(nu - t0);
    mass += gv * step;
    time_weighted += nu * gv * step;
  }
}

} // namespace

double price_bond(const Geometry& geom, const PricingOperator& vop) {
  const ModelConfig& cfg = geom.cfg;
  WgCurves curves = wg_curves(geom, vop);
  double mass = 0, tw = 0;
  accumulate_mass(curves.g, cfg.contract.t, cfg.contract.t, cfg.contract.T,
                  cfg.numerics.quadrature_step_h, mass, tw);
  return curves.w.at(cfg.contract.T - cfg.contract.t) +
         cfg.contract.recovery * mass;
}

LegBreakdown cds_legs(const Geometry& geom, const PricingOperator& vop) {
  const ModelConfig& cfg = geom.cfg;
  const ContractTerms& ct = cfg.contract;
  WgCurves curves = wg_curves(geom, vop);
  LegBreakdown legs;
  legs.dt = ct.coupon_interval;
  legs.recovery = ct.recovery;
  legs.integral_convention = cfg.numerics.coupon_integral;
  const double h = cfg.numerics.quadrature_step_h;
  for (int i = 1; i <= ct.m; ++i) {
    const double ti = ct.t + i * ct.coupon_interval;
    const double tprev = ct.t + (i - 1) * ct.coupon_interval;
    legs.t_prev.push_back(tprev);
    legs.A.push_back(curves.w.at(ti - ct.t));
    double wmass = 0, wtw = 0;
    accumulate_mass(curves.w, ct.t, tprev, ti, h, wmass, wtw);
    legs.A_integral.push_back(wmass);
    double mass = 0, tw = 0;
    accumulate_mass(curves.g, ct.t, tprev, ti, h, mass, tw);
    legs.B.push_back(mass);
    legs.C.push_back(tw);
  }
  legs.s_bps = par_spread(legs);
  const double s = legs.s_bps / 1e4;
  double sumA = 0, sumB = 0, accr = 0;
  for (int i = 0; i < ct.m; ++i) {
    sumA += legs.integral_convention ? legs.A_integral[i] : legs.A[i];
    sumB += legs.B[i];
    accr += legs.C[i] - legs.t_prev[i] * legs.B[i];
  }
  legs.L_c = s * legs.dt * sumA;
  legs.L_p = (1.0 - legs.recovery) * sumB;
  legs.L_a = s * accr;
  return legs;
}

double par_spread(const LegBreakdown& legs) {
  double num = 0, den = 0;
  const size_t m = legs.B.size();
  for (size_t i = 0; i < m; ++i) {
    const double Ai =
        legs.integral_convention ? legs.A_integral[i] : legs.A[i];
    num += legs.B[i];
    den += legs.dt * Ai + legs.C[i] - legs.t_prev[i] * legs.B[i];
  }
  num *= 1.0 - legs.recovery;
  if (den <= 0) throw std::runtime_error("degenerate contract");
  return num / den * 1e4;
}

double domestic_reference(const ModelConfig& cfg) {
  ModelConfig ref = domestic_reference_config(cfg);
  Geometry geom = build_geometry(ref);
  PricingOperator vop = build_v_operator(ref, *geom.space);
  return cds_legs(geom, vop).s_bps;
}

SpreadResult basis_spread(const ModelConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  SpreadResult out;
  Geometry geom = build_geometry(cfg);
  PricingOperator vop = build_v_operator(cfg, *geom.space);
  out.s_foreign = cds_legs(geom, vop).s_bps;
  out.s_domestic = domestic_reference(cfg);
  out.basis = out.s_foreign - out.s_domestic;
  out.diag.marches = 2;
  out.diag.cond_warnings = geom.space->cond_warnings();
  out.diag.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

} // namespace qcds
