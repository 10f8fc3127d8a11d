#include "qcds/mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qcds {

namespace {

struct Rng {
  std::uint64_t s;
  // The raw per-path seeds are arithmetic in the same increment the
  // generator walks by, which would make streams overlap; scrambling the
  // starting state through the finalizer de-correlates them.
  explicit Rng(std::uint64_t seed) : s(mix(mix(seed) ^ 0xD6E8FEB86659FD93ull)) {}
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  std::uint64_t next() {
    s += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { // in (0,1)
    return (double(next() >> 11) + 0.5) * 0x1.0p-53;
  }
  void normals4(double* out) {
    for (int k = 0; k < 4; k += 2) {
      const double u1 = uniform(), u2 = uniform();
      const double rad = std::sqrt(-2.0 * std::log(u1));
      out[k] = rad * std::cos(2.0 * M_PI * u2);
      out[k + 1] = rad * std::sin(2.0 * M_PI * u2);
    }
  }
};

struct PathOut {
  double w = 0, prot = 0, accr = 0, csum = 0;
  double mart = 0, dcons = 0, min_z = 0;
  bool defaulted = false;
};

struct Sim {
  const ModelConfig& cfg;
  double horizon;
  int steps;
  std::array<std::array<double, 4>, 4> L;
  std::vector<double> coupon_times;

  Sim(const ModelConfig& c, double hz, int st, bool with_coupons)
      : cfg(c), horizon(hz), steps(st), L(cholesky(c.corr)) {
    if (with_coupons)
      for (int i = 1; i <= c.contract.m; ++i) {
        double ti = c.contract.t + i * c.contract.coupon_interval;
        if (ti <= hz + 1e-9) coupon_times.push_back(ti);
      }
  }

  PathOut run(std::uint64_t seed, bool flip) const {
    Rng rng(seed);
    const double E = -std::log(rng.uniform());
    const double dt = (horizon - cfg.contract.t) / steps;
    const double sdt = std::sqrt(dt);

    double r = cfg.domestic.x0, rh = cfg.foreign.x0;
    double lz = std::log(cfg.fx.z0), y = cfg.hazard.y0;
    double disc = 0, dischat = 0, gamma_int = 0;
    bool defaulted = false;
    double tau = 0, disc_tau = 0, z_tau = 0;
    std::size_t next_cpn = 0;
    PathOut out;
    out.min_z = cfg.fx.z0;

    double xi[4], dw[4];
    for (int n = 0; n < steps; ++n) {
      const double t_old = cfg.contract.t + n * dt;
      const double t_new = t_old + dt;
      rng.normals4(xi);
      if (flip)
        for (double& v : xi) v = -v;
      for (int i = 0; i < 4; ++i) {
        dw[i] = 0;
        for (int k = 0; k <= i; ++k) dw[i] += L[i][k] * xi[k];
        dw[i] *= sdt;
      }
      const double rp = std::max(r, 0.0), rhp = std::max(rh, 0.0);
      const double lam = std::exp(y);
      const double r_new =
          r + cfg.domestic.a * (cfg.domestic.b - rp) * dt +
          cfg.domestic.sigma * std::sqrt(rp) * dw[F_R];
      const double rh_new =
          rh + cfg.foreign.a * (cfg.foreign.b - rhp) * dt +
          cfg.foreign.sigma * std::sqrt(rhp) * dw[F_RHAT];
      const double comp = defaulted ? 0.0 : lam * cfg.jumps.gamma_z;
      const double lz_new =
          lz +
          (rp - rhp - 0.5 * cfg.fx.sigma_z * cfg.fx.sigma_z - comp) * dt +
          cfg.fx.sigma_z * dw[F_Z];
      const double y_new = y + cfg.hazard.kappa * (cfg.hazard.theta - y) * dt +
                           cfg.hazard.sigma_y * dw[F_Y];
      const double rp_new = std::max(r_new, 0.0),
                   rhp_new = std::max(rh_new, 0.0);
      const double disc_new = disc + 0.5 * (rp + rp_new) * dt;
      const double dischat_new = dischat + 0.5 * (rhp + rhp_new) * dt;
      const double lam_new = std::exp(y_new);
      const double gamma_new = gamma_int + 0.5 * (lam + lam_new) * dt;

      double jump_lz = 0, jump_rh_factor = 1;
      if (!defaulted && gamma_new >= E) {
        const double th =
            std::clamp((E - gamma_int) / std::max(gamma_new - gamma_int,
                                                  1e-300),
                       0.0, 1.0);
        tau = t_old + th * dt;
        disc_tau = disc + th * (disc_new - disc);
        z_tau = std::exp(lz + th * (lz_new - lz));
        defaulted = true;
        jump_lz = std::log1p(cfg.jumps.gamma_z);
        jump_rh_factor = 1.0 + cfg.jumps.gamma_rhat;
        const double z_paid = z_tau * (1.0 + cfg.jumps.gamma_z);
        const double df = std::exp(-disc_tau);
        out.prot = df * z_paid;
        double t_beta = cfg.contract.t;
        if (cfg.contract.coupon_interval > 0)
          t_beta = cfg.contract.t +
                   std::floor((tau - cfg.contract.t) /
                              cfg.contract.coupon_interval) *
                       cfg.contract.coupon_interval;
        out.accr = df * (tau - t_beta) * z_paid;
        out.defaulted = true;
      }

      // Coupons falling inside this step (paid only on survival past them).
      while (next_cpn < coupon_times.size() &&
             coupon_times[next_cpn] <= t_new + 1e-12) {
        const double ti = coupon_times[next_cpn];
        if (!out.defaulted || tau > ti) {
          const double th = (ti - t_old) / dt;
          const double disc_i = disc + th * (disc_new - disc);
          const double lz_i = lz + th * (lz_new - lz);
          out.csum += std::exp(-disc_i + lz_i);
        }
        ++next_cpn;
      }

      r = r_new;
      rh = rh_new * jump_rh_factor;
      lz = lz_new + jump_lz;
      y = y_new;
      disc = disc_new;
      dischat = dischat_new;
      gamma_int = gamma_new;
      out.min_z = std::min(out.min_z, std::exp(lz));
      if (!std::isfinite(r) || !std::isfinite(lz) || !std::isfinite(y))
        throw std::runtime_error("non-finite Monte Carlo state, seed " +
                                 std::to_string(seed));
    }

    const double zT = std::exp(lz);
    if (!out.defaulted) out.w = std::exp(-disc) * zT;
    out.mart = std::exp(-(disc - dischat)) * zT / cfg.fx.z0;
    out.dcons = (out.defaulted ? 1.0 : 0.0) - (1.0 - std::exp(-gamma_int));
    return out;
  }
};

struct Acc {
  double w = 0, w2 = 0, p = 0, p2 = 0, u = 0, u2 = 0;
  double n = 0, n2 = 0, d = 0, d2 = 0, nd = 0;
  double c = 0, c2 = 0, a = 0, a2 = 0;
  double mart = 0, mart2 = 0, dc = 0, dc2 = 0;
  double min_z = 1e300;
  long defaults = 0;

  void add(const PathOut& o, const ModelConfig& cfg) {
    const double bond = o.w + cfg.contract.recovery * o.prot;
    const double num = (1.0 - cfg.contract.recovery) * o.prot;
    const double den = cfg.contract.coupon_interval * o.csum + o.accr;
    w += o.w;
    w2 += o.w * o.w;
    p += o.prot;
    p2 += o.prot * o.prot;
    u += bond;
    u2 += bond * bond;
    n += num;
    n2 += num * num;
    d += den;
    d2 += den * den;
    nd += num * den;
    const double cp = cfg.contract.coupon_interval * o.csum;
    c += cp;
    c2 += cp * cp;
    a += o.accr;
    a2 += o.accr * o.accr;
    mart += o.mart;
    mart2 += o.mart * o.mart;
    dc += o.dcons;
    dc2 += o.dcons * o.dcons;
    min_z = std::min(min_z, o.min_z);
    if (o.defaulted) ++defaults;
  }
  void merge(const Acc& b) {
    w += b.w; w2 += b.w2; p += b.p; p2 += b.p2; u += b.u; u2 += b.u2;
    n += b.n; n2 += b.n2; d += b.d; d2 += b.d2; nd += b.nd;
    c += b.c; c2 += b.c2; a += b.a; a2 += b.a2;
    mart += b.mart; mart2 += b.mart2; dc += b.dc; dc2 += b.dc2;
    min_z = std::min(min_z, b.min_z);
    defaults += b.defaults;
  }
};

MCEstimate estimate(double sum, double sum2, long paths, std::uint64_t seed) {
  MCEstimate e;
  e.paths = paths;
  e.seed = seed;
  e.mean = sum / paths;
  const double var = std::max(sum2 / paths - e.mean * e.mean, 0.0);
  e.se = std::sqrt(var / paths);
  return e;
}

Acc run_ensemble(const Sim& sim, long paths, std::uint64_t seed,
                 bool antithetic, const ModelConfig& cfg) {
  const long chunk = 4096;
  const long nchunks = (paths + chunk - 1) / chunk;
  std::vector<Acc> accs(nchunks);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long cix = 0; cix < nchunks; ++cix) {
    Acc& acc = accs[cix];
    const long lo = cix * chunk, hi = std::min(paths, lo + chunk);
    for (long pI = lo; pI < hi; ++pI) {
      const std::uint64_t ps = seed ^ (0x9E3779B97F4A7C15ull * (pI + 1));
      if (antithetic) {
        PathOut a = sim.run(ps, false), b = sim.run(ps, true);
        PathOut avg;
        avg.w = 0.5 * (a.w + b.w);
        avg.prot = 0.5 * (a.prot + b.prot);
        avg.accr = 0.5 * (a.accr + b.accr);
        avg.csum = 0.5 * (a.csum + b.csum);
        avg.mart = 0.5 * (a.mart + b.mart);
        avg.dcons = 0.5 * (a.dcons + b.dcons);
        avg.min_z = std::min(a.min_z, b.min_z);
        avg.defaulted = a.defaulted; // counted on the primary path
        acc.add(avg, cfg);
      } else {
        acc.add(sim.run(ps, false), cfg);
      }
    }
  }
  Acc total;
  for (const Acc& a : accs) total.merge(a); // fixed order: deterministic
  return total;
}

} // namespace

MCLegs mc_bond_and_legs(const ModelConfig& cfg, int steps, long paths,
                        std::uint64_t seed, bool antithetic) {
  if (paths < 1 || steps < 1) throw std::invalid_argument("paths/steps");
  Sim sim(cfg, cfg.contract.T, steps, true);
  Acc t = run_ensemble(sim, paths, seed, antithetic, cfg);
  MCLegs out;
  out.w = estimate(t.w, t.w2, paths, seed);
  out.protection = estimate(t.p, t.p2, paths, seed);
  out.bond = estimate(t.u, t.u2, paths, seed);
  out.coupon = estimate(t.c, t.c2, paths, seed);
  out.accrual = estimate(t.a, t.a2, paths, seed);
  out.default_fraction = double(t.defaults) / paths;

  const double nm = t.n / paths, dm = t.d / paths;
  const double vn = std::max(t.n2 / paths - nm * nm, 0.0);
  const double vd = std::max(t.d2 / paths - dm * dm, 0.0);
  const double cnd = t.nd / paths - nm * dm;
  MCEstimate s;
  s.paths = paths;
  s.seed = seed;
  s.mean = nm / dm * 1e4;
  const double var =
      (vn / (dm * dm) + nm * nm * vd / (dm * dm * dm * dm) -
       2.0 * nm * cnd / (dm * dm * dm)) /
      paths;
  s.se = std::sqrt(std::max(var, 0.0)) * 1e4;
  out.spread_bps = s;
  return out;
}

MCSummary simulate(const ModelConfig& cfg, double horizon, int steps,
                   long paths, std::uint64_t seed) {
  if (paths < 1 || steps < 1) throw std::invalid_argument("paths/steps");
  Sim sim(cfg, horizon, steps, false);
  Acc t = run_ensemble(sim, paths, seed, false, cfg);
  MCSummary out;
  out.martingale = estimate(t.mart, t.mart2, paths, seed);
  out.default_consistency = estimate(t.dc, t.dc2, paths, seed);
  out.default_fraction = double(t.defaults) / paths;
  out.min_z = t.min_z;
  out.defaulted_paths = t.defaults;
  out.jump_count = t.defaults;
  return out;
}

std::vector<MCEstimate> mc_convergence_report(const ModelConfig& cfg,
                                              const std::vector<long>& ladder,
                                              int steps, std::uint64_t seed) {
  std::vector<MCEstimate> out;
  out.reserve(ladder.size());
  for (long paths : ladder)
    out.push_back(mc_bond_and_legs(cfg, steps, paths, seed).spread_bps);
  return out;
}

} // namespace qcds
