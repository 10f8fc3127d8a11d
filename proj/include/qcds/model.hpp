#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcds {

// Factor indexing used everywhere: correlation matrix, state vectors, domains.
enum Factor : int { F_R = 0, F_RHAT = 1, F_Z = 2, F_Y = 3 };
constexpr int NUM_FACTORS = 4;

struct CIRParams {
  double x0 = 0.0;     // initial rate (1/year)
  double a = 0.0;      // mean-reversion rate (1/year)
  double b = 0.0;      // mean-reversion level (1/year)
  double sigma = 0.0;  // volatility (1/sqrt(year))
};

struct OUParams {
  double y0 = 0.0;      // initial log-hazard
  double kappa = 0.0;   // mean-reversion rate (1/year)
  double theta = 0.0;   // mean-reversion level
  double sigma_y = 0.0; // volatility (1/sqrt(year))
};

struct FXParams {
  double z0 = 1.0;      // initial FX rate (domestic per foreign)
  double sigma_z = 0.0; // volatility (1/sqrt(year))
};

struct JumpParams {
  double gamma_z = 0.0;    // FX devaluation fraction at default
  double gamma_rhat = 0.0; // foreign-rate jump fraction at default
};

struct CorrelationMatrix {
  // Symmetric 4x4, unit diagonal, factor order (r, rhat, z, y).
  std::array<std::array<double, 4>, 4> rho{{{1, 0, 0, 0},
                                            {0, 1, 0, 0},
                                            {0, 0, 1, 0},
                                            {0, 0, 0, 1}}};
  double operator()(int i, int j) const { return rho[i][j]; }
  void set(int i, int j, double v) { rho[i][j] = rho[j][i] = v; }
};

struct ContractTerms {
  double t = 0.0;                // valuation time (years)
  double T = 5.0;                // maturity (years)
  double recovery = 0.45;        // fraction in [0,1]
  double coupon_interval = 0.25; // dt between coupons (years)
  int m = 20;                    // number of coupons
};

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
  double extent() const { return hi - lo; }
};

struct NumericsConfig {
  // Per-factor knobs; the active-factor list of ModelConfig selects which
  // entries participate. The reduced (r, y) reference model uses its own
  // resolution so it can be run finer than the 4-factor grid at equal cost.
  std::array<int, 4> nodes_per_dim{13, 13, 13, 13};
  std::array<int, 4> patches_per_dim{6, 6, 6, 6};
  std::array<int, 2> reduced_nodes_per_dim{21, 21};   // (r, y)
  // Patch counts keep local systems small (<= ~3 nodes per patch per dim);
  // larger local Gaussian systems at flat shape develop spurious eigenvalues
  // with positive real part and destabilize the backward march.
  std::array<int, 2> reduced_patches_per_dim{6, 6};   // (r, y)
  double overlap = 0.3;
  // epsilon = shape_scale / mean node spacing. The 4-factor operator is
  // advection-dominated in the FX dimension; flat bases (< ~0.35) develop
  // spurious eigenvalues with positive real part there and the backward
  // march blows up, so the full-model default is peaked. The 2-factor
  // reference is diffusion-dominated and much more accurate when flat.
  double shape_scale = 0.5;
  double reduced_shape_scale = 0.1; // (r, y) reference model
  // Off-node evaluation (the spot row) uses its own flat basis: peaked
  // bases are exact at the nodes but carry percent-level error between
  // them, while flat ones interpolate smooth nodal data to ~1e-4.
  double eval_shape_scale = 0.1;
  int time_steps = 100;
  double quadrature_step_h = 14.0 / 365.0; // years
  std::array<Bounds, 4> bounds{Bounds{0, 4}, Bounds{0, 4}, Bounds{0, 4},
                               Bounds{-6, -2}};
  bool anisotropic_scaling = true;
  bool coupon_integral = false; // A_i as per-period integral instead of w(t_i)
};

struct ModelConfig {
  CIRParams domestic;
  CIRParams foreign;
  OUParams hazard;
  FXParams fx;
  JumpParams jumps;
  CorrelationMatrix corr;
  ContractTerms contract;
  NumericsConfig numerics;
  std::vector<int> active{F_R, F_RHAT, F_Z, F_Y}; // sorted factor subset

  bool is_active(int f) const {
    for (int a : active)
      if (a == f) return true;
    return false;
  }
  // Initial/pinned value of a factor (used for inactive dimensions).
  double pinned(int f) const {
    switch (f) {
      case F_R: return domestic.x0;
      case F_RHAT: return foreign.x0;
      case F_Z: return fx.z0;
      case F_Y: return hazard.y0;
    }
    throw std::out_of_range("factor index");
  }
};

// Full parameter set used throughout the experiments (5y contract, quarterly
// coupons, 45% recovery, zero correlations, no jumps).
ModelConfig default_config();

// Reduced 2-factor (r, y) domestic reference derived from a full config:
// z pinned at 1, no jumps, foreign factors dropped, only rho_ry retained.
ModelConfig domestic_reference_config(const ModelConfig& cfg);

std::vector<std::string> validate(const ModelConfig& cfg);
std::vector<std::string> warnings(const ModelConfig& cfg); // e.g. Feller

inline double hazard_of(double y) { return std::exp(y); }

// Lower-triangular factor of the correlation matrix; tolerates semidefinite
// pivots down to -1e-12, throws std::domain_error("not PSD") below that.
std::array<std::array<double, 4>, 4> cholesky(const CorrelationMatrix& corr);

} // namespace qcds
