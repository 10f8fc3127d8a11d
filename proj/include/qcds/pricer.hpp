#pragma once

#include "qcds/bdf2.hpp"
#include "qcds/operators.hpp"

#include <memory>

namespace qcds {

struct Geometry {
  ModelConfig cfg;
  std::shared_ptr<PumSpace> space;
  Eigen::SparseMatrix<double, Eigen::RowMajor> spot_eval; // 1 x nodes
  Eigen::VectorXd z_field;     // nodal FX value (pinned if z inactive)
  Eigen::VectorXd lambda_field; // nodal hazard e^y (pinned if y inactive)
};

Geometry build_geometry(const ModelConfig& cfg);

// Spot values by time-to-maturity with linear interpolation.
struct Curve {
  std::vector<double> tau;
  std::vector<double> val;
  double at(double t) const;
};

struct PriceField {
  Eigen::VectorXd field;
  double spot = 0;
};

// The operators are autonomous, so one backward march from the horizon
// yields the spot survival-value curve w_t(.) and default-density curve
// g_t(.) for every maturity at once; both share the factorized system.
struct WgCurves {
  Curve w; // w_t(t + tau): discounted FX on survival
  Curve g; // g_t(t + tau): discounted post-jump FX default density
};
WgCurves wg_curves(const Geometry& geom, const PricingOperator& vop);

// Independent per-maturity solves (cross-checked against the curves).
PriceField price_w(const Geometry& geom, const PricingOperator& vop,
                   double nu);
PriceField price_g(const Geometry& geom, const PricingOperator& vop,
                   double nu);

// Risky zero-coupon bond: survival leg plus recovery-weighted default mass.
double price_bond(const Geometry& geom, const PricingOperator& vop);

struct LegBreakdown {
  std::vector<double> A;          // coupon survival weight w(t_i)
  std::vector<double> A_integral; // per-period integral of w (alt convention)
  std::vector<double> B;          // protection mass per period
  std::vector<double> C;          // time-weighted protection mass
  std::vector<double> t_prev;     // preceding payment date per period
  double dt = 0;
  double recovery = 0;
  bool integral_convention = false;
  double L_c = 0, L_p = 0, L_a = 0; // leg values at the par spread
  double s_bps = 0;
};

LegBreakdown cds_legs(const Geometry& geom, const PricingOperator& vop);
double par_spread(const LegBreakdown& legs); // bps

struct Diagnostics {
  int marches = 0;
  int cond_warnings = 0;
  double seconds = 0;
};

struct SpreadResult {
  double s_foreign = 0;  // bps
  double s_domestic = 0; // bps
  double basis = 0;      // bps, s_foreign - s_domestic
  Diagnostics diag;
};

double domestic_reference(const ModelConfig& cfg); // s_d in bps
SpreadResult basis_spread(const ModelConfig& cfg);

} // namespace qcds
