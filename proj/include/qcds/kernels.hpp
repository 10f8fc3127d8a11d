#pragma once

#include <cmath>

namespace qcds {

struct RadialDerivs {
  double value = 0;
  double d1 = 0; // d/dr
  double d2 = 0; // d2/dr2
};

// Compactly supported C2 Wendland generator (5r+1)(1-r)^5 on [0,1].
inline RadialDerivs wendland_c2(double r) {
  if (r >= 1.0) return {};
  const double s = 1.0 - r;
  const double s3 = s * s * s;
  RadialDerivs out;
  out.value = (5.0 * r + 1.0) * s3 * s * s;
  out.d1 = -30.0 * r * s3 * s;
  out.d2 = -30.0 * s3 * (1.0 - 5.0 * r);
  return out;
}

// d1/r with the removable singularity at r = 0 filled in.
inline double wendland_c2_d1_over_r(double r) {
  if (r >= 1.0) return 0.0;
  const double s = 1.0 - r;
  return -30.0 * s * s * s * s;
}

struct GaussianDerivs {
  double value = 0;
  double c1 = 0; // d(phi)/d(u_d) = c1 * u_d for scaled displacement u
  double c2 = 0; // d2(phi)/d(u_d)d(u_e) = c2 * u_d * u_e + c1 * delta_de
};

// exp(-eps^2 * r2) with factors for first/second partials in the scaled
// displacement u (r2 = |u|^2).
inline GaussianDerivs gaussian_rbf(double eps, double r2) {
  GaussianDerivs g;
  const double e2 = eps * eps;
  g.value = std::exp(-e2 * r2);
  g.c1 = -2.0 * e2 * g.value;
  g.c2 = 4.0 * e2 * e2 * g.value;
  return g;
}

} // namespace qcds
