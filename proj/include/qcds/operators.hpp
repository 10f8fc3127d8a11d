#pragma once

#include "qcds/model.hpp"
#include "qcds/pum.hpp"

namespace qcds {

struct PricingOperator {
  SpatialOperator base;
  Eigen::SparseMatrix<double, Eigen::RowMajor> shift_interp;
  bool shift_is_identity = true;
};

// Diffusion/drift/killing coefficients of the pre- and post-default pricing
// equations over the active factors of the config; inactive factors are
// pinned at their initial values inside the coefficients.

// Post-default equation: L - r.
PricingOperator build_u_operator(const ModelConfig& cfg, const PumSpace& space,
                                 bool parallel = true);

// Pre-default equation: L - (r + lambda) - lambda*gamma_z*z d/dz, with the
// jump interpolation matrix evaluating nodal fields at the post-default state
// (rhat and z scaled by their jump factors, clamped to the domain).
PricingOperator build_v_operator(const ModelConfig& cfg, const PumSpace& space,
                                 bool parallel = true);

// Raw coefficient sets, exposed for tests and custom assemblies.
OperatorCoeffs u_coefficients(const ModelConfig& cfg);
OperatorCoeffs v_coefficients(const ModelConfig& cfg);

} // namespace qcds
