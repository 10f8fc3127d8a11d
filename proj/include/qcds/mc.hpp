#pragma once

#include "qcds/model.hpp"

#include <cstdint>
#include <vector>

namespace qcds {

struct MCEstimate {
  double mean = 0;
  double se = 0;
  long paths = 0;
  std::uint64_t seed = 0;
};

struct MCLegs {
  MCEstimate w;          // E[e^{-int r} Z_T 1{tau>T}]
  MCEstimate protection; // E[e^{-int r} Z_tau(1+gamma_z) 1{tau<=T}]
  MCEstimate bond;       // w + recovery * protection
  MCEstimate coupon;     // dt * sum_i E[e^{-int r} Z_{t_i} 1{tau>t_i}]
  MCEstimate accrual;    // E[e^{-int r} (tau - t_beta) Z_tau 1{tau<=T}]
  MCEstimate spread_bps; // par spread, delta-method standard error
  double default_fraction = 0;
};

struct MCSummary {
  // e^{-int (r - rhat)} Z_T / z0; expectation 1 without jumps.
  MCEstimate martingale;
  // 1{tau<=T} - (1 - e^{-Gamma_T}); expectation 0 along the same paths.
  MCEstimate default_consistency;
  double default_fraction = 0;
  double min_z = 0;
  long jump_count = 0; // one-time jumps applied; equals defaulted paths
  long defaulted_paths = 0;
};

MCLegs mc_bond_and_legs(const ModelConfig& cfg, int steps, long paths,
                        std::uint64_t seed, bool antithetic = false);

MCSummary simulate(const ModelConfig& cfg, double horizon, int steps,
                   long paths, std::uint64_t seed);

// Spread estimate per path count in the ladder (shared step count and seed).
std::vector<MCEstimate> mc_convergence_report(const ModelConfig& cfg,
                                              const std::vector<long>& ladder,
                                              int steps, std::uint64_t seed);

} // namespace qcds
