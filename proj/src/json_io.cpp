#include "qcds/json_io.hpp"

#include <cstdint>
#include <iomanip>
#include <sstream>

namespace qcds {

using nlohmann::json;

json to_json(const ModelConfig& c) {
  json j;
  j["domestic"] = {{"x0", c.domestic.x0},
                   {"a", c.domestic.a},
                   {"b", c.domestic.b},
                   {"sigma", c.domestic.sigma}};
  j["foreign"] = {{"x0", c.foreign.x0},
                  {"a", c.foreign.a},
                  {"b", c.foreign.b},
                  {"sigma", c.foreign.sigma}};
  j["hazard"] = {{"y0", c.hazard.y0},
                 {"kappa", c.hazard.kappa},
                 {"theta", c.hazard.theta},
                 {"sigma_y", c.hazard.sigma_y}};
  j["fx"] = {{"z0", c.fx.z0}, {"sigma_z", c.fx.sigma_z}};
  j["jumps"] = {{"gamma_z", c.jumps.gamma_z},
                {"gamma_rhat", c.jumps.gamma_rhat}};
  json rho = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int k = 0; k < 4; ++k) row.push_back(c.corr(i, k));
    rho.push_back(row);
  }
  j["corr"] = {{"rho", rho}};
  j["contract"] = {{"t", c.contract.t},
                   {"T", c.contract.T},
                   {"recovery", c.contract.recovery},
                   {"coupon_interval", c.contract.coupon_interval},
                   {"m", c.contract.m}};
  const NumericsConfig& n = c.numerics;
  json bounds = json::array();
  for (int f = 0; f < 4; ++f)
    bounds.push_back({n.bounds[f].lo, n.bounds[f].hi});
  j["numerics"] = {
      {"nodes_per_dim", n.nodes_per_dim},
      {"patches_per_dim", n.patches_per_dim},
      {"reduced_nodes_per_dim", n.reduced_nodes_per_dim},
      {"reduced_patches_per_dim", n.reduced_patches_per_dim},
      {"overlap", n.overlap},
      {"shape_scale", n.shape_scale},
      {"reduced_shape_scale", n.reduced_shape_scale},
      {"eval_shape_scale", n.eval_shape_scale},
      {"time_steps", n.time_steps},
      {"quadrature_step_h", n.quadrature_step_h},
      {"bounds", bounds},
      {"anisotropic_scaling", n.anisotropic_scaling},
      {"coupon_integral", n.coupon_integral},
  };
  j["active"] = c.active;
  return j;
}

namespace {
template <typename T>
void get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
void get_cir(const json& j, const char* key, CIRParams& p) {
  if (!j.contains(key)) return;
  const json& s = j.at(key);
  get(s, "x0", p.x0);
  get(s, "a", p.a);
  get(s, "b", p.b);
  get(s, "sigma", p.sigma);
}
} // namespace

ModelConfig config_from_json(const json& j) {
  ModelConfig c = default_config();
  get_cir(j, "domestic", c.domestic);
  get_cir(j, "foreign", c.foreign);
  if (j.contains("hazard")) {
    const json& s = j.at("hazard");
    get(s, "y0", c.hazard.y0);
    get(s, "kappa", c.hazard.kappa);
    get(s, "theta", c.hazard.theta);
    get(s, "sigma_y", c.hazard.sigma_y);
  }
  if (j.contains("fx")) {
    const json& s = j.at("fx");
    get(s, "z0", c.fx.z0);
    get(s, "sigma_z", c.fx.sigma_z);
  }
  if (j.contains("jumps")) {
    const json& s = j.at("jumps");
    get(s, "gamma_z", c.jumps.gamma_z);
    get(s, "gamma_rhat", c.jumps.gamma_rhat);
  }
  if (j.contains("corr") && j.at("corr").contains("rho")) {
    const json& rho = j.at("corr").at("rho");
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) c.corr.rho[i][k] = rho.at(i).at(k);
  }
  if (j.contains("contract")) {
    const json& s = j.at("contract");
    get(s, "t", c.contract.t);
    get(s, "T", c.contract.T);
    get(s, "recovery", c.contract.recovery);
    get(s, "coupon_interval", c.contract.coupon_interval);
    get(s, "m", c.contract.m);
  }
  if (j.contains("numerics")) {
    const json& s = j.at("numerics");
    NumericsConfig& n = c.numerics;
    get(s, "nodes_per_dim", n.nodes_per_dim);
    get(s, "patches_per_dim", n.patches_per_dim);
    get(s, "reduced_nodes_per_dim", n.reduced_nodes_per_dim);
    get(s, "reduced_patches_per_dim", n.reduced_patches_per_dim);
    get(s, "overlap", n.overlap);
    get(s, "shape_scale", n.shape_scale);
    get(s, "reduced_shape_scale", n.reduced_shape_scale);
    get(s, "eval_shape_scale", n.eval_shape_scale);
    get(s, "time_steps", n.time_steps);
    get(s, "quadrature_step_h", n.quadrature_step_h);
    get(s, "anisotropic_scaling", n.anisotropic_scaling);
    get(s, "coupon_integral", n.coupon_integral);
    if (s.contains("bounds")) {
      const json& b = s.at("bounds");
      for (int f = 0; f < 4; ++f) {
        n.bounds[f].lo = b.at(f).at(0);
        n.bounds[f].hi = b.at(f).at(1);
      }
    }
  }
  get(j, "active", c.active);
  return c;
}

std::string config_digest(const ModelConfig& cfg) {
  std::string s = to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

} // namespace qcds
