#include "qcds/json_io.hpp"
#include "qcds/mc.hpp"
#include "qcds/pricer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

using nlohmann::json;
using namespace qcds;

namespace {

constexpr int EXIT_CONFIG = 2;
constexpr int EXIT_NUMERICAL = 3;
constexpr int EXIT_VALIDATION = 4;

struct Options {
  std::string config_path;
  std::string profile = "full";
  std::string axis;
  std::string grid;
  long paths = 100000;
  std::uint64_t seed = 42;
  int workers = 0;
  std::string out;
};

ModelConfig load_config(const Options& opt) {
  ModelConfig cfg = default_config();
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) {
      std::cerr << "cannot open config: " << opt.config_path << "\n";
      std::exit(EXIT_CONFIG);
    }
    try {
      json j = json::parse(in);
      cfg = config_from_json(j);
    } catch (const json::parse_error& e) {
      std::cerr << "config parse error: " << e.what() << "\n";
      std::exit(EXIT_CONFIG);
    }
  }
  if (opt.profile == "coarse") {
    for (int d = 0; d < 4; ++d) {
      cfg.numerics.nodes_per_dim[d] = 9;
      cfg.numerics.patches_per_dim[d] = 4;
    }
    cfg.numerics.quadrature_step_h = 1.0 / 12.0;
  } else if (opt.profile != "full") {
    std::cerr << "unknown profile: " << opt.profile << "\n";
    std::exit(EXIT_CONFIG);
  }
  std::vector<std::string> bad = validate(cfg);
  if (!bad.empty()) {
    std::cerr << "config violations:\n";
    for (const std::string& b : bad) std::cerr << "  " << b << "\n";
    std::exit(EXIT_CONFIG);
  }
  for (const std::string& w : warnings(cfg)) std::cerr << "warning: " << w
                                                       << "\n";
  return cfg;
}

void apply_workers(const Options& opt) {
#ifdef _OPENMP
  if (opt.workers > 0) omp_set_num_threads(opt.workers);
#endif
}

json manifest(const std::string& command, const ModelConfig& cfg,
              const Options& opt, double wall_seconds) {
  json m;
  m["command"] = command;
  m["config_digest"] = config_digest(cfg);
  m["profile"] = opt.profile;
  m["seed"] = opt.seed;
  m["wall_seconds"] = wall_seconds;
  m["output_paths"] = opt.out.empty() ? json::array()
                                      : json::array({opt.out});
  return m;
}

void emit(const Options& opt, const std::string& text) {
  if (opt.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(opt.out);
    if (!f) {
      std::cerr << "cannot write: " << opt.out << "\n";
      std::exit(EXIT_NUMERICAL);
    }
    f << text;
  }
}

// Axis setters for sweeps; names match the model parameters they move.
using AxisSetter = std::function<void(ModelConfig&, double)>;

const std::map<std::string, AxisSetter>& axis_setters() {
  static const std::map<std::string, AxisSetter> m = {
      {"gamma_z", [](ModelConfig& c, double v) { c.jumps.gamma_z = v; }},
      {"gamma_rhat",
       [](ModelConfig& c, double v) { c.jumps.gamma_rhat = v; }},
      {"rho_yz", [](ModelConfig& c, double v) { c.corr.set(F_Y, F_Z, v); }},
      {"rho_yrhat",
       [](ModelConfig& c, double v) { c.corr.set(F_Y, F_RHAT, v); }},
      {"rho_rz", [](ModelConfig& c, double v) { c.corr.set(F_R, F_Z, v); }},
      {"sigma_y", [](ModelConfig& c, double v) { c.hazard.sigma_y = v; }},
      {"sigma_z", [](ModelConfig& c, double v) { c.fx.sigma_z = v; }},
      {"sigma_r", [](ModelConfig& c, double v) { c.domestic.sigma = v; }},
      {"sigma_rhat", [](ModelConfig& c, double v) { c.foreign.sigma = v; }},
  };
  return m;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_grid_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& tok : split(s, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      std::cerr << "bad grid value: " << tok << "\n";
      std::exit(EXIT_CONFIG);
    }
  }
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

json legs_to_json(const LegBreakdown& legs) {
  json j;
  j["A"] = legs.A;
  j["A_integral"] = legs.A_integral;
  j["B"] = legs.B;
  j["C"] = legs.C;
  j["dt"] = legs.dt;
  j["recovery"] = legs.recovery;
  j["integral_convention"] = legs.integral_convention;
  j["coupon_leg"] = legs.L_c;
  j["protection_leg"] = legs.L_p;
  j["accrual_leg"] = legs.L_a;
  j["s_bps"] = legs.s_bps;
  return j;
}

int cmd_price(const Options& opt) {
  ModelConfig cfg = load_config(opt);
  apply_workers(opt);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Geometry geom = build_geometry(cfg);
    PricingOperator vop = build_v_operator(cfg, *geom.space);
    LegBreakdown legs = cds_legs(geom, vop);
    const double s_d = domestic_reference(cfg);
    json rec;
    rec["spread"] = {{"s_foreign_bps", legs.s_bps},
                     {"s_domestic_bps", s_d},
                     {"basis_bps", legs.s_bps - s_d}};
    rec["legs"] = legs_to_json(legs);
    rec["config_digest"] = config_digest(cfg);
    emit(opt, rec.dump(2) + "\n");
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::cerr << "s = " << legs.s_bps << " bps, s_d = " << s_d
              << " bps, basis = " << legs.s_bps - s_d << " bps ("
              << geom.space->size() << " nodes, "
              << geom.space->cond_warnings() << " conditioning warnings)\n";
    std::cerr << manifest("price", cfg, opt, wall).dump() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return EXIT_NUMERICAL;
  }
  return 0;
}

int cmd_sweep(const Options& opt) {
  ModelConfig base = load_config(opt);
  apply_workers(opt);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::string> axes = split(opt.axis, ',');
  if (axes.empty() || axes.size() > 2) {
    std::cerr << "sweep needs --axis NAME or --axis NAME,NAME\n";
    return EXIT_CONFIG;
  }
  for (const std::string& a : axes)
    if (!axis_setters().count(a)) {
      std::cerr << "unknown axis: " << a << "\n";
      return EXIT_CONFIG;
    }
  std::vector<std::string> lists = split(opt.grid, ';');
  if (opt.grid.empty()) lists.assign(axes.size(), ""); // header-only CSV
  if (lists.size() != axes.size()) {
    std::cerr << "--grid needs " << axes.size()
              << " semicolon-separated list(s)\n";
    return EXIT_CONFIG;
  }
  std::vector<double> g1 = parse_grid_list(lists[0]);
  std::vector<double> g2 =
      axes.size() == 2 ? parse_grid_list(lists[1]) : std::vector<double>{};

  std::ostringstream csv;
  csv << "axis1,axis2,s_bps,sd_bps,basis_bps\n";
  auto run_point = [&](double v1, std::optional<double> v2) {
    ModelConfig cfg = base;
    axis_setters().at(axes[0])(cfg, v1);
    if (v2) axis_setters().at(axes[1])(cfg, *v2);
    csv << fmt(v1) << "," << (v2 ? fmt(*v2) : "") << ",";
    try {
      SpreadResult r = basis_spread(cfg);
      csv << fmt(r.s_foreign) << "," << fmt(r.s_domestic) << ","
          << fmt(r.basis) << "\n";
    } catch (const std::exception& e) {
      std::cerr << "point " << v1;
      if (v2) std::cerr << "," << *v2;
      std::cerr << " failed: " << e.what() << "\n";
      csv << "nan,nan,nan\n";
    }
  };
  if (axes.size() == 1) {
    for (double v : g1) run_point(v, std::nullopt);
  } else {
    for (double v1 : g1)
      for (double v2 : g2) run_point(v1, v2);
  }
  emit(opt, csv.str());
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::cerr << manifest("sweep", base, opt, wall).dump() << "\n";
  return 0;
}

int cmd_validate(const Options& opt) {
  ModelConfig cfg = load_config(opt);
  apply_workers(opt);
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream rep;
  bool all_pass = true;
  try {
    Geometry geom = build_geometry(cfg);
    PricingOperator vop = build_v_operator(cfg, *geom.space);
    WgCurves curves = wg_curves(geom, vop);
    LegBreakdown legs = cds_legs(geom, vop);
    const double span = cfg.contract.T - cfg.contract.t;
    const double pde_w = curves.w.at(span);
    double pde_prot = 0;
    for (double b : legs.B) pde_prot += b;
    const double pde_bond = price_bond(geom, vop);
    const double pde_s = legs.s_bps;

    // MC needs finer time steps than the PDE quadrature to keep the Euler
    // bias well below the Monte Carlo noise at typical path counts.
    const int steps = std::max(
        static_cast<int>(std::lround(span / cfg.numerics.quadrature_step_h)),
        250);
    MCLegs mc = mc_bond_and_legs(cfg, steps, opt.paths, opt.seed);
    struct Row {
      const char* name;
      double pde, mc, se;
    };
    const Row rows[] = {
        {"w(T)", pde_w, mc.w.mean, mc.w.se},
        {"protection", pde_prot, mc.protection.mean, mc.protection.se},
        {"bond", pde_bond, mc.bond.mean, mc.bond.se},
        {"spread_bps", pde_s, mc.spread_bps.mean, mc.spread_bps.se},
    };
    rep << "quantity,pde,mc,mc_se,abs_diff,pass_3se\n";
    for (const Row& r : rows) {
      const double diff = std::abs(r.pde - r.mc);
      const bool pass = diff <= 3 * r.se;
      all_pass = all_pass && pass;
      rep << r.name << "," << fmt(r.pde) << "," << fmt(r.mc) << ","
          << fmt(r.se) << "," << fmt(diff) << "," << (pass ? "yes" : "no")
          << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return EXIT_NUMERICAL;
  }
  emit(opt, rep.str());
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::cerr << manifest("validate", cfg, opt, wall).dump() << "\n";
  return all_pass ? 0 : EXIT_VALIDATION;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"quanto CDS pricing: RBF-PUM PDE engine with MC validation"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "model config JSON");
    sub->add_option("--profile", opt.profile, "full|coarse");
    sub->add_option("--seed", opt.seed, "RNG seed");
    sub->add_option("--workers", opt.workers, "thread cap (0 = default)");
    sub->add_option("--out", opt.out, "output file (default stdout)");
  };
  CLI::App* price = app.add_subcommand("price", "single pricing run");
  add_common(price);
  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep to CSV");
  add_common(sweep);
  sweep->add_option("--axis", opt.axis, "axis name or NAME,NAME");
  sweep->add_option("--grid", opt.grid, "comma list; semicolon-separated");
  CLI::App* validate = app.add_subcommand("validate", "PDE vs MC report");
  add_common(validate);
  validate->add_option("--paths", opt.paths, "MC path count");

  CLI11_PARSE(app, argc, argv);
  if (price->parsed()) return cmd_price(opt);
  if (sweep->parsed()) return cmd_sweep(opt);
  return cmd_validate(opt);
}
