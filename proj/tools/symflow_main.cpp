// Command-line front end: run flows, symbol analyses and semi-flat
// verifications from flags or JSON config files; emit CSV/JSON artifacts.
//
// Exit codes: 0 ok, 2 config/schema error, 3 geometric failure
// (positivity loss, log floor, SPD loss), 4 tolerance/verdict failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "symflow/flows.hpp"
#include "symflow/io.hpp"
#include "symflow/semiflat.hpp"
#include "symflow/symbol.hpp"
#include "symflow/verify.hpp"

namespace {

using nlohmann::json;
using namespace symflow;

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + ": unknown config key '" + key + "'");
  }
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  return j;
}

void write_manifest(const std::string& dir, const std::string& command, const json& config,
                    const std::vector<std::string>& artifacts) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["config_hash"] = sha1_hex(config.dump());
  m["library_version"] = kLibraryVersion;
  m["artifacts"] = artifacts;
  std::ofstream out(dir + "/manifest.json");
  out << m.dump(2) << "\n";
}

Eigen::VectorXd parse_init(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      vals.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad --init entry '" + item + "'");
    }
  }
  Eigen::VectorXd v(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<int>(i)] = vals[i];
  return v;
}

int cmd_flow(const json& cfg) {
  reject_unknown_keys(cfg, {"preset", "weight", "epsilon", "init", "T", "dt", "integrator", "rtol",
                            "stride", "log_floor", "out"},
                      "flow");
  Preset preset = preset_from_string(cfg.value("preset", "nilmanifold"));
  const AnsatzFamily& family = preset_ansatz(preset);

  FlowSpec spec;
  spec.weight = weight_from_string(cfg.value("weight", "hitchin"));
  spec.epsilon = cfg.value("epsilon", 0.0);
  spec.horizon = cfg.value("T", 10.0);
  spec.dt = cfg.value("dt", 1e-3);
  spec.rtol = cfg.value("rtol", 1e-9);
  spec.stride = cfg.value("stride", 10);
  spec.log_floor = cfg.value("log_floor", 1e-6);
  const std::string integrator = cfg.value("integrator", "rk4");
  if (integrator == "rk4")
    spec.integrator = IntegratorKind::RK4;
  else if (integrator == "rk45")
    spec.integrator = IntegratorKind::RK45;
  else
    throw ConfigError("unknown integrator '" + integrator + "'");

  Eigen::VectorXd init;
  if (cfg.contains("init")) {
    if (cfg["init"].is_string())
      init = parse_init(cfg["init"].get<std::string>());
    else {
      std::vector<double> v = cfg["init"].get<std::vector<double>>();
      init = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
    }
  } else if (family.dimension() == 2) {
    init = Eigen::VectorXd::Zero(2);
  } else {
    throw ConfigError("flow: --init is required for the " + family.name() + " ansatz");
  }
  if (init.size() != family.dimension())
    throw ConfigError("flow: init has " + std::to_string(init.size()) + " entries, ansatz needs " +
                      std::to_string(family.dimension()));

  const std::string out_dir = cfg.value("out", ".");
  std::filesystem::create_directories(out_dir);

  Trajectory traj = run_flow(family, init, spec);

  const std::string csv_path = out_dir + "/trajectory.csv";
  {
    std::ofstream csv(csv_path, std::ios::binary);
    write_trajectory_csv(csv, traj, family);
  }
  write_manifest(out_dir, "flow", cfg, {"trajectory.csv"});

  std::cout << "flow: " << traj.samples.size() << " samples to t = " << traj.back().t
            << ", monitors d " << traj.max_d_resid << " prim " << traj.max_prim_resid << " proj "
            << traj.max_proj_resid << "\n";
  const double monitor = std::max({traj.max_d_resid, traj.max_prim_resid, traj.max_proj_resid});
  if (monitor > 1e-10) {
    std::cerr << "flow: invariant monitor " << monitor << " above 1e-10\n";
    return 4;
  }
  return 0;
}

int cmd_symbol(const json& cfg) {
  reject_unknown_keys(cfg, {"weight", "epsilon", "xi", "out"}, "symbol");
  SymbolProblem p = SymbolProblem::canonical(weight_from_string(cfg.value("weight", "hitchin")),
                                             cfg.value("epsilon", 0.0));
  p.spec.epsilon = cfg.value("epsilon", 0.0);
  if (cfg.contains("xi")) {
    const std::string xs = cfg["xi"].get<std::string>();
    Form<double> xi(1);
    if (xs.size() == 2 && xs[0] == 'e') {
      int idx = xs[1] - '0';
      if (idx < 1 || idx > 6) throw ConfigError("symbol: xi coframe index out of range");
      xi = Form<double>::basis(index_bit(idx));
    } else {
      Eigen::VectorXd v = parse_init(xs);
      if (v.size() != 6) throw ConfigError("symbol: xi must be e<k> or six comma-separated components");
      for (int i = 0; i < 6; ++i)
        if (v[i] != 0.0) xi.add_term(index_bit(i + 1), v[i]);
    }
    if (xi.max_abs() == 0.0) throw ConfigError("symbol: xi must be nonzero");
    p.xi = xi;
  }

  SymbolReport rep = symbol_spectrum(p);
  json out = symbol_report_json(p, rep);
  out["config_hash"] = sha1_hex(cfg.dump());
  out["library_version"] = kLibraryVersion;

  if (cfg.contains("out")) {
    std::ofstream f(cfg["out"].get<std::string>());
    f << out.dump(2) << "\n";
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_semiflat(const json& cfg) {
  reject_unknown_keys(cfg, {"N", "A", "modes", "dt", "steps", "stride", "flow", "out", "dump_fields"},
                      "semiflat");
  SemiflatConfig sc;
  sc.n = cfg.value("N", 32);
  sc.dt = cfg.value("dt", 1e-5);
  sc.steps = cfg.value("steps", 100);
  sc.stride = cfg.value("stride", 10);
  sc.flow = semiflat_flow_from_string(cfg.value("flow", "iib"));
  if (cfg.contains("A")) {
    auto rows = cfg["A"].get<std::vector<std::vector<double>>>();
    if (rows.size() != 3 || rows[0].size() != 3) throw ConfigError("semiflat: A must be 3x3");
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) sc.A(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  if (cfg.contains("modes")) {
    for (const auto& m : cfg["modes"]) {
      reject_unknown_keys(m, {"k", "eps", "phase"}, "semiflat mode");
      PerturbationMode mode;
      auto k = m.at("k").get<std::vector<int>>();
      if (k.size() != 3) throw ConfigError("semiflat: mode k must have 3 entries");
      mode.k = {k[0], k[1], k[2]};
      mode.amplitude = m.at("eps").get<double>();
      mode.phase = m.value("phase", 0.0);
      sc.modes.push_back(mode);
    }
  }

  const std::string out_dir = cfg.value("out", ".");
  std::filesystem::create_directories(out_dir);

  SemiflatRunResult res = run_semiflat(sc);

  const std::string csv_path = out_dir + "/residuals.csv";
  {
    std::ofstream csv(csv_path, std::ios::binary);
    csv << "step,maxResidual,l2Residual,minDetG\n";
    char buf[256];
    for (const auto& r : res.rows) {
      int n = std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", r.step, r.max_resid, r.l2_resid,
                            r.min_det);
      csv.write(buf, n);
    }
  }
  std::vector<std::string> artifacts = {"residuals.csv"};
  if (cfg.value("dump_fields", false)) {
    const char* names[6] = {"g11", "g12", "g13", "g22", "g23", "g33"};
    for (int s = 0; s < 6; ++s) {
      dump_field(res.final_state.comp[static_cast<std::size_t>(s)], out_dir, names[s]);
      artifacts.push_back(std::string(names[s]) + ".bin");
      artifacts.push_back(std::string(names[s]) + ".json");
    }
    dump_field(res.final_state.determinant(), out_dir, "detg");
    artifacts.push_back("detg.bin");
    artifacts.push_back("detg.json");
  }
  write_manifest(out_dir, "semiflat", cfg, artifacts);

  std::cout << "semiflat: " << res.rows.size() << " residual rows, min det "
            << (res.rows.empty() ? 0.0 : res.rows.back().min_det) << ", |phi|^2 - 4 det g max "
            << res.max_norm_identity_resid << "\n";
  if (res.max_norm_identity_resid > 1e-12) {
    std::cerr << "semiflat: norm identity residual above 1e-12\n";
    return 4;
  }
  return 0;
}

int cmd_verify_all(const json& cfg) {
  reject_unknown_keys(cfg, {"quick", "seed"}, "verify-all");
  VerifyOptions opts;
  opts.quick = cfg.value("quick", false);
  opts.seed = cfg.value("seed", 20250808u);
  auto results = run_acceptance_checks(opts);
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.name << " — " << r.detail << "\n";
    all = all && r.pass;
  }
  return all ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symplectic geometric flows: Hitchin gradient / Type IIA / dual Ricci family"};
  app.require_subcommand(1);

  // every flag lands in a json blob so config files and flags share one schema
  json flow_cfg = json::object(), symbol_cfg = json::object(), semiflat_cfg = json::object(),
       verify_cfg = json::object();
  std::string flow_config_path, semiflat_config_path;

  auto* flow = app.add_subcommand("flow", "integrate a flow on an invariant ansatz");
  std::string f_preset, f_weight, f_integrator, f_init, f_out;
  double f_eps = 0, f_T = 0, f_dt = 0, f_rtol = 0, f_a0 = 0, f_b0 = 0;
  int f_stride = 0;
  flow->add_option("--config", flow_config_path, "JSON config file");
  auto* op = flow->add_option("--preset", f_preset, "torus | nilmanifold | solvmanifold");
  auto* ow = flow->add_option("--weight", f_weight, "hitchin | type-iia | dual-ricci | epsilon");
  auto* oe = flow->add_option("--epsilon", f_eps, "epsilon for the regularized weight");
  auto* oi = flow->add_option("--init", f_init, "comma-separated initial ansatz parameters");
  auto* oa = flow->add_option("--a0", f_a0, "initial a (2-parameter ansatz)");
  auto* ob = flow->add_option("--b0", f_b0, "initial b (2-parameter ansatz)");
  auto* oT = flow->add_option("--T", f_T, "horizon");
  auto* od = flow->add_option("--dt", f_dt, "RK4 step");
  auto* og = flow->add_option("--integrator", f_integrator, "rk4 | rk45");
  auto* orr = flow->add_option("--rtol", f_rtol, "RK45 tolerance");
  auto* os = flow->add_option("--stride", f_stride, "record every stride-th step");
  auto* oo = flow->add_option("--out", f_out, "output directory");

  auto* symbol = app.add_subcommand("symbol", "principal symbol spectrum at the adapted model point");
  std::string s_weight, s_xi, s_out;
  double s_eps = 0;
  auto* sw = symbol->add_option("--weight", s_weight, "weight family");
  auto* se = symbol->add_option("--epsilon", s_eps, "epsilon for the regularized weight");
  auto* sx = symbol->add_option("--xi", s_xi, "covector: e1..e6 or six components");
  auto* so = symbol->add_option("--out", s_out, "JSON report path");

  auto* semiflat = app.add_subcommand("semiflat", "duality residuals of a semi-flat reduction");
  int m_n = 0, m_steps = 0, m_stride = 0;
  double m_dt = 0, m_eps = 0;
  std::string m_flow, m_out;
  bool m_dump = false;
  semiflat->add_option("--config", semiflat_config_path, "JSON config file");
  auto* mn = semiflat->add_option("--N", m_n, "grid points per axis (>= 8)");
  auto* mf = semiflat->add_option("--flow", m_flow, "iib | kr");
  auto* md = semiflat->add_option("--dt", m_dt, "time step");
  auto* ms = semiflat->add_option("--steps", m_steps, "number of steps");
  auto* mr = semiflat->add_option("--stride", m_stride, "residual evaluation stride");
  auto* me = semiflat->add_option("--eps", m_eps, "amplitude of a single (1,0,0) mode");
  auto* mo = semiflat->add_option("--out", m_out, "output directory");
  auto* mdu = semiflat->add_flag("--dump-fields", m_dump, "dump final metric fields");

  auto* verify = app.add_subcommand("verify-all", "run the verification checks");
  bool v_quick = false;
  unsigned v_seed = 20250808u;
  verify->add_flag("--quick", v_quick, "shrink the semi-flat sweep");
  verify->add_option("--seed", v_seed, "seed for randomized checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (flow->parsed()) {
      if (!flow_config_path.empty()) flow_cfg = load_config(flow_config_path);
      if (*op) flow_cfg["preset"] = f_preset;
      if (*ow) flow_cfg["weight"] = f_weight;
      if (*oe) flow_cfg["epsilon"] = f_eps;
      if (*oi) flow_cfg["init"] = f_init;
      if (*oa || *ob) {
        if (*oi) throw ConfigError("flow: give either --init or --a0/--b0, not both");
        flow_cfg["init"] = std::vector<double>{f_a0, f_b0};
      }
      if (*oT) flow_cfg["T"] = f_T;
      if (*od) flow_cfg["dt"] = f_dt;
      if (*og) flow_cfg["integrator"] = f_integrator;
      if (*orr) flow_cfg["rtol"] = f_rtol;
      if (*os) flow_cfg["stride"] = f_stride;
      if (*oo) flow_cfg["out"] = f_out;
      return cmd_flow(flow_cfg);
    }
    if (symbol->parsed()) {
      if (*sw) symbol_cfg["weight"] = s_weight;
      if (*se) symbol_cfg["epsilon"] = s_eps;
      if (*sx) symbol_cfg["xi"] = s_xi;
      if (*so) symbol_cfg["out"] = s_out;
      return cmd_symbol(symbol_cfg);
    }
    if (semiflat->parsed()) {
      if (!semiflat_config_path.empty()) semiflat_cfg = load_config(semiflat_config_path);
      if (*mn) semiflat_cfg["N"] = m_n;
      if (*mf) semiflat_cfg["flow"] = m_flow;
      if (*md) semiflat_cfg["dt"] = m_dt;
      if (*ms) semiflat_cfg["steps"] = m_steps;
      if (*mr) semiflat_cfg["stride"] = m_stride;
      if (*me) semiflat_cfg["modes"] = json::array({{{"k", {1, 0, 0}}, {"eps", m_eps}, {"phase", 0.0}}});
      if (*mo) semiflat_cfg["out"] = m_out;
      if (*mdu) semiflat_cfg["dump_fields"] = true;
      return cmd_semiflat(semiflat_cfg);
    }
    if (verify->parsed()) {
      verify_cfg["quick"] = v_quick;
      verify_cfg["seed"] = v_seed;
      return cmd_verify_all(verify_cfg);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NotPositiveError& e) {
    std::cerr << "geometric failure: " << e.what() << "\n";
    return 3;
  } catch (const NotPrimitiveError& e) {
    std::cerr << "geometric failure: " << e.what() << "\n";
    return 3;
  } catch (const GeometricError& e) {
    std::cerr << "geometric failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
