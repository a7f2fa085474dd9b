#include "scnoise/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scnoise/errors.hpp"
#include "scnoise/mcsim.hpp"
#include "scnoise/netlist.hpp"
#include "scnoise/oracle.hpp"
#include "scnoise/plan.hpp"
#include "scnoise/report.hpp"
#include "scnoise/transfer.hpp"

namespace scnoise {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::FileNotFound, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) fail(Errc::FileNotFound, "cannot write '" + out_path + "'");
  out << text;
}

// --port accepts a declared port name or a raw "k,l" node pair.
Port resolve_port(const Circuit& circuit, const std::string& spec) {
  if (auto comma = spec.find(','); comma != std::string::npos) {
    Port p{spec.substr(0, comma), spec.substr(comma + 1)};
    if (!circuit.nodes.count(p.k) || !circuit.nodes.count(p.l))
      fail(Errc::UnresolvedName, "port nodes '" + spec + "' not in circuit");
    return p;
  }
  return circuit.port(spec);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SCNOISE_SEED")) return std::strtoull(env, nullptr, 10);
  return 12345;
}

std::string join_args(int argc, const char* const* argv) {
  std::string cmd;
  for (int i = 0; i < argc; ++i) {
    if (i) cmd += ' ';
    cmd += argv[i];
  }
  return cmd;
}

double auto_dt(const Circuit& circuit, double temperature_k, double period) {
  double tau_min = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= circuit.n_phases; ++p)
    if (auto tau = min_time_constant(build_system(circuit, p, temperature_k)))
      tau_min = std::min(tau_min, *tau);
  return std::isfinite(tau_min) ? tau_min / 20.0 : period / 1000.0;
}

struct SweepAxis {
  std::string key;  // "c1" or "ota1.gamma"
  std::vector<double> values;
};

SweepAxis parse_sweep_spec(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos)
    fail(Errc::BadArguments, "sweep spec must look like name[=.field]=v1,v2,...: '" + spec + "'");
  SweepAxis axis;
  axis.key = spec.substr(0, eq);
  std::stringstream ss(spec.substr(eq + 1));
  std::string part;
  while (std::getline(ss, part, ','))
    if (!part.empty()) axis.values.push_back(parse_si_value(part));
  if (axis.values.empty()) fail(Errc::SweepEmpty, "sweep list for '" + axis.key + "' is empty");
  return axis;
}

void apply_sweep_value(Circuit& circuit, const std::string& key, double value) {
  std::string name = key, field = "value";
  if (auto dot = key.find('.'); dot != std::string::npos) {
    name = key.substr(0, dot);
    field = key.substr(dot + 1);
  }
  if (field == "value") {
    if (Capacitor* cap = circuit.find_capacitor(name)) { cap->farads = value; return; }
    if (Resistor* res = circuit.find_resistor(name)) { res->ohms = value; return; }
  } else if (field == "ron") {
    if (Switch* sw = circuit.find_switch(name)) { sw->ron = value; return; }
  } else if (field == "gm") {
    if (Ota* ota = circuit.find_ota(name)) { ota->gm = value; return; }
  } else if (field == "gamma") {
    if (Ota* ota = circuit.find_ota(name)) { ota->gamma = value; return; }
  }
  fail(Errc::UnresolvedName, "sweep target '" + key + "' not found");
}

// --hold-tset rederives gm from the capacitors named c1/c2/cin/cl.
void hold_settling_time(Circuit& circuit, double t_set) {
  const char* needed[] = {"c1", "c2", "cin", "cl"};
  double c[4];
  for (int i = 0; i < 4; ++i) {
    const Capacitor* cap = circuit.find_capacitor(needed[i]);
    if (!cap)
      fail(Errc::UnresolvedName,
           std::string("--hold-tset requires a capacitor named '") + needed[i] + "'");
    c[i] = cap->farads;
  }
  auto otas = circuit.otas();
  if (otas.size() != 1) fail(Errc::MultipleOtas, "--hold-tset requires exactly one OTA");
  circuit.find_ota(otas.front()->name)->gm = settling_gm(c[0], c[1], c[2], c[3], t_set);
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", round_sig9(v));
  return buf;
}

const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0 success                11 multiple OTAs\n"
    "  2 file not found         12 no feedback path\n"
    "  3 netlist syntax error   13 sense node isolated\n"
    "  4 duplicate name         14 singular network\n"
    "  5 unknown phase          15 negative variance (defect)\n"
    "  6 nonpositive value      16 indeterminate transfer solve\n"
    "  7 missing ground         17 singular at frequency\n"
    "  8 unresolved name        18 quadrature not converged\n"
    "  9 invalid plan           19 timestep too coarse\n"
    " 10 OTA present            20 unstable integration\n"
    "                           21 empty sweep\n"
    "                           22 bad arguments\n";

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"scnoise: thermal-noise analysis of switched-capacitor circuits"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  std::string netlist_path, plan_path, out_path, port_spec = "out", with_methods = "bode";
  std::vector<std::string> sweep_specs;
  std::string dt_spec, period_spec, tset_spec;  // SI-suffixed values allowed
  int phase = 1, sample_phase = 0;
  double temp_k = 300.0, rel_tol = 1e-8, dt = 0, period = 1e-6, tset = 1e-7;
  long periods = 4100, discard = 100;
  std::optional<std::uint64_t> seed_flag;
  bool hold_tset = false;

  auto add_common = [&](CLI::App* sub, bool needs_plan) {
    sub->add_option("-n,--netlist", netlist_path, "netlist file")->required();
    if (needs_plan) sub->add_option("-p,--plan", plan_path, "analysis plan (JSON)")->required();
    sub->add_option("-o,--out", out_path, "output file (default: stdout)");
    sub->add_option("--temp-k", temp_k, "temperature in kelvin")->capture_default_str();
  };

  CLI::App* bode = app.add_subcommand("bode", "noise budget via the extended Bode theorem");
  add_common(bode, true);

  CLI::App* oracle = app.add_subcommand("oracle", "frequency-domain MNA noise integration");
  add_common(oracle, false);
  oracle->add_option("--phase", phase, "clock phase to analyze")->required();
  oracle->add_option("--port", port_spec, "port name or k,l node pair")->capture_default_str();
  oracle->add_option("--rel-tol", rel_tol, "quadrature relative tolerance")->capture_default_str();

  CLI::App* mc = app.add_subcommand("mc", "transient-noise Monte Carlo");
  add_common(mc, false);
  mc->add_option("--port", port_spec, "port name or k,l node pair")->capture_default_str();
  mc->add_option("--phase,--sample-phase", sample_phase, "phase whose end is sampled (default: last)");
  mc->add_option("--seed", seed_flag, "RNG seed (fallback: env SCNOISE_SEED, then 12345)");
  mc->add_option("--periods", periods, "total simulated clock periods")->capture_default_str();
  mc->add_option("--discard", discard, "initial periods dropped")->capture_default_str();
  mc->add_option("--dt", dt_spec, "time step in seconds (default: min time constant / 20)");
  mc->add_option("--period", period_spec, "clock period in seconds (default 1u)");

  CLI::App* sweep = app.add_subcommand("sweep", "evaluate the budget over parameter lists (CSV)");
  add_common(sweep, true);
  sweep->add_option("--sweep", sweep_specs,
                    "axis spec name[.field]=v1,v2,... (repeatable, cross product)");
  sweep->add_option("--with", with_methods, "methods: comma list of bode,oracle,mc")->capture_default_str();
  sweep->add_flag("--hold-tset", hold_tset, "rederive gm per point for a constant settling time");
  sweep->add_option("--tset", tset_spec, "settling time for --hold-tset (default 100n)");
  sweep->add_option("--rel-tol", rel_tol, "oracle quadrature tolerance")->capture_default_str();
  sweep->add_option("--seed", seed_flag, "base RNG seed for mc points");
  sweep->add_option("--periods", periods, "mc periods per point")->capture_default_str();
  sweep->add_option("--discard", discard, "mc initial periods dropped")->capture_default_str();
  sweep->add_option("--dt", dt_spec, "mc time step (default: auto per point)");
  sweep->add_option("--period", period_spec, "mc clock period (default 1u)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : errc_exit_code(Errc::BadArguments);
  }

  if (!dt_spec.empty()) dt = parse_si_value(dt_spec);
  if (!period_spec.empty()) period = parse_si_value(period_spec);
  if (!tset_spec.empty()) tset = parse_si_value(tset_spec);

  RunManifest manifest;
  manifest.command = join_args(argc, argv);

  if (bode->parsed()) {
    Circuit circuit = parse_netlist(read_file(netlist_path));
    NoiseBudget budget = parse_plan(read_file(plan_path), circuit);
    budget.temperature_k = bode->count("--temp-k") ? temp_k : budget.temperature_k;
    NoiseReport report = evaluate_budget(circuit, budget);
    manifest.inputs = {{"netlist", netlist_path}, {"plan", plan_path}};
    manifest.defaults = {{"temperature_k", budget.temperature_k}};
    write_output(out_path, report_json(report, manifest).dump(2) + "\n");
    return 0;
  }

  if (oracle->parsed()) {
    Circuit circuit = parse_netlist(read_file(netlist_path));
    Port port = resolve_port(circuit, port_spec);
    SmallSignalSystem sys = build_system(circuit, phase, temp_k);
    VarianceQuadrature quad;
    quad.rel_tol = rel_tol;
    IntegrationResult result = integrate_variance(sys, port, quad);
    manifest.inputs = {{"netlist", netlist_path}};
    manifest.defaults = {{"temperature_k", temp_k}, {"rel_tol", rel_tol}, {"f_min_hz", quad.f_min}};
    write_output(out_path, oracle_json(sys, port, phase, temp_k, result, quad, manifest).dump(2) + "\n");
    return 0;
  }

  if (mc->parsed()) {
    Circuit circuit = parse_netlist(read_file(netlist_path));
    McConfig cfg;
    cfg.period = period;
    cfg.n_periods = periods;
    cfg.n_discard = discard;
    cfg.seed = resolve_seed(seed_flag);
    cfg.sample_phase = sample_phase > 0 ? sample_phase : circuit.n_phases;
    cfg.sample_port = resolve_port(circuit, port_spec);
    cfg.dt = dt > 0 ? dt : auto_dt(circuit, temp_k, period);
    McEstimate est = run_mc(circuit, cfg, temp_k);
    manifest.inputs = {{"netlist", netlist_path}};
    manifest.defaults = {{"temperature_k", temp_k}, {"dt_s", cfg.dt},
                         {"seed", cfg.seed},        {"phase_split", "equal"}};
    write_output(out_path, mc_json(cfg, temp_k, est, manifest).dump(2) + "\n");
    return 0;
  }

  // sweep
  Circuit base = parse_netlist(read_file(netlist_path));
  NoiseBudget budget = parse_plan(read_file(plan_path), base);
  if (sweep->count("--temp-k")) budget.temperature_k = temp_k;
  if (sweep_specs.empty()) fail(Errc::SweepEmpty, "no --sweep axes given");
  std::vector<SweepAxis> axes;
  for (const std::string& spec : sweep_specs) axes.push_back(parse_sweep_spec(spec));

  std::vector<std::string> methods;
  {
    std::stringstream ss(with_methods);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) methods.push_back(part);
    for (const std::string& method : methods)
      if (method != "bode" && method != "oracle" && method != "mc")
        fail(Errc::BadArguments, "--with method must be bode, oracle or mc: '" + method + "'");
  }

  manifest.inputs = {{"netlist", netlist_path}, {"plan", plan_path}};
  manifest.defaults = {{"temperature_k", budget.temperature_k},
                       {"rel_tol", rel_tol},
                       {"periods", periods},
                       {"seed", resolve_seed(seed_flag)},
                       {"hold_tset", hold_tset},
                       {"tset_s", tset}};

  std::ostringstream csv;
  {
    std::string mline = manifest_json(manifest).dump();
    csv << "# manifest " << mline << "\n";
  }
  for (const SweepAxis& axis : axes) csv << axis.key << ",";
  csv << "method,gm_s,variance_v2,rms_v,ci95_rel,n_samples\n";

  std::vector<std::size_t> idx(axes.size(), 0);
  std::uint64_t base_seed = resolve_seed(seed_flag);
  long point = 0;
  for (;;) {
    Circuit circuit = base;
    for (std::size_t a = 0; a < axes.size(); ++a)
      apply_sweep_value(circuit, axes[a].key, axes[a].values[idx[a]]);
    if (hold_tset) hold_settling_time(circuit, tset);
    circuit.finalize();

    double gm = 0;
    if (auto otas = circuit.otas(); otas.size() == 1) gm = otas.front()->gm;

    for (const std::string& method : methods) {
      std::string prefix;
      for (std::size_t a = 0; a < axes.size(); ++a)
        prefix += fmt9(axes[a].values[idx[a]]) + ",";
      if (method == "bode") {
        NoiseReport report = evaluate_budget(circuit, budget);
        csv << prefix << "bode," << fmt9(gm) << "," << fmt9(report.total_variance) << ","
            << fmt9(report.total_rms) << ",,\n";
      } else if (method == "oracle") {
        double var = evaluate_budget_oracle(circuit, budget, rel_tol);
        csv << prefix << "oracle," << fmt9(gm) << "," << fmt9(var) << "," << fmt9(std::sqrt(var))
            << ",,\n";
      } else {
        McConfig cfg;
        cfg.period = period;
        cfg.n_periods = periods;
        cfg.n_discard = discard;
        cfg.seed = base_seed + static_cast<std::uint64_t>(point);
        cfg.sample_phase = circuit.n_phases;
        cfg.sample_port = circuit.port(budget.output_port);
        cfg.dt = dt > 0 ? dt : auto_dt(circuit, budget.temperature_k, period);
        McEstimate est = run_mc(circuit, cfg, budget.temperature_k);
        csv << prefix << "mc," << fmt9(gm) << "," << fmt9(est.variance) << "," << fmt9(est.rms)
            << "," << fmt9(est.ci95_rel) << "," << est.n_samples << "\n";
      }
    }
    ++point;

    std::size_t a = 0;
    for (; a < axes.size(); ++a) {
      if (++idx[a] < axes[a].values.size()) break;
      idx[a] = 0;
    }
    if (a == axes.size()) break;
  }
  write_output(out_path, csv.str());
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  try {
    return dispatch(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return errc_exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace scnoise
