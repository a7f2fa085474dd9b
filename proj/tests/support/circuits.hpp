#pragma once

// Canned netlists, closed-form expectations and random-circuit generators
// shared by the unit suites and the acceptance runner.

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "scnoise/netlist.hpp"
#include "scnoise/plan.hpp"

namespace testsup {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string rc_lowpass_netlist(double r = 5e3, double c = 1e-12) {
  return ".phases 1\n.ground 0\nR r1 out 0 " + num(r) + "\nC c1 out 0 " + num(c) +
         "\n.port out out 0\n";
}

inline std::string sc_amplifier_netlist(double c1 = 0.5e-12, double c2 = 0.5e-12,
                                        double cin = 20e-15, double cl = 0.5e-12,
                                        double ron = 5e3, double gm = 1.54e-5,
                                        double gamma = 1.0) {
  return ".phases 2\n.ground 0\n"
         "C c1 a vg " + num(c1) + "\n"
         "C c2 vg out " + num(c2) + "\n"
         "C cin vg 0 " + num(cin) + "\n"
         "C cl out 0 " + num(cl) + "\n"
         "SW s1 a 0 ron=" + num(ron) + " closed=1,2\n"
         "SW s2 out vg ron=" + num(ron) + " closed=1\n"
         "OTA ota1 inp=0 inn=vg out=out gm=" + num(gm) + " gamma=" + num(gamma) + "\n"
         ".port out out 0\n.port c1 a vg\n";
}

inline std::string track_hold_netlist(double c1 = 0.5e-12, double c2 = 0.5e-12,
                                      double cin = 20e-15, double cl = 0.5e-12, double ron = 5e3,
                                      double gm = 1.54e-5, double gamma = 1.0) {
  return ".phases 2\n.ground 0\n"
         "C c1 a vg " + num(c1) + "\n"
         "C c2 vg out " + num(c2) + "\n"
         "C cin vg 0 " + num(cin) + "\n"
         "C cl vout 0 " + num(cl) + "\n"
         "SW s1 a 0 ron=" + num(ron) + " closed=1\n"
         "SW srst vg out ron=" + num(ron) + " closed=1\n"
         "SW sgnd out 0 ron=" + num(ron) + " closed=1\n"
         "SW s2 a 0 ron=" + num(ron) + " closed=2\n"
         "SW shold out vout ron=" + num(ron) + " closed=2\n"
         "OTA ota1 inp=0 inn=vg out=out gm=" + num(gm) + " gamma=" + num(gamma) + "\n"
         ".port out vout 0\n";
}

constexpr const char* sc_amplifier_plan_json = R"({
  "temperature_k": 300.0,
  "output_port": "out",
  "contributions": [
    {"type": "sampled_transfer", "sample_phase": 1, "capacitors": ["c1"],
     "inject_ota": "ota1", "transfer_phase": 2},
    {"type": "direct", "phase": 2}
  ]
})";

constexpr const char* track_hold_plan_json = R"({
  "temperature_k": 300.0,
  "output_port": "out",
  "c_ref": "c2",
  "contributions": [
    {"type": "sampled_transfer", "sample_phase": 1, "capacitors": ["c1", "c2", "cin"],
     "inject_ota": "ota1", "transfer_phase": 2},
    {"type": "direct", "phase": 2}
  ]
})";

// Physically complete amplifier budget: also counts the reset charges
// sampled on c2 and cin at the end of phase 1 (see decision notes).
constexpr const char* sc_amplifier_full_plan_json = R"({
  "temperature_k": 300.0,
  "output_port": "out",
  "c_ref": "c2",
  "contributions": [
    {"type": "sampled_transfer", "sample_phase": 1, "capacitors": ["c1", "c2", "cin"],
     "inject_ota": "ota1", "transfer_phase": 2},
    {"type": "direct", "phase": 2}
  ]
})";

struct Betas {
  double ota = 0, sw = 0;
};

// Exact amplifier beta factors (no large-gain approximations).
inline Betas amp_closed_form(double av, double ain, double al) {
  double d = av + al * (av + ain + 1.0) + ain;
  Betas b;
  b.ota = av * av / (av + ain + al) + (av + ain + 1.0) * (av + ain + 1.0) / d;
  b.sw = av * (ain + al) / (av + ain + al) + av / ((ain + al + ain * al) * d);
  return b;
}

inline Betas th_closed_form(double av, double ain, double al) {
  double d = av + al * (av + ain + 1.0) + ain;
  Betas b;
  b.ota = (av + ain + 1.0) * (av + ain + 1.0) / d;
  b.sw = (av + ain + 1.0) + (av + ain) / (al * d);
  return b;
}

// Random two-terminal series/parallel capacitor network with its exact
// reduction; realized with explicit internal nodes, ground at the l terminal.
struct SeriesParallel {
  scnoise::Circuit circuit;
  std::string k = "k", l = "l";
  double expected = 0;
};

inline SeriesParallel make_series_parallel(std::mt19937_64& rng) {
  SeriesParallel sp;
  sp.circuit.n_phases = 1;
  sp.circuit.ground = "l";
  int next_node = 0, next_cap = 0;
  std::uniform_real_distribution<double> logc(std::log(1e-14), std::log(1e-11));
  std::uniform_int_distribution<int> kind(0, 2);

  // returns the equivalent capacitance of the subtree it realizes
  auto build = [&](auto&& self, const std::string& a, const std::string& b, int depth) -> double {
    int k = depth >= 4 ? 0 : kind(rng);
    if (k == 0) {
      double v = std::exp(logc(rng));
      sp.circuit.elements.push_back(
          scnoise::Capacitor{"c" + std::to_string(next_cap++), a, b, v});
      return v;
    }
    if (k == 1) {
      std::string mid = "m" + std::to_string(next_node++);
      double ca = self(self, a, mid, depth + 1);
      double cb = self(self, mid, b, depth + 1);
      return ca * cb / (ca + cb);
    }
    return self(self, a, b, depth + 1) + self(self, a, b, depth + 1);
  };
  sp.expected = build(build, sp.k, sp.l, 0);
  sp.circuit.ports["p"] = {sp.k, sp.l};
  sp.circuit.finalize();
  return sp;
}

// Random RC one-port: capacitor spanning tree over 2..6 nodes (so every node
// has a capacitive path), plus up to 10 total elements with at least one
// resistor. Ground is node n0.
struct RandomRc {
  scnoise::Circuit circuit;
  scnoise::Port port;
};

inline RandomRc make_random_rc(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nn(2, 6);
  const int m = nn(rng);
  auto node = [](int i) { return "n" + std::to_string(i); };
  std::uniform_real_distribution<double> logc(std::log(10e-15), std::log(10e-12));
  std::uniform_real_distribution<double> logr(std::log(1e2), std::log(1e6));

  RandomRc out;
  out.circuit.n_phases = 1;
  out.circuit.ground = "n0";
  int cap_id = 0, res_id = 0;
  for (int i = 1; i < m; ++i) {
    std::uniform_int_distribution<int> parent(0, i - 1);
    out.circuit.elements.push_back(scnoise::Capacitor{"c" + std::to_string(cap_id++),
                                                      node(parent(rng)), node(i),
                                                      std::exp(logc(rng))});
  }
  std::uniform_int_distribution<int> n_extra(1, 10 - (m - 1));
  std::uniform_int_distribution<int> pick(0, m - 1);
  const int extras = n_extra(rng);
  for (int e = 0; e < extras; ++e) {
    int a = pick(rng), b = pick(rng);
    while (b == a) b = pick(rng);
    if (e == 0 || (rng() & 1))
      out.circuit.elements.push_back(scnoise::Resistor{"r" + std::to_string(res_id++), node(a),
                                                       node(b), std::exp(logr(rng))});
    else
      out.circuit.elements.push_back(scnoise::Capacitor{"c" + std::to_string(cap_id++), node(a),
                                                        node(b), std::exp(logc(rng))});
  }
  int k = pick(rng), l = pick(rng);
  while (l == k) l = pick(rng);
  out.port = {node(k), node(l)};
  out.circuit.ports["p"] = out.port;
  out.circuit.finalize();
  return out;
}

}  // namespace testsup
