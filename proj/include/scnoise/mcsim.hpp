#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scnoise/netlist.hpp"

namespace scnoise {

struct McConfig {
  double period = 1e-6;               // s, clock period
  std::vector<double> phase_split;    // fraction per phase; empty = equal split
  double dt = 0;                      // s, must be <= (min time constant)/10
  long n_periods = 4100;
  long n_discard = 100;               // initial periods dropped (>= 2)
  std::uint64_t seed = 1;
  int sample_phase = 1;               // port voltage recorded at the end of this phase
  Port sample_port;
};

struct McEstimate {
  double variance = 0;     // V^2
  double rms = 0;          // V
  long n_samples = 0;
  double ci95_rel = 0;     // ~ 1.96*sqrt(2/n) for the variance of Gaussian samples
  // Largest relative node-charge change observed across any phase boundary;
  // reconfiguration preserves capacitor charges, so this should be 0.
  double charge_error_max = 0;
};

// Transient-noise Monte Carlo: backward-Euler steps of each phase's
// small-signal system, every noise source drawn per step as an independent
// Gaussian current of variance psd/(2*dt). Deterministic for a fixed seed
// (mt19937_64 + Box-Muller; see README).
McEstimate run_mc(const Circuit& circuit, const McConfig& cfg, double temperature_k);

// n_runs independent run_mc executions with seeds cfg.seed, cfg.seed+1, ...
// merged by pooled variance. Runs share nothing, so they execute on separate
// threads; the merge order is fixed, making the result seed-deterministic.
McEstimate run_mc_pooled(const Circuit& circuit, const McConfig& cfg, double temperature_k,
                         int n_runs);

// Transconductance that keeps the amplifier settling time equal to t_set:
// beta = C2/(C1+C2+Cin), Cout = CL + (1-beta)*C2, Ceq = Cout/beta,
// gm = Ceq/t_set.
double settling_gm(double c1, double c2, double cin, double cl, double t_set);

}  // namespace scnoise
