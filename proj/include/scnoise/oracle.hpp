#pragma once

#include <complex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "scnoise/netlist.hpp"

namespace scnoise {

struct NoiseSource {
  std::string label;      // "sw s1", "r r1", "ota ota1"
  int na = -1, nb = -1;   // injection node indices, -1 = ground; +1A into na, out of nb
  double psd = 0;         // one-sided current PSD, A^2/Hz
};

// Exact small-signal MNA of one phase: (G + j*2*pi*f*C) x = i. Closed
// switches are stamped as conductances with their 4kT/Ron noise source, OTAs
// as a VCCS (current gm*(V(inp)-V(inn)) into `out`) with a 4kT*gamma*gm
// source from out to ground.
struct SmallSignalSystem {
  std::vector<std::string> node_names;             // row/col -> node, ground excluded
  std::unordered_map<std::string, int> node_index; // ground maps to -1
  Eigen::MatrixXd G;  // siemens
  Eigen::MatrixXd C;  // farads
  std::vector<NoiseSource> noise_sources;
  // Element connectivity (node-index pairs, -1 = ground); OTAs contribute
  // input-output coupling edges. Used for loop/decoupling analysis.
  std::vector<std::pair<int, int>> topology_edges;

  int size() const { return static_cast<int>(node_names.size()); }
  int index_of(const std::string& node) const;  // -1 for ground, throws on unknown
};

SmallSignalSystem build_system(const Circuit& circuit, int phase, double temperature_k);

// Transimpedance from noise source `source_index` to the port voltage
// V(k) - V(l) at frequency f, by one complex MNA solve.
std::complex<double> transfer_impedance(const SmallSignalSystem& sys, int source_index,
                                        const Port& port, double f_hz);

struct VarianceQuadrature {
  double rel_tol = 1e-8;
  double f_min = 1e-2;  // Hz
  double f_max = 0;     // Hz; 0 = auto (1e4 / (2*pi*min time constant), then extended)
};

struct IntegrationResult {
  double total = 0;                 // V^2
  std::vector<double> per_source;   // V^2, same order as sys.noise_sources
  long evaluations = 0;             // integrand samples used
  double f_max_used = 0;            // Hz, after tail extension
  bool converged = false;           // tail decade fell below rel_tol of the total
};

// Total port noise variance: sum over sources of the PSD-weighted |Z|^2
// integral over (f_min, f_max), adaptive Simpson on a log-frequency axis,
// f_max extended decade by decade until the tail is negligible.
IntegrationResult integrate_variance(const SmallSignalSystem& sys, const Port& port,
                                     const VarianceQuadrature& quad);

// Smallest decaying time constant of the system (from the eigenvalues of the
// reduced C^-1 G), or nullopt when the phase has no decaying dynamics.
std::optional<double> min_time_constant(const SmallSignalSystem& sys);

}  // namespace scnoise
