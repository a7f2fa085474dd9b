#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scnoise/bode.hpp"
#include "scnoise/plan.hpp"

namespace scnoise {

struct SampledCharge {
  std::string capacitor;
  int phase = 1;
  double variance_q2 = 0;       // C^2, = farads^2 * voltage_variance
  double voltage_variance = 0;  // V^2 across the capacitor, kept for audit
  BodeBreakdown breakdown;
};

struct ContributionRecord {
  std::string label;
  double variance = 0;  // V^2 at the output port
  double rms = 0;       // V
  std::optional<BodeBreakdown> breakdown;  // present for direct entries
  std::vector<SampledCharge> sampled;      // present for sampled-transfer entries
  double charge_gain = 0;                  // V/C, sampled-transfer entries only
  double ota_part = 0;                     // V^2 traced to the OTA source
  double switch_part = 0;                  // V^2 traced to switch/resistor sources
  double ota_gamma_slope = 0;              // d(ota_part)/d(gamma)
};

struct Normalization {
  double c_ref = 0;    // farads
  double beta_ota = 0;  // gamma*beta_ota + beta_sw == total_variance*c_ref/(kB*T)
  double beta_sw = 0;
};

struct NoiseReport {
  double temperature_k = 300;
  std::string output_port;
  std::vector<ContributionRecord> contributions;
  double total_variance = 0;  // V^2
  double total_rms = 0;       // V
  std::optional<Normalization> normalized;
  // Set when two capacitors listed in one sampled-transfer entry share a
  // non-ground node: their sampled noises are summed as uncorrelated, which
  // is then an assumption rather than a fact.
  std::vector<std::string> correlation_warnings;
};

// Ideal-OTA (infinite gain) response at the port to a unit charge injected at
// the OTA virtual ground during `phase`, in V/C. The OTA output is a free
// unknown constrained by V(inp) == V(inn).
double charge_to_output_gain(const Circuit& circuit, int phase,
                             const std::string& inject_ota, const Port& port);

// Charge variance sampled on one capacitor at the end of `phase`:
// C^2 times the voltage variance across its own terminals.
SampledCharge sampled_charge_variance(const Circuit& circuit, int phase,
                                      const std::string& capacitor, double temperature_k);

NoiseReport evaluate_budget(const Circuit& circuit, const NoiseBudget& budget);

// Same budget, but every variance comes from frequency-domain MNA
// integration instead of the Bode theorem (charge transfer still uses the
// ideal-OTA gain). This is the independent cross-check path.
double evaluate_budget_oracle(const Circuit& circuit, const NoiseBudget& budget, double rel_tol);

}  // namespace scnoise
