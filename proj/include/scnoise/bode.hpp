#pragma once

#include <string>

#include "scnoise/capnet.hpp"

namespace scnoise {

inline constexpr double k_boltzmann = 1.380649e-23;  // J/K, exact SI value

// Per-port result of the extended Bode theorem:
//   variance = kT * [ 1/Cinf + (gamma/h_fb - 1)/Cinf' - (gamma/h_fb)/C0 ]
// split into the switch part kT*(1/Cinf - 1/Cinf') and the OTA part
// kT*(gamma/h_fb)*(1/Cinf' - 1/C0). variance == ota_term + switch_term.
struct BodeBreakdown {
  ExtendedCapacitance c_inf;
  ExtendedCapacitance c_inf_prime;
  ExtendedCapacitance c_zero;
  double h_fb = 1.0;
  double gamma = 0.0;
  double variance = 0.0;     // V^2
  double ota_term = 0.0;     // V^2
  double switch_term = 0.0;  // V^2
  // d(ota_term)/d(gamma); lets callers split beta factors even at gamma = 0.
  double ota_term_gamma_slope = 0.0;
};

// Feedback factor of the OTA in this phase: the capacitive-divider gain from
// the OTA output back to its differential input, read as V(inn) - V(inp) so
// that a stabilizing loop gives a value in (0, 1]. Switch resistances never
// enter this solve.
double compute_hfb(const Circuit& circuit, int phase, const std::string& ota_name);

// Classic Bode theorem kT*(1/Cinf - 1/C0) for OTA-free circuits.
double passive_variance(const Circuit& circuit, int phase, const Port& port,
                        double temperature_k);

// Extended Bode theorem for circuits with exactly one OTA; dispatches to the
// passive form when the circuit has none. h_fb is only evaluated when the
// OTA actually contributes (1/Cinf' != 1/C0).
BodeBreakdown ota_variance(const Circuit& circuit, int phase, const Port& port,
                           double temperature_k);

}  // namespace scnoise
