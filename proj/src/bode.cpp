#include "scnoise/bode.hpp"

#include <cmath>
#include <string>

#include "scnoise/errors.hpp"

namespace scnoise {
namespace {

// 1/Cinf - 1/Cinf' and friends must be >= 0 (merging never decreases a port
// capacitance). A clearly negative difference is a defect; sub-roundoff
// wobble from the two independent solves is clamped to zero.
double nonneg_recip_diff(double a, double b, const char* what) {
  double d = a - b;
  if (d < 0) {
    double scale = std::max({std::abs(a), std::abs(b), 1.0});
    if (d < -1e-9 * scale)
      fail(Errc::NegativeVariance, std::string("negative ") + what + " difference");
    return 0.0;
  }
  return d;
}

}  // namespace

double compute_hfb(const Circuit& circuit, int phase, const std::string& ota_name) {
  const Ota* ota = circuit.find_ota(ota_name);
  if (!ota) fail(Errc::UnresolvedName, "unknown ota '" + ota_name + "'");
  PhaseView view = build_view(circuit, phase, ViewKind::Feedback);
  if (view.group_of(ota->out) == view.ground_group())
    fail(Errc::NoFeedbackPath, "ota '" + ota_name + "' output is shorted to ground in phase " +
                                   std::to_string(phase));
  double gain;
  try {
    gain = divider_gain(view, ota->out, ota->inn, ota->inp);
  } catch (const Error& e) {
    if (e.code() == Errc::SenseNodeIsolated)
      fail(Errc::NoFeedbackPath, "ota '" + ota_name + "' input is capacitively isolated in phase " +
                                     std::to_string(phase));
    throw;
  }
  if (!(gain > 0))
    fail(Errc::NoFeedbackPath, "ota '" + ota_name + "' feedback gain is not positive in phase " +
                                   std::to_string(phase));
  return std::min(gain, 1.0);
}

double passive_variance(const Circuit& circuit, int phase, const Port& port,
                        double temperature_k) {
  if (!circuit.otas().empty())
    fail(Errc::OtaPresent, "passive_variance requires an OTA-free circuit");
  auto c_inf = equivalent_capacitance(build_view(circuit, phase, ViewKind::CInf), port.k, port.l);
  auto c_zero = equivalent_capacitance(build_view(circuit, phase, ViewKind::CZero), port.k, port.l);
  double diff = nonneg_recip_diff(c_inf.reciprocal(), c_zero.reciprocal(), "1/Cinf - 1/C0");
  return k_boltzmann * temperature_k * diff;
}

BodeBreakdown ota_variance(const Circuit& circuit, int phase, const Port& port,
                           double temperature_k) {
  auto otas = circuit.otas();
  if (otas.size() > 1) fail(Errc::MultipleOtas, "circuit has more than one OTA");

  BodeBreakdown bd;
  bd.c_inf = equivalent_capacitance(build_view(circuit, phase, ViewKind::CInf), port.k, port.l);
  bd.c_inf_prime =
      equivalent_capacitance(build_view(circuit, phase, ViewKind::CInfPrime), port.k, port.l);
  bd.c_zero = equivalent_capacitance(build_view(circuit, phase, ViewKind::CZero), port.k, port.l);

  const double kt = k_boltzmann * temperature_k;
  bd.switch_term =
      kt * nonneg_recip_diff(bd.c_inf.reciprocal(), bd.c_inf_prime.reciprocal(), "switch");

  if (otas.empty()) {
    // Passive circuit: the whole value is the switch term and C0 replaces
    // Cinf' in it.
    bd.switch_term =
        kt * nonneg_recip_diff(bd.c_inf.reciprocal(), bd.c_zero.reciprocal(), "passive");
    bd.variance = bd.switch_term;
    return bd;
  }

  const Ota& ota = *otas.front();
  bd.gamma = ota.gamma;
  double ota_caps =
      nonneg_recip_diff(bd.c_inf_prime.reciprocal(), bd.c_zero.reciprocal(), "ota");
  if (ota_caps > 0) {
    // Only now does h_fb matter; this keeps ports whose OTA contribution
    // vanishes (e.g. output reset phases) total.
    bd.h_fb = compute_hfb(circuit, phase, ota.name);
    bd.ota_term_gamma_slope = kt / bd.h_fb * ota_caps;
    bd.ota_term = bd.gamma * bd.ota_term_gamma_slope;
  }
  bd.variance = bd.ota_term + bd.switch_term;
  return bd;
}

}  // namespace scnoise
