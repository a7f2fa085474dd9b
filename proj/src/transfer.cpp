#include "scnoise/transfer.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "scnoise/errors.hpp"
#include "scnoise/oracle.hpp"

namespace scnoise {
namespace {

// Capacitors whose merged endpoints are exactly {ota.out group, ota.inn
// group} in the feedback view of `phase`; their sum is the feedback
// capacitance used as the default beta-normalization reference.
double feedback_capacitance(const Circuit& circuit, int phase, const Ota& ota) {
  PhaseView view = build_view(circuit, phase, ViewKind::Feedback);
  int go = view.group_of(ota.out);
  int gi = view.group_of(ota.inn);
  if (go == gi) return 0;
  double sum = 0;
  for (const Element& e : circuit.elements) {
    const auto* cap = std::get_if<Capacitor>(&e);
    if (!cap) continue;
    int a = view.group_of(cap->n1);
    int b = view.group_of(cap->n2);
    if ((a == go && b == gi) || (a == gi && b == go)) sum += cap->farads;
  }
  return sum;
}

std::string sampled_label(const SampledTransferContribution& st) {
  std::ostringstream os;
  os << "sampled(phase " << st.sample_phase << " -> " << st.transfer_phase << " via "
     << st.inject_ota << ", caps";
  for (const auto& c : st.capacitors) os << " " << c;
  os << ")";
  return os.str();
}

}  // namespace

double charge_to_output_gain(const Circuit& circuit, int phase, const std::string& inject_ota,
                             const Port& port) {
  auto otas = circuit.otas();
  if (otas.size() != 1) fail(Errc::MultipleOtas, "charge transfer requires exactly one OTA");
  const Ota* ota = circuit.find_ota(inject_ota);
  if (!ota) fail(Errc::UnresolvedName, "unknown ota '" + inject_ota + "'");

  PhaseView view = build_view(circuit, phase, ViewKind::Feedback);
  const int gg = view.ground_group();
  const int g_vg = view.group_of(ota->inn);
  const int g_out = view.group_of(ota->out);
  const int g_inp = view.group_of(ota->inp);
  if (g_vg == gg) return 0.0;  // charge lands on ground, no response
  if (g_out == gg)
    fail(Errc::NoFeedbackPath, "ota output is shorted to ground in phase " + std::to_string(phase));
  if (g_inp == g_vg)
    fail(Errc::NoFeedbackPath, "ota inputs are shorted together in phase " + std::to_string(phase));

  // Components reachable from the loop; a port node outside them sees no
  // response and contributes 0.
  std::vector<std::vector<int>> adj(view.group_count());
  for (const auto& c : view.capacitors()) {
    adj[c.a].push_back(c.b);
    adj[c.b].push_back(c.a);
  }
  std::vector<char> kept(view.group_count(), 0);
  std::vector<int> stack = {g_vg, g_out, gg};
  for (int g : stack) kept[g] = 1;
  while (!stack.empty()) {
    int g = stack.back();
    stack.pop_back();
    for (int h : adj[g])
      if (!kept[h]) {
        kept[h] = 1;
        stack.push_back(h);
      }
  }

  // Unknowns: every kept group but ground. Equations: charge balance with
  // the unit injection at the virtual-ground group for every unknown except
  // the OTA output (the OTA supplies that group's current), plus the ideal
  // input constraint V(inp) == V(inn).
  std::vector<int> unknown;
  std::vector<int> col(view.group_count(), -1);
  for (int g = 0; g < view.group_count(); ++g)
    if (kept[g] && g != gg) {
      col[g] = static_cast<int>(unknown.size());
      unknown.push_back(g);
    }
  const int m = static_cast<int>(unknown.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);

  std::vector<int> row(view.group_count(), -1);
  int r = 0;
  for (int g : unknown)
    if (g != g_out) row[g] = r++;
  for (const auto& c : view.capacitors()) {
    if (!kept[c.a] || !kept[c.b]) continue;
    int ra = row[c.a] >= 0 ? row[c.a] : -1;
    int rb = row[c.b] >= 0 ? row[c.b] : -1;
    if (ra >= 0) {
      a(ra, col[c.a]) += c.farads;
      if (col[c.b] >= 0) a(ra, col[c.b]) -= c.farads;
    }
    if (rb >= 0) {
      a(rb, col[c.b]) += c.farads;
      if (col[c.a] >= 0) a(rb, col[c.a]) -= c.farads;
    }
  }
  if (row[g_vg] >= 0) rhs(row[g_vg]) = 1.0;
  // g_vg == g_out cannot happen with a charge equation (row skipped), in
  // which case the injection is absorbed by the OTA and the constraint row
  // alone determines the solution.
  if (col[g_inp] >= 0) a(r, col[g_inp]) += 1.0;
  a(r, col[g_vg]) -= 1.0;
  ++r;
  if (r != m) fail(Errc::IndeterminateSolve, "charge-transfer system is not square");

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd x = lu.solve(rhs);
  double scale = a.norm() * std::max(1.0, x.norm()) + rhs.norm();
  if (!x.allFinite() || (a * x - rhs).norm() > 1e-9 * scale)
    fail(Errc::IndeterminateSolve, "no capacitor closes the feedback loop in phase " +
                                       std::to_string(phase));

  auto potential_of = [&](const std::string& node) {
    int g = view.group_of(node);
    if (!kept[g] || col[g] < 0) return 0.0;  // ground or unreachable
    return x(col[g]);
  };
  return potential_of(port.k) - potential_of(port.l);
}

SampledCharge sampled_charge_variance(const Circuit& circuit, int phase,
                                      const std::string& capacitor, double temperature_k) {
  const Capacitor* cap = circuit.find_capacitor(capacitor);
  if (!cap) fail(Errc::UnresolvedName, "unknown capacitor '" + capacitor + "'");
  SampledCharge sc;
  sc.capacitor = capacitor;
  sc.phase = phase;
  if (cap->n1 == cap->n2) {
    // self-connected capacitor carries no differential voltage
    sc.breakdown.c_inf = ExtendedCapacitance::infinite();
    sc.breakdown.c_inf_prime = ExtendedCapacitance::infinite();
    sc.breakdown.c_zero = ExtendedCapacitance::infinite();
    return sc;
  }
  sc.breakdown = ota_variance(circuit, phase, Port{cap->n1, cap->n2}, temperature_k);
  sc.voltage_variance = sc.breakdown.variance;
  sc.variance_q2 = cap->farads * cap->farads * sc.voltage_variance;
  return sc;
}

NoiseReport evaluate_budget(const Circuit& circuit, const NoiseBudget& budget) {
  if (budget.contributions.empty()) fail(Errc::PlanInvalid, "budget has no contributions");
  const Port& port = circuit.port(budget.output_port);
  const double temperature = budget.temperature_k;
  const double kt = k_boltzmann * temperature;

  NoiseReport report;
  report.temperature_k = temperature;
  report.output_port = budget.output_port;

  for (const Contribution& contrib : budget.contributions) {
    ContributionRecord rec;
    if (const auto* direct = std::get_if<DirectContribution>(&contrib)) {
      BodeBreakdown bd = ota_variance(circuit, direct->phase, port, temperature);
      rec.label = "direct(phase " + std::to_string(direct->phase) + ")";
      rec.variance = bd.variance;
      rec.ota_part = bd.ota_term;
      rec.switch_part = bd.switch_term;
      rec.ota_gamma_slope = bd.ota_term_gamma_slope;
      rec.breakdown = bd;
    } else {
      const auto& st = std::get<SampledTransferContribution>(contrib);
      rec.label = sampled_label(st);
      rec.charge_gain = charge_to_output_gain(circuit, st.transfer_phase, st.inject_ota, port);
      const double g2 = rec.charge_gain * rec.charge_gain;
      for (const std::string& cap_name : st.capacitors) {
        SampledCharge sc =
            sampled_charge_variance(circuit, st.sample_phase, cap_name, temperature);
        const Capacitor* cap = circuit.find_capacitor(cap_name);
        const double c2 = cap->farads * cap->farads;
        rec.variance += g2 * sc.variance_q2;
        rec.ota_part += g2 * c2 * sc.breakdown.ota_term;
        rec.switch_part += g2 * c2 * sc.breakdown.switch_term;
        rec.ota_gamma_slope += g2 * c2 * sc.breakdown.ota_term_gamma_slope;
        rec.sampled.push_back(std::move(sc));
      }
      // Sampled charges are summed as uncorrelated; surface the assumption
      // whenever two listed capacitors actually touch.
      for (std::size_t i = 0; i < st.capacitors.size(); ++i) {
        for (std::size_t j = i + 1; j < st.capacitors.size(); ++j) {
          const Capacitor* a = circuit.find_capacitor(st.capacitors[i]);
          const Capacitor* b = circuit.find_capacitor(st.capacitors[j]);
          std::set<std::string> shared;
          for (const std::string& n : {a->n1, a->n2})
            if (n != circuit.ground && (n == b->n1 || n == b->n2)) shared.insert(n);
          if (!shared.empty())
            report.correlation_warnings.push_back(
                "capacitors " + a->name + " and " + b->name + " share node '" + *shared.begin() +
                "' in phase " + std::to_string(st.sample_phase) +
                "; sampled noises assumed uncorrelated");
        }
      }
    }
    rec.rms = std::sqrt(rec.variance);
    report.total_variance += rec.variance;
    report.contributions.push_back(std::move(rec));
  }
  report.total_rms = std::sqrt(report.total_variance);

  // beta normalization: reference capacitor from the plan override, else the
  // OTA feedback capacitance in the (first) transfer phase.
  double c_ref = 0;
  if (budget.c_ref) {
    c_ref = circuit.find_capacitor(*budget.c_ref)->farads;
  } else if (auto otas = circuit.otas(); otas.size() == 1) {
    int phase = 0;
    for (const Contribution& contrib : budget.contributions) {
      if (const auto* st = std::get_if<SampledTransferContribution>(&contrib)) {
        phase = st->transfer_phase;
        break;
      }
    }
    if (phase == 0)
      phase = std::get<DirectContribution>(budget.contributions.front()).phase;
    c_ref = feedback_capacitance(circuit, phase, *otas.front());
  }
  if (c_ref > 0) {
    Normalization norm;
    norm.c_ref = c_ref;
    for (const ContributionRecord& rec : report.contributions) {
      norm.beta_ota += rec.ota_gamma_slope * c_ref / kt;
      norm.beta_sw += rec.switch_part * c_ref / kt;
    }
    report.normalized = norm;
  }
  return report;
}

double evaluate_budget_oracle(const Circuit& circuit, const NoiseBudget& budget, double rel_tol) {
  if (budget.contributions.empty()) fail(Errc::PlanInvalid, "budget has no contributions");
  const Port& port = circuit.port(budget.output_port);
  VarianceQuadrature quad;
  quad.rel_tol = rel_tol;

  double total = 0;
  for (const Contribution& contrib : budget.contributions) {
    if (const auto* direct = std::get_if<DirectContribution>(&contrib)) {
      SmallSignalSystem sys = build_system(circuit, direct->phase, budget.temperature_k);
      total += integrate_variance(sys, port, quad).total;
    } else {
      const auto& st = std::get<SampledTransferContribution>(contrib);
      double gain = charge_to_output_gain(circuit, st.transfer_phase, st.inject_ota, port);
      SmallSignalSystem sys = build_system(circuit, st.sample_phase, budget.temperature_k);
      for (const std::string& cap_name : st.capacitors) {
        const Capacitor* cap = circuit.find_capacitor(cap_name);
        double v2 = integrate_variance(sys, Port{cap->n1, cap->n2}, quad).total;
        total += gain * gain * cap->farads * cap->farads * v2;
      }
    }
  }
  return total;
}

}  // namespace scnoise
