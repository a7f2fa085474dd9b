#include "scnoise/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include "scnoise/errors.hpp"

namespace scnoise {
namespace {

using nlohmann::json;

json num(double x) { return round_sig9(x); }

json extended_cap_json(const ExtendedCapacitance& c) {
  if (c.is_infinite) return "inf";
  return num(c.farads);
}

json breakdown_json(const BodeBreakdown& bd) {
  return json{{"c_inf_f", extended_cap_json(bd.c_inf)},
              {"c_inf_prime_f", extended_cap_json(bd.c_inf_prime)},
              {"c_zero_f", extended_cap_json(bd.c_zero)},
              {"h_fb", num(bd.h_fb)},
              {"gamma", num(bd.gamma)},
              {"variance_v2", num(bd.variance)},
              {"ota_term_v2", num(bd.ota_term)},
              {"switch_term_v2", num(bd.switch_term)}};
}

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

double round_sig9(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8e", x);
  return std::strtod(buf, nullptr);
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::FileNotFound, "cannot open '" + path + "'");
  std::uint64_t hash = 1469598103934665603ull;
  char chunk[4096];
  while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(chunk[i]);
      hash *= 1099511628211ull;
    }
    if (!in) break;
  }
  return hash;
}

json manifest_json(const RunManifest& m) {
  json inputs = json::array();
  for (const auto& [role, path] : m.inputs) {
    char digest[24];
    std::snprintf(digest, sizeof digest, "%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(path)));
    inputs.push_back(json{{"role", role}, {"path", path}, {"digest_fnv1a64", digest}});
  }
  return json{{"tool_version", tool_version},
              {"command", m.command},
              {"inputs", inputs},
              {"defaults", m.defaults},
              {"timestamp_utc", timestamp_utc()}};
}

json report_json(const NoiseReport& report, const RunManifest& m) {
  json contributions = json::array();
  for (const ContributionRecord& rec : report.contributions) {
    json entry{{"label", rec.label},
               {"variance_v2", num(rec.variance)},
               {"rms_v", num(rec.rms)},
               {"ota_part_v2", num(rec.ota_part)},
               {"switch_part_v2", num(rec.switch_part)}};
    if (rec.breakdown) entry["breakdown"] = breakdown_json(*rec.breakdown);
    if (!rec.sampled.empty()) {
      entry["charge_gain_v_per_c"] = num(rec.charge_gain);
      json sampled = json::array();
      for (const SampledCharge& sc : rec.sampled)
        sampled.push_back(json{{"capacitor", sc.capacitor},
                               {"phase", sc.phase},
                               {"voltage_variance_v2", num(sc.voltage_variance)},
                               {"charge_variance_c2", num(sc.variance_q2)}});
      entry["sampled"] = sampled;
    }
    contributions.push_back(std::move(entry));
  }
  json out{{"manifest", manifest_json(m)},
           {"temperature_k", num(report.temperature_k)},
           {"output_port", report.output_port},
           {"contributions", contributions},
           {"total_variance_v2", num(report.total_variance)},
           {"total_rms_v", num(report.total_rms)},
           {"correlation_warnings", report.correlation_warnings}};
  if (report.normalized)
    out["normalized"] = json{{"c_ref_f", num(report.normalized->c_ref)},
                             {"beta_ota", num(report.normalized->beta_ota)},
                             {"beta_sw", num(report.normalized->beta_sw)}};
  return out;
}

json oracle_json(const SmallSignalSystem& sys, const Port& port, int phase, double temperature_k,
                 const IntegrationResult& result, const VarianceQuadrature& quad,
                 const RunManifest& m) {
  json sources = json::array();
  for (std::size_t i = 0; i < sys.noise_sources.size(); ++i)
    sources.push_back(json{{"label", sys.noise_sources[i].label},
                           {"psd_a2_per_hz", num(sys.noise_sources[i].psd)},
                           {"variance_v2", num(result.per_source[i])},
                           {"rms_v", num(std::sqrt(result.per_source[i]))}});
  return json{{"manifest", manifest_json(m)},
              {"phase", phase},
              {"port", json{{"k", port.k}, {"l", port.l}}},
              {"temperature_k", num(temperature_k)},
              {"sources", sources},
              {"total_variance_v2", num(result.total)},
              {"total_rms_v", num(std::sqrt(result.total))},
              {"quadrature", json{{"rel_tol", num(quad.rel_tol)},
                                  {"f_min_hz", num(quad.f_min)},
                                  {"f_max_hz", num(result.f_max_used)},
                                  {"samples", result.evaluations},
                                  {"converged", result.converged}}}};
}

json mc_json(const McConfig& cfg, double temperature_k, const McEstimate& est,
             const RunManifest& m) {
  return json{{"manifest", manifest_json(m)},
              {"config", json{{"period_s", num(cfg.period)},
                              {"dt_s", num(cfg.dt)},
                              {"n_periods", cfg.n_periods},
                              {"n_discard", cfg.n_discard},
                              {"seed", cfg.seed},
                              {"sample_phase", cfg.sample_phase},
                              {"port", json{{"k", cfg.sample_port.k}, {"l", cfg.sample_port.l}}},
                              {"temperature_k", num(temperature_k)}}},
              {"estimate", json{{"variance_v2", num(est.variance)},
                                {"rms_v", num(est.rms)},
                                {"n_samples", est.n_samples},
                                {"ci95_rel", num(est.ci95_rel)},
                                {"charge_error_max", num(est.charge_error_max)}}}};
}

}  // namespace scnoise
