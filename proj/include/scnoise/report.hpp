#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "scnoise/mcsim.hpp"
#include "scnoise/oracle.hpp"
#include "scnoise/transfer.hpp"

namespace scnoise {

inline constexpr const char* tool_version = "0.1.0";

// Every output document embeds one of these.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;  // role -> path
  nlohmann::json defaults = nlohmann::json::object();
};

// Rounds to 9 significant digits; all numbers in output documents go through
// this so reports are diff-friendly.
double round_sig9(double x);

std::uint64_t fnv1a64_file(const std::string& path);  // throws FileNotFound

nlohmann::json manifest_json(const RunManifest& m);
nlohmann::json report_json(const NoiseReport& report, const RunManifest& m);
nlohmann::json oracle_json(const SmallSignalSystem& sys, const Port& port, int phase,
                           double temperature_k, const IntegrationResult& result,
                           const VarianceQuadrature& quad, const RunManifest& m);
nlohmann::json mc_json(const McConfig& cfg, double temperature_k, const McEstimate& est,
                       const RunManifest& m);

}  // namespace scnoise
