#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scnoise/netlist.hpp"

namespace scnoise {

// Output-referred variance evaluated directly at the end of `phase`.
struct DirectContribution {
  int phase = 1;
  bool operator==(const DirectContribution&) const = default;
};

// Noise sampled on `capacitors` at the end of sample_phase, converted to
// charge, injected at the OTA virtual ground and transferred to the output
// during transfer_phase.
struct SampledTransferContribution {
  int sample_phase = 1;
  std::vector<std::string> capacitors;
  std::string inject_ota;
  int transfer_phase = 2;
  bool operator==(const SampledTransferContribution&) const = default;
};

using Contribution = std::variant<DirectContribution, SampledTransferContribution>;

struct NoiseBudget {
  double temperature_k = 300.0;
  std::string output_port;
  std::optional<std::string> c_ref;  // normalization reference capacitor (optional override)
  std::vector<Contribution> contributions;
};

// Parses the JSON plan document (see README for the schema) and resolves all
// names and phases against `circuit`.
NoiseBudget parse_plan(std::string_view json_text, const Circuit& circuit);

}  // namespace scnoise
