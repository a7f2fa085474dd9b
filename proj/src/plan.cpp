#include "scnoise/plan.hpp"

#include <json.hpp>

#include "scnoise/errors.hpp"

namespace scnoise {
namespace {

using nlohmann::json;

const json& member(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(Errc::PlanInvalid, std::string("plan: missing field '") + key + "'");
  return *it;
}

int phase_in_range(const json& j, const char* key, const Circuit& circuit) {
  const json& v = member(j, key);
  if (!v.is_number_integer()) fail(Errc::PlanInvalid, std::string("plan: '") + key + "' must be an integer");
  int phase = v.get<int>();
  if (phase < 1 || phase > circuit.n_phases)
    fail(Errc::PlanInvalid, std::string("plan: '") + key + "' = " + std::to_string(phase) +
                                " is outside 1.." + std::to_string(circuit.n_phases));
  return phase;
}

}  // namespace

NoiseBudget parse_plan(std::string_view json_text, const Circuit& circuit) {
  json root = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded() || !root.is_object())
    fail(Errc::PlanInvalid, "plan: not a valid JSON object");

  NoiseBudget budget;
  const json& temp = member(root, "temperature_k");
  if (!temp.is_number() || !(temp.get<double>() > 0))
    fail(Errc::PlanInvalid, "plan: temperature_k must be a number > 0");
  budget.temperature_k = temp.get<double>();

  const json& port = member(root, "output_port");
  if (!port.is_string()) fail(Errc::PlanInvalid, "plan: output_port must be a string");
  budget.output_port = port.get<std::string>();
  circuit.port(budget.output_port);  // UnresolvedName if absent

  if (auto it = root.find("c_ref"); it != root.end()) {
    if (!it->is_string()) fail(Errc::PlanInvalid, "plan: c_ref must be a capacitor name");
    std::string name = it->get<std::string>();
    if (!circuit.find_capacitor(name))
      fail(Errc::UnresolvedName, "plan: c_ref capacitor '" + name + "' not in circuit");
    budget.c_ref = name;
  }

  const json& contribs = member(root, "contributions");
  if (!contribs.is_array() || contribs.empty())
    fail(Errc::PlanInvalid, "plan: contributions must be a non-empty array");

  for (const json& entry : contribs) {
    if (!entry.is_object()) fail(Errc::PlanInvalid, "plan: contribution entries must be objects");
    const json& type = member(entry, "type");
    if (type == "direct") {
      budget.contributions.push_back(DirectContribution{phase_in_range(entry, "phase", circuit)});
    } else if (type == "sampled_transfer") {
      SampledTransferContribution st;
      st.sample_phase = phase_in_range(entry, "sample_phase", circuit);
      st.transfer_phase = phase_in_range(entry, "transfer_phase", circuit);
      const json& caps = member(entry, "capacitors");
      if (!caps.is_array() || caps.empty())
        fail(Errc::PlanInvalid, "plan: capacitors must be a non-empty array of names");
      for (const json& name : caps) {
        if (!name.is_string()) fail(Errc::PlanInvalid, "plan: capacitor names must be strings");
        std::string cap = name.get<std::string>();
        if (!circuit.find_capacitor(cap))
          fail(Errc::UnresolvedName, "plan: capacitor '" + cap + "' not in circuit");
        st.capacitors.push_back(std::move(cap));
      }
      const json& ota = member(entry, "inject_ota");
      if (!ota.is_string()) fail(Errc::PlanInvalid, "plan: inject_ota must be a string");
      st.inject_ota = ota.get<std::string>();
      if (!circuit.find_ota(st.inject_ota))
        fail(Errc::UnresolvedName, "plan: ota '" + st.inject_ota + "' not in circuit");
      budget.contributions.push_back(std::move(st));
    } else {
      fail(Errc::PlanInvalid, "plan: contribution type must be \"direct\" or \"sampled_transfer\"");
    }
  }
  return budget;
}

}  // namespace scnoise
