#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace scnoise {

struct Capacitor {
  std::string name;
  std::string n1, n2;
  double farads = 0;
  bool operator==(const Capacitor&) const = default;
};

struct Resistor {
  std::string name;
  std::string n1, n2;
  double ohms = 0;
  bool operator==(const Resistor&) const = default;
};

struct Switch {
  std::string name;
  std::string n1, n2;
  double ron = 0;
  std::set<int> closed_in;
  bool closed(int phase) const { return closed_in.count(phase) != 0; }
  bool operator==(const Switch&) const = default;
};

// Single-ended VCCS model: current gm*(V(inp)-V(inn)) flows into `out`.
struct Ota {
  std::string name;
  std::string inp, inn, out;
  double gm = 0;
  double gamma = 0;  // thermal noise excess factor, >= 0 (0 = noiseless)
  bool operator==(const Ota&) const = default;
};

using Element = std::variant<Capacitor, Resistor, Switch, Ota>;

struct Port {
  std::string k, l;
  bool operator==(const Port&) const = default;
};

struct Circuit {
  int n_phases = 1;
  std::string ground;
  std::vector<Element> elements;
  std::map<std::string, Port> ports;
  std::set<std::string> nodes;  // union of declared and referenced nodes, set by finalize()

  // Derives the node set and checks all structural invariants. parse_netlist
  // calls this; programmatically built circuits must call it before use.
  void finalize();

  const Capacitor* find_capacitor(std::string_view name) const;
  Capacitor* find_capacitor(std::string_view name);
  const Ota* find_ota(std::string_view name) const;
  Ota* find_ota(std::string_view name);
  Switch* find_switch(std::string_view name);
  Resistor* find_resistor(std::string_view name);
  std::vector<const Ota*> otas() const;
  const Port& port(std::string_view name) const;  // throws UnresolvedName

  bool operator==(const Circuit&) const = default;
};

Circuit parse_netlist(std::string_view text);

// Canonical form: directives first, elements in original order, ports sorted
// by name, values printed exactly (round-trips bit-identically).
std::string serialize_netlist(const Circuit& circuit);

// Decodes "0.5p", "5k", "1meg", "1e-12", ... Suffixes a f p n u m k meg g t,
// case-insensitive; m = 1e-3 and meg = 1e6 (SPICE convention).
double parse_si_value(std::string_view token);

}  // namespace scnoise
