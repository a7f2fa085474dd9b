#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "scnoise/netlist.hpp"

namespace scnoise {

// The three capacitor-only reductions of a switched circuit for one phase,
// plus the view used for feedback-divider and charge-transfer solves.
//
//   CInf       all switches and OTAs removed
//   CInfPrime  switches closed in the phase become shorts, open ones removed,
//              OTAs removed
//   CZero      as CInfPrime, plus every OTA output shorted to ground
//   Feedback   same construction as CInfPrime
//
// Resistors count as switches that are closed in every phase.
enum class ViewKind { CInf, CInfPrime, CZero, Feedback };

// A capacitance on [0, +inf]. Infinity is detected topologically (a short
// path across the port), never by thresholding a numeric result.
struct ExtendedCapacitance {
  bool is_infinite = false;
  double farads = 0;

  static ExtendedCapacitance infinite() { return {true, 0}; }
  static ExtendedCapacitance finite(double f);

  // 1/C with 1/inf == 0 exactly. A zero finite capacitance yields +inf.
  double reciprocal() const { return is_infinite ? 0.0 : 1.0 / farads; }
};

class PhaseView {
public:
  struct GroupCap {
    int a, b;       // merged-group endpoints, a != b
    double farads;
  };

  ViewKind kind() const { return kind_; }
  int group_count() const { return n_groups_; }
  int ground_group() const { return ground_group_; }
  const std::vector<GroupCap>& capacitors() const { return caps_; }
  int group_of(const std::string& node) const;  // throws UnresolvedName

private:
  friend PhaseView build_view(const Circuit&, int, ViewKind);
  ViewKind kind_ = ViewKind::CInf;
  int n_groups_ = 0;
  int ground_group_ = -1;
  std::vector<GroupCap> caps_;                   // self-loops already dropped
  std::unordered_map<std::string, int> groups_;  // node -> merged group
};

PhaseView build_view(const Circuit& circuit, int phase, ViewKind kind);

// Driving-point capacitance of the port (k, l): V(k)=1, V(l)=0, every other
// group (including ground when it is not a port terminal) floats with zero
// net charge; returns the charge delivered into k's group. Groups with no
// capacitive path to the port are pruned; a port terminal with no
// capacitance at all gives Finite(0).
ExtendedCapacitance equivalent_capacitance(const PhaseView& view, const std::string& k,
                                           const std::string& l);

// Capacitive divider: driven group at 1 V, ground group at 0 V, floating
// groups at zero net charge; returns V(sensed_p) - V(sensed_n). A sensed
// group with no capacitive connection is an error, not 0.
double divider_gain(const PhaseView& view, const std::string& driven,
                    const std::string& sensed_p, const std::string& sensed_n);

}  // namespace scnoise
