#include "scnoise/capnet.hpp"

#include <cmath>
#include <numeric>
#include <queue>

#include <Eigen/Dense>

#include "scnoise/errors.hpp"

namespace scnoise {
namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Connected components of the group graph under capacitive edges; isolated
// groups get their own component.
std::vector<int> components(int n_groups, const std::vector<PhaseView::GroupCap>& caps) {
  std::vector<std::vector<int>> adj(n_groups);
  for (const auto& c : caps) {
    adj[c.a].push_back(c.b);
    adj[c.b].push_back(c.a);
  }
  std::vector<int> comp(n_groups, -1);
  int next = 0;
  for (int s = 0; s < n_groups; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int g = q.front();
      q.pop();
      for (int h : adj[g])
        if (comp[h] < 0) {
          comp[h] = next;
          q.push(h);
        }
    }
    ++next;
  }
  return comp;
}

// Dirichlet solve on the capacitance Laplacian restricted to `kept` groups.
// `fixed` holds the boundary potentials; everything else carries zero net
// charge. Returns potentials for all groups (non-kept groups stay 0).
std::vector<double> solve_potentials(const PhaseView& view, const std::vector<char>& kept,
                                     const std::vector<std::pair<int, double>>& fixed) {
  const int n = view.group_count();
  std::vector<double> potential(n, 0.0);
  std::vector<char> is_fixed(n, 0);
  for (auto [g, v] : fixed) {
    potential[g] = v;
    is_fixed[g] = 1;
  }

  std::vector<int> unknown;
  std::vector<int> col(n, -1);
  for (int g = 0; g < n; ++g)
    if (kept[g] && !is_fixed[g]) {
      col[g] = static_cast<int>(unknown.size());
      unknown.push_back(g);
    }
  if (unknown.empty()) return potential;

  const int m = static_cast<int>(unknown.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (const auto& c : view.capacitors()) {
    if (!kept[c.a] || !kept[c.b]) continue;
    int ia = col[c.a], ib = col[c.b];
    if (ia >= 0) lap(ia, ia) += c.farads;
    if (ib >= 0) lap(ib, ib) += c.farads;
    if (ia >= 0 && ib >= 0) {
      lap(ia, ib) -= c.farads;
      lap(ib, ia) -= c.farads;
    }
    if (ia >= 0 && ib < 0) rhs(ia) += c.farads * potential[c.b];
    if (ib >= 0 && ia < 0) rhs(ib) += c.farads * potential[c.a];
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(lap);
  Eigen::VectorXd x = ldlt.solve(rhs);
  double scale = lap.norm() * std::max(1.0, x.norm()) + rhs.norm();
  if (ldlt.info() != Eigen::Success || !x.allFinite() ||
      (lap * x - rhs).norm() > 1e-9 * scale)
    fail(Errc::SingularNetwork, "degenerate floating block survived pruning");
  for (int i = 0; i < m; ++i) potential[unknown[i]] = x(i);
  return potential;
}

double charge_into(const PhaseView& view, const std::vector<char>& kept,
                   const std::vector<double>& potential, int group) {
  double q = 0;
  for (const auto& c : view.capacitors()) {
    if (!kept[c.a] || !kept[c.b]) continue;
    if (c.a == group) q += c.farads * (potential[c.a] - potential[c.b]);
    if (c.b == group) q += c.farads * (potential[c.b] - potential[c.a]);
  }
  return q;
}

}  // namespace

ExtendedCapacitance ExtendedCapacitance::finite(double f) {
  if (!(f >= 0))  // also rejects NaN
    fail(Errc::SingularNetwork, "finite capacitance must be >= 0 and not NaN");
  return {false, f};
}

int PhaseView::group_of(const std::string& node) const {
  auto it = groups_.find(node);
  if (it == groups_.end()) fail(Errc::UnresolvedName, "unknown node '" + node + "'");
  return it->second;
}

PhaseView build_view(const Circuit& circuit, int phase, ViewKind kind) {
  if (phase < 1 || phase > circuit.n_phases)
    fail(Errc::UnknownPhase, "phase " + std::to_string(phase) + " outside 1.." +
                                 std::to_string(circuit.n_phases));

  std::vector<std::string> names(circuit.nodes.begin(), circuit.nodes.end());
  std::unordered_map<std::string, int> id;
  for (int i = 0; i < static_cast<int>(names.size()); ++i) id[names[i]] = i;

  const bool short_closed = kind != ViewKind::CInf;
  UnionFind uf(static_cast<int>(names.size()));
  for (const Element& e : circuit.elements) {
    if (const auto* sw = std::get_if<Switch>(&e)) {
      if (short_closed && sw->closed(phase)) uf.unite(id.at(sw->n1), id.at(sw->n2));
    } else if (const auto* res = std::get_if<Resistor>(&e)) {
      if (short_closed) uf.unite(id.at(res->n1), id.at(res->n2));
    } else if (const auto* ota = std::get_if<Ota>(&e)) {
      if (kind == ViewKind::CZero) uf.unite(id.at(ota->out), id.at(circuit.ground));
    }
  }

  PhaseView view;
  view.kind_ = kind;
  std::unordered_map<int, int> compress;
  for (const std::string& node : names) {
    int root = uf.find(id.at(node));
    auto [it, inserted] = compress.emplace(root, view.n_groups_);
    if (inserted) ++view.n_groups_;
    view.groups_[node] = it->second;
  }
  view.ground_group_ = view.groups_.at(circuit.ground);
  for (const Element& e : circuit.elements) {
    if (const auto* cap = std::get_if<Capacitor>(&e)) {
      int a = view.groups_.at(cap->n1);
      int b = view.groups_.at(cap->n2);
      if (a != b) view.caps_.push_back({a, b, cap->farads});  // shorted caps carry no voltage
    }
  }
  return view;
}

ExtendedCapacitance equivalent_capacitance(const PhaseView& view, const std::string& k,
                                           const std::string& l) {
  if (k == l) fail(Errc::BadArguments, "port nodes must be distinct");
  const int gk = view.group_of(k);
  const int gl = view.group_of(l);
  if (gk == gl) return ExtendedCapacitance::infinite();

  // Driving-point solve: only the components reachable from the port matter;
  // everything else (including the ground group if decoupled) floats.
  std::vector<int> comp = components(view.group_count(), view.capacitors());
  std::vector<char> kept(view.group_count(), 0);
  for (int g = 0; g < view.group_count(); ++g)
    kept[g] = comp[g] == comp[gk] || comp[g] == comp[gl];

  auto potential = solve_potentials(view, kept, {{gk, 1.0}, {gl, 0.0}});
  double q = charge_into(view, kept, potential, gk);
  return ExtendedCapacitance::finite(std::max(q, 0.0));
}

double divider_gain(const PhaseView& view, const std::string& driven,
                    const std::string& sensed_p, const std::string& sensed_n) {
  if (view.kind() != ViewKind::Feedback)
    fail(Errc::BadArguments, "divider_gain requires a Feedback view");
  const int gd = view.group_of(driven);
  const int gg = view.ground_group();
  if (gd == gg) fail(Errc::BadArguments, "driven node is in the ground group");

  std::vector<int> comp = components(view.group_count(), view.capacitors());
  std::vector<char> kept(view.group_count(), 0);
  for (int g = 0; g < view.group_count(); ++g)
    kept[g] = comp[g] == comp[gd] || comp[g] == comp[gg];

  const int gp = view.group_of(sensed_p);
  const int gn = view.group_of(sensed_n);
  if (!kept[gp] || !kept[gn])
    fail(Errc::SenseNodeIsolated, "sensed node has no capacitive connection to the divider");

  auto potential = solve_potentials(view, kept, {{gd, 1.0}, {gg, 0.0}});
  return potential[gp] - potential[gn];
}

}  // namespace scnoise
