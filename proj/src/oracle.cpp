#include "scnoise/oracle.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <limits>

#include <Eigen/Eigenvalues>

#include "scnoise/bode.hpp"
#include "scnoise/errors.hpp"

namespace scnoise {
namespace {

constexpr double two_pi = 6.283185307179586476925286766559;

struct Quad {
  const std::function<double(double)>& f;
  long evals = 0;
  long max_evals = 20'000'000;
  bool aborted = false;

  double eval(double x) {
    ++evals;
    if (evals > max_evals) aborted = true;
    return f(x);
  }

  double simpson(double a, double fa, double fm, double b, double fb) const {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  }

  double recurse(double a, double fa, double m, double fm, double b, double fb, double whole,
                 double eps, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = eval(lm), frm = eval(rm);
    double left = simpson(a, fa, flm, m, fm);
    double right = simpson(m, fm, frm, b, fb);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * eps || (b - a) < 1e-12 || aborted)
      return left + right + delta / 15.0;
    if (depth <= 0) {
      aborted = true;
      return left + right;
    }
    return recurse(a, fa, lm, flm, m, fm, left, 0.5 * eps, depth - 1) +
           recurse(m, fm, rm, frm, b, fb, right, 0.5 * eps, depth - 1);
  }

  // Coarse composite Simpson estimate, used only to establish scales.
  double coarse(double a, double b) {
    constexpr int kPanels = 64;
    double h = (b - a) / kPanels;
    double sum = 0;
    double prev = eval(a);
    for (int i = 0; i < kPanels; ++i) {
      double mid = eval(a + (i + 0.5) * h);
      double next = eval(a + (i + 1) * h);
      sum += h / 6.0 * (prev + 4.0 * mid + next);
      prev = next;
    }
    return sum;
  }

  // Adaptive Simpson with an absolute tolerance. eps_abs must carry the
  // scale of the quantity the caller cares about; a tolerance relative to a
  // negligible span would make the recursion chase roundoff.
  double integrate(double a, double b, double eps_abs) {
    constexpr int kPanels = 64;
    double h = (b - a) / kPanels;
    std::vector<double> fx(kPanels + 1);
    for (int i = 0; i <= kPanels; ++i) fx[i] = eval(a + i * h);
    double total = 0;
    for (int i = 0; i < kPanels; ++i) {
      double xa = a + i * h, xb = xa + h, xm = 0.5 * (xa + xb);
      double fm = eval(xm);
      double whole = simpson(xa, fx[i], fm, xb, fx[i + 1]);
      total += recurse(xa, fx[i], xm, fm, xb, fx[i + 1], whole, eps_abs / kPanels, 40);
    }
    return total;
  }
};

}  // namespace

int SmallSignalSystem::index_of(const std::string& node) const {
  auto it = node_index.find(node);
  if (it == node_index.end()) fail(Errc::UnresolvedName, "unknown node '" + node + "'");
  return it->second;
}

SmallSignalSystem build_system(const Circuit& circuit, int phase, double temperature_k) {
  if (phase < 1 || phase > circuit.n_phases)
    fail(Errc::UnknownPhase, "phase " + std::to_string(phase) + " outside 1.." +
                                 std::to_string(circuit.n_phases));
  SmallSignalSystem sys;
  for (const std::string& node : circuit.nodes) {
    if (node == circuit.ground) {
      sys.node_index[node] = -1;
      continue;
    }
    sys.node_index[node] = static_cast<int>(sys.node_names.size());
    sys.node_names.push_back(node);
  }
  const int n = sys.size();
  sys.G = Eigen::MatrixXd::Zero(n, n);
  sys.C = Eigen::MatrixXd::Zero(n, n);

  auto stamp_conductance = [&](int i, int j, double g) {
    if (i >= 0) sys.G(i, i) += g;
    if (j >= 0) sys.G(j, j) += g;
    if (i >= 0 && j >= 0) {
      sys.G(i, j) -= g;
      sys.G(j, i) -= g;
    }
  };
  const double four_kt = 4.0 * k_boltzmann * temperature_k;

  for (const Element& e : circuit.elements) {
    if (const auto* cap = std::get_if<Capacitor>(&e)) {
      int i = sys.node_index.at(cap->n1), j = sys.node_index.at(cap->n2);
      if (i >= 0) sys.C(i, i) += cap->farads;
      if (j >= 0) sys.C(j, j) += cap->farads;
      if (i >= 0 && j >= 0) {
        sys.C(i, j) -= cap->farads;
        sys.C(j, i) -= cap->farads;
      }
      sys.topology_edges.push_back({i, j});
    } else if (const auto* res = std::get_if<Resistor>(&e)) {
      int i = sys.node_index.at(res->n1), j = sys.node_index.at(res->n2);
      stamp_conductance(i, j, 1.0 / res->ohms);
      sys.noise_sources.push_back({"r " + res->name, i, j, four_kt / res->ohms});
      sys.topology_edges.push_back({i, j});
    } else if (const auto* sw = std::get_if<Switch>(&e)) {
      if (!sw->closed(phase)) continue;
      int i = sys.node_index.at(sw->n1), j = sys.node_index.at(sw->n2);
      stamp_conductance(i, j, 1.0 / sw->ron);
      sys.noise_sources.push_back({"sw " + sw->name, i, j, four_kt / sw->ron});
      sys.topology_edges.push_back({i, j});
    } else if (const auto* ota = std::get_if<Ota>(&e)) {
      // current gm*(V(inp)-V(inn)) into `out`
      int out = sys.node_index.at(ota->out);
      int ip = sys.node_index.at(ota->inp);
      int in = sys.node_index.at(ota->inn);
      if (out >= 0) {
        if (ip >= 0) sys.G(out, ip) -= ota->gm;
        if (in >= 0) sys.G(out, in) += ota->gm;
      }
      if (ota->gamma > 0)
        sys.noise_sources.push_back(
            {"ota " + ota->name, out, -1, four_kt * ota->gamma * ota->gm});
      sys.topology_edges.push_back({out, ip});
      sys.topology_edges.push_back({out, in});
      sys.topology_edges.push_back({ip, in});
    }
  }
  return sys;
}

namespace {

// True iff a current source across (na, nb) can produce a voltage across
// (k, l): both virtual edges must lie on a common cycle, i.e. in the same
// biconnected component of the element-connectivity graph. Purely
// topological, so a dangling resistive subtree is recognized as decoupled
// without numeric thresholds. Indices use -1 for ground.
bool pairs_interact(const SmallSignalSystem& sys, int na, int nb, int k, int l) {
  if (na == nb || k == l) return false;
  const int n = sys.size();
  const int ground = n;  // ground gets its own vertex
  auto vertex = [&](int idx) { return idx < 0 ? ground : idx; };

  struct Edge {
    int u, v;
  };
  std::vector<Edge> edges;
  edges.push_back({vertex(na), vertex(nb)});  // edge 0: source
  edges.push_back({vertex(k), vertex(l)});    // edge 1: port
  for (const auto& [u, v] : sys.topology_edges)
    if (u != v) edges.push_back({vertex(u), vertex(v)});

  const int nv = n + 1;
  std::vector<std::vector<std::pair<int, int>>> adj(nv);  // (neighbor, edge id)
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    adj[edges[e].u].push_back({edges[e].v, e});
    adj[edges[e].v].push_back({edges[e].u, e});
  }

  // Tarjan biconnected components with an explicit edge stack.
  std::vector<int> disc(nv, -1), low(nv, 0);
  std::vector<int> estack;
  int timer = 0;
  bool interact = false;

  auto flush_component = [&](int until_edge) {
    bool has_source = false, has_port = false;
    while (!estack.empty()) {
      int e = estack.back();
      estack.pop_back();
      if (e == 0) has_source = true;
      if (e == 1) has_port = true;
      if (e == until_edge) break;
    }
    if (has_source && has_port) interact = true;
  };

  auto dfs = [&](auto&& self, int u, int parent_edge) -> void {
    disc[u] = low[u] = timer++;
    for (auto [v, e] : adj[u]) {
      if (e == parent_edge || u == v) continue;
      if (disc[v] < 0) {
        estack.push_back(e);
        self(self, v, e);
        low[u] = std::min(low[u], low[v]);
        if (low[v] >= disc[u]) flush_component(e);
      } else if (disc[v] < disc[u]) {
        estack.push_back(e);
        low[u] = std::min(low[u], disc[v]);
      }
    }
  };
  for (int v = 0; v < nv && !interact; ++v)
    if (disc[v] < 0) dfs(dfs, v, -1);
  return interact;
}

struct PortSolve {
  std::complex<double> z;
  double solution_norm = 0;
};

PortSolve solve_port(const SmallSignalSystem& sys, int source_index, const Port& port,
                     double f_hz) {
  if (source_index < 0 || source_index >= static_cast<int>(sys.noise_sources.size()))
    fail(Errc::BadArguments, "noise source index out of range");
  const int n = sys.size();
  Eigen::MatrixXcd a =
      sys.G.cast<std::complex<double>>() +
      std::complex<double>(0.0, two_pi * f_hz) * sys.C.cast<std::complex<double>>();
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  const NoiseSource& src = sys.noise_sources[source_index];
  if (src.na >= 0) e(src.na) += 1.0;
  if (src.nb >= 0) e(src.nb) -= 1.0;

  // Rank-revealing factorization: a singular system with a consistent right
  // hand side would otherwise pass a residual check while leaving the port
  // voltage undetermined.
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
  if (!lu.isInvertible())
    fail(Errc::SingularAtFrequency,
         "small-signal system is singular at f = " + std::to_string(f_hz) + " Hz");
  Eigen::VectorXcd x = lu.solve(e);
  double scale = a.norm() * std::max(1.0, x.norm()) + e.norm();
  if (!x.allFinite() || (a * x - e).norm() > 1e-8 * scale)
    fail(Errc::SingularAtFrequency,
         "small-signal system is singular at f = " + std::to_string(f_hz) + " Hz");

  int k = sys.index_of(port.k), l = sys.index_of(port.l);
  std::complex<double> vk = k >= 0 ? x(k) : 0.0;
  std::complex<double> vl = l >= 0 ? x(l) : 0.0;
  return {vk - vl, x.norm()};
}

}  // namespace

std::complex<double> transfer_impedance(const SmallSignalSystem& sys, int source_index,
                                        const Port& port, double f_hz) {
  return solve_port(sys, source_index, port, f_hz).z;
}

std::optional<double> min_time_constant(const SmallSignalSystem& sys) {
  const int n = sys.size();
  if (n == 0) return std::nullopt;
  double c_scale = sys.C.cwiseAbs().maxCoeff();
  if (c_scale <= 0) return std::nullopt;

  // Split out algebraic (capacitance-free) rows and eliminate them through
  // the conductance block, leaving dv/dt = -Cdd^-1 * Gred * v.
  std::vector<int> dyn, alg;
  for (int i = 0; i < n; ++i) {
    if (sys.C.row(i).cwiseAbs().maxCoeff() > 1e-14 * c_scale)
      dyn.push_back(i);
    else
      alg.push_back(i);
  }
  if (dyn.empty()) return std::nullopt;
  const int nd = static_cast<int>(dyn.size());
  const int na = static_cast<int>(alg.size());
  Eigen::MatrixXd cdd(nd, nd), gdd(nd, nd);
  for (int i = 0; i < nd; ++i)
    for (int j = 0; j < nd; ++j) {
      cdd(i, j) = sys.C(dyn[i], dyn[j]);
      gdd(i, j) = sys.G(dyn[i], dyn[j]);
    }
  Eigen::MatrixXd gred = gdd;
  if (na > 0) {
    Eigen::MatrixXd gaa(na, na), gad(na, nd), gda(nd, na);
    for (int i = 0; i < na; ++i) {
      for (int j = 0; j < na; ++j) gaa(i, j) = sys.G(alg[i], alg[j]);
      for (int j = 0; j < nd; ++j) gad(i, j) = sys.G(alg[i], dyn[j]);
    }
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < na; ++j) gda(i, j) = sys.G(dyn[i], alg[j]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gaa);
    if (lu.isInvertible()) gred -= gda * lu.solve(gad);
    // else: isolated resistive junctions; their rows do not couple back
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> clu(cdd);
  Eigen::MatrixXd a = clu.solve(gred);
  if (!a.allFinite()) return std::nullopt;
  Eigen::EigenSolver<Eigen::MatrixXd> eig(a, /*computeEigenvectors=*/false);
  if (eig.info() != Eigen::Success) return std::nullopt;
  double lambda_scale = eig.eigenvalues().cwiseAbs().maxCoeff();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < eig.eigenvalues().size(); ++i) {
    double re = eig.eigenvalues()(i).real();
    if (re > 1e-9 * lambda_scale) best = std::min(best, 1.0 / re);
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

IntegrationResult integrate_variance(const SmallSignalSystem& sys, const Port& port,
                                     const VarianceQuadrature& quad) {
  IntegrationResult result;
  result.per_source.assign(sys.noise_sources.size(), 0.0);
  if (sys.noise_sources.empty()) {
    result.converged = true;
    result.f_max_used = quad.f_min;
    return result;
  }

  double f_max = quad.f_max;
  if (f_max <= 0) {
    auto tau = min_time_constant(sys);
    f_max = tau ? 1e4 / (two_pi * *tau) : 1e9;
  }
  f_max = std::max(f_max, 10.0 * quad.f_min);
  result.f_max_used = f_max;

  const double ln10 = std::log(10.0);
  const double u_lo = std::log(quad.f_min);
  const double u_mid = std::log(f_max);

  // One-sided integral of |Z(f)|^2 * S on u = ln f, per source.
  std::vector<std::function<double(double)>> integrands;
  for (std::size_t s = 0; s < sys.noise_sources.size(); ++s) {
    integrands.push_back([&sys, &port, s](double u) {
      double f = std::exp(u);
      std::complex<double> z = transfer_impedance(sys, static_cast<int>(s), port, f);
      return std::norm(z) * sys.noise_sources[s].psd * f;
    });
  }

  // Sources that share no loop with the port have identically zero transfer;
  // integrating their solver roundoff would never converge.
  const int pk = sys.index_of(port.k), pl = sys.index_of(port.l);
  std::vector<char> coupled(sys.noise_sources.size(), 0);
  for (std::size_t s = 0; s < sys.noise_sources.size(); ++s)
    coupled[s] = sys.noise_sources[s].psd > 0 &&
                 pairs_interact(sys, sys.noise_sources[s].na, sys.noise_sources[s].nb, pk, pl);

  // Coarse pass over the coupled sources so the adaptive tolerances share
  // one scale; a weakly coupled source is then resolved only to the
  // precision that matters for the total.
  std::vector<double> scale(sys.noise_sources.size(), 0.0);
  double scale_max = 0;
  for (std::size_t s = 0; s < sys.noise_sources.size(); ++s) {
    if (!coupled[s]) continue;
    Quad q{integrands[s]};
    scale[s] = std::abs(q.coarse(u_lo, u_mid));
    scale_max = std::max(scale_max, scale[s]);
    result.evaluations += q.evals;
  }
  if (scale_max <= 0) {
    result.converged = true;
    return result;
  }

  for (std::size_t s = 0; s < sys.noise_sources.size(); ++s) {
    if (!coupled[s]) continue;
    Quad q{integrands[s]};
    const double eps_abs = quad.rel_tol * std::max(scale[s], 1e-9 * scale_max);
    double total = q.integrate(u_lo, u_mid, eps_abs);

    // Extend decade by decade until the tail stops mattering.
    double u_hi = u_mid;
    bool tail_ok = false;
    for (int decade = 0; decade < 16; ++decade) {
      double tail = q.integrate(u_hi, u_hi + ln10, eps_abs);
      total += tail;
      u_hi += ln10;
      if (std::abs(tail) < quad.rel_tol * std::max(std::abs(total), 1e-9 * scale_max)) {
        tail_ok = true;
        break;
      }
    }
    result.f_max_used = std::max(result.f_max_used, std::exp(u_hi));
    result.evaluations += q.evals;
    if (q.aborted || !tail_ok)
      fail(Errc::NotConverged,
           "noise integral for source '" + sys.noise_sources[s].label + "' did not converge");
    result.per_source[s] = total;
    result.total += total;
  }
  result.converged = true;
  return result;
}

}  // namespace scnoise
