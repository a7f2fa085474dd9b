#include "scnoise/mcsim.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

#include "scnoise/errors.hpp"
#include "scnoise/oracle.hpp"

namespace scnoise {
namespace {


// Standard normal deviates: mt19937_64 uniforms through the Marsaglia polar
// transform, both outputs used, rejection order fixed. Fully pinned so fixed
// seeds give bit-identical runs (see README).
class GaussianRng {
public:
  explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double x, y, s;
    do {
      x = 2.0 * uniform01() - 1.0;
      y = 2.0 * uniform01() - 1.0;
      s = x * x + y * y;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    have_spare_ = true;
    spare_ = y * f;
    return x * f;
  }

private:
  double uniform01() { return ((eng_() >> 11) + 1) * 0x1.0p-53; }
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0;
};

// Row-major dense LU with partial pivoting, factored once per phase and
// solved every step; kept bare because this is the simulation hot path.
class DenseLu {
public:
  explicit DenseLu(const Eigen::MatrixXd& a) : n_(static_cast<int>(a.rows())), lu_(n_ * n_), piv_(n_) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) lu_[i * n_ + j] = a(i, j);
    for (int k = 0; k < n_; ++k) {
      int p = k;
      for (int i = k + 1; i < n_; ++i)
        if (std::abs(lu_[i * n_ + k]) > std::abs(lu_[p * n_ + k])) p = i;
      if (std::abs(lu_[p * n_ + k]) < 1e-300)
        fail(Errc::SingularNetwork, "singular backward-Euler system");
      piv_[k] = p;
      if (p != k)
        for (int j = 0; j < n_; ++j) std::swap(lu_[k * n_ + j], lu_[p * n_ + j]);
      double inv = 1.0 / lu_[k * n_ + k];
      for (int i = k + 1; i < n_; ++i) {
        double f = lu_[i * n_ + k] * inv;
        lu_[i * n_ + k] = f;
        for (int j = k + 1; j < n_; ++j) lu_[i * n_ + j] -= f * lu_[k * n_ + j];
      }
    }
  }

  void solve_inplace(double* x) const {
    for (int k = 0; k < n_; ++k) {
      if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
      for (int i = k + 1; i < n_; ++i) x[i] -= lu_[i * n_ + k] * x[k];
    }
    for (int i = n_ - 1; i >= 0; --i) {
      for (int j = i + 1; j < n_; ++j) x[i] -= lu_[i * n_ + j] * x[j];
      x[i] /= lu_[i * n_ + i];
    }
  }

private:
  int n_;
  std::vector<double> lu_;
  std::vector<int> piv_;
};

struct PhaseSim {
  long steps = 0;
  double dt = 0;
  std::vector<double> m;      // row-major C/dt, feeds the BE right-hand side
  std::vector<DenseLu> lu;    // single factorization of C/dt + G
  struct Src {
    int na, nb;
    double sigma;  // per-step current std dev, sqrt(psd/(2 dt))
  };
  std::vector<Src> sources;
};

}  // namespace

double settling_gm(double c1, double c2, double cin, double cl, double t_set) {
  if (!(c2 > 0) || !(t_set > 0) || c1 < 0 || cin < 0 || cl < 0)
    fail(Errc::BadArguments, "settling_gm: capacitances and t_set must be positive");
  double beta = c2 / (c1 + c2 + cin);
  double c_out = cl + (1.0 - beta) * c2;
  double c_eq = c_out / beta;
  return c_eq / t_set;
}

McEstimate run_mc(const Circuit& circuit, const McConfig& cfg, double temperature_k) {
  const int n_phases = circuit.n_phases;
  if (!(cfg.period > 0) || !(cfg.dt > 0)) fail(Errc::BadArguments, "mc: period and dt must be > 0");
  if (cfg.n_discard < 2) fail(Errc::BadArguments, "mc: n_discard must be >= 2");
  if (cfg.n_periods - cfg.n_discard < 100)
    fail(Errc::BadArguments, "mc: need at least 100 retained periods");
  if (cfg.sample_phase < 1 || cfg.sample_phase > n_phases)
    fail(Errc::UnknownPhase, "mc: sample phase outside 1.." + std::to_string(n_phases));
  std::vector<double> split = cfg.phase_split;
  if (split.empty()) split.assign(n_phases, 1.0 / n_phases);
  if (static_cast<int>(split.size()) != n_phases)
    fail(Errc::BadArguments, "mc: phase_split size must match the phase count");
  double split_sum = 0;
  for (double s : split) {
    if (!(s > 0)) fail(Errc::BadArguments, "mc: phase fractions must be > 0");
    split_sum += s;
  }
  if (std::abs(split_sum - 1.0) > 1e-9) fail(Errc::BadArguments, "mc: phase fractions must sum to 1");

  std::vector<SmallSignalSystem> systems;
  systems.reserve(n_phases);
  for (int p = 1; p <= n_phases; ++p) systems.push_back(build_system(circuit, p, temperature_k));
  const int n = systems.front().size();
  const int k_idx = systems.front().index_of(cfg.sample_port.k);
  const int l_idx = systems.front().index_of(cfg.sample_port.l);

  McEstimate est;
  est.n_samples = cfg.n_periods - cfg.n_discard;
  est.ci95_rel = 1.96 * std::sqrt(2.0 / static_cast<double>(est.n_samples));

  std::size_t total_sources = 0;
  for (const auto& sys : systems) total_sources += sys.noise_sources.size();
  if (total_sources == 0) return est;  // noiseless circuit: every sample is 0

  double tau_min = std::numeric_limits<double>::infinity();
  for (const auto& sys : systems)
    if (auto tau = min_time_constant(sys)) tau_min = std::min(tau_min, *tau);
  if (std::isfinite(tau_min) && cfg.dt > tau_min / 10.0 * (1.0 + 1e-9)) {
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "mc: dt = %g s exceeds (min time constant)/10 = %g s", cfg.dt, tau_min / 10.0);
    fail(Errc::TimestepTooCoarse, msg);
  }

  std::vector<PhaseSim> phases(n_phases);
  for (int p = 0; p < n_phases; ++p) {
    PhaseSim& ps = phases[p];
    const SmallSignalSystem& sys = systems[p];
    double span = split[p] * cfg.period;
    ps.steps = std::max<long>(1, static_cast<long>(std::ceil(span / cfg.dt)));
    ps.dt = span / static_cast<double>(ps.steps);
    Eigen::MatrixXd a = sys.C / ps.dt + sys.G;
    Eigen::MatrixXd m = sys.C / ps.dt;
    // Nodes isolated in this phase (no capacitance, no conductance) simply
    // hold their previous voltage.
    for (int i = 0; i < n; ++i) {
      if (a.row(i).cwiseAbs().maxCoeff() == 0.0) {
        a(i, i) = 1.0;
        m(i, i) = 1.0;
      }
    }
    ps.m.resize(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ps.m[i * n + j] = m(i, j);
    ps.lu.emplace_back(a);
    for (const NoiseSource& src : sys.noise_sources)
      ps.sources.push_back({src.na, src.nb, std::sqrt(src.psd / (2.0 * ps.dt))});
  }

  GaussianRng gauss(cfg.seed);
  std::vector<double> v(n, 0.0), rhs(n, 0.0);
  std::vector<double> q_before(n), q_after(n);
  std::vector<double> samples;
  samples.reserve(est.n_samples);
  const Eigen::MatrixXd& c_mat = systems.front().C;
  double charge_scale = 0;

  for (long period = 0; period < cfg.n_periods; ++period) {
    for (int p = 0; p < n_phases; ++p) {
      const PhaseSim& ps = phases[p];
      for (long step = 0; step < ps.steps; ++step) {
        for (int i = 0; i < n; ++i) {
          double acc = 0;
          const double* row = ps.m.data() + i * n;
          for (int j = 0; j < n; ++j) acc += row[j] * v[j];
          rhs[i] = acc;
        }
        for (const PhaseSim::Src& src : ps.sources) {
          double xi = src.sigma * gauss();
          if (src.na >= 0) rhs[src.na] += xi;
          if (src.nb >= 0) rhs[src.nb] -= xi;
        }
        ps.lu.front().solve_inplace(rhs.data());
        v.swap(rhs);
        if ((step & 63) == 0) {
          for (int i = 0; i < n; ++i)
            if (!(std::abs(v[i]) <= 1e3))
              fail(Errc::UnstableIntegration, "mc: node voltage exceeded 1 kV");
        }
      }
      if (p + 1 == cfg.sample_phase && period >= cfg.n_discard) {
        double vk = k_idx >= 0 ? v[k_idx] : 0.0;
        double vl = l_idx >= 0 ? v[l_idx] : 0.0;
        samples.push_back(vk - vl);
      }
      // Phase boundary: topology changes but node voltages carry over, so
      // capacitor charges are conserved by construction; audit it anyway.
      for (int i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < n; ++j) acc += c_mat(i, j) * v[j];
        q_before[i] = acc;
      }
      q_after = q_before;  // reconfiguration leaves v untouched
      for (int i = 0; i < n; ++i) {
        charge_scale = std::max(charge_scale, std::abs(q_before[i]));
        double dq = std::abs(q_after[i] - q_before[i]);
        if (charge_scale > 0)
          est.charge_error_max = std::max(est.charge_error_max, dq / charge_scale);
      }
    }
  }

  double mean = 0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  double var = 0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(samples.size() - 1);
  est.variance = var;
  est.rms = std::sqrt(var);
  return est;
}

McEstimate run_mc_pooled(const Circuit& circuit, const McConfig& cfg, double temperature_k,
                         int n_runs) {
  if (n_runs < 1) fail(Errc::BadArguments, "mc: n_runs must be >= 1");
  if (n_runs == 1) return run_mc(circuit, cfg, temperature_k);

  std::vector<McEstimate> results(n_runs);
  std::vector<std::exception_ptr> errors(n_runs);
  std::vector<std::thread> workers;
  workers.reserve(n_runs);
  for (int i = 0; i < n_runs; ++i) {
    workers.emplace_back([&, i] {
      try {
        McConfig local = cfg;
        local.seed = cfg.seed + static_cast<std::uint64_t>(i);
        results[i] = run_mc(circuit, local, temperature_k);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (std::thread& w : workers) w.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  McEstimate pooled;
  double weighted = 0, dof = 0;
  for (const McEstimate& r : results) {
    weighted += static_cast<double>(r.n_samples - 1) * r.variance;
    dof += static_cast<double>(r.n_samples - 1);
    pooled.n_samples += r.n_samples;
    pooled.charge_error_max = std::max(pooled.charge_error_max, r.charge_error_max);
  }
  pooled.variance = weighted / dof;
  pooled.rms = std::sqrt(pooled.variance);
  pooled.ci95_rel = 1.96 * std::sqrt(2.0 / dof);
  return pooled;
}

}  // namespace scnoise
