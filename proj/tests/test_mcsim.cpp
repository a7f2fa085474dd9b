#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scnoise/bode.hpp"
#include "scnoise/errors.hpp"
#include "scnoise/mcsim.hpp"
#include "support/circuits.hpp"

using namespace scnoise;

namespace {
constexpr double kT = k_boltzmann * 300.0;

McConfig rc_config(std::uint64_t seed, long periods = 1100, double dt = 2.5e-10,
                   long discard = -1) {
  McConfig cfg;
  cfg.period = 1e-6;
  cfg.dt = dt;  // tau = 5 ns for the canned RC
  cfg.n_periods = periods;
  cfg.n_discard = discard > 0 ? discard : (periods > 300 ? 100 : 2);
  cfg.seed = seed;
  cfg.sample_phase = 1;
  cfg.sample_port = {"out", "0"};
  return cfg;
}
}  // namespace

TEST_CASE("settling transconductance") {
  CHECK(settling_gm(0.5e-12, 0.5e-12, 20e-15, 0.5e-12, 1e-7) ==
        doctest::Approx(1.54e-5).epsilon(1e-9));
  CHECK(settling_gm(0.0, 0.5e-12, 0.0, 0.5e-12, 1e-7) ==
        doctest::Approx(0.5e-12 / 1e-7).epsilon(1e-12));  // beta = 1: gm = CL/tset
  // |Av| = 8 point of the constant-settling-time sweep; gm*ron with 5 kOhm
  // switches comes out at 0.427 from these formulas
  CHECK(settling_gm(4e-12, 0.5e-12, 20e-15, 0.5e-12, 1e-7) * 5e3 ==
        doctest::Approx(0.427).epsilon(1e-3));
}

TEST_CASE("seed determinism") {
  Circuit rc = parse_netlist(testsup::rc_lowpass_netlist(5e3, 1e-12));
  McEstimate a = run_mc(rc, rc_config(77, 150), 300.0);
  McEstimate b = run_mc(rc, rc_config(77, 150), 300.0);
  CHECK(a.variance == b.variance);  // bit-identical
  McEstimate c = run_mc(rc, rc_config(78, 150), 300.0);
  CHECK(a.variance != c.variance);
}

TEST_CASE("rc variance hits kT/C") {
  Circuit rc = parse_netlist(testsup::rc_lowpass_netlist(5e3, 1e-12));
  McEstimate est = run_mc(rc, rc_config(42, 4100), 300.0);
  CHECK(est.n_samples == 4000);
  double target = kT / 1e-12;
  CHECK(std::abs(est.variance - target) <= 3.0 * est.ci95_rel * target);
}

TEST_CASE("halving dt moves the pooled estimate by less than ci95") {
  Circuit rc = parse_netlist(testsup::rc_lowpass_netlist(5e3, 1e-12));
  // pooled over 5 seeds per dt to suppress sampling jitter; the threshold is
  // the quoted ci95 of a single 4000-sample run
  McConfig coarse = rc_config(1000, 4100, 2.5e-10);  // tau/20
  McConfig fine = rc_config(2000, 4100, 1.25e-10);   // tau/40
  McEstimate a = run_mc_pooled(rc, coarse, 300.0, 5);
  McEstimate b = run_mc_pooled(rc, fine, 300.0, 5);
  double ci95_single = 1.96 * std::sqrt(2.0 / 4000.0);
  CHECK(std::abs(a.variance - b.variance) <= ci95_single * b.variance);
}

TEST_CASE("charge is conserved across phase boundaries") {
  Circuit c = parse_netlist(testsup::sc_amplifier_netlist());
  McConfig cfg;
  cfg.period = 1e-6;
  cfg.dt = 3.8e-11;
  cfg.n_periods = 110;
  cfg.n_discard = 2;
  cfg.seed = 5;
  cfg.sample_phase = 2;
  cfg.sample_port = {"out", "0"};
  McEstimate est = run_mc(c, cfg, 300.0);
  CHECK(est.charge_error_max <= 1e-15);
}

TEST_CASE("noiseless circuit gives zero variance") {
  Circuit c = parse_netlist(
      ".phases 1\n.ground 0\nC c2 vg out 1p\nC cl out 0 1p\n"
      "OTA ota1 inp=0 inn=vg out=out gm=1m gamma=0\n.port out out 0\n");
  McConfig cfg;
  cfg.period = 1e-6;
  cfg.dt = 1e-9;
  cfg.n_periods = 110;
  cfg.n_discard = 2;
  cfg.sample_phase = 1;
  cfg.sample_port = {"out", "0"};
  CHECK(run_mc(c, cfg, 300.0).variance == 0.0);
}

TEST_CASE("coarse timesteps are rejected") {
  Circuit rc = parse_netlist(testsup::rc_lowpass_netlist(5e3, 1e-12));
  McConfig cfg = rc_config(1, 150, 5e-9);  // dt == tau, invariant wants tau/10
  CHECK_THROWS_AS((void)run_mc(rc, cfg, 300.0), Error);
  try {
    (void)run_mc(rc, cfg, 300.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TimestepTooCoarse);
  }
}

TEST_CASE("positive feedback is caught as unstable integration") {
  // swapped OTA inputs: the loop regenerates instead of settling
  Circuit c = parse_netlist(
      ".phases 1\n.ground 0\nC c2 vg out 0.5p\nC cl out 0 0.5p\nC cin vg 0 20f\n"
      "SW s2 out vg ron=5k closed=1\n"
      "OTA ota1 inp=vg inn=0 out=out gm=15.4u gamma=1\n.port out out 0\n");
  McConfig cfg;
  cfg.period = 1e-6;
  cfg.dt = 1e-10;
  cfg.n_periods = 200;
  cfg.n_discard = 2;
  cfg.sample_phase = 1;
  cfg.sample_port = {"out", "0"};
  bool threw = false;
  try {
    (void)run_mc(c, cfg, 300.0);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == Errc::UnstableIntegration);
  }
  CHECK(threw);
}

TEST_CASE("variance estimates pass a 95% interval test across seeds") {
  Circuit rc = parse_netlist(testsup::rc_lowpass_netlist(5e3, 1e-12));
  double target = kT / 1e-12;
  int failures = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    McEstimate est = run_mc(rc, rc_config(seed, 1100, 1.25e-10), 300.0);
    if (std::abs(est.variance - target) > est.ci95_rel * target) ++failures;
  }
  // ~1 of 20 expected outside the interval; 5+ would signal a bias
  CHECK(failures <= 4);
}

TEST_CASE("pooled runs merge deterministically") {
  Circuit rc = parse_netlist(testsup::rc_lowpass_netlist(5e3, 1e-12));
  McEstimate pooled = run_mc_pooled(rc, rc_config(300, 600), 300.0, 3);
  double weighted = 0, dof = 0;
  for (int i = 0; i < 3; ++i) {
    McConfig cfg = rc_config(300 + i, 600);
    McEstimate one = run_mc(rc, cfg, 300.0);
    weighted += (one.n_samples - 1) * one.variance;
    dof += one.n_samples - 1;
  }
  CHECK(pooled.variance == doctest::Approx(weighted / dof).epsilon(1e-15));
  CHECK(pooled.n_samples == 1500);
}
