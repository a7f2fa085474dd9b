#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scnoise/errors.hpp"
#include "scnoise/netlist.hpp"
#include "scnoise/plan.hpp"
#include "support/circuits.hpp"

using namespace scnoise;

#define CHECK_ERRC(expr, errc)                              \
  do {                                                      \
    bool thrown_ = false;                                   \
    try {                                                   \
      (void)(expr);                                         \
    } catch (const Error& e_) {                             \
      thrown_ = true;                                       \
      CHECK_MESSAGE(e_.code() == (errc), e_.what());        \
    }                                                       \
    CHECK_MESSAGE(thrown_, "expected " << errc_name(errc)); \
  } while (0)

TEST_CASE("si value decoding") {
  CHECK(parse_si_value("0.5p") == doctest::Approx(5.0e-13).epsilon(1e-15));
  CHECK(parse_si_value("5k") == 5000.0);
  CHECK(parse_si_value("1meg") == 1e6);
  CHECK(parse_si_value("1MEG") == 1e6);
  CHECK(parse_si_value("1m") == 1e-3);
  CHECK(parse_si_value("2a") == doctest::Approx(2e-18).epsilon(1e-15));
  CHECK(parse_si_value("3f") == doctest::Approx(3e-15).epsilon(1e-15));
  CHECK(parse_si_value("4n") == doctest::Approx(4e-9).epsilon(1e-15));
  CHECK(parse_si_value("15.4u") == doctest::Approx(1.54e-5).epsilon(1e-15));
  CHECK(parse_si_value("2K") == 2000.0);
  CHECK(parse_si_value("1g") == 1e9);
  CHECK(parse_si_value("1t") == 1e12);
  CHECK(parse_si_value("1e-12") == 1e-12);
  CHECK(parse_si_value("-1p") == -1e-12);
  CHECK_ERRC(parse_si_value("1x"), Errc::SyntaxError);
  CHECK_ERRC(parse_si_value("abc"), Errc::SyntaxError);
}

TEST_CASE("parsing the amplifier netlist") {
  Circuit c = parse_netlist(testsup::sc_amplifier_netlist());
  CHECK(c.n_phases == 2);
  CHECK(c.ground == "0");
  CHECK(c.elements.size() == 7);
  CHECK(c.find_capacitor("c1")->farads == doctest::Approx(0.5e-12));
  CHECK(c.find_capacitor("cin")->farads == doctest::Approx(20e-15));
  CHECK(c.find_ota("ota1")->gm == doctest::Approx(1.54e-5));
  CHECK(c.find_ota("ota1")->gamma == 1.0);
  CHECK(c.port("out").k == "out");
  CHECK(c.port("c1").l == "vg");
  CHECK(c.nodes.count("vg") == 1);
}

TEST_CASE("switch grammar") {
  Circuit c = parse_netlist(".phases 2\n.ground 0\nC cx in 0 1p\nSW s1 in x ron=5k closed=1\n");
  Switch* sw = c.find_switch("s1");
  REQUIRE(sw != nullptr);
  CHECK(sw->ron == 5000.0);
  CHECK(sw->closed_in == std::set<int>{1});
  CHECK(sw->closed(1));
  CHECK(!sw->closed(2));

  Circuit c2 = parse_netlist(".phases 3\n.ground 0\nC cx a 0 1p\nSW s a b ron=1k closed=1,3\n");
  CHECK(c2.find_switch("s")->closed_in == std::set<int>{1, 3});
}

TEST_CASE("keywords are case-insensitive, comments ignored") {
  Circuit c = parse_netlist(
      ".PHASES 1\n.Ground gnd\n# a comment line\n"
      "c C1 a gnd 1p  # trailing comment\nR R1 a gnd 1K\nota amp inp=gnd inn=a out=b gm=1m "
      "gamma=0\n.PORT p a gnd\n");
  CHECK(c.n_phases == 1);
  CHECK(c.find_capacitor("C1") != nullptr);
  CHECK(c.find_resistor("R1") != nullptr);
  CHECK(c.find_ota("amp")->gamma == 0.0);
}

TEST_CASE("documented parse errors") {
  CHECK_ERRC(parse_netlist(".phases 1\n.ground 0\nC c1 a 0 -1p\n"), Errc::NonPositiveValue);
  CHECK_ERRC(parse_netlist(".phases 1\n.ground 0\nC c1 a 0 0\n"), Errc::NonPositiveValue);
  CHECK_ERRC(parse_netlist(".phases 0\n.ground 0\nC c1 a 0 1p\n"), Errc::NonPositiveValue);
  CHECK_ERRC(parse_netlist(".phases 1\n.ground 0\nSW s a 0 ron=0 closed=1\nC c a 0 1p\n"),
             Errc::NonPositiveValue);
  CHECK_ERRC(
      parse_netlist(".phases 1\n.ground 0\nOTA o inp=0 inn=a out=b gm=1m gamma=-1\nC c a 0 1p\n"),
      Errc::NonPositiveValue);
  CHECK_ERRC(parse_netlist(".phases 1\n.ground 0\nC c1 a 0 1p\nC c1 b 0 2p\n"),
             Errc::DuplicateName);
  CHECK_ERRC(parse_netlist(".phases 2\n.ground 0\nC c a 0 1p\nSW s a 0 ron=1k closed=3\n"),
             Errc::UnknownPhase);
  CHECK_ERRC(parse_netlist("C c1 a 0 1p\n"), Errc::MissingGround);
  // ground declared but nothing references it
  CHECK_ERRC(parse_netlist(".phases 1\n.ground gnd\nC c1 a b 1p\n"), Errc::MissingGround);
  CHECK_ERRC(parse_netlist(".phases 1\n.ground 0\nFOO x\n"), Errc::SyntaxError);
  CHECK_ERRC(parse_netlist(".phases 1\n.ground 0\nC c1 a 0\n"), Errc::SyntaxError);
  CHECK_ERRC(parse_netlist(".phases 1\n.ground 0\nSW s a 0 ron=1k\nC c a 0 1p\n"),
             Errc::SyntaxError);
  CHECK_ERRC(
      parse_netlist(".phases 1\n.ground 0\nOTA o inp=0 inn=a out=b gamma=1\nC c a 0 1p\n"),
      Errc::SyntaxError);
  CHECK_ERRC(
      parse_netlist(".phases 1\n.ground 0\nOTA o inp=a inn=a out=b gm=1m gamma=1\nC c a 0 1p\n"),
      Errc::SyntaxError);
  // syntax errors carry a line/column location
  try {
    parse_netlist(".phases 1\n.ground 0\nC c1 a 0 nonsense\n");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("round trip through the canonical serializer") {
  for (const std::string& text :
       {testsup::sc_amplifier_netlist(), testsup::track_hold_netlist(),
        testsup::rc_lowpass_netlist()}) {
    Circuit first = parse_netlist(text);
    Circuit second = parse_netlist(serialize_netlist(first));
    CHECK(first == second);
  }
}

TEST_CASE("plan parsing resolves against the circuit") {
  Circuit amp = parse_netlist(testsup::sc_amplifier_netlist());
  NoiseBudget budget = parse_plan(testsup::sc_amplifier_plan_json, amp);
  CHECK(budget.temperature_k == 300.0);
  CHECK(budget.output_port == "out");
  REQUIRE(budget.contributions.size() == 2);
  const auto& st = std::get<SampledTransferContribution>(budget.contributions[0]);
  CHECK(st.sample_phase == 1);
  CHECK(st.transfer_phase == 2);
  CHECK(st.capacitors == std::vector<std::string>{"c1"});
  CHECK(st.inject_ota == "ota1");
  CHECK(std::get<DirectContribution>(budget.contributions[1]).phase == 2);

  Circuit th = parse_netlist(testsup::track_hold_netlist());
  NoiseBudget th_budget = parse_plan(testsup::track_hold_plan_json, th);
  const auto& st3 = std::get<SampledTransferContribution>(th_budget.contributions[0]);
  CHECK(st3.capacitors.size() == 3);
  CHECK(th_budget.c_ref == std::optional<std::string>("c2"));
}

TEST_CASE("plan errors") {
  Circuit amp = parse_netlist(testsup::sc_amplifier_netlist());
  CHECK_ERRC(parse_plan(R"({"temperature_k":300,"output_port":"out","contributions":[
      {"type":"sampled_transfer","sample_phase":1,"capacitors":["CX"],
       "inject_ota":"ota1","transfer_phase":2}]})",
                        amp),
             Errc::UnresolvedName);
  CHECK_ERRC(parse_plan(R"({"temperature_k":300,"output_port":"nope","contributions":[
      {"type":"direct","phase":1}]})",
                        amp),
             Errc::UnresolvedName);
  CHECK_ERRC(parse_plan(R"({"temperature_k":300,"output_port":"out","contributions":[
      {"type":"direct","phase":3}]})",
                        amp),
             Errc::PlanInvalid);
  CHECK_ERRC(parse_plan(R"({"temperature_k":300,"output_port":"out","contributions":[]})", amp),
             Errc::PlanInvalid);
  CHECK_ERRC(parse_plan(R"({"temperature_k":-5,"output_port":"out","contributions":[
      {"type":"direct","phase":1}]})",
                        amp),
             Errc::PlanInvalid);
  CHECK_ERRC(parse_plan("not json at all", amp), Errc::PlanInvalid);
}
