#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "riskplan/risk.hpp"
#include "riskplan/rng.hpp"
#include "test_fixtures.hpp"

using namespace riskplan;
using namespace riskplan::risk;
using riskplan::world::CollisionEvent;
using riskplan::world::WorldState;

namespace {

// Independent recount: walk the raw events and sum severities directly.
double brute_recount(const std::vector<CollisionEvent>& events, const std::string& manipulated) {
  double total = 0.0;
  for (const auto& e : events) {
    if (e.actor == "robot" && e.victim == manipulated) continue;
    total += e.severity;
  }
  return total;
}

}  // namespace

TEST_CASE("empty event list yields an empty ledger with zero risk") {
  CollisionLedger ledger = ledger_from_events({}, "o1");
  CHECK(ledger.robot_victims.empty());
  CHECK(ledger.pair_counts.empty());
  CHECK(risk_of(ledger) == 0.0);
}

TEST_CASE("single robot displacement maps to one victim count") {
  CollisionLedger ledger = ledger_from_events({{"robot", "o2", 1, 1}}, "o1");
  REQUIRE(ledger.robot_victims.size() == 1);
  CHECK(ledger.robot_victims.at("o2") == 1);
  CHECK(ledger.pair_counts.empty());
  CHECK(risk_of(ledger) == 1.0);
}

TEST_CASE("toppling weighs double and chains count as pairs") {
  std::vector<CollisionEvent> events = {{"robot", "o2", 2, 1}, {"o2", "o3", 1, 2}};
  CollisionLedger ledger = ledger_from_events(events, "o1");
  CHECK(ledger.robot_victims.at("o2") == 2);
  CHECK(ledger.pair_counts.at({"o2", "o3"}) == 1);
  CHECK(risk_of(ledger) == 3.0);
}

TEST_CASE("robot contact with the manipulated object itself is not risk") {
  std::vector<CollisionEvent> events = {{"robot", "o1", 1, 1}, {"robot", "o2", 1, 2}};
  CollisionLedger ledger = ledger_from_events(events, "o1");
  CHECK(ledger.robot_victims.count("o1") == 0);
  CHECK(risk_of(ledger) == 1.0);
}

TEST_CASE("pair counts are unordered") {
  CollisionLedger a = ledger_from_events({{"o3", "o2", 1, 1}}, "x");
  CollisionLedger b = ledger_from_events({{"o2", "o3", 1, 1}}, "x");
  CHECK(a == b);
  CHECK(a.pair_counts.count({"o2", "o3"}) == 1);
}

TEST_CASE("risk sums severity-weighted counts") {
  CollisionLedger ledger;
  ledger.robot_victims = {{"o2", 2}, {"o4", 1}};
  ledger.pair_counts = {{{"o2", "o3"}, 1}};
  CHECK(risk_of(ledger) == 4.0);
}

TEST_CASE("risk is linear under ledger merge") {
  Rng rng(5150);
  for (int trial = 0; trial < 50; ++trial) {
    auto random_ledger = [&rng]() {
      CollisionLedger l;
      for (int i = 0; i < 3; ++i)
        if (rng.next_below(2)) l.robot_victims["o" + std::to_string(rng.next_below(4))] +=
            1 + static_cast<int>(rng.next_below(2));
      if (rng.next_below(2)) l.pair_counts[{"a", "b"}] += 1;
      return l;
    };
    CollisionLedger a = random_ledger();
    CollisionLedger b = random_ledger();
    CHECK(risk_of(merge(a, b)) == doctest::Approx(risk_of(a) + risk_of(b)));
  }
}

TEST_CASE("oracle on a single isolated object is the zero matrix") {
  WorldState w;
  w.scene = "demo";
  w.objects.push_back({"solo", world::ObjectKind::item, 0.05, {0.5, 0.5}});
  SafetyMatrix m = oracle_risk_matrix(w, {Skill::pick}, {"solo"});
  REQUIRE(m.entries.size() == 1);
  CHECK(m.at(0, 0) == 0.0);
  CHECK(m.source == SafetyMatrix::Source::oracle);
}

TEST_CASE("picking the middle of three in a row is strictly riskier") {
  WorldState w = testing::three_in_a_row();
  SafetyMatrix m = oracle_risk_matrix(w, {Skill::pick}, {"left", "mid", "right"});
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(0, 1) == 2.0);
  CHECK(m.at(0, 2) == 1.0);
  CHECK(m.at(0, 1) > m.at(0, 0));
  CHECK(m.at(0, 1) > m.at(0, 2));
}

TEST_CASE("place on an object that is not held is the +inf sentinel") {
  WorldState w = testing::three_in_a_row();
  w.spots.push_back({"staging_0", {0.07, 0.07}, 0.06});
  SafetyMatrix m = oracle_risk_matrix(w, {Skill::place}, {"left"});
  CHECK(std::isinf(m.at(0, 0)));

  w.held = "left";
  SafetyMatrix held = oracle_risk_matrix(w, {Skill::place}, {"left"});
  CHECK(std::isfinite(held.at(0, 0)));
}

TEST_CASE("navigate rows are zero risk for every object") {
  WorldState w = testing::three_in_a_row();
  SafetyMatrix m = oracle_risk_matrix(w);
  for (std::size_t n = 0; n < m.objects.size(); ++n) CHECK(m.at(2, n) == 0.0);
}

TEST_CASE("oracle leaves the probed world bitwise unchanged") {
  WorldState w = testing::three_in_a_row();
  w.spots.push_back({"staging_0", {0.07, 0.07}, 0.06});
  WorldState before = w;
  oracle_risk_matrix(w);
  CHECK(w == before);
}

TEST_CASE("adding an object inside the sweep corridor never lowers the entry") {
  WorldState w = testing::three_in_a_row();
  SafetyMatrix base = oracle_risk_matrix(w, {Skill::pick}, {"mid"});
  WorldState more = w;
  more.objects.push_back({"blocker", world::ObjectKind::item, 0.04, {0.5, 0.25}});
  SafetyMatrix grown = oracle_risk_matrix(more, {Skill::pick}, {"mid"});
  CHECK(grown.at(0, 0) >= base.at(0, 0));
  CHECK(grown.at(0, 0) > base.at(0, 0));  // the blocker sits right in the corridor
}

TEST_CASE("containers are scored only for navigate") {
  WorldState w = testing::three_in_a_row();
  w.objects.push_back({"bin", world::ObjectKind::container, 0.08, {0.2, 0.8}});
  SafetyMatrix m = oracle_risk_matrix(w);
  std::size_t bin_col = 3;
  REQUIRE(m.objects[bin_col] == "bin");
  CHECK(std::isinf(m.at(0, bin_col)));  // pick
  CHECK(std::isinf(m.at(1, bin_col)));  // place
  CHECK(m.at(2, bin_col) == 0.0);       // navigate
}

TEST_CASE("ledger risk equals the brute-force event recount on random scenes") {
  Rng rng(8844);
  for (int trial = 0; trial < 100; ++trial) {
    world::SceneConfig cfg;
    cfg.scene = trial % 2 ? "chair" : "counter";
    cfg.mode = world::SceneMode::hard;
    cfg.object_count = 5;
    cfg.seed = rng.next_u64();
    WorldState w = world::generate_scene(cfg);
    pddl::SymbolicState s = world::extract_predicates(w);
    const std::string target = w.objects[rng.next_below(w.objects.size())].name;
    auto action = instantiate_skill(w, s, Skill::pick, target);
    REQUIRE(action.has_value());
    WorldState probe = world::clone_world(w);
    world::SkillOutcome out = world::execute_skill(probe, *action);
    CHECK(risk_of(ledger_from_events(out.events, target)) ==
          doctest::Approx(brute_recount(out.events, target)));
  }
}

TEST_CASE("parallel oracle matrix is bitwise identical to the serial reference") {
  Rng rng(31337);
  for (int trial = 0; trial < 10; ++trial) {
    world::SceneConfig cfg;
    cfg.scene = "chair";
    cfg.mode = world::SceneMode::hard;
    cfg.object_count = 6;
    cfg.seed = rng.next_u64();
    WorldState w = world::generate_scene(cfg);
    SafetyMatrix par = oracle_risk_matrix(w, all_skills(), object_names(w));
    SafetyMatrix ser = oracle_risk_matrix_serial(w, all_skills(), object_names(w));
    CHECK(par.entries == ser.entries);
    CHECK(par.skills == ser.skills);
    CHECK(par.objects == ser.objects);
  }
}
