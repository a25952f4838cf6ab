#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "riskplan/backend.hpp"
#include "riskplan/translate.hpp"
#include "riskplan/world.hpp"
#include "test_fixtures.hpp"

using namespace riskplan;
using namespace riskplan::nl;

namespace {

std::vector<std::pair<std::string, std::string>> corpus_vocabulary() {
  return {{"apple", "item"},          {"box_1", "item"},     {"box_2", "item"},
          {"strawberry_box", "item"}, {"tomato_can", "item"}, {"blue_box", "container"},
          {"table", "spot"},          {"chair", "spot"},     {"staging_0", "spot"}};
}

Instruction make(const std::string& text) { return {text, corpus_vocabulary()}; }

struct UnreachableBackend : llm::LlmBackend {
  std::string complete(const std::string&) override {
    throw llm::BackendError("backend unreachable");
  }
  std::string name() const override { return "down"; }
};

}  // namespace

TEST_CASE("the table-to-chair instruction translates to its on-goal") {
  GoalSpec goal = translate_rule_based(make("Move the apple on the table to the chair"));
  REQUIRE(goal.literals.size() == 1);
  CHECK(goal.literals[0].to_string() == "(on apple chair)");
  CHECK(goal.provenance == Provenance::rule_based);
}

TEST_CASE("the box-into-box instruction translates to its in-goal") {
  GoalSpec goal = translate_rule_based(make("Put the strawberry_box into the blue_box"));
  REQUIRE(goal.literals.size() == 1);
  CHECK(goal.literals[0].to_string() == "(in strawberry_box blue_box)");
}

TEST_CASE("multi-word names and the descriptive under-clause resolve") {
  GoalSpec goal = translate_rule_based(
      make("Put the strawberry box under the tomato can into the blue box"));
  REQUIRE(goal.literals.size() == 1);
  CHECK(goal.literals[0].to_string() == "(in strawberry_box blue_box)");
}

TEST_CASE("remaining grammar patterns cover on, holding, and move-into goals") {
  CHECK(translate_rule_based(make("Put the apple on the chair")).literals[0].to_string() ==
        "(on apple chair)");
  CHECK(translate_rule_based(make("Pick up the tomato_can")).literals[0].to_string() ==
        "(holding tomato_can)");
  CHECK(translate_rule_based(make("Move the box_2 into the blue_box")).literals[0].to_string() ==
        "(in box_2 blue_box)");
  CHECK(translate_rule_based(make("Move the apple to the chair")).literals[0].to_string() ==
        "(on apple chair)");
}

TEST_CASE("instructions outside the grammar report no-pattern-match") {
  CHECK_THROWS_WITH_AS(translate_rule_based(make("Dance with the apple")),
                       doctest::Contains("no pattern"), TranslateError);
}

TEST_CASE("unknown object names carry the offending span") {
  try {
    translate_rule_based(make("Move the banana to the chair"));
    FAIL("expected throw");
  } catch (const TranslateError& e) {
    CHECK(e.span == "banana");
    CHECK(std::string(e.what()).find("banana") != std::string::npos);
  }
}

TEST_CASE("translation is deterministic and tolerant of case and articles") {
  GoalSpec a = translate_rule_based(make("MOVE THE APPLE TO THE CHAIR"));
  GoalSpec b = translate_rule_based(make("move apple to chair"));
  CHECK(a.literals == b.literals);
}

TEST_CASE("goal rendering is canonical") {
  GoalSpec goal;
  CHECK(render_goal_pddl(goal) == "(and )");
  goal.literals.push_back(pddl::Atom{"on", {"apple", "chair"}});
  CHECK(render_goal_pddl(goal) == "(and (on apple chair))");
  goal.literals.push_back(pddl::Atom{"in", {"box_1", "blue_box"}});
  CHECK(render_goal_pddl(goal) == "(and (in box_1 blue_box) (on apple chair))");
}

TEST_CASE("rendered goals round-trip through the PDDL parser") {
  GoalSpec goal;
  goal.literals.push_back(pddl::Atom{"on", {"apple", "chair"}});
  goal.literals.push_back(pddl::Atom{"holding", {"box_1"}});
  auto parsed = pddl::parse_goal_conjunction(render_goal_pddl(goal), world::tabletop_domain(),
                                             corpus_vocabulary());
  std::vector<pddl::Atom> sorted = goal.literals;
  std::sort(sorted.begin(), sorted.end());
  CHECK(parsed == sorted);
}

TEST_CASE("every corpus instruction translates, type-checks, and round-trips") {
  auto lines = load_instruction_corpus(testing::read_file(testing::fixture_path("instructions.txt")));
  REQUIRE(lines.size() >= 5);
  for (const auto& line : lines) {
    GoalSpec goal = translate_rule_based(make(line));
    REQUIRE(!goal.literals.empty());
    auto parsed = pddl::parse_goal_conjunction(render_goal_pddl(goal), world::tabletop_domain(),
                                               corpus_vocabulary());
    std::vector<pddl::Atom> sorted = goal.literals;
    std::sort(sorted.begin(), sorted.end());
    CHECK(parsed == sorted);
  }
}

TEST_CASE("backend path accepts a valid goal reply") {
  llm::StubBackend backend({"(and (on apple chair))"});
  GoalSpec goal = translate_llm(make("Move the apple to the chair"), backend,
                                world::tabletop_domain(), default_translation_template());
  CHECK(goal.provenance == Provenance::llm);
  REQUIRE(goal.literals.size() == 1);
  CHECK(goal.literals[0].to_string() == "(on apple chair)");
  REQUIRE(backend.prompts().size() == 1);
  CHECK(backend.prompts()[0].find("Move the apple to the chair") != std::string::npos);
  CHECK(backend.prompts()[0].find("(define (domain tabletop)") != std::string::npos);
}

TEST_CASE("three malformed replies fall back to the rule-based path") {
  llm::StubBackend backend({"gibberish", "also gibberish", "still gibberish"});
  GoalSpec goal = translate_llm(make("Move the apple to the chair"), backend,
                                world::tabletop_domain(), default_translation_template());
  CHECK(goal.provenance == Provenance::rule_based);
  CHECK(goal.literals[0].to_string() == "(on apple chair)");
  CHECK(backend.prompts().size() == 3);
}

TEST_CASE("a goal naming an unknown object is rejected and falls back") {
  llm::StubBackend backend({"(and (on banana chair))"});
  GoalSpec goal = translate_llm(make("Move the apple to the chair"), backend,
                                world::tabletop_domain(), default_translation_template());
  CHECK(goal.provenance == Provenance::rule_based);
  CHECK(goal.literals[0].to_string() == "(on apple chair)");
}

TEST_CASE("an unreachable backend falls back after retries") {
  UnreachableBackend backend;
  GoalSpec goal = translate_llm(make("Move the apple to the chair"), backend,
                                world::tabletop_domain(), default_translation_template());
  CHECK(goal.provenance == Provenance::rule_based);
}

TEST_CASE("fallback failure surfaces the rule-based error") {
  llm::StubBackend backend({"nope"});
  CHECK_THROWS_AS(translate_llm(make("Dance with the apple"), backend, world::tabletop_domain(),
                                default_translation_template()),
                  TranslateError);
}

TEST_CASE("the shipped prompt template matches the built-in one") {
  CHECK(testing::read_file(testing::fixture_path("prompt_translate.txt")) ==
        default_translation_template());
}

TEST_CASE("corpus loader skips comments and blank lines") {
  auto lines = load_instruction_corpus("# header\n\nPick up the apple\n# comment\nline two\n");
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "Pick up the apple");
  CHECK(lines[1] == "line two");
}
