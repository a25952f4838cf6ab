#pragma once

#include <optional>
#include <string>
#include <vector>

#include "riskplan/backend.hpp"
#include "riskplan/pddl.hpp"
#include "riskplan/risk.hpp"
#include "riskplan/safety.hpp"
#include "riskplan/world.hpp"

namespace riskplan::plan {

struct NoPlanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Decision {
  enum class Rationale { direct, clearing, backend_text };
  enum class Backend { search, llm };

  pddl::GroundedAction action;
  Rationale rationale = Rationale::direct;
  Backend backend = Backend::search;
  std::string backend_reply;  // raw text when the llm backend produced it

  // Skill-level rendering: pick drops its location binding.
  std::string skill_string() const;
};

struct PlanningContext {
  std::vector<pddl::Atom> goal;
  world::WorldState* world = nullptr;
  pddl::SymbolicState symbolic;                 // extract_predicates(world) at decision time
  std::optional<risk::SafetyMatrix> matrix;     // present iff safety module enabled
  std::optional<safety::SafetyRanking> ranking; // derived from matrix
  int step_budget = 20;
};

struct EpisodeTrace {
  std::vector<Decision> decisions;
  std::vector<world::SkillOutcome> outcomes;
  double total_collisions = 0.0;  // severity-weighted, summed per-step ledgers
  bool success = false;
  int steps_used = 0;
  std::optional<std::string> error;
};

// Breadth-first search over the grounded actions in grounding order; the
// first shortest action sequence reaching the goal wins, so results are
// deterministic. Empty plan when the goal already holds, nothing when it is
// unreachable within depth_limit.
std::optional<std::vector<pddl::GroundedAction>> shortest_plan(
    const pddl::Domain& domain,
    const std::vector<std::pair<std::string, std::string>>& objects,
    const pddl::SymbolicState& start, const std::vector<pddl::Atom>& goal, int depth_limit = 12);

// Deterministic safety-guided decision rule. Plans to the goal, and when the
// safety entry for the plan head exceeds rho, emits a clearing action for
// the riskiest object blocking the head's sweep region instead.
Decision next_action_search(const PlanningContext& ctx, double rho);

// Backend decision: prompt with domain + goal + state (+ ranking sentences
// when safety is on), parse the reply as one grounded operator, retry up to
// 3 times, then fall back to next_action_search.
Decision next_action_llm(const PlanningContext& ctx, llm::LlmBackend& backend, double rho);

std::string build_planner_prompt(const PlanningContext& ctx);

struct EpisodeOptions {
  bool safety_enabled = true;
  double rho = 0.5;
  int step_budget = 20;
  // nullptr scores with the exact oracle; otherwise the learned regressor
  const safety::ModelParameters* model = nullptr;
  llm::LlmBackend* backend = nullptr;  // nullptr = search backend
};

// Closed loop: re-extract state, re-score safety, decide, execute, repeat
// until the goal holds, the budget runs out, or three consecutive skills
// fail. The world is mutated in place.
EpisodeTrace run_episode(world::WorldState& w, const std::vector<pddl::Atom>& goal,
                         const EpisodeOptions& opts);

// Trace file: decision lines plus the event-log lines of each step.
std::string trace_to_text(const EpisodeTrace& trace);

}  // namespace riskplan::plan
