#pragma once

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "riskplan/pddl.hpp"
#include "riskplan/world.hpp"

namespace riskplan::risk {

// Skill templates the planner can execute and the safety model scores.
enum class Skill { pick = 0, place = 1, navigate = 2 };
inline constexpr int kSkillCount = 3;

const std::array<std::string, kSkillCount>& skill_names();
std::optional<Skill> skill_from_name(const std::string& name);

// Sentinel for (skill, object) pairs that cannot be instantiated.
inline constexpr double kInapplicable = std::numeric_limits<double>::infinity();

// Severity-weighted collision counts from one skill execution: robot hits on
// bystanders plus induced object-object hits. The manipulated object itself
// is the grasp target, not a bystander, so robot hits on it are excluded.
struct CollisionLedger {
  std::map<std::string, int> robot_victims;
  std::map<std::pair<std::string, std::string>, int> pair_counts;  // unordered, key sorted

  bool operator==(const CollisionLedger&) const = default;
};

struct RiskLabel {
  int skill_index = 0;
  std::string object;
  double risk = 0.0;
};

CollisionLedger ledger_from_events(const std::vector<world::CollisionEvent>& events,
                                   const std::string& manipulated);

CollisionLedger merge(const CollisionLedger& a, const CollisionLedger& b);

// Total risk: sum of robot-victim counts plus sum of pair counts.
double risk_of(const CollisionLedger& ledger);

// I x N table of risks, skills x objects. Source records whether entries
// came from the exact simulator probe or from the learned regressor.
struct SafetyMatrix {
  enum class Source { oracle, predicted };
  std::vector<std::string> skills;
  std::vector<std::string> objects;
  std::vector<double> entries;  // row-major, skills x objects
  Source source = Source::oracle;

  double at(std::size_t i, std::size_t n) const { return entries[i * objects.size() + n]; }
  double& at(std::size_t i, std::size_t n) { return entries[i * objects.size() + n]; }
  std::optional<double> value(const std::string& skill, const std::string& object) const;
};

// Grounds the skill template for one object against the current state:
// pick(o, <its spot>), place(o, <first free staging>) when o is held,
// navigate(<current scene>). Returns nothing when not instantiable.
std::optional<pddl::GroundedAction> instantiate_skill(const world::WorldState& w,
                                                      const pddl::SymbolicState& s, Skill skill,
                                                      const std::string& object);

// Exact risk matrix: every applicable (skill, object) pair executed on a
// private clone of w, inapplicable pairs marked with +inf. w is untouched.
// Entries are independent, so the default version fans them out with OpenMP;
// the serial variant is the reference the tests compare against.
SafetyMatrix oracle_risk_matrix(const world::WorldState& w, const std::vector<Skill>& skills,
                                const std::vector<std::string>& objects);
SafetyMatrix oracle_risk_matrix_serial(const world::WorldState& w, const std::vector<Skill>& skills,
                                       const std::vector<std::string>& objects);

// All three skills over every object in w, in object declaration order.
SafetyMatrix oracle_risk_matrix(const world::WorldState& w);

std::vector<Skill> all_skills();
std::vector<std::string> object_names(const world::WorldState& w);

}  // namespace riskplan::risk
