#include "riskplan/risk.hpp"

#include <algorithm>

namespace riskplan::risk {

const std::array<std::string, kSkillCount>& skill_names() {
  static const std::array<std::string, kSkillCount> names = {"pick", "place", "navigate"};
  return names;
}

std::optional<Skill> skill_from_name(const std::string& name) {
  for (int i = 0; i < kSkillCount; ++i)
    if (skill_names()[i] == name) return static_cast<Skill>(i);
  return std::nullopt;
}

CollisionLedger ledger_from_events(const std::vector<world::CollisionEvent>& events,
                                   const std::string& manipulated) {
  CollisionLedger ledger;
  for (const auto& e : events) {
    if (e.actor == e.victim) continue;
    if (e.actor == "robot") {
      if (e.victim == manipulated) continue;  // grasp target, not a bystander
      ledger.robot_victims[e.victim] += e.severity;
    } else {
      auto key = std::minmax(e.actor, e.victim);
      ledger.pair_counts[{key.first, key.second}] += e.severity;
    }
  }
  return ledger;
}

CollisionLedger merge(const CollisionLedger& a, const CollisionLedger& b) {
  CollisionLedger out = a;
  for (const auto& [victim, count] : b.robot_victims) out.robot_victims[victim] += count;
  for (const auto& [pair, count] : b.pair_counts) out.pair_counts[pair] += count;
  return out;
}

double risk_of(const CollisionLedger& ledger) {
  double total = 0.0;
  for (const auto& [victim, count] : ledger.robot_victims) total += count;
  for (const auto& [pair, count] : ledger.pair_counts) total += count;
  return total;
}

std::optional<double> SafetyMatrix::value(const std::string& skill,
                                          const std::string& object) const {
  for (std::size_t i = 0; i < skills.size(); ++i) {
    if (skills[i] != skill) continue;
    for (std::size_t n = 0; n < objects.size(); ++n)
      if (objects[n] == object) return at(i, n);
  }
  return std::nullopt;
}

std::optional<pddl::GroundedAction> instantiate_skill(const world::WorldState& w,
                                                      const pddl::SymbolicState& s, Skill skill,
                                                      const std::string& object) {
  const pddl::Domain& domain = world::tabletop_domain();
  const world::ObjectInstance* obj = w.find_object(object);
  if (!obj) return std::nullopt;

  switch (skill) {
    case Skill::pick: {
      if (obj->kind == world::ObjectKind::container) return std::nullopt;
      for (const auto& atom : s.atoms)
        if (atom.predicate == "on" && atom.args[0] == object)
          return pddl::ground_operator(domain, *domain.find_operator("pick"),
                                       {object, atom.args[1]});
      return std::nullopt;  // held or contained
    }
    case Skill::place: {
      if (obj->kind == world::ObjectKind::container) return std::nullopt;
      if (w.held != object) return std::nullopt;
      auto staging = world::first_free_staging(w);
      if (!staging) return std::nullopt;
      return pddl::ground_operator(domain, *domain.find_operator("place"), {object, *staging});
    }
    case Skill::navigate:
      return pddl::ground_operator(domain, *domain.find_operator("navigate"), {w.at_scene});
  }
  return std::nullopt;
}

namespace {

double probe_entry(const world::WorldState& w, const pddl::SymbolicState& s, Skill skill,
                   const std::string& object) {
  auto action = instantiate_skill(w, s, skill, object);
  if (!action || !pddl::is_applicable(s, *action)) return kInapplicable;
  world::WorldState probe = world::clone_world(w);
  world::SkillOutcome outcome = world::execute_skill(probe, *action);
  return risk_of(ledger_from_events(outcome.events, object));
}

}  // namespace

SafetyMatrix oracle_risk_matrix_serial(const world::WorldState& w, const std::vector<Skill>& skills,
                                       const std::vector<std::string>& objects) {
  SafetyMatrix m;
  for (Skill s : skills) m.skills.push_back(skill_names()[static_cast<int>(s)]);
  m.objects = objects;
  m.entries.assign(skills.size() * objects.size(), 0.0);
  m.source = SafetyMatrix::Source::oracle;
  pddl::SymbolicState state = world::extract_predicates(w);
  for (std::size_t i = 0; i < skills.size(); ++i)
    for (std::size_t n = 0; n < objects.size(); ++n)
      m.at(i, n) = probe_entry(w, state, skills[i], objects[n]);
  return m;
}

SafetyMatrix oracle_risk_matrix(const world::WorldState& w, const std::vector<Skill>& skills,
                                const std::vector<std::string>& objects) {
  SafetyMatrix m;
  for (Skill s : skills) m.skills.push_back(skill_names()[static_cast<int>(s)]);
  m.objects = objects;
  m.entries.assign(skills.size() * objects.size(), 0.0);
  m.source = SafetyMatrix::Source::oracle;
  pddl::SymbolicState state = world::extract_predicates(w);
  const std::int64_t total = static_cast<std::int64_t>(skills.size() * objects.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < total; ++k) {
    std::size_t i = static_cast<std::size_t>(k) / objects.size();
    std::size_t n = static_cast<std::size_t>(k) % objects.size();
    m.entries[k] = probe_entry(w, state, skills[i], objects[n]);
  }
  return m;
}

SafetyMatrix oracle_risk_matrix(const world::WorldState& w) {
  return oracle_risk_matrix(w, all_skills(), object_names(w));
}

std::vector<Skill> all_skills() { return {Skill::pick, Skill::place, Skill::navigate}; }

std::vector<std::string> object_names(const world::WorldState& w) {
  std::vector<std::string> names;
  names.reserve(w.objects.size());
  for (const auto& o : w.objects) names.push_back(o.name);
  return names;
}

}  // namespace riskplan::risk
