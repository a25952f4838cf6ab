#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "riskplan/pddl.hpp"
#include "riskplan/rng.hpp"
#include "riskplan/world.hpp"

namespace riskplan::testing {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture_path(const std::string& name) {
  return std::string(RISKPLAN_FIXTURE_DIR) + "/" + name;
}

// Three equal discs in a row: picking the middle one brushes both
// neighbors' grasp envelopes, picking an end one brushes only the middle.
inline world::WorldState three_in_a_row() {
  world::WorldState w;
  w.scene = "demo";
  w.objects.push_back({"left", world::ObjectKind::item, 0.05, {0.369, 0.5}});
  w.objects.push_back({"mid", world::ObjectKind::item, 0.05, {0.50, 0.5}});
  w.objects.push_back({"right", world::ObjectKind::item, 0.05, {0.631, 0.5}});
  return w;
}

// ---------------------------------------------------------------------------
// Independent sampling oracle for the sweep geometry: walks a dense point
// grid over the swept region itself and tests disc membership per point.
// Intersections shallower than the grid pitch are reported as marginal
// rather than guessed.

enum class SampledHit { hit, miss, marginal };

inline SampledHit sampled_intersection(const geom::SweepRegion& region, geom::Vec2 center,
                                       double radius, double step) {
  auto in_disc = [&](geom::Vec2 p) {
    double dx = p.x - center.x, dy = p.y - center.y;
    return dx * dx + dy * dy < radius * radius;
  };
  bool hit = false;
  if (region.corridor) {
    geom::Vec2 axis = region.corridor->b - region.corridor->a;
    double len = axis.norm();
    geom::Vec2 dir = len > 1e-12 ? axis * (1.0 / len) : geom::Vec2{1.0, 0.0};
    geom::Vec2 normal{-dir.y, dir.x};
    double hw = region.corridor->half_width;
    for (double t = 0.0; t <= len && !hit; t += step)
      for (double u = -hw; u <= hw && !hit; u += step)
        hit = in_disc(region.corridor->a + dir * t + normal * u);
    for (double t = -hw; t <= hw && !hit; t += step)
      for (double u = -hw; u <= hw && !hit; u += step) {
        if (t * t + u * u > hw * hw) continue;
        hit = in_disc(region.corridor->a + dir * t + normal * u) ||
              in_disc(region.corridor->b + dir * t + normal * u);
      }
  }
  if (region.envelope && !hit) {
    double er = region.envelope->radius;
    for (double dx = -er; dx <= er && !hit; dx += step)
      for (double dy = -er; dy <= er && !hit; dy += step) {
        if (dx * dx + dy * dy > er * er) continue;
        hit = in_disc(region.envelope->center + geom::Vec2{dx, dy});
      }
  }
  if (hit) return SampledHit::hit;
  if (std::abs(region.clearance(center, radius)) < 2.5 * step) return SampledHit::marginal;
  return SampledHit::miss;
}

// ---------------------------------------------------------------------------
// Random STRIPS instances plus a deliberately naive step-by-step interpreter,
// the oracle pair for validate_plan.

struct BruteCheck {
  bool valid = false;
  std::optional<std::size_t> failing_step;
};

inline BruteCheck brute_force_check(const pddl::Problem& pr, const pddl::Plan& plan) {
  std::vector<pddl::Atom> facts(pr.initial.atoms.begin(), pr.initial.atoms.end());
  auto contains = [&facts](const pddl::Atom& a) {
    for (const auto& f : facts)
      if (f.predicate == a.predicate && f.args == a.args) return true;
    return false;
  };
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& step = plan.steps[i];
    bool ok = true;
    for (const auto& p : step.pre_pos) ok = ok && contains(p);
    for (const auto& n : step.pre_neg) ok = ok && !contains(n);
    if (!ok) return {false, i};
    std::vector<pddl::Atom> next;
    for (const auto& f : facts) {
      bool deleted = false;
      for (const auto& d : step.del)
        deleted = deleted || (d.predicate == f.predicate && d.args == f.args);
      if (!deleted) next.push_back(f);
    }
    for (const auto& a : step.add)
      if (!std::count(next.begin(), next.end(), a)) next.push_back(a);
    facts = std::move(next);
  }
  for (const auto& g : pr.goal)
    if (!contains(g)) return {false, std::nullopt};
  return {true, std::nullopt};
}

struct RandomInstance {
  pddl::Domain domain;
  pddl::Problem problem;
  pddl::Plan plan;
};

inline RandomInstance random_instance(Rng& rng) {
  RandomInstance inst;
  pddl::Domain& d = inst.domain;
  d.name = "rnd";
  d.types = {{"ta", "object"}, {"tb", "object"}};
  int npred = 2 + static_cast<int>(rng.next_below(3));
  for (int p = 0; p < npred; ++p) {
    pddl::PredicateSchema schema;
    schema.name = "p" + std::to_string(p);
    int arity = static_cast<int>(rng.next_below(3));
    for (int a = 0; a < arity; ++a)
      schema.params.push_back({"?v" + std::to_string(a), rng.next_below(2) ? "ta" : "tb"});
    d.predicates.push_back(schema);
  }
  int nops = 1 + static_cast<int>(rng.next_below(3));
  for (int o = 0; o < nops; ++o) {
    pddl::OperatorSchema op;
    op.name = "op" + std::to_string(o);
    int nparams = static_cast<int>(rng.next_below(3));
    for (int a = 0; a < nparams; ++a)
      op.params.push_back({"?x" + std::to_string(a), rng.next_below(2) ? "ta" : "tb"});
    auto random_literal = [&](bool allow_neg) -> std::optional<pddl::Literal> {
      const auto& schema = d.predicates[rng.next_below(d.predicates.size())];
      pddl::Literal lit;
      lit.predicate = schema.name;
      for (const auto& param : schema.params) {
        std::vector<std::string> opts;
        for (const auto& v : op.params)
          if (v.type == param.type) opts.push_back(v.name);
        if (opts.empty()) return std::nullopt;
        lit.args.push_back(opts[rng.next_below(opts.size())]);
      }
      lit.negated = allow_neg && rng.next_below(4) == 0;
      return lit;
    };
    int npre = static_cast<int>(rng.next_below(3));
    for (int i = 0; i < npre; ++i)
      if (auto lit = random_literal(true)) op.preconditions.push_back(*lit);
    int neff = 1 + static_cast<int>(rng.next_below(2));
    for (int i = 0; i < neff; ++i) {
      if (auto lit = random_literal(true)) {
        bool conflict = false;
        for (const auto& e : op.effects)
          conflict = conflict || (e.predicate == lit->predicate && e.args == lit->args &&
                                  e.negated != lit->negated);
        if (!conflict) op.effects.push_back(*lit);
      }
    }
    d.operators.push_back(op);
  }

  pddl::Problem& pr = inst.problem;
  pr.name = "rnd-problem";
  pr.domain_name = "rnd";
  int nobj = 2 + static_cast<int>(rng.next_below(4));
  for (int i = 0; i < nobj; ++i)
    pr.objects.emplace_back("o" + std::to_string(i), rng.next_below(2) ? "ta" : "tb");

  auto actions = pddl::ground_actions(d, pr.objects);
  for (const auto& schema : d.predicates) {
    int tries = static_cast<int>(rng.next_below(3));
    for (int t = 0; t < tries; ++t) {
      pddl::Atom a;
      a.predicate = schema.name;
      bool ok = true;
      for (const auto& param : schema.params) {
        std::vector<std::string> opts;
        for (const auto& [name, type] : pr.objects)
          if (type == param.type) opts.push_back(name);
        if (opts.empty())
          ok = false;
        else
          a.args.push_back(opts[rng.next_below(opts.size())]);
      }
      if (ok) pr.initial.atoms.insert(a);
    }
  }
  if (!actions.empty()) {
    int len = static_cast<int>(rng.next_below(7));
    for (int i = 0; i < len; ++i)
      inst.plan.steps.push_back(actions[rng.next_below(actions.size())]);
  }
  if (rng.next_below(3) != 0) {
    for (const auto& a : pr.initial.atoms)
      if (rng.next_below(3) == 0) pr.goal.push_back(a);
  }
  return inst;
}

}  // namespace riskplan::testing
