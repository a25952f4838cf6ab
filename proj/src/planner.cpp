#include "riskplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace riskplan::plan {

std::string Decision::skill_string() const {
  if (action.op == "pick" && action.binding.size() == 2)
    return "(pick " + action.binding[0] + ")";
  return action.to_string();
}

std::optional<std::vector<pddl::GroundedAction>> shortest_plan(
    const pddl::Domain& domain,
    const std::vector<std::pair<std::string, std::string>>& objects,
    const pddl::SymbolicState& start, const std::vector<pddl::Atom>& goal, int depth_limit) {
  if (pddl::goal_satisfied(start, goal)) return std::vector<pddl::GroundedAction>{};

  const std::vector<pddl::GroundedAction> actions = pddl::ground_actions(domain, objects);

  struct Node {
    pddl::SymbolicState state;
    std::size_t parent;
    std::size_t action;
    int depth;
  };
  std::vector<Node> nodes;
  nodes.push_back({start, 0, 0, 0});
  std::set<std::set<pddl::Atom>> visited;
  visited.insert(start.atoms);

  auto reconstruct = [&nodes, &actions](std::size_t leaf) {
    std::vector<pddl::GroundedAction> plan;
    for (std::size_t at = leaf; nodes[at].depth > 0; at = nodes[at].parent)
      plan.push_back(actions[nodes[at].action]);
    std::reverse(plan.begin(), plan.end());
    return plan;
  };

  for (std::size_t head = 0; head < nodes.size(); ++head) {
    if (nodes[head].depth >= depth_limit) continue;
    for (std::size_t a = 0; a < actions.size(); ++a) {
      if (!pddl::is_applicable(nodes[head].state, actions[a])) continue;
      pddl::SymbolicState next = pddl::apply(nodes[head].state, actions[a]);
      if (!visited.insert(next.atoms).second) continue;
      nodes.push_back({std::move(next), head, a, nodes[head].depth + 1});
      if (pddl::goal_satisfied(nodes.back().state, goal)) return reconstruct(nodes.size() - 1);
    }
  }
  return std::nullopt;
}

namespace {

std::optional<std::string> location_of(const pddl::SymbolicState& s, const std::string& object) {
  for (const auto& atom : s.atoms)
    if (atom.predicate == "on" && atom.args[0] == object) return atom.args[1];
  return std::nullopt;
}

Decision direct_decision(pddl::GroundedAction action) {
  Decision d;
  d.action = std::move(action);
  d.rationale = Decision::Rationale::direct;
  d.backend = Decision::Backend::search;
  return d;
}

}  // namespace

Decision next_action_search(const PlanningContext& ctx, double rho) {
  const pddl::Domain& domain = world::tabletop_domain();
  const world::WorldState& w = *ctx.world;
  auto plan = shortest_plan(domain, w.pddl_objects(), ctx.symbolic, ctx.goal);
  if (!plan || plan->empty())
    throw NoPlanError("no symbolic plan reaches the goal");

  pddl::GroundedAction head = (*plan)[0];
  if (head.op == "navigate" || !ctx.matrix) return direct_decision(std::move(head));

  const std::string& target = head.binding[0];
  auto entry = ctx.matrix->value(head.op, target);
  if (!entry || !std::isfinite(*entry) || *entry <= rho) return direct_decision(std::move(head));

  // Clearing: the plan head is predicted to collide. Stage away the
  // riskiest object whose disc blocks the head's sweep region.
  auto region = world::sweep_region(w, head);
  if (!region) return direct_decision(std::move(head));

  std::string best;
  double best_risk = -1.0;
  for (const auto& obj : w.objects) {
    if (obj.name == target || w.held == obj.name || obj.toppled) continue;
    if (!region->intersects_disc(obj.pos, obj.radius)) continue;
    auto risk_entry = ctx.matrix->value(head.op, obj.name);
    double value = risk_entry && std::isfinite(*risk_entry) ? *risk_entry : 0.0;
    if (value > best_risk) {
      best_risk = value;
      best = obj.name;
    }
  }
  if (best.empty()) return direct_decision(std::move(head));

  Decision d;
  d.rationale = Decision::Rationale::clearing;
  d.backend = Decision::Backend::search;
  if (!w.held) {
    auto spot = location_of(ctx.symbolic, best);
    if (!spot) return direct_decision(std::move(head));
    d.action = pddl::ground_operator(domain, *domain.find_operator("pick"), {best, *spot});
  } else {
    auto staging = world::first_free_staging(w);
    if (!staging) return direct_decision(std::move(head));
    d.action = pddl::ground_operator(domain, *domain.find_operator("place"), {*w.held, *staging});
  }
  if (!pddl::is_applicable(ctx.symbolic, d.action)) return direct_decision(std::move(head));
  return d;
}

std::string build_planner_prompt(const PlanningContext& ctx) {
  std::ostringstream out;
  out << world::tabletop_domain_text() << "\n";
  out << "Goal:\n(and";
  for (const auto& g : ctx.goal) out << " " << g.to_string();
  out << ")\n\n";
  out << "Current state:\n";
  for (const auto& atom : ctx.symbolic.atoms) out << atom.to_string() << "\n";
  if (ctx.ranking && !ctx.ranking->sentence_text.empty()) {
    out << "\nSafety ranking:\n" << ctx.ranking->sentence_text << "\n";
  }
  out << "\nReply with exactly one grounded operator, e.g. (pick apple).\n";
  return out.str();
}

namespace {

std::optional<pddl::GroundedAction> parse_operator_reply(const std::string& reply,
                                                         const PlanningContext& ctx) {
  auto open = reply.find('(');
  if (open == std::string::npos) return std::nullopt;
  auto close = reply.find(')', open);
  if (close == std::string::npos) return std::nullopt;
  std::istringstream body(reply.substr(open + 1, close - open - 1));
  std::string op;
  std::vector<std::string> args;
  body >> op;
  std::string tok;
  while (body >> tok) {
    std::transform(tok.begin(), tok.end(), tok.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    args.push_back(tok);
  }
  std::transform(op.begin(), op.end(), op.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  const pddl::Domain& domain = world::tabletop_domain();
  const pddl::OperatorSchema* schema = domain.find_operator(op);
  if (!schema) return std::nullopt;
  if (op == "pick" && args.size() == 1) {  // skill-form: location resolved from state
    auto spot = location_of(ctx.symbolic, args[0]);
    if (!spot) return std::nullopt;
    args.push_back(*spot);
  }
  if (args.size() != schema->params.size()) return std::nullopt;
  pddl::GroundedAction action = pddl::ground_operator(domain, *schema, args);
  if (!pddl::is_applicable(ctx.symbolic, action)) return std::nullopt;
  return action;
}

}  // namespace

Decision next_action_llm(const PlanningContext& ctx, llm::LlmBackend& backend, double rho) {
  std::string prompt = build_planner_prompt(ctx);
  for (int attempt = 0; attempt < 3; ++attempt) {
    std::string reply;
    try {
      reply = backend.complete(prompt);
    } catch (const llm::BackendError&) {
      continue;
    }
    auto action = parse_operator_reply(reply, ctx);
    if (!action) continue;
    Decision d;
    d.action = std::move(*action);
    d.rationale = Decision::Rationale::backend_text;
    d.backend = Decision::Backend::llm;
    d.backend_reply = reply;
    return d;
  }
  return next_action_search(ctx, rho);
}

EpisodeTrace run_episode(world::WorldState& w, const std::vector<pddl::Atom>& goal,
                         const EpisodeOptions& opts) {
  EpisodeTrace trace;
  int consecutive_failures = 0;

  while (true) {
    PlanningContext ctx;
    ctx.goal = goal;
    ctx.world = &w;
    ctx.symbolic = world::extract_predicates(w);
    ctx.step_budget = opts.step_budget;

    if (pddl::goal_satisfied(ctx.symbolic, goal)) {
      trace.success = true;
      break;
    }
    if (trace.steps_used >= opts.step_budget) break;

    if (opts.safety_enabled) {
      ctx.matrix = opts.model ? safety::predict_matrix(*opts.model, w)
                              : risk::oracle_risk_matrix(w);
      ctx.ranking = safety::matrix_to_ranking(*ctx.matrix);
    }

    Decision decision;
    try {
      decision = opts.backend ? next_action_llm(ctx, *opts.backend, opts.rho)
                              : next_action_search(ctx, opts.rho);
    } catch (const NoPlanError& e) {
      trace.error = e.what();
      break;
    }

    world::SkillOutcome outcome;
    try {
      outcome = world::execute_skill(w, decision.action);
    } catch (const std::runtime_error& e) {
      trace.error = e.what();
      break;
    }

    const std::string manipulated =
        decision.action.op == "navigate" ? std::string{} : decision.action.binding[0];
    trace.total_collisions +=
        risk::risk_of(risk::ledger_from_events(outcome.events, manipulated));
    consecutive_failures = outcome.succeeded ? 0 : consecutive_failures + 1;
    trace.decisions.push_back(std::move(decision));
    trace.outcomes.push_back(std::move(outcome));
    ++trace.steps_used;

    if (consecutive_failures >= 3) break;
  }
  return trace;
}

std::string trace_to_text(const EpisodeTrace& trace) {
  std::ostringstream out;
  for (std::size_t i = 0; i < trace.decisions.size(); ++i) {
    const Decision& d = trace.decisions[i];
    const world::SkillOutcome& o = trace.outcomes[i];
    out << "step " << i << " " << d.skill_string() << " rationale=";
    switch (d.rationale) {
      case Decision::Rationale::direct: out << "direct"; break;
      case Decision::Rationale::clearing: out << "clearing"; break;
      case Decision::Rationale::backend_text: out << "backend-text"; break;
    }
    out << " backend=" << (d.backend == Decision::Backend::search ? "search" : "llm");
    out << " succeeded=" << (o.succeeded ? 1 : 0) << " ticks=" << o.ticks_used << "\n";
    for (const auto& event : o.events) out << world::format_event(event) << "\n";
  }
  out << "total-collisions " << trace.total_collisions << "\n";
  out << "success " << (trace.success ? 1 : 0) << "\n";
  out << "steps " << trace.steps_used << "\n";
  if (trace.error) out << "error " << *trace.error << "\n";
  return out.str();
}

}  // namespace riskplan::plan
