#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace riskplan::pddl {

// STRIPS + :typing subset. Identifiers are case-insensitive and normalized
// to lower case; '-' and '_' are allowed inside names.

struct ParseError : std::runtime_error {
  int line = 0;
  int col = 0;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

struct TypedVar {
  std::string name;  // includes leading '?' for variables
  std::string type;
  bool operator==(const TypedVar&) const = default;
};

struct PredicateSchema {
  std::string name;
  std::vector<TypedVar> params;
  bool operator==(const PredicateSchema&) const = default;
};

// Term arguments are either variables ("?x") or object names.
struct Literal {
  std::string predicate;
  std::vector<std::string> args;
  bool negated = false;
  bool operator==(const Literal&) const = default;
};

// Ground positive atom; the unit a SymbolicState is made of.
struct Atom {
  std::string predicate;
  std::vector<std::string> args;
  auto operator<=>(const Atom&) const = default;
  std::string to_string() const;
};

struct OperatorSchema {
  std::string name;
  std::vector<TypedVar> params;
  std::vector<Literal> preconditions;  // positive or negated
  std::vector<Literal> effects;        // positive = add, negated = delete
  bool operator==(const OperatorSchema&) const = default;
};

struct Domain {
  std::string name;
  std::vector<std::pair<std::string, std::string>> types;  // (type, parent)
  std::vector<PredicateSchema> predicates;
  std::vector<OperatorSchema> operators;

  bool operator==(const Domain&) const = default;

  bool type_declared(const std::string& t) const;
  // true when `t` equals `ancestor` or is a descendant of it
  bool type_is(const std::string& t, const std::string& ancestor) const;
  const PredicateSchema* find_predicate(const std::string& name) const;
  const OperatorSchema* find_operator(const std::string& name) const;
};

// Closed world: atoms absent from the set are false.
struct SymbolicState {
  std::set<Atom> atoms;
  bool operator==(const SymbolicState&) const = default;
  bool holds(const Atom& a) const { return atoms.count(a) > 0; }
};

struct Problem {
  std::string name;
  std::string domain_name;
  std::vector<std::pair<std::string, std::string>> objects;  // (name, type)
  SymbolicState initial;
  std::vector<Atom> goal;  // positive ground conjunction

  bool operator==(const Problem&) const = default;
  std::optional<std::string> type_of(const std::string& object) const;
};

struct GroundedAction {
  std::string op;
  std::vector<std::string> binding;
  std::vector<Atom> pre_pos;
  std::vector<Atom> pre_neg;
  std::vector<Atom> add;
  std::vector<Atom> del;

  bool operator==(const GroundedAction&) const = default;
  std::string to_string() const;  // "(pick apple table)"
};

struct Plan {
  std::vector<GroundedAction> steps;
};

struct PlanCheck {
  bool valid = false;
  std::optional<std::size_t> failing_step;  // set when a step is inapplicable
  SymbolicState final_state;
};

Domain parse_domain(std::string_view text);
Problem parse_problem(std::string_view text, const Domain& domain);

// Canonical re-rendering: lower case, 2-space indent. parse ∘ render is the
// identity on parsed values.
std::string render(const Domain& domain);
std::string render(const Problem& problem, const Domain& domain);

// Parses "(and (on apple chair) ...)" against the domain; rejects variables
// and negations. Used for goal text coming from the translator or a backend.
std::vector<Atom> parse_goal_conjunction(std::string_view text, const Domain& domain,
                                         const std::vector<std::pair<std::string, std::string>>& objects);

// Every type-consistent binding of every operator, in operator declaration
// order then lexicographic binding order. Deterministic and duplicate-free.
std::vector<GroundedAction> ground_actions(
    const Domain& domain, const std::vector<std::pair<std::string, std::string>>& objects);

GroundedAction ground_operator(const Domain& domain, const OperatorSchema& op,
                               const std::vector<std::string>& binding);

bool is_applicable(const SymbolicState& s, const GroundedAction& a);

// STRIPS transition: (s - del) ∪ add. Throws std::runtime_error when `a` is
// not applicable in `s`.
SymbolicState apply(const SymbolicState& s, const GroundedAction& a);

bool goal_satisfied(const SymbolicState& s, const std::vector<Atom>& goal);

PlanCheck validate_plan(const Problem& problem, const Domain& domain, const Plan& plan);

}  // namespace riskplan::pddl
