#include "riskplan/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace riskplan::pddl {

namespace {

struct Sexp {
  bool is_list = false;
  std::string atom;
  std::vector<Sexp> items;
  int line = 1;
  int col = 1;
};

struct Lexer {
  std::string_view text;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  void advance() {
    if (pos < text.size() && text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_ws() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == ';') {  // comment to end of line
        while (pos < text.size() && text[pos] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_ws();
    return pos >= text.size();
  }

  Sexp read() {
    skip_ws();
    if (pos >= text.size()) throw ParseError("unexpected end of input", line, col);
    Sexp node;
    node.line = line;
    node.col = col;
    char c = text[pos];
    if (c == '(') {
      advance();
      node.is_list = true;
      while (true) {
        skip_ws();
        if (pos >= text.size()) throw ParseError("unclosed '('", node.line, node.col);
        if (text[pos] == ')') {
          advance();
          break;
        }
        node.items.push_back(read());
      }
      return node;
    }
    if (c == ')') throw ParseError("unexpected ')'", line, col);
    std::string tok;
    while (pos < text.size()) {
      c = text[pos];
      if (c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c))) break;
      tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      advance();
    }
    node.atom = tok;
    return node;
  }
};

bool is_variable(const std::string& s) { return !s.empty() && s[0] == '?'; }

const std::string& expect_atom(const Sexp& s, const char* what) {
  if (s.is_list) throw ParseError(std::string("expected ") + what, s.line, s.col);
  return s.atom;
}

// `items[i..]` as a PDDL typed list: names optionally followed by "- type".
std::vector<TypedVar> parse_typed_list(const std::vector<Sexp>& items, std::size_t begin,
                                       const std::string& default_type) {
  std::vector<TypedVar> out;
  std::vector<std::string> pending;
  for (std::size_t i = begin; i < items.size(); ++i) {
    const std::string& tok = expect_atom(items[i], "name in typed list");
    if (tok == "-") {
      if (i + 1 >= items.size())
        throw ParseError("dangling '-' in typed list", items[i].line, items[i].col);
      const std::string& type = expect_atom(items[i + 1], "type name");
      for (auto& n : pending) out.push_back({n, type});
      pending.clear();
      ++i;
    } else {
      pending.push_back(tok);
    }
  }
  for (auto& n : pending) out.push_back({n, default_type});
  return out;
}

Literal parse_literal(const Sexp& s) {
  if (!s.is_list || s.items.empty())
    throw ParseError("expected literal", s.line, s.col);
  if (!s.items[0].is_list && s.items[0].atom == "not") {
    if (s.items.size() != 2)
      throw ParseError("'not' takes exactly one literal", s.line, s.col);
    Literal inner = parse_literal(s.items[1]);
    if (inner.negated) throw ParseError("double negation", s.line, s.col);
    inner.negated = true;
    return inner;
  }
  Literal lit;
  lit.predicate = expect_atom(s.items[0], "predicate name");
  for (std::size_t i = 1; i < s.items.size(); ++i)
    lit.args.push_back(expect_atom(s.items[i], "argument"));
  return lit;
}

// `(and lit*)`, a bare literal, or `(and)` for the empty conjunction.
std::vector<Literal> parse_conjunction(const Sexp& s) {
  std::vector<Literal> out;
  if (s.is_list && !s.items.empty() && !s.items[0].is_list && s.items[0].atom == "and") {
    for (std::size_t i = 1; i < s.items.size(); ++i) out.push_back(parse_literal(s.items[i]));
    return out;
  }
  if (s.is_list && s.items.empty()) return out;  // "()" — empty conjunction
  out.push_back(parse_literal(s));
  return out;
}

void check_literal_against_schema(const Literal& lit, const Domain& d,
                                  const std::vector<TypedVar>& params, int line, int col) {
  const PredicateSchema* schema = d.find_predicate(lit.predicate);
  if (!schema) throw ParseError("unknown predicate " + lit.predicate, line, col);
  if (schema->params.size() != lit.args.size())
    throw ParseError("arity mismatch for predicate " + lit.predicate, line, col);
  for (const auto& arg : lit.args) {
    if (is_variable(arg)) {
      bool found = false;
      for (const auto& p : params) found = found || p.name == arg;
      if (!found)
        throw ParseError("free variable " + arg + " not in parameters", line, col);
    }
  }
}

Atom substitute(const Literal& lit, const std::map<std::string, std::string>& env) {
  Atom a;
  a.predicate = lit.predicate;
  for (const auto& arg : lit.args) {
    auto it = env.find(arg);
    a.args.push_back(it != env.end() ? it->second : arg);
  }
  return a;
}

std::string join_args(const std::vector<std::string>& args) {
  std::string out;
  for (const auto& a : args) {
    out.push_back(' ');
    out += a;
  }
  return out;
}

std::string render_literal(const Literal& lit) {
  std::string body = "(" + lit.predicate + join_args(lit.args) + ")";
  return lit.negated ? "(not " + body + ")" : body;
}

std::string render_typed_vars(const std::vector<TypedVar>& vars) {
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) out.push_back(' ');
    out += vars[i].name + " - " + vars[i].type;
  }
  return out;
}

std::string render_conjunction(const std::vector<Literal>& lits) {
  std::string out = "(and";
  for (const auto& l : lits) out += " " + render_literal(l);
  out += ")";
  return out;
}

}  // namespace

std::string Atom::to_string() const { return "(" + predicate + join_args(args) + ")"; }

std::string GroundedAction::to_string() const { return "(" + op + join_args(binding) + ")"; }

bool Domain::type_declared(const std::string& t) const {
  if (t == "object") return true;
  for (const auto& [name, parent] : types)
    if (name == t || parent == t) return true;
  return false;
}

bool Domain::type_is(const std::string& t, const std::string& ancestor) const {
  if (t == ancestor) return true;
  if (t == "object") return false;
  std::string cur = t;
  for (std::size_t guard = 0; guard <= types.size(); ++guard) {
    std::string parent = "object";
    for (const auto& [name, p] : types)
      if (name == cur) {
        parent = p;
        break;
      }
    if (parent == ancestor) return true;
    if (parent == "object") return ancestor == "object";
    cur = parent;
  }
  return false;
}

const PredicateSchema* Domain::find_predicate(const std::string& n) const {
  for (const auto& p : predicates)
    if (p.name == n) return &p;
  return nullptr;
}

const OperatorSchema* Domain::find_operator(const std::string& n) const {
  for (const auto& o : operators)
    if (o.name == n) return &o;
  return nullptr;
}

std::optional<std::string> Problem::type_of(const std::string& object) const {
  for (const auto& [name, type] : objects)
    if (name == object) return type;
  return std::nullopt;
}

Domain parse_domain(std::string_view text) {
  Lexer lex{text};
  Sexp root = lex.read();
  if (!lex.eof()) throw ParseError("trailing content after domain", lex.line, lex.col);
  if (!root.is_list || root.items.empty() || root.items[0].atom != "define")
    throw ParseError("expected (define ...)", root.line, root.col);
  if (root.items.size() < 2 || !root.items[1].is_list || root.items[1].items.size() != 2 ||
      root.items[1].items[0].atom != "domain")
    throw ParseError("expected (domain <name>)", root.line, root.col);

  Domain d;
  d.name = expect_atom(root.items[1].items[1], "domain name");

  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const Sexp& sec = root.items[i];
    if (!sec.is_list || sec.items.empty())
      throw ParseError("expected domain section", sec.line, sec.col);
    const std::string& key = expect_atom(sec.items[0], "section keyword");
    if (key == ":requirements") {
      for (std::size_t j = 1; j < sec.items.size(); ++j) {
        const std::string& req = expect_atom(sec.items[j], "requirement");
        if (req != ":strips" && req != ":typing")
          throw ParseError("unsupported requirement " + req, sec.items[j].line, sec.items[j].col);
      }
    } else if (key == ":types") {
      auto typed = parse_typed_list(sec.items, 1, "object");
      for (auto& tv : typed) d.types.emplace_back(tv.name, tv.type);
    } else if (key == ":predicates") {
      for (std::size_t j = 1; j < sec.items.size(); ++j) {
        const Sexp& p = sec.items[j];
        if (!p.is_list || p.items.empty())
          throw ParseError("expected predicate declaration", p.line, p.col);
        PredicateSchema schema;
        schema.name = expect_atom(p.items[0], "predicate name");
        schema.params = parse_typed_list(p.items, 1, "object");
        for (const auto& v : schema.params)
          if (!is_variable(v.name))
            throw ParseError("predicate parameter must be a variable", p.line, p.col);
        d.predicates.push_back(std::move(schema));
      }
    } else if (key == ":action") {
      if (sec.items.size() < 2)
        throw ParseError("expected action name", sec.line, sec.col);
      OperatorSchema op;
      op.name = expect_atom(sec.items[1], "action name");
      if ((sec.items.size() - 2) % 2 != 0)
        throw ParseError("malformed action body for " + op.name, sec.line, sec.col);
      for (std::size_t j = 2; j + 1 < sec.items.size(); j += 2) {
        const std::string& field = expect_atom(sec.items[j], "action field");
        const Sexp& value = sec.items[j + 1];
        if (field == ":parameters") {
          if (!value.is_list) throw ParseError("expected parameter list", value.line, value.col);
          op.params = parse_typed_list(value.items, 0, "object");
          for (const auto& v : op.params)
            if (!is_variable(v.name))
              throw ParseError("action parameter must be a variable", value.line, value.col);
        } else if (field == ":precondition") {
          op.preconditions = parse_conjunction(value);
        } else if (field == ":effect") {
          op.effects = parse_conjunction(value);
        } else {
          throw ParseError("unsupported action field " + field, sec.items[j].line, sec.items[j].col);
        }
      }
      d.operators.push_back(std::move(op));
    } else {
      throw ParseError("unsupported section " + key, sec.line, sec.col);
    }
  }

  // type hierarchy must be a forest rooted at object
  for (const auto& [name, parent] : d.types) {
    (void)parent;
    std::string cur = name;
    for (std::size_t steps = 0;; ++steps) {
      if (steps > d.types.size())
        throw ParseError("type cycle involving " + name, root.line, root.col);
      std::string up = "object";
      for (const auto& [n, p] : d.types)
        if (n == cur) {
          up = p;
          break;
        }
      if (up == "object") break;
      cur = up;
    }
  }
  for (const auto& p : d.predicates) {
    std::set<std::string> seen;
    for (const auto& v : p.params) {
      if (!d.type_declared(v.type))
        throw ParseError("unknown type reference " + v.type + " in predicate " + p.name, 1, 1);
      if (!seen.insert(v.name).second)
        throw ParseError("duplicate parameter " + v.name + " in predicate " + p.name, 1, 1);
    }
  }
  std::set<std::string> op_names;
  for (const auto& op : d.operators) {
    if (!op_names.insert(op.name).second)
      throw ParseError("duplicate operator name " + op.name, 1, 1);
    std::set<std::string> seen;
    for (const auto& v : op.params) {
      if (!d.type_declared(v.type))
        throw ParseError("unknown type reference " + v.type + " in action " + op.name, 1, 1);
      if (!seen.insert(v.name).second)
        throw ParseError("duplicate parameter " + v.name + " in action " + op.name, 1, 1);
    }
    for (const auto& lit : op.preconditions) check_literal_against_schema(lit, d, op.params, 1, 1);
    for (const auto& lit : op.effects) check_literal_against_schema(lit, d, op.params, 1, 1);
    for (const auto& e : op.effects) {
      if (!e.negated) continue;
      for (const auto& f : op.effects)
        if (!f.negated && f.predicate == e.predicate && f.args == e.args)
          throw ParseError("conflicting effect on " + e.predicate + " in action " + op.name, 1, 1);
    }
  }
  return d;
}

namespace {

void check_ground_atom(const Atom& a, const Domain& d, const Problem& pr, const char* where) {
  const PredicateSchema* schema = d.find_predicate(a.predicate);
  if (!schema) throw ParseError(std::string("unknown predicate ") + a.predicate + " in " + where, 1, 1);
  if (schema->params.size() != a.args.size())
    throw ParseError(std::string(where) + " literal arity mismatch for " + a.predicate, 1, 1);
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    auto type = pr.type_of(a.args[i]);
    if (!type) throw ParseError("unknown object " + a.args[i] + " in " + where, 1, 1);
    if (!d.type_is(*type, schema->params[i].type))
      throw ParseError("object " + a.args[i] + " has type " + *type + ", expected " +
                           schema->params[i].type + " in " + where,
                       1, 1);
  }
}

}  // namespace

Problem parse_problem(std::string_view text, const Domain& domain) {
  Lexer lex{text};
  Sexp root = lex.read();
  if (!lex.eof()) throw ParseError("trailing content after problem", lex.line, lex.col);
  if (!root.is_list || root.items.empty() || root.items[0].atom != "define")
    throw ParseError("expected (define ...)", root.line, root.col);
  if (root.items.size() < 2 || !root.items[1].is_list || root.items[1].items.size() != 2 ||
      root.items[1].items[0].atom != "problem")
    throw ParseError("expected (problem <name>)", root.line, root.col);

  Problem pr;
  pr.name = expect_atom(root.items[1].items[1], "problem name");

  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const Sexp& sec = root.items[i];
    if (!sec.is_list || sec.items.empty())
      throw ParseError("expected problem section", sec.line, sec.col);
    const std::string& key = expect_atom(sec.items[0], "section keyword");
    if (key == ":domain") {
      if (sec.items.size() != 2) throw ParseError("expected domain name", sec.line, sec.col);
      pr.domain_name = expect_atom(sec.items[1], "domain name");
      if (pr.domain_name != domain.name)
        throw ParseError("problem references domain " + pr.domain_name + ", expected " + domain.name,
                         sec.line, sec.col);
    } else if (key == ":objects") {
      auto typed = parse_typed_list(sec.items, 1, "object");
      for (auto& tv : typed) {
        if (!domain.type_declared(tv.type))
          throw ParseError("object " + tv.name + " of undeclared type " + tv.type, sec.line, sec.col);
        pr.objects.emplace_back(tv.name, tv.type);
      }
    } else if (key == ":init") {
      for (std::size_t j = 1; j < sec.items.size(); ++j) {
        Literal lit = parse_literal(sec.items[j]);
        if (lit.negated)
          throw ParseError("negative init literal", sec.items[j].line, sec.items[j].col);
        for (const auto& a : lit.args)
          if (is_variable(a))
            throw ParseError("non-ground init literal", sec.items[j].line, sec.items[j].col);
        pr.initial.atoms.insert(Atom{lit.predicate, lit.args});
      }
    } else if (key == ":goal") {
      if (sec.items.size() != 2) throw ParseError("expected goal formula", sec.line, sec.col);
      for (const Literal& lit : parse_conjunction(sec.items[1])) {
        if (lit.negated) throw ParseError("negative goal", sec.items[1].line, sec.items[1].col);
        for (const auto& a : lit.args)
          if (is_variable(a))
            throw ParseError("non-ground goal", sec.items[1].line, sec.items[1].col);
        pr.goal.push_back(Atom{lit.predicate, lit.args});
      }
    } else {
      throw ParseError("unsupported section " + key, sec.line, sec.col);
    }
  }

  for (const auto& a : pr.initial.atoms) check_ground_atom(a, domain, pr, "init");
  for (const auto& a : pr.goal) check_ground_atom(a, domain, pr, "goal");
  return pr;
}

std::string render(const Domain& d) {
  std::ostringstream out;
  out << "(define (domain " << d.name << ")\n";
  out << "  (:requirements :strips :typing)\n";
  if (!d.types.empty()) {
    out << "  (:types";
    // consecutive runs sharing a parent render as "a b - parent"
    std::size_t i = 0;
    while (i < d.types.size()) {
      std::size_t j = i;
      while (j < d.types.size() && d.types[j].second == d.types[i].second) ++j;
      out << "\n   ";
      for (std::size_t k = i; k < j; ++k) out << " " << d.types[k].first;
      out << " - " << d.types[i].second;
      i = j;
    }
    out << ")\n";
  }
  if (!d.predicates.empty()) {
    out << "  (:predicates";
    for (const auto& p : d.predicates) {
      out << "\n    (" << p.name;
      if (!p.params.empty()) out << " " << render_typed_vars(p.params);
      out << ")";
    }
    out << ")\n";
  }
  for (const auto& op : d.operators) {
    out << "  (:action " << op.name << "\n";
    out << "    :parameters (" << render_typed_vars(op.params) << ")\n";
    out << "    :precondition " << render_conjunction(op.preconditions) << "\n";
    out << "    :effect " << render_conjunction(op.effects) << ")\n";
  }
  out << ")\n";
  return out.str();
}

std::string render(const Problem& pr, const Domain& d) {
  std::ostringstream out;
  out << "(define (problem " << pr.name << ")\n";
  out << "  (:domain " << d.name << ")\n";
  out << "  (:objects";
  for (const auto& [name, type] : pr.objects) out << "\n    " << name << " - " << type;
  out << ")\n";
  out << "  (:init";
  for (const auto& a : pr.initial.atoms) out << "\n    " << a.to_string();
  out << ")\n";
  out << "  (:goal (and";
  for (const auto& a : pr.goal) out << "\n    " << a.to_string();
  out << ")))\n";
  return out.str();
}

std::vector<Atom> parse_goal_conjunction(
    std::string_view text, const Domain& domain,
    const std::vector<std::pair<std::string, std::string>>& objects) {
  Lexer lex{text};
  Sexp root = lex.read();
  std::vector<Atom> out;
  Problem scratch;  // reuse the problem-side type checks
  scratch.objects = objects;
  for (const Literal& lit : parse_conjunction(root)) {
    if (lit.negated) throw ParseError("negative goal", root.line, root.col);
    for (const auto& a : lit.args)
      if (is_variable(a)) throw ParseError("non-ground goal", root.line, root.col);
    Atom atom{lit.predicate, lit.args};
    check_ground_atom(atom, domain, scratch, "goal");
    out.push_back(std::move(atom));
  }
  return out;
}

GroundedAction ground_operator(const Domain& domain, const OperatorSchema& op,
                               const std::vector<std::string>& binding) {
  if (binding.size() != op.params.size())
    throw std::runtime_error("binding length does not match arity of " + op.name);
  std::map<std::string, std::string> env;
  for (std::size_t i = 0; i < binding.size(); ++i) env[op.params[i].name] = binding[i];
  GroundedAction a;
  a.op = op.name;
  a.binding = binding;
  for (const auto& lit : op.preconditions)
    (lit.negated ? a.pre_neg : a.pre_pos).push_back(substitute(lit, env));
  for (const auto& lit : op.effects)
    (lit.negated ? a.del : a.add).push_back(substitute(lit, env));
  return a;
}

std::vector<GroundedAction> ground_actions(
    const Domain& domain, const std::vector<std::pair<std::string, std::string>>& objects) {
  std::vector<std::pair<std::string, std::string>> unique;
  for (const auto& o : objects) {
    bool seen = false;
    for (const auto& u : unique) seen = seen || u.first == o.first;
    if (!seen) unique.push_back(o);
  }
  std::vector<GroundedAction> out;
  for (const auto& op : domain.operators) {
    std::vector<std::vector<std::string>> candidates(op.params.size());
    bool typeable = true;
    for (std::size_t i = 0; i < op.params.size(); ++i) {
      for (const auto& [name, type] : unique)
        if (domain.type_is(type, op.params[i].type)) candidates[i].push_back(name);
      std::sort(candidates[i].begin(), candidates[i].end());
      typeable = typeable && !candidates[i].empty();
    }
    if (!typeable) continue;
    std::vector<std::size_t> odo(op.params.size(), 0);
    while (true) {
      std::vector<std::string> binding;
      binding.reserve(op.params.size());
      for (std::size_t i = 0; i < op.params.size(); ++i) binding.push_back(candidates[i][odo[i]]);
      GroundedAction a = ground_operator(domain, op, binding);
      bool conflict = false;
      for (const auto& x : a.add)
        for (const auto& y : a.del) conflict = conflict || x == y;
      if (!conflict) out.push_back(std::move(a));
      // odometer, rightmost fastest => lexicographic binding order
      bool advanced = false;
      for (std::size_t i = op.params.size(); i-- > 0;) {
        if (++odo[i] < candidates[i].size()) {
          advanced = true;
          break;
        }
        odo[i] = 0;
      }
      if (!advanced) break;
    }
  }
  return out;
}

bool is_applicable(const SymbolicState& s, const GroundedAction& a) {
  for (const auto& p : a.pre_pos)
    if (!s.holds(p)) return false;
  for (const auto& n : a.pre_neg)
    if (s.holds(n)) return false;
  return true;
}

SymbolicState apply(const SymbolicState& s, const GroundedAction& a) {
  if (!is_applicable(s, a))
    throw std::runtime_error("inapplicable action " + a.to_string());
  SymbolicState next = s;
  for (const auto& x : a.del) next.atoms.erase(x);
  for (const auto& x : a.add) next.atoms.insert(x);
  return next;
}

bool goal_satisfied(const SymbolicState& s, const std::vector<Atom>& goal) {
  for (const auto& g : goal)
    if (!s.holds(g)) return false;
  return true;
}

PlanCheck validate_plan(const Problem& problem, const Domain& domain, const Plan& plan) {
  PlanCheck check;
  SymbolicState s = problem.initial;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    if (!is_applicable(s, plan.steps[i])) {
      check.valid = false;
      check.failing_step = i;
      check.final_state = std::move(s);
      return check;
    }
    s = apply(s, plan.steps[i]);
  }
  check.valid = goal_satisfied(s, problem.goal);
  check.final_state = std::move(s);
  return check;
}

}  // namespace riskplan::pddl
