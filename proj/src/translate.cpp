#include "riskplan/translate.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace riskplan::nl {

namespace {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(current);
  return tokens;
}

bool is_article(const std::string& w) { return w == "the" || w == "a" || w == "an"; }

struct Matcher {
  const std::vector<std::string>& tokens;
  const Instruction& ins;
  std::size_t pos = 0;
  std::string failed_span;  // set when a name span resolved against nothing

  bool word(const std::string& w) {
    if (pos < tokens.size() && tokens[pos] == w) {
      ++pos;
      return true;
    }
    return false;
  }

  void article() {
    if (pos < tokens.size() && is_article(tokens[pos])) ++pos;
  }

  bool in_vocabulary(const std::string& name) const {
    for (const auto& [known, type] : ins.vocabulary)
      if (known == name) return true;
    return false;
  }

  // Longest token run (joined with '_') that resolves against the
  // vocabulary. Records the unresolvable span on failure.
  bool name(std::string& out) {
    const std::size_t max_run = std::min<std::size_t>(4, tokens.size() - pos);
    for (std::size_t run = max_run; run >= 1; --run) {
      std::string candidate;
      for (std::size_t k = 0; k < run; ++k) {
        if (k) candidate.push_back('_');
        candidate += tokens[pos + k];
      }
      if (in_vocabulary(candidate)) {
        out = candidate;
        pos += run;
        return true;
      }
    }
    if (pos < tokens.size()) failed_span = tokens[pos];
    return false;
  }

  bool done() const { return pos == tokens.size(); }
};

struct TemplateResult {
  enum class Kind { matched, unknown_name, no_match } kind = Kind::no_match;
  pddl::Atom atom;
  std::string span;
};

using TemplateFn = TemplateResult (*)(const std::vector<std::string>&, const Instruction&);

TemplateResult unknown(const Matcher& m) {
  return {TemplateResult::Kind::unknown_name, {}, m.failed_span};
}

// "pick up the X" -> (holding X)
TemplateResult match_pick_up(const std::vector<std::string>& tokens, const Instruction& ins) {
  Matcher m{tokens, ins};
  if (!m.word("pick") || !m.word("up")) return {};
  m.article();
  std::string x;
  if (!m.name(x)) return unknown(m);
  if (!m.done()) return {};
  return {TemplateResult::Kind::matched, pddl::Atom{"holding", {x}}, {}};
}

// "put the X [under the W] into/in the Z" -> (in X Z)
// "put the X on the Z"                    -> (on X Z)
TemplateResult match_put(const std::vector<std::string>& tokens, const Instruction& ins) {
  Matcher m{tokens, ins};
  if (!m.word("put")) return {};
  m.article();
  std::string x;
  if (!m.name(x)) return unknown(m);
  if (m.word("under")) {  // descriptive clause, names an obstacle, not a goal
    m.article();
    std::string w;
    if (!m.name(w)) return unknown(m);
  }
  if (m.word("into") || m.word("in")) {
    m.article();
    std::string z;
    if (!m.name(z)) return unknown(m);
    if (!m.done()) return {};
    return {TemplateResult::Kind::matched, pddl::Atom{"in", {x, z}}, {}};
  }
  if (m.word("on")) {
    m.article();
    std::string z;
    if (!m.name(z)) return unknown(m);
    if (!m.done()) return {};
    return {TemplateResult::Kind::matched, pddl::Atom{"on", {x, z}}, {}};
  }
  return {};
}

// "move the X [under the W] into the Z" -> (in X Z)
// "move the X [on the Y] to the Z"      -> (on X Z)
TemplateResult match_move(const std::vector<std::string>& tokens, const Instruction& ins) {
  Matcher m{tokens, ins};
  if (!m.word("move")) return {};
  m.article();
  std::string x;
  if (!m.name(x)) return unknown(m);
  if (m.word("under")) {
    m.article();
    std::string w;
    if (!m.name(w)) return unknown(m);
  } else if (m.word("on")) {  // descriptive source clause
    m.article();
    std::string y;
    if (!m.name(y)) return unknown(m);
  }
  if (m.word("into")) {
    m.article();
    std::string z;
    if (!m.name(z)) return unknown(m);
    if (!m.done()) return {};
    return {TemplateResult::Kind::matched, pddl::Atom{"in", {x, z}}, {}};
  }
  if (m.word("to")) {
    m.article();
    std::string z;
    if (!m.name(z)) return unknown(m);
    if (!m.done()) return {};
    return {TemplateResult::Kind::matched, pddl::Atom{"on", {x, z}}, {}};
  }
  return {};
}

std::string first_sexp(const std::string& text) {
  auto open = text.find('(');
  if (open == std::string::npos) return {};
  int depth = 0;
  for (std::size_t i = open; i < text.size(); ++i) {
    if (text[i] == '(') ++depth;
    if (text[i] == ')' && --depth == 0) return text.substr(open, i - open + 1);
  }
  return {};
}

}  // namespace

GoalSpec translate_rule_based(const Instruction& ins) {
  if (ins.text.empty()) throw TranslateError("empty instruction", "");
  std::vector<std::string> tokens = tokenize(ins.text);
  static const TemplateFn templates[] = {match_pick_up, match_put, match_move};

  std::string unknown_span;
  for (TemplateFn fn : templates) {
    TemplateResult result = fn(tokens, ins);
    if (result.kind == TemplateResult::Kind::matched) {
      GoalSpec goal;
      goal.literals.push_back(result.atom);
      goal.provenance = Provenance::rule_based;
      return goal;
    }
    if (result.kind == TemplateResult::Kind::unknown_name && unknown_span.empty())
      unknown_span = result.span;
  }
  if (!unknown_span.empty())
    throw TranslateError("unknown object name '" + unknown_span + "' in instruction: " + ins.text,
                         unknown_span);
  throw TranslateError("no pattern matches instruction: " + ins.text, ins.text);
}

std::string render_goal_pddl(const GoalSpec& goal) {
  std::vector<pddl::Atom> sorted = goal.literals;
  std::sort(sorted.begin(), sorted.end());
  std::ostringstream out;
  out << "(and";
  if (sorted.empty()) out << " ";
  for (const auto& atom : sorted) out << " " << atom.to_string();
  out << ")";
  return out.str();
}

GoalSpec translate_llm(const Instruction& ins, llm::LlmBackend& backend,
                       const pddl::Domain& domain, const std::string& template_text) {
  std::string prompt = build_translation_prompt(template_text, domain, ins);
  for (int attempt = 0; attempt < 3; ++attempt) {
    std::string reply;
    try {
      reply = backend.complete(prompt);
    } catch (const llm::BackendError&) {
      continue;
    }
    std::string sexp = first_sexp(reply);
    if (sexp.empty()) continue;
    try {
      GoalSpec goal;
      goal.literals = pddl::parse_goal_conjunction(sexp, domain, ins.vocabulary);
      goal.provenance = Provenance::llm;
      return goal;
    } catch (const pddl::ParseError&) {
      continue;
    }
  }
  return translate_rule_based(ins);
}

std::string build_translation_prompt(const std::string& template_text, const pddl::Domain& domain,
                                     const Instruction& ins) {
  std::string prompt = template_text;
  auto substitute = [&prompt](const std::string& key, const std::string& value) {
    auto pos = prompt.find(key);
    while (pos != std::string::npos) {
      prompt.replace(pos, key.size(), value);
      pos = prompt.find(key, pos + value.size());
    }
  };
  substitute("{domain}", pddl::render(domain));
  substitute("{instruction}", ins.text);
  return prompt;
}

std::string default_translation_template() {
  return R"(You translate natural-language robot task instructions into PDDL goal conjunctions.

Domain information:
{domain}

Goal grammar:
  (and (<predicate> <name> ...) ...)
  Only positive ground literals over the domain predicates; every name must
  come from the scene.

Requirement: reply with exactly one goal conjunction and nothing else.

Example of a successful translation:
  Instruction: Move the apple on the table to the chair
  Goal: (and (on apple chair))

Instruction: {instruction}
Goal:)";
}

std::vector<std::string> load_instruction_corpus(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

}  // namespace riskplan::nl
