#pragma once

#include <string>
#include <vector>

#include "riskplan/backend.hpp"
#include "riskplan/pddl.hpp"

namespace riskplan::nl {

struct Instruction {
  std::string text;
  // known object and place names the goal may reference
  std::vector<std::pair<std::string, std::string>> vocabulary;  // (name, type)
};

enum class Provenance { rule_based, llm };

struct GoalSpec {
  std::vector<pddl::Atom> literals;
  Provenance provenance = Provenance::rule_based;
};

struct TranslateError : std::runtime_error {
  std::string span;  // offending fragment, when known
  TranslateError(const std::string& msg, std::string span_)
      : std::runtime_error(msg), span(std::move(span_)) {}
};

// Deterministic pattern translation. Five templates:
//   "move the X [on the Y] to the Z"     -> (on X Z)
//   "put the X into/in the Z"            -> (in X Z)
//   "put the X on the Z"                 -> (on X Z)
//   "pick up the X"                      -> (holding X)
//   "move the X [under the W] into the Z"-> (in X Z)
// Names resolve against the vocabulary by longest match after lower-casing
// and space-to-underscore normalization. Throws TranslateError with the
// offending span on no-pattern-match or unknown names.
GoalSpec translate_rule_based(const Instruction& ins);

// Canonical goal text "(and ...)" with literals in lexicographic order;
// parse_goal_conjunction round-trips it.
std::string render_goal_pddl(const GoalSpec& goal);

// Backend-assisted translation: prompts the model, parses and validates the
// reply against the domain, retries up to 3 times, then falls back to
// translate_rule_based. A GoalSpec that fails validation never escapes.
GoalSpec translate_llm(const Instruction& ins, llm::LlmBackend& backend,
                       const pddl::Domain& domain, const std::string& template_text);

// Translation prompt: domain information, goal grammar, the requirement, and
// one worked example. Loaded from a template with {domain} and {instruction}
// placeholders.
std::string build_translation_prompt(const std::string& template_text,
                                     const pddl::Domain& domain, const Instruction& ins);
std::string default_translation_template();

// Instruction corpus files: one instruction per line, '#' comments.
std::vector<std::string> load_instruction_corpus(const std::string& text);

}  // namespace riskplan::nl
