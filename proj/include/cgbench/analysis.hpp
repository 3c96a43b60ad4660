#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cgbench/lexer.hpp"
#include "cgbench/parser.hpp"

namespace cgbench {

struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One piece of source code together with its token stream and syntax tree.
struct CodeUnit {
  Language language = Language::Java;
  std::string source;
  TokenStream tokens;
  SyntaxTree tree;

  bool fully_parsed() const { return tree.fully_parsed; }
  // Non-comment lexemes in order (the token stream metrics operate on).
  std::vector<std::string> lexemes() const;
};

CodeUnit parse_unit(Language lang, std::string source);

// What a method does, as observable from its body: the distinct call names
// in source order, and whether it touches exceptions (try / throw).
struct BehaviourSpec {
  std::vector<std::string> api_names;
  bool uses_exceptions = false;
};

BehaviourSpec extract_behaviour(const CodeUnit& unit);

// Pulls the code out of a chat response: the first ``` fenced block when one
// exists (language tag line dropped), otherwise the trimmed response itself.
std::string extract_code_block(const std::string& response);

struct IsolatedMethod {
  std::string text;      // method source, comments and layout intact
  bool ambiguous = false;  // more than one method was present; first taken
  int discarded = 0;       // how many other methods were dropped
};

// Selects the method declaration out of a unit that may carry a class
// wrapper or stray prose. Throws AnalysisError when no method is found.
IsolatedMethod isolate_method(const CodeUnit& unit);

enum class NormalizeMode {
  TextToCode,  // strip comments/modifiers/throws, rename to function/argN/locN
  CodeToCode,  // strip comments and annotations only
};

struct NormalizedCode {
  std::string text;
  CodeUnit unit;  // re-parsed normalized text
  std::vector<std::pair<std::string, std::string>> renames;  // old -> new
  std::vector<std::string> notes;  // e.g. collision-driven index skips
};

// Canonicalizes a unit for scoring. TextToCode requires the unit to be a
// single method (use isolate_method first) and applies the full convention;
// CodeToCode only removes comments and annotations. The result re-parses,
// and running normalize on its own output is a fixed point.
NormalizedCode normalize(const CodeUnit& unit, NormalizeMode mode);

// Multiset of subtree signatures for the syntactic component of code
// similarity. Identifier and literal lexemes are elided so alpha-renaming
// does not change the result; operator tokens fold into their parent label.
std::map<std::string, int> ast_subtrees(const CodeUnit& unit);

// One def-use link: `var` is the variable's ordinal by first event, and the
// positions are non-comment token ordinals of the use and its reaching
// definition (single left-to-right pass, assignment right-hand side first).
struct DataflowEdge {
  int var = 0;
  int use_pos = 0;
  int def_pos = 0;

  friend bool operator==(const DataflowEdge&, const DataflowEdge&) = default;
  friend auto operator<=>(const DataflowEdge&, const DataflowEdge&) = default;
};

std::vector<DataflowEdge> dataflow_edges(const CodeUnit& unit);

}  // namespace cgbench
