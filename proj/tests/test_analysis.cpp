#include <doctest.h>

#include <algorithm>
#include <cstdint>

#include "cgbench/analysis.hpp"
#include "cgbench/strutil.hpp"
#include "support/methodgen.hpp"

using namespace cgbench;

TEST_CASE("lexemes drop comments and the eof marker") {
  CodeUnit u = parse_unit(Language::Java, "/* head */ int a = 1; // tail");
  CHECK(u.lexemes() == std::vector<std::string>{"int", "a", "=", "1", ";"});
}

TEST_CASE("behaviour: no calls, no exception use") {
  CodeUnit u = parse_unit(Language::Java, "String function(){return namespaceURI;}");
  CHECK(u.fully_parsed());
  BehaviourSpec b = extract_behaviour(u);
  CHECK(b.api_names.empty());
  CHECK_FALSE(b.uses_exceptions);
}

TEST_CASE("behaviour: call names in source order, deduplicated") {
  CodeUnit u = parse_unit(Language::Java,
                          "void m() { alpha(); obj.beta(); alpha(); gamma(delta()); }");
  BehaviourSpec b = extract_behaviour(u);
  CHECK(b.api_names == std::vector<std::string>{"alpha", "beta", "gamma", "delta"});
  CHECK_FALSE(b.uses_exceptions);
}

TEST_CASE("behaviour: try and throw both flag exception use") {
  CodeUnit with_try = parse_unit(Language::Java,
                                 "void m() { try { go(); } catch (Exception e) { } }");
  CHECK(extract_behaviour(with_try).uses_exceptions);

  CodeUnit with_throw = parse_unit(Language::Java,
                                   "void m() { throw new IllegalStateException(); }");
  CHECK(extract_behaviour(with_throw).uses_exceptions);
}

TEST_CASE("code block extraction") {
  CHECK(extract_code_block("Here you go:\n```java\nint a = 1;\n```\nHope it helps") ==
        "int a = 1;");
  CHECK(extract_code_block("```\nint a = 1;\nint b = 2;\n```") == "int a = 1;\nint b = 2;");
  CHECK(extract_code_block("  int a = 1;  ") == "int a = 1;");
  // unterminated fence: everything after it counts
  CHECK(extract_code_block("```java\nint a = 1;") == "int a = 1;");
  // only the first block is taken
  CHECK(extract_code_block("```\nfirst\n```\ntext\n```\nsecond\n```") == "first");
}

TEST_CASE("isolate_method picks the method out of a wrapper") {
  CodeUnit u = parse_unit(Language::Java,
                          "public class A {\n  int f(int x) { return x; }\n}");
  IsolatedMethod m = isolate_method(u);
  CHECK(m.text == "int f(int x) { return x; }");
  CHECK_FALSE(m.ambiguous);
  CHECK(m.discarded == 0);
}

TEST_CASE("isolate_method flags extra methods and keeps the first") {
  CodeUnit u = parse_unit(Language::Java,
                          "class A { int f() { return 1; } int g() { return 2; } }");
  IsolatedMethod m = isolate_method(u);
  CHECK(contains(m.text, "f()"));
  CHECK_FALSE(contains(m.text, "g()"));
  CHECK(m.ambiguous);
  CHECK(m.discarded == 1);
}

TEST_CASE("isolate_method fails when no method exists") {
  CodeUnit u = parse_unit(Language::Java, "int a = 1;");
  CHECK_THROWS_AS(isolate_method(u), AnalysisError);
}

TEST_CASE("normalize canonical example") {
  CodeUnit u = parse_unit(Language::Java,
                          "int add(int a,int b) throws E {int c=a+b; return c;}");
  NormalizedCode n = normalize(u, NormalizeMode::TextToCode);
  CHECK(n.text == "int function(int arg0,int arg1){int loc0=arg0+arg1; return loc0;}");
  CHECK(n.unit.fully_parsed());
  REQUIRE(n.renames.size() == 4);
  CHECK(n.renames[0] == std::pair<std::string, std::string>{"add", "function"});
  CHECK(n.renames[1] == std::pair<std::string, std::string>{"a", "arg0"});
  CHECK(n.renames[2] == std::pair<std::string, std::string>{"b", "arg1"});
  CHECK(n.renames[3] == std::pair<std::string, std::string>{"c", "loc0"});
}

TEST_CASE("normalize strips comments, modifiers, annotations, throws") {
  CodeUnit u = parse_unit(Language::Java,
                          "/** doc */\n@Override\npublic static int go(int n) throws Exception {\n"
                          "  // count down\n  int k = n; /* inline */\n  return k;\n}");
  NormalizedCode n = normalize(u, NormalizeMode::TextToCode);
  CHECK_FALSE(contains(n.text, "//"));
  CHECK_FALSE(contains(n.text, "/*"));
  CHECK_FALSE(contains(n.text, "@Override"));
  CHECK_FALSE(contains(n.text, "public"));
  CHECK_FALSE(contains(n.text, "static"));
  CHECK_FALSE(contains(n.text, "throws"));
  // re-parse confirms the same
  const SyntaxTree& t = n.unit.tree;
  CHECK(collect_kind(t, NodeKind::ThrowsClause).empty());
  CHECK(collect_kind(t, NodeKind::Annotation).empty());
  CHECK(collect_kind(t, NodeKind::Modifiers).empty());
  for (const Token& tok : n.unit.tokens.tokens) CHECK(tok.kind != TokenKind::Comment);
}

TEST_CASE("normalize renames every reference site, scope-aware") {
  CodeUnit u = parse_unit(
      Language::Java,
      "int f(int a) { if (a > 0) { int b = a; use(b); } int b = 2; return b + a; }");
  NormalizedCode n = normalize(u, NormalizeMode::TextToCode);
  // the inner b declares first, so it takes loc0; the outer one loc1
  CHECK(contains(n.text, "int loc0 = arg0"));
  CHECK(contains(n.text, "use(loc0)"));
  CHECK(contains(n.text, "int loc1 = 2"));
  CHECK(contains(n.text, "return loc1 + arg0"));
}

TEST_CASE("normalize numbers catch and loop variables as locals") {
  CodeUnit u = parse_unit(Language::Java,
                          "void m(int n) { for (int i = 0; i < n; i++) { hit(i); } "
                          "try { go(); } catch (Exception e) { log(e); } }");
  NormalizedCode n = normalize(u, NormalizeMode::TextToCode);
  CHECK(contains(n.text, "for (int loc0 = 0; loc0 < arg0; loc0++)"));
  CHECK(contains(n.text, "hit(loc0)"));
  CHECK(contains(n.text, "catch (Exception loc1)"));
  CHECK(contains(n.text, "log(loc1)"));
}

TEST_CASE("normalize keeps recursion pointing at the renamed method") {
  CodeUnit u = parse_unit(Language::Java,
                          "int fib(int n) { if (n < 2) return n; return fib(n - 1) + fib(n - 2); }");
  NormalizedCode n = normalize(u, NormalizeMode::TextToCode);
  CHECK(contains(n.text, "function(arg0 - 1)"));
  CHECK(contains(n.text, "function(arg0 - 2)"));
  CHECK_FALSE(contains(n.text, "fib"));
}

TEST_CASE("normalize skips indices already present in surviving code") {
  // arg0 appears as a callee name, so the parameter cannot take that name
  CodeUnit u = parse_unit(Language::Java, "int f(int a) { return arg0(a); }");
  NormalizedCode n = normalize(u, NormalizeMode::TextToCode);
  CHECK(contains(n.text, "int function(int arg1)"));
  CHECK(contains(n.text, "arg0(arg1)"));
  CHECK_FALSE(n.notes.empty());
}

TEST_CASE("normalize drops everything outside the method") {
  CodeUnit u = parse_unit(Language::Java,
                          "class Wrap { int f(int x) { return x; } }");
  NormalizedCode n = normalize(u, NormalizeMode::TextToCode);
  CHECK(n.text == "int function(int arg0) { return arg0; }");
}

TEST_CASE("normalize requires a method in t2c mode") {
  CodeUnit u = parse_unit(Language::Java, "int a = 1;");
  CHECK_THROWS_AS(normalize(u, NormalizeMode::TextToCode), AnalysisError);
}

TEST_CASE("c2c normalization removes comments and annotations only") {
  CodeUnit u = parse_unit(Language::Java,
                          "@Deprecated public int add(int first) { // note\n  return first + 1; }");
  NormalizedCode n = normalize(u, NormalizeMode::CodeToCode);
  CHECK_FALSE(contains(n.text, "@Deprecated"));
  CHECK_FALSE(contains(n.text, "//"));
  CHECK(contains(n.text, "public"));
  CHECK(contains(n.text, "add"));
  CHECK(contains(n.text, "first"));
}

TEST_CASE("normalize is a fixed point on its own output") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto m = testsupport::gen_method(seed, /*decorated=*/true);
    CodeUnit u = parse_unit(Language::Java, m.text);
    NormalizedCode once = normalize(u, NormalizeMode::TextToCode);
    NormalizedCode twice = normalize(once.unit, NormalizeMode::TextToCode);
    CAPTURE(m.text);
    CHECK(once.text == twice.text);
    CHECK(twice.renames.empty());

    NormalizedCode c_once = normalize(u, NormalizeMode::CodeToCode);
    NormalizedCode c_twice = normalize(c_once.unit, NormalizeMode::CodeToCode);
    CHECK(c_once.text == c_twice.text);
  }
}

TEST_CASE("normalize erases consistent identifier renamings") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto m = testsupport::gen_method(seed, /*decorated=*/false);
    std::string renamed = testsupport::rename_identifiers(m, "Q");
    CodeUnit a = parse_unit(Language::Java, m.text);
    CodeUnit b = parse_unit(Language::Java, renamed);
    CAPTURE(m.text);
    CHECK(normalize(a, NormalizeMode::TextToCode).text ==
          normalize(b, NormalizeMode::TextToCode).text);
  }
}

TEST_CASE("normalize preserves tree shape on undecorated input") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto m = testsupport::gen_straight(seed);
    CodeUnit u = parse_unit(Language::Java, m.text);
    NormalizedCode n = normalize(u, NormalizeMode::TextToCode);
    CAPTURE(m.text);
    CHECK(ast_subtrees(u) == ast_subtrees(n.unit));
  }
}

TEST_CASE("ast_subtrees ignores identifier and literal spellings") {
  CodeUnit a = parse_unit(Language::Java, "int f(int x) { return x + 1; }");
  CodeUnit b = parse_unit(Language::Java, "int g(int y) { return y + 2; }");
  CHECK(ast_subtrees(a) == ast_subtrees(b));

  CodeUnit c = parse_unit(Language::Java, "int f(int x) { return x * x; }");
  CHECK(ast_subtrees(a) != ast_subtrees(c));
}

TEST_CASE("ast_subtrees is rename-invariant on generated methods") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto m = testsupport::gen_method(seed, /*decorated=*/false);
    CodeUnit a = parse_unit(Language::Java, m.text);
    CodeUnit b = parse_unit(Language::Java, testsupport::rename_identifiers(m, "Zz"));
    CHECK(ast_subtrees(a) == ast_subtrees(b));
  }
}

TEST_CASE("dataflow edges: straight-line def-use chain") {
  CodeUnit u = parse_unit(Language::Java, "int a = 1; int b = a;");
  auto edges = dataflow_edges(u);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0] == DataflowEdge{0, 8, 1});
}

TEST_CASE("dataflow edges: reassignment moves the reaching definition") {
  CodeUnit u = parse_unit(Language::Java, "int a = 1; a = a + 1; int b = a;");
  auto edges = dataflow_edges(u);
  REQUIRE(edges.size() == 2);
  CHECK(edges[0] == DataflowEdge{0, 7, 1});   // a in the rhs reads the initial def
  CHECK(edges[1] == DataflowEdge{0, 14, 5});  // b's initializer reads the assignment
}

TEST_CASE("dataflow edges: compound assignment reads before writing") {
  CodeUnit u = parse_unit(Language::Java, "int a = 1; a += 2;");
  auto edges = dataflow_edges(u);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0] == DataflowEdge{0, 5, 1});
}

TEST_CASE("dataflow edges are alpha-rename invariant") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto m = testsupport::gen_straight(seed);
    CodeUnit a = parse_unit(Language::Java, m.text);
    CodeUnit b = parse_unit(Language::Java, testsupport::rename_identifiers(m, "R"));
    CHECK(dataflow_edges(a) == dataflow_edges(b));
  }
}

TEST_CASE("dataflow edges: unresolved names produce no edges") {
  CodeUnit u = parse_unit(Language::Java, "total = total + other;");
  CHECK(dataflow_edges(u).empty());
}
