#include <doctest.h>

#include <algorithm>
#include <cstdint>

#include "cgbench/lexer.hpp"
#include "support/methodgen.hpp"

using namespace cgbench;

namespace {
std::vector<std::string> texts_of(const TokenStream& ts, TokenKind kind) {
  std::vector<std::string> out;
  for (const auto& t : ts.tokens)
    if (t.kind == kind) out.push_back(t.text);
  return out;
}
}  // namespace

TEST_CASE("reassemble reproduces the input byte for byte") {
  const char* samples[] = {
      "int a = 1;",
      "  /* block\n comment */ String s = \"hi \\\" there\"; // tail\n",
      "for(int i=0;i<n;++i){a+=i;}\n\t\n",
      "char c = 'x'; char nl = '\\n';",
      "List<Map<String, Integer>> m = new ArrayList<>();",
      "",
      "   \n  ",
  };
  for (const char* s : samples) {
    TokenStream ts = lex(Language::Java, s);
    CHECK(ts.reassemble() == s);
    REQUIRE(!ts.tokens.empty());
    CHECK(ts.tokens.back().kind == TokenKind::Eof);
  }
}

TEST_CASE("reassemble holds on generated methods") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto m = testsupport::gen_method(seed, /*decorated=*/true);
    TokenStream ts = lex(Language::Java, m.text);
    CHECK(ts.reassemble() == m.text);
  }
}

TEST_CASE("token kinds on a representative line") {
  TokenStream ts = lex(Language::Java, "public int add(int a) { return a + 1; } // done");
  auto kws = texts_of(ts, TokenKind::Keyword);
  CHECK(kws == std::vector<std::string>{"public", "int", "int", "return"});
  auto ids = texts_of(ts, TokenKind::Identifier);
  CHECK(ids == std::vector<std::string>{"add", "a", "a"});
  CHECK(texts_of(ts, TokenKind::Number) == std::vector<std::string>{"1"});
  CHECK(texts_of(ts, TokenKind::Comment) == std::vector<std::string>{"// done"});
}

TEST_CASE("string and char literals swallow escapes and embedded slashes") {
  TokenStream ts = lex(Language::Java, R"(String s = "a // not a comment \" end";)");
  auto strs = texts_of(ts, TokenKind::String);
  REQUIRE(strs.size() == 1);
  CHECK(strs[0] == R"("a // not a comment \" end")");

  ts = lex(Language::Java, R"(char q = '\'';)");
  CHECK(texts_of(ts, TokenKind::Char) == std::vector<std::string>{R"('\'')"});
}

TEST_CASE("numbers cover hex, floats, suffixes, underscores") {
  TokenStream ts = lex(Language::Java, "long x = 0xFF_EC; double d = 1.5e-3; float f = 2f; int i = 1_000;");
  CHECK(texts_of(ts, TokenKind::Number) ==
        std::vector<std::string>{"0xFF_EC", "1.5e-3", "2f", "1_000"});
}

TEST_CASE("multi-char operators lex greedily but '>' stays single") {
  TokenStream ts = lex(Language::Java, "a >>= 1; b <<= 2; c >= d; e <= f; g != h; i == j;");
  auto ops = texts_of(ts, TokenKind::Operator);
  CHECK(std::count(ops.begin(), ops.end(), ">>=") == 1);
  CHECK(std::count(ops.begin(), ops.end(), "<<=") == 1);
  CHECK(std::count(ops.begin(), ops.end(), ">=") == 1);
  CHECK(std::count(ops.begin(), ops.end(), "!=") == 1);
  CHECK(std::count(ops.begin(), ops.end(), "==") == 1);

  // Closing nested generics must not produce a shift token.
  ts = lex(Language::Java, "Map<String, List<Integer>> m;");
  ops = texts_of(ts, TokenKind::Operator);
  CHECK(std::count(ops.begin(), ops.end(), ">>") == 0);
  CHECK(std::count(ops.begin(), ops.end(), ">") == 2);
}

TEST_CASE("language keywords differ between Java and C#") {
  CHECK(keywords(Language::Java).count("synchronized") == 1);
  CHECK(keywords(Language::Java).count("foreach") == 0);
  CHECK(keywords(Language::CSharp).count("foreach") == 1);
  CHECK(keywords(Language::CSharp).count("var") == 1);

  TokenStream ts = lex(Language::CSharp, "foreach (var x in xs) { }");
  auto kws = texts_of(ts, TokenKind::Keyword);
  CHECK(std::count(kws.begin(), kws.end(), "foreach") == 1);
  CHECK(std::count(kws.begin(), kws.end(), "var") == 1);
  CHECK(std::count(kws.begin(), kws.end(), "in") == 1);
}

TEST_CASE("csharp verbatim strings") {
  TokenStream ts = lex(Language::CSharp, R"(string p = @"c:\tmp\""x";)");
  auto strs = texts_of(ts, TokenKind::String);
  REQUIRE(strs.size() == 1);
  CHECK(strs[0] == R"(@"c:\tmp\""x")");
  CHECK(ts.reassemble() == R"(string p = @"c:\tmp\""x";)");
}

TEST_CASE("invalid UTF-8 is rejected with the byte offset") {
  std::string bad = "int a; ";
  bad += static_cast<char>(0xC0);
  bad += static_cast<char>(0x20);
  CHECK_THROWS_AS(lex(Language::Java, bad), std::invalid_argument);
  try {
    lex(Language::Java, bad);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("7") != std::string::npos);
  }
}

TEST_CASE("well-formed UTF-8 in strings and comments passes through") {
  std::string src = "// gr\xC3\xBC\xC3\x9F\nString s = \"\xE2\x82\xAC\";";
  TokenStream ts = lex(Language::Java, src);
  CHECK(ts.reassemble() == src);
}

TEST_CASE("unterminated constructs extend to end of input") {
  TokenStream ts = lex(Language::Java, "int a; /* open");
  CHECK(ts.reassemble() == "int a; /* open");
  auto comments = texts_of(ts, TokenKind::Comment);
  REQUIRE(comments.size() == 1);
  CHECK(comments[0] == "/* open");

  ts = lex(Language::Java, "String s = \"open");
  CHECK(ts.reassemble() == "String s = \"open");
}

TEST_CASE("language names round-trip") {
  CHECK(language_from_name("java") == Language::Java);
  CHECK(language_from_name("CSharp") == Language::CSharp);
  CHECK(language_from_name("csharp") == Language::CSharp);
  CHECK(std::string(language_name(Language::Java)) == "java");
  CHECK(std::string(language_name(Language::CSharp)) == "csharp");
  CHECK_THROWS(language_from_name("cobol"));
}
