#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cgbench {

enum class Language { Java, CSharp };

Language language_from_name(std::string_view name);  // "java" / "csharp" (case-insensitive)
const char* language_name(Language lang);

enum class TokenKind {
  Identifier,
  Keyword,
  Number,
  String,   // string literals, incl. verbatim/interpolated/text blocks
  Char,
  Operator, // operators, separators, and punctuation
  Comment,  // // and /* */ comments, kept as ordinary tokens
  Eof,      // text == "", leading holds trailing whitespace
};

struct Token {
  TokenKind kind = TokenKind::Eof;
  std::string text;     // exact lexeme as it appeared in the source
  std::string leading;  // whitespace run immediately before the lexeme
  std::size_t offset = 0;  // byte offset of the lexeme start

  bool is(TokenKind k) const { return kind == k; }
  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_word(std::string_view t) const {
    return (kind == TokenKind::Identifier || kind == TokenKind::Keyword) && text == t;
  }
};

// Token stream over one source text. The final token is always Eof; its
// `leading` carries any trailing whitespace, so concatenating leading+text
// over all tokens reproduces the input byte for byte.
struct TokenStream {
  Language language = Language::Java;
  std::vector<Token> tokens;

  std::string reassemble() const;  // exact source reconstruction
};

// Tokenizes `text`. Invalid UTF-8 raises std::invalid_argument naming the
// byte offset. Unterminated strings/comments extend to end of input rather
// than failing; downstream passes treat that as a partial parse.
TokenStream lex(Language lang, std::string_view text);

// Reserved words of the language (used both by the lexer and as the
// high-weight vocabulary for weighted n-gram scoring).
const std::unordered_set<std::string>& keywords(Language lang);

}  // namespace cgbench
