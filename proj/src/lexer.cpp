#include "cgbench/lexer.hpp"

#include <array>
#include <stdexcept>

#include "cgbench/strutil.hpp"

namespace cgbench {

namespace {

const char* kJavaKeywords[] = {
    "abstract", "assert",     "boolean",  "break",   "byte",      "case",
    "catch",    "char",       "class",    "const",   "continue",  "default",
    "do",       "double",     "else",     "enum",    "extends",   "final",
    "finally",  "float",      "for",      "goto",    "if",        "implements",
    "import",   "instanceof", "int",      "interface", "long",    "native",
    "new",      "package",    "private",  "protected", "public",  "return",
    "short",    "static",     "strictfp", "super",   "switch",    "synchronized",
    "this",     "throw",      "throws",   "transient", "try",     "void",
    "volatile", "while",      "true",     "false",   "null",      "var",
    "record",
};

const char* kCSharpKeywords[] = {
    "abstract", "as",        "base",     "bool",      "break",     "byte",
    "case",     "catch",     "char",     "checked",   "class",     "const",
    "continue", "decimal",   "default",  "delegate",  "do",        "double",
    "else",     "enum",      "event",    "explicit",  "extern",    "false",
    "finally",  "fixed",     "float",    "for",       "foreach",   "goto",
    "if",       "implicit",  "in",       "int",       "interface", "internal",
    "is",       "lock",      "long",     "namespace", "new",       "null",
    "object",   "operator",  "out",      "override",  "params",    "private",
    "protected", "public",   "readonly", "ref",       "return",    "sbyte",
    "sealed",   "short",     "sizeof",   "stackalloc", "static",   "string",
    "struct",   "switch",    "this",     "throw",     "true",      "try",
    "typeof",   "uint",      "ulong",    "unchecked", "unsafe",    "ushort",
    "using",    "virtual",   "void",     "volatile",  "while",     "var",
};

std::unordered_set<std::string> make_set(const char* const* words, size_t n) {
  std::unordered_set<std::string> s;
  for (size_t i = 0; i < n; ++i) s.insert(words[i]);
  return s;
}

bool is_ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' ||
         c >= 0x80;  // any non-ASCII codepoint may appear in identifiers
}

bool is_ident_part(unsigned char c) {
  return is_ident_start(c) || (c >= '0' && c <= '9');
}

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool is_hex_digit(unsigned char c) {
  return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

// Multi-character operators, longest first so greedy matching works.
// ">>" is intentionally absent: Java generics close with '>' '>' and the
// parser re-joins shift operators from adjacent '>' tokens when needed.
const std::array<std::string_view, 26> kOperators = {
    ">>>=", ">>=", "<<=", "...", "->", "::", "=>", "??", "?.",
    "==",   "!=",  "<=",  ">=",  "&&", "||", "++", "--", "+=",
    "-=",   "*=",  "/=",  "%=",  "&=", "|=", "^=", "<<"};

// Validates that `text` is well-formed UTF-8; returns offset of the first bad
// byte, or npos when clean.
size_t find_bad_utf8(std::string_view text) {
  size_t i = 0;
  while (i < text.size()) {
    unsigned char c = text[i];
    size_t extra;
    if (c < 0x80) {
      i += 1;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      if (c < 0xC2) return i;  // overlong
      extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
    } else if ((c & 0xF8) == 0xF0) {
      if (c > 0xF4) return i;
      extra = 3;
    } else {
      return i;
    }
    if (i + extra >= text.size()) return i;
    for (size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) return i;
    }
    i += extra + 1;
  }
  return std::string_view::npos;
}

class Cursor {
 public:
  Cursor(std::string_view text) : text_(text) {}

  bool eof() const { return pos_ >= text_.size(); }
  size_t pos() const { return pos_; }
  unsigned char peek(size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : 0;
  }
  bool match(std::string_view s) const {
    return text_.compare(pos_, s.size(), s) == 0;
  }
  void advance(size_t n = 1) { pos_ += n; }
  std::string_view slice(size_t from) const { return text_.substr(from, pos_ - from); }

 private:
  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

const std::unordered_set<std::string>& keywords(Language lang) {
  static const std::unordered_set<std::string> java =
      make_set(kJavaKeywords, std::size(kJavaKeywords));
  static const std::unordered_set<std::string> csharp =
      make_set(kCSharpKeywords, std::size(kCSharpKeywords));
  return lang == Language::Java ? java : csharp;
}

Language language_from_name(std::string_view name) {
  std::string n = to_lower(trim_view(name));
  if (n == "java") return Language::Java;
  if (n == "csharp" || n == "c#" || n == "cs") return Language::CSharp;
  throw std::invalid_argument("unknown language: " + std::string(name));
}

const char* language_name(Language lang) {
  return lang == Language::Java ? "java" : "csharp";
}

std::string TokenStream::reassemble() const {
  std::string out;
  for (const Token& t : tokens) {
    out += t.leading;
    out += t.text;
  }
  return out;
}

TokenStream lex(Language lang, std::string_view text) {
  if (size_t bad = find_bad_utf8(text); bad != std::string_view::npos) {
    throw std::invalid_argument("source is not valid UTF-8 (byte offset " +
                                std::to_string(bad) + ")");
  }
  const auto& kw = keywords(lang);
  TokenStream out;
  out.language = lang;
  Cursor c(text);

  while (true) {
    // Whitespace run becomes the next token's leading trivia.
    size_t ws_start = c.pos();
    while (!c.eof()) {
      unsigned char ch = c.peek();
      if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n' || ch == '\f' || ch == 0x0b)
        c.advance();
      else
        break;
    }
    std::string leading(c.slice(ws_start));

    Token tok;
    tok.leading = std::move(leading);
    tok.offset = c.pos();

    if (c.eof()) {
      tok.kind = TokenKind::Eof;
      out.tokens.push_back(std::move(tok));
      break;
    }

    size_t start = c.pos();
    unsigned char ch = c.peek();

    if (ch == '/' && c.peek(1) == '/') {
      while (!c.eof() && c.peek() != '\n') c.advance();
      tok.kind = TokenKind::Comment;
    } else if (ch == '/' && c.peek(1) == '*') {
      c.advance(2);
      while (!c.eof() && !(c.peek() == '*' && c.peek(1) == '/')) c.advance();
      if (!c.eof()) c.advance(2);  // unterminated comment runs to EOF
      tok.kind = TokenKind::Comment;
    } else if (ch == '"' && c.match("\"\"\"")) {
      // Java text block (also harmless to accept for C#)
      c.advance(3);
      while (!c.eof() && !c.match("\"\"\"")) {
        if (c.peek() == '\\') c.advance();
        if (!c.eof()) c.advance();
      }
      if (!c.eof()) c.advance(3);
      tok.kind = TokenKind::String;
    } else if (ch == '"') {
      c.advance();
      while (!c.eof() && c.peek() != '"' && c.peek() != '\n') {
        if (c.peek() == '\\' && c.pos() + 1 < text.size()) c.advance();
        c.advance();
      }
      if (!c.eof() && c.peek() == '"') c.advance();
      tok.kind = TokenKind::String;
    } else if (ch == '@' && c.peek(1) == '"' && lang == Language::CSharp) {
      // verbatim string: "" is an escaped quote, backslash is literal
      c.advance(2);
      while (!c.eof()) {
        if (c.peek() == '"') {
          if (c.peek(1) == '"') {
            c.advance(2);
            continue;
          }
          c.advance();
          break;
        }
        c.advance();
      }
      tok.kind = TokenKind::String;
    } else if (ch == '$' && c.peek(1) == '"' && lang == Language::CSharp) {
      c.advance(2);
      while (!c.eof() && c.peek() != '"' && c.peek() != '\n') {
        if (c.peek() == '\\' && c.pos() + 1 < text.size()) c.advance();
        c.advance();
      }
      if (!c.eof() && c.peek() == '"') c.advance();
      tok.kind = TokenKind::String;
    } else if (ch == '\'') {
      c.advance();
      while (!c.eof() && c.peek() != '\'' && c.peek() != '\n') {
        if (c.peek() == '\\' && c.pos() + 1 < text.size()) c.advance();
        c.advance();
      }
      if (!c.eof() && c.peek() == '\'') c.advance();
      tok.kind = TokenKind::Char;
    } else if (is_digit(ch) || (ch == '.' && is_digit(c.peek(1)))) {
      if (ch == '0' && (c.peek(1) == 'x' || c.peek(1) == 'X')) {
        c.advance(2);
        while (is_hex_digit(c.peek()) || c.peek() == '_') c.advance();
      } else if (ch == '0' && (c.peek(1) == 'b' || c.peek(1) == 'B')) {
        c.advance(2);
        while (c.peek() == '0' || c.peek() == '1' || c.peek() == '_') c.advance();
      } else {
        while (is_digit(c.peek()) || c.peek() == '_') c.advance();
        if (c.peek() == '.' && is_digit(c.peek(1))) {
          c.advance();
          while (is_digit(c.peek()) || c.peek() == '_') c.advance();
        }
        if (c.peek() == 'e' || c.peek() == 'E') {
          // consume only if it really is an exponent (digit after optional sign)
          size_t signs = (c.peek(1) == '+' || c.peek(1) == '-') ? 1 : 0;
          if (is_digit(c.peek(1 + signs))) {
            c.advance(1 + signs);
            while (is_digit(c.peek()) || c.peek() == '_') c.advance();
          }
        }
      }
      // type suffixes
      while (true) {
        unsigned char s = c.peek();
        if (s == 'l' || s == 'L' || s == 'f' || s == 'F' || s == 'd' || s == 'D' ||
            (lang == Language::CSharp && (s == 'u' || s == 'U' || s == 'm' || s == 'M')))
          c.advance();
        else
          break;
      }
      tok.kind = TokenKind::Number;
    } else if (is_ident_start(ch)) {
      while (!c.eof() && is_ident_part(c.peek())) {
        unsigned char p = c.peek();
        if (p >= 0x80) {
          // consume the whole UTF-8 sequence
          c.advance();
          while (!c.eof() && (static_cast<unsigned char>(c.peek()) & 0xC0) == 0x80) c.advance();
        } else {
          c.advance();
        }
      }
      std::string word(c.slice(start));
      tok.kind = kw.count(word) ? TokenKind::Keyword : TokenKind::Identifier;
    } else {
      // operators and punctuation, longest match first
      bool matched = false;
      for (std::string_view op : kOperators) {
        if (!op.empty() && c.match(op)) {
          c.advance(op.size());
          matched = true;
          break;
        }
      }
      if (!matched) c.advance();
      tok.kind = TokenKind::Operator;
    }

    tok.text = std::string(text.substr(start, c.pos() - start));
    out.tokens.push_back(std::move(tok));
  }
  return out;
}

}  // namespace cgbench
