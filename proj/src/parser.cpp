#include "cgbench/parser.hpp"

#include <algorithm>
#include <unordered_set>

namespace cgbench {

namespace {

bool is_primitive_word(Language lang, std::string_view w) {
  static const std::unordered_set<std::string_view> java = {
      "boolean", "byte", "short", "int", "long", "char", "float", "double", "void", "var"};
  static const std::unordered_set<std::string_view> cs = {
      "bool", "byte", "sbyte", "short", "ushort", "int",    "uint",  "long",
      "ulong", "char", "float", "double", "decimal", "string", "object", "void", "var"};
  return (lang == Language::Java ? java : cs).count(w) > 0;
}

bool is_modifier_word(Language lang, std::string_view w) {
  static const std::unordered_set<std::string_view> java = {
      "public", "protected", "private", "static",   "final",    "abstract",
      "native", "synchronized", "transient", "volatile", "strictfp", "default"};
  static const std::unordered_set<std::string_view> cs = {
      "public",  "protected", "private", "internal", "static",   "sealed",
      "abstract", "virtual",  "override", "readonly", "extern",   "unsafe",
      "volatile", "async",    "partial",  "new"};
  return (lang == Language::Java ? java : cs).count(w) > 0;
}

bool is_type_decl_word(Language lang, std::string_view w) {
  if (w == "class" || w == "interface" || w == "enum") return true;
  if (lang == Language::Java && w == "record") return true;
  if (lang == Language::CSharp && (w == "struct" || w == "namespace" || w == "delegate"))
    return true;
  return false;
}

class Parser {
 public:
  explicit Parser(const TokenStream& ts) : ts_(ts), lang_(ts.language) {
    idx_.reserve(ts.tokens.size());
    for (int i = 0; i < static_cast<int>(ts.tokens.size()); ++i) {
      if (ts.tokens[i].kind != TokenKind::Comment) idx_.push_back(i);
    }
    // idx_ always ends with the Eof token.
  }

  SyntaxTree run() {
    int root = make(NodeKind::CompilationUnit);
    while (!at_eof()) {
      int before = p_;
      add(root, parse_top_level());
      if (p_ == before) add(root, unknown_one());
    }
    if (tree_.nodes[root].first_tok < 0) {
      tree_.nodes[root].first_tok = 0;
      tree_.nodes[root].last_tok = -1;
    }
    tree_.root = root;
    return std::move(tree_);
  }

 private:
  const TokenStream& ts_;
  Language lang_;
  std::vector<int> idx_;
  int p_ = 0;
  SyntaxTree tree_;

  // ----- token access ------------------------------------------------------

  const Token& tok(int ahead = 0) const {
    size_t i = static_cast<size_t>(p_) + ahead;
    if (i >= idx_.size()) i = idx_.size() - 1;
    return ts_.tokens[idx_[i]];
  }
  bool at_eof() const { return tok().kind == TokenKind::Eof; }
  bool at(std::string_view op) const { return tok().is(TokenKind::Operator, op); }
  bool at_word(std::string_view w) const { return tok().is_word(w); }
  bool at_kind(TokenKind k) const { return tok().kind == k; }

  // True when tokens at offsets a and a+1 touch (no whitespace between) —
  // used to re-join '>' '>' into shift operators.
  bool adjacent(int a) const {
    size_t i = static_cast<size_t>(p_) + a;
    if (i + 1 >= idx_.size()) return false;
    const Token& t0 = ts_.tokens[idx_[i]];
    const Token& t1 = ts_.tokens[idx_[i + 1]];
    return t1.leading.empty() && t1.offset == t0.offset + t0.text.size() &&
           idx_[i + 1] == idx_[i] + 1;
  }

  // ----- node construction --------------------------------------------------

  int make(NodeKind k, std::string label = {}) {
    Node n;
    n.kind = k;
    n.label = std::move(label);
    tree_.nodes.push_back(std::move(n));
    return static_cast<int>(tree_.nodes.size()) - 1;
  }

  void add(int parent, int child) {
    if (child < 0) return;
    Node& p = tree_.nodes[parent];
    const Node& c = tree_.nodes[child];
    if (c.first_tok >= 0) {
      if (p.first_tok < 0 || c.first_tok < p.first_tok) p.first_tok = c.first_tok;
      if (c.last_tok > p.last_tok) p.last_tok = c.last_tok;
    }
    p.children.push_back(child);
  }

  // Consumes the current token into a TokenLeaf node.
  int leaf() {
    int ti = idx_[std::min<size_t>(p_, idx_.size() - 1)];
    int n = make(NodeKind::TokenLeaf);
    tree_.nodes[n].first_tok = tree_.nodes[n].last_tok = ti;
    if (!at_eof()) ++p_;
    return n;
  }

  void take(int parent) { add(parent, leaf()); }

  bool eat(int parent, std::string_view op) {
    if (at(op)) {
      take(parent);
      return true;
    }
    return false;
  }

  bool eat_word(int parent, std::string_view w) {
    if (at_word(w)) {
      take(parent);
      return true;
    }
    return false;
  }

  void mark_partial() {
    tree_.fully_parsed = false;
    ++tree_.unknown_count;
  }

  // One-token recovery node.
  int unknown_one() {
    int n = make(NodeKind::Unknown);
    take(n);
    mark_partial();
    return n;
  }

  // Consumes into an Unknown node until ';' (taken), a balanced '{...}'
  // group closes, or an unmatched '}' / ')' is reached (left for the caller).
  int unknown_until_sync() {
    int n = make(NodeKind::Unknown);
    mark_partial();
    int depth = 0;
    bool entered_group = false;
    while (!at_eof()) {
      if (depth == 0 && (at("}") || at(")"))) break;
      if (at("{") || at("(") || at("[")) {
        ++depth;
        entered_group = true;
      }
      if (at("}") || at(")") || at("]")) --depth;
      bool semi = depth == 0 && at(";");
      bool closed_group = entered_group && depth == 0 && at("}");
      take(n);
      if (semi || closed_group) break;
    }
    return n;
  }

  // ----- speculative scanning (no consumption) ------------------------------

  const Token& peek_at(int j) const { return tok(j); }

  // Skips a balanced group starting at offset j (which must be at an opener);
  // returns offset just past the matching closer, or -1.
  int scan_balanced(int j) const {
    static const int kMax = 4096;
    std::string_view open = peek_at(j).text;
    std::string_view close = open == "(" ? ")" : open == "[" ? "]" : "}";
    int depth = 0;
    for (int steps = 0; steps < kMax; ++steps, ++j) {
      const Token& t = peek_at(j);
      if (t.kind == TokenKind::Eof) return -1;
      if (t.is(TokenKind::Operator, open)) ++depth;
      if (t.is(TokenKind::Operator, close)) {
        if (--depth == 0) return j + 1;
      }
    }
    return -1;
  }

  // Skips annotations and modifier words starting at offset j.
  int scan_modifiers(int j) const {
    for (int steps = 0; steps < 64; ++steps) {
      const Token& t = peek_at(j);
      if (t.is(TokenKind::Operator, "@") &&
          (peek_at(j + 1).kind == TokenKind::Identifier ||
           peek_at(j + 1).kind == TokenKind::Keyword)) {
        j += 2;
        while (peek_at(j).is(TokenKind::Operator, ".") &&
               peek_at(j + 1).kind == TokenKind::Identifier)
          j += 2;
        if (peek_at(j).is(TokenKind::Operator, "(")) {
          int after = scan_balanced(j);
          if (after < 0) return j;
          j = after;
        }
        continue;
      }
      if ((t.kind == TokenKind::Keyword && is_modifier_word(lang_, t.text)) ||
          (lang_ == Language::CSharp && t.kind == TokenKind::Identifier &&
           t.text == "partial")) {
        // "default" is both a modifier (interface methods) and a switch label;
        // only treat it as a modifier when a declaration plausibly follows.
        if (t.text == "default" && peek_at(j + 1).is(TokenKind::Operator, ":"))
          return j;
        ++j;
        continue;
      }
      return j;
    }
    return j;
  }

  // Attempts to scan a type starting at offset j. Returns the offset just
  // past the type, or -1 when the tokens cannot begin a type.
  int scan_type(int j) const {
    const Token& t = peek_at(j);
    if (t.kind == TokenKind::Keyword && is_primitive_word(lang_, t.text)) {
      ++j;
    } else if (t.kind == TokenKind::Identifier) {
      ++j;
      if (int k = scan_type_args(j); k >= 0) j = k;
      while (peek_at(j).is(TokenKind::Operator, ".") &&
             peek_at(j + 1).kind == TokenKind::Identifier) {
        j += 2;
        if (int k = scan_type_args(j); k >= 0) j = k;
      }
    } else {
      return -1;
    }
    // nullable suffix (C#)
    if (lang_ == Language::CSharp && peek_at(j).is(TokenKind::Operator, "?") &&
        peek_at(j + 1).kind == TokenKind::Identifier)
      ++j;
    // array dims
    while (peek_at(j).is(TokenKind::Operator, "[") &&
           peek_at(j + 1).is(TokenKind::Operator, "]"))
      j += 2;
    return j;
  }

  // Scans a '<...>' type-argument group at offset j; -1 if not one.
  int scan_type_args(int j) const {
    if (!peek_at(j).is(TokenKind::Operator, "<")) return -1;
    int depth = 0;
    for (int steps = 0; steps < 256; ++steps, ++j) {
      const Token& t = peek_at(j);
      if (t.kind == TokenKind::Eof) return -1;
      if (t.kind == TokenKind::Operator) {
        if (t.text == "<") {
          ++depth;
          continue;
        }
        if (t.text == ">") {
          if (--depth == 0) return j + 1;
          continue;
        }
        if (t.text == "," || t.text == "." || t.text == "?" || t.text == "[" ||
            t.text == "]" || t.text == "&" || t.text == "@")
          continue;
        return -1;  // operator that cannot appear inside type arguments
      }
      if (t.kind == TokenKind::Identifier) continue;
      if (t.kind == TokenKind::Keyword &&
          (is_primitive_word(lang_, t.text) || t.text == "extends" ||
           t.text == "super" || t.text == "in" || t.text == "out"))
        continue;
      return -1;
    }
    return -1;
  }

  // Does a local variable declaration start at offset j?
  bool looks_like_local_decl(int j = 0) const {
    j = scan_modifiers(j);
    int t = scan_type(j);
    if (t < 0) return false;
    if (peek_at(t).kind != TokenKind::Identifier) return false;
    const Token& after = peek_at(t + 1);
    return after.is(TokenKind::Operator, "=") || after.is(TokenKind::Operator, ";") ||
           after.is(TokenKind::Operator, ",") || after.is(TokenKind::Operator, "[") ||
           after.is(TokenKind::Operator, ":") ||
           (lang_ == Language::CSharp && after.is_word("in"));
  }

  enum class MemberShape { None, Method, Ctor, Field, Type, Initializer };

  MemberShape scan_member_shape(int j = 0) const {
    j = scan_modifiers(j);
    const Token& t = peek_at(j);
    if (t.kind == TokenKind::Keyword && is_type_decl_word(lang_, t.text))
      return MemberShape::Type;
    if (t.is(TokenKind::Operator, "{")) return MemberShape::Initializer;
    if (int k = scan_type_args(j); k >= 0) j = k;  // generic method type params
    // constructor: Name ( ... ) then '{' or throws
    if (peek_at(j).kind == TokenKind::Identifier &&
        peek_at(j + 1).is(TokenKind::Operator, "(")) {
      int after = scan_balanced(j + 1);
      if (after >= 0 && (peek_at(after).is(TokenKind::Operator, "{") ||
                         peek_at(after).is_word("throws")))
        return MemberShape::Ctor;
    }
    int ty = scan_type(j);
    if (ty < 0) return MemberShape::None;
    if (peek_at(ty).kind == TokenKind::Identifier) {
      const Token& nxt = peek_at(ty + 1);
      if (nxt.is(TokenKind::Operator, "(")) {
        int after = scan_balanced(ty + 1);
        if (after >= 0) {
          const Token& a = peek_at(after);
          if (a.is(TokenKind::Operator, "{") || a.is(TokenKind::Operator, ";") ||
              a.is(TokenKind::Operator, "=>") || a.is_word("throws"))
            return MemberShape::Method;
        }
        return MemberShape::None;
      }
      if (nxt.is(TokenKind::Operator, "=") || nxt.is(TokenKind::Operator, ";") ||
          nxt.is(TokenKind::Operator, ",") || nxt.is(TokenKind::Operator, "["))
        return MemberShape::Field;
    }
    return MemberShape::None;
  }

  // ----- declarations -------------------------------------------------------

  int parse_top_level() {
    if (at(";")) {
      int n = make(NodeKind::EmptyStmt);
      take(n);
      return n;
    }
    if (lang_ == Language::Java && (at_word("package") || at_word("import")))
      return parse_directive(at_word("package") ? NodeKind::PackageDecl
                                                : NodeKind::ImportDecl);
    if (lang_ == Language::CSharp && at_word("using") && !tok(1).is(TokenKind::Operator, "("))
      return parse_directive(NodeKind::ImportDecl);

    switch (scan_member_shape()) {
      case MemberShape::Type:
        return parse_type_decl();
      case MemberShape::Method:
        return parse_method(parse_modifiers(), /*ctor=*/false);
      case MemberShape::Ctor:
        return parse_method(parse_modifiers(), /*ctor=*/true);
      default:
        break;
    }
    return parse_statement();
  }

  int parse_directive(NodeKind kind) {
    int n = make(kind);
    while (!at_eof() && !at(";")) take(n);
    eat(n, ";");
    return n;
  }

  // Annotations and modifier keywords. Returns -1 when there are none.
  int parse_modifiers() {
    int n = make(NodeKind::Modifiers);
    while (!at_eof()) {
      if (at("@") && (tok(1).kind == TokenKind::Identifier ||
                      tok(1).kind == TokenKind::Keyword)) {
        int a = make(NodeKind::Annotation);
        take(a);  // '@'
        tree_.nodes[a].name_tok = idx_[p_];
        tree_.nodes[a].label = tok().text;
        take(a);  // name
        while (at(".") && tok(1).kind == TokenKind::Identifier) {
          take(a);
          tree_.nodes[a].label = tok().text;
          take(a);
        }
        if (at("(")) {
          int depth = 0;
          while (!at_eof()) {
            if (at("(")) ++depth;
            if (at(")")) --depth;
            bool done = depth == 0 && at(")");
            take(a);
            if (done) break;
          }
        }
        add(n, a);
        continue;
      }
      if ((at_kind(TokenKind::Keyword) && is_modifier_word(lang_, tok().text) &&
           !(tok().text == "default" && tok(1).is(TokenKind::Operator, ":"))) ||
          (lang_ == Language::CSharp && at_word("partial"))) {
        take(n);
        continue;
      }
      break;
    }
    // nothing consumed: drop the node so stripped and never-present modifier
    // lists parse to the same tree shape
    if (tree_.nodes[n].children.empty() && tree_.nodes[n].first_tok < 0) {
      if (n == static_cast<int>(tree_.nodes.size()) - 1) tree_.nodes.pop_back();
      return -1;
    }
    return n;
  }

  int parse_type_decl() {
    int n = make(NodeKind::TypeDecl);
    add(n, parse_modifiers());
    if (at_kind(TokenKind::Keyword)) take(n);  // class / interface / ...
    std::string class_name;
    if (at_kind(TokenKind::Identifier)) {
      class_name = tok().text;
      tree_.nodes[n].label = class_name;
      tree_.nodes[n].name_tok = idx_[p_];
      take(n);
    }
    if (at("<")) {
      int ta = make(NodeKind::TypeArgs);
      int depth = 0;
      while (!at_eof()) {
        if (at("<")) ++depth;
        bool close = at(">") && depth == 1;
        if (at(">")) --depth;
        take(ta);
        if (close) break;
      }
      add(n, ta);
    }
    // extends / implements / record header parens / where clauses
    while (!at_eof() && !at("{") && !at(";")) {
      if (at("(")) {  // record component list
        int depth = 0;
        while (!at_eof()) {
          if (at("(")) ++depth;
          if (at(")")) --depth;
          bool done = depth == 0 && at(")");
          take(n);
          if (done) break;
        }
        continue;
      }
      take(n);
    }
    if (at(";")) {
      take(n);
      return n;
    }
    eat(n, "{");
    while (!at_eof() && !at("}")) {
      int before = p_;
      add(n, parse_member());
      if (p_ == before) add(n, unknown_one());
    }
    eat(n, "}");
    return n;
  }

  int parse_member() {
    if (at(";")) {
      int n = make(NodeKind::EmptyStmt);
      take(n);
      return n;
    }
    switch (scan_member_shape()) {
      case MemberShape::Type:
        return parse_type_decl();
      case MemberShape::Initializer: {
        int n = make(NodeKind::InitializerBlock);
        add(n, parse_modifiers());
        add(n, parse_block());
        return n;
      }
      case MemberShape::Ctor: {
        int mods = parse_modifiers();
        return parse_method(mods, /*ctor=*/true);
      }
      case MemberShape::Method: {
        int mods = parse_modifiers();
        return parse_method(mods, /*ctor=*/false);
      }
      case MemberShape::Field: {
        int mods = parse_modifiers();
        int n = make(NodeKind::FieldDecl);
        add(n, mods);
        add(n, parse_type_ref());
        parse_declarators(n);
        eat(n, ";");
        return n;
      }
      case MemberShape::None:
        break;
    }
    // enum constants and anything else we do not model
    return unknown_until_sync();
  }

  int parse_method(int mods, bool ctor) {
    int n = make(ctor ? NodeKind::ConstructorDecl : NodeKind::MethodDecl);
    add(n, mods);
    if (!ctor) {
      if (at("<")) {  // generic method type parameters
        int ta = make(NodeKind::TypeArgs);
        int depth = 0;
        while (!at_eof()) {
          if (at("<")) ++depth;
          bool close = at(">") && depth == 1;
          if (at(">")) --depth;
          take(ta);
          if (close) break;
        }
        add(n, ta);
      }
      add(n, parse_type_ref());
    }
    if (at_kind(TokenKind::Identifier)) {
      tree_.nodes[n].label = tok().text;
      tree_.nodes[n].name_tok = idx_[p_];
      take(n);
    }
    add(n, parse_params());
    if (at_word("throws")) {
      int th = make(NodeKind::ThrowsClause);
      take(th);  // throws
      add(th, parse_type_ref());
      while (at(",")) {
        take(th);
        add(th, parse_type_ref());
      }
      add(n, th);
    }
    if (at("{")) {
      add(n, parse_block());
    } else if (at("=>")) {  // C# expression body
      take(n);
      add(n, parse_expression());
      eat(n, ";");
    } else {
      eat(n, ";");  // abstract / interface declaration
    }
    return n;
  }

  int parse_params() {
    int n = make(NodeKind::ParamList);
    if (!eat(n, "(")) return n;
    while (!at_eof() && !at(")")) {
      int before = p_;
      int param = make(NodeKind::Param);
      add(param, parse_modifiers());
      while (at_word("ref") || at_word("out") || at_word("in") || at_word("params"))
        take(param);
      add(param, parse_type_ref());
      eat(param, "...");  // varargs
      if (at_kind(TokenKind::Identifier)) {
        tree_.nodes[param].label = tok().text;
        tree_.nodes[param].name_tok = idx_[p_];
        take(param);
      }
      while (at("[") && tok(1).is(TokenKind::Operator, "]")) {
        take(param);
        take(param);
      }
      if (at("=")) {  // C# default value
        take(param);
        add(param, parse_expression());
      }
      add(n, param);
      if (!eat(n, ",") && !at(")") && !at_eof()) add(n, unknown_one());
      if (p_ == before && !at(")") && !at_eof()) add(n, unknown_one());
    }
    eat(n, ")");
    return n;
  }

  int parse_type_ref() {
    int n = make(NodeKind::TypeRef);
    if (at_kind(TokenKind::Keyword) && is_primitive_word(lang_, tok().text)) {
      take(n);
    } else if (at_kind(TokenKind::Identifier)) {
      take(n);
      if (at("<") && scan_type_args(0) >= 0) add(n, parse_type_args());
      while (at(".") && tok(1).kind == TokenKind::Identifier) {
        take(n);
        take(n);
        if (at("<") && scan_type_args(0) >= 0) add(n, parse_type_args());
      }
    } else {
      // not a type; leave the node empty and let the caller recover
      return n;
    }
    if (lang_ == Language::CSharp && at("?") && tok(1).kind == TokenKind::Identifier)
      take(n);
    int dims = 0;
    while (at("[") && tok(1).is(TokenKind::Operator, "]")) {
      take(n);
      take(n);
      ++dims;
    }
    if (dims) tree_.nodes[n].label = std::string(dims, '#');
    return n;
  }

  int parse_type_args() {
    int n = make(NodeKind::TypeArgs);
    int depth = 0;
    while (!at_eof()) {
      if (at("<")) ++depth;
      bool close = at(">") && depth == 1;
      if (at(">")) --depth;
      take(n);
      if (close) break;
    }
    return n;
  }

  void parse_declarators(int parent) {
    while (!at_eof()) {
      int d = make(NodeKind::VarDeclarator);
      if (at_kind(TokenKind::Identifier)) {
        tree_.nodes[d].label = tok().text;
        tree_.nodes[d].name_tok = idx_[p_];
        take(d);
      }
      while (at("[") && tok(1).is(TokenKind::Operator, "]")) {
        take(d);
        take(d);
      }
      if (at("=")) {
        take(d);
        if (at("{"))
          add(d, parse_array_init());
        else
          add(d, parse_expression());
      }
      add(parent, d);
      if (!at(",")) break;
      eat(parent, ",");
    }
  }

  // ----- statements ---------------------------------------------------------

  int parse_block() {
    int n = make(NodeKind::Block);
    if (!eat(n, "{")) return n;
    while (!at_eof() && !at("}")) {
      int before = p_;
      add(n, parse_statement());
      if (p_ == before) add(n, unknown_one());
    }
    eat(n, "}");
    return n;
  }

  int parse_statement() {
    if (at("{")) return parse_block();
    if (at(";")) {
      int n = make(NodeKind::EmptyStmt);
      take(n);
      return n;
    }
    if (at_word("if")) return parse_if();
    if (at_word("while")) return parse_while();
    if (at_word("do")) return parse_do();
    if (at_word("for")) return parse_for();
    if (lang_ == Language::CSharp && at_word("foreach")) return parse_foreach_cs();
    if (at_word("switch")) return parse_switch();
    if (at_word("try")) return parse_try();
    if (at_word("return")) return parse_value_stmt(NodeKind::ReturnStmt);
    if (at_word("throw")) return parse_value_stmt(NodeKind::ThrowStmt);
    if (at_word("break") || at_word("continue")) {
      int n = make(at_word("break") ? NodeKind::BreakStmt : NodeKind::ContinueStmt);
      take(n);
      if (at_kind(TokenKind::Identifier)) take(n);  // label
      eat(n, ";");
      return n;
    }
    if (at_word("synchronized") || (lang_ == Language::CSharp && at_word("lock"))) {
      if (tok(1).is(TokenKind::Operator, "(")) {
        int n = make(NodeKind::SyncStmt);
        take(n);
        eat(n, "(");
        add(n, parse_expression());
        eat(n, ")");
        add(n, parse_statement());
        return n;
      }
    }
    if (at_word("assert") && lang_ == Language::Java) {
      int n = make(NodeKind::AssertStmt);
      take(n);
      add(n, parse_expression());
      if (eat(n, ":")) add(n, parse_expression());
      eat(n, ";");
      return n;
    }
    if (lang_ == Language::CSharp && at_word("using") && tok(1).is(TokenKind::Operator, "(")) {
      int n = make(NodeKind::UsingStmt);
      take(n);
      eat(n, "(");
      if (looks_like_local_decl())
        add(n, parse_local_decl(/*eat_semi=*/false));
      else
        add(n, parse_expression());
      eat(n, ")");
      add(n, parse_statement());
      return n;
    }
    if (at_kind(TokenKind::Identifier) && tok(1).is(TokenKind::Operator, ":") &&
        !tok(1).is(TokenKind::Operator, "::")) {
      int n = make(NodeKind::LabeledStmt);
      tree_.nodes[n].label = tok().text;
      take(n);
      take(n);
      add(n, parse_statement());
      return n;
    }
    if (at("@") || at_word("final") || looks_like_local_decl())
      return parse_local_decl(/*eat_semi=*/true);

    int n = make(NodeKind::ExprStmt);
    int before = p_;
    add(n, parse_expression());
    if (p_ == before) {
      // the expression parser made no progress; resynchronize
      add(n, unknown_until_sync());
      return n;
    }
    eat(n, ";");
    return n;
  }

  int parse_value_stmt(NodeKind kind) {
    int n = make(kind);
    take(n);  // keyword
    if (!at(";") && !at("}") && !at_eof()) add(n, parse_expression());
    eat(n, ";");
    return n;
  }

  int parse_local_decl(bool eat_semi) {
    int n = make(NodeKind::LocalVarDecl);
    add(n, parse_modifiers());
    add(n, parse_type_ref());
    parse_declarators(n);
    if (eat_semi) eat(n, ";");
    return n;
  }

  int parse_if() {
    int n = make(NodeKind::IfStmt);
    take(n);
    eat(n, "(");
    add(n, parse_expression());
    eat(n, ")");
    add(n, parse_statement());
    if (at_word("else")) {
      take(n);
      add(n, parse_statement());
    }
    return n;
  }

  int parse_while() {
    int n = make(NodeKind::WhileStmt);
    take(n);
    eat(n, "(");
    add(n, parse_expression());
    eat(n, ")");
    add(n, parse_statement());
    return n;
  }

  int parse_do() {
    int n = make(NodeKind::DoStmt);
    take(n);
    add(n, parse_statement());
    if (eat_word(n, "while")) {
      eat(n, "(");
      add(n, parse_expression());
      eat(n, ")");
    }
    eat(n, ";");
    return n;
  }

  // Java for / for-each; dispatches on a ':' at paren depth 1 before ';'.
  int parse_for() {
    bool foreach_form = false;
    if (tok(1).is(TokenKind::Operator, "(")) {
      int depth = 0;
      for (int j = 1; j < 512; ++j) {
        const Token& t = peek_at(j);
        if (t.kind == TokenKind::Eof) break;
        if (t.is(TokenKind::Operator, "(")) ++depth;
        else if (t.is(TokenKind::Operator, ")")) {
          if (--depth == 0) break;
        } else if (depth == 1 && t.is(TokenKind::Operator, ";")) {
          break;
        } else if (depth == 1 && t.is(TokenKind::Operator, ":")) {
          foreach_form = true;
          break;
        } else if (t.is(TokenKind::Operator, "?")) {
          break;  // conditional expression; its ':' is not a for-each marker
        }
      }
    }
    if (foreach_form) {
      int n = make(NodeKind::ForEachStmt);
      take(n);  // for
      eat(n, "(");
      int v = make(NodeKind::Param);
      add(v, parse_modifiers());
      add(v, parse_type_ref());
      if (at_kind(TokenKind::Identifier)) {
        tree_.nodes[v].label = tok().text;
        tree_.nodes[v].name_tok = idx_[p_];
        take(v);
      }
      add(n, v);
      eat(n, ":");
      add(n, parse_expression());
      eat(n, ")");
      add(n, parse_statement());
      return n;
    }
    int n = make(NodeKind::ForStmt);
    take(n);  // for
    eat(n, "(");
    if (at(";")) {
      take(n);
    } else if (looks_like_local_decl()) {
      add(n, parse_local_decl(/*eat_semi=*/true));
    } else {
      add(n, parse_expression());
      while (eat(n, ",")) add(n, parse_expression());
      eat(n, ";");
    }
    if (!at(";")) add(n, parse_expression());
    eat(n, ";");
    if (!at(")")) {
      add(n, parse_expression());
      while (eat(n, ",")) add(n, parse_expression());
    }
    eat(n, ")");
    add(n, parse_statement());
    return n;
  }

  int parse_foreach_cs() {
    int n = make(NodeKind::ForEachStmt);
    take(n);  // foreach
    eat(n, "(");
    int v = make(NodeKind::Param);
    add(v, parse_type_ref());
    if (at_kind(TokenKind::Identifier)) {
      tree_.nodes[v].label = tok().text;
      tree_.nodes[v].name_tok = idx_[p_];
      take(v);
    }
    add(n, v);
    if (at_word("in")) take(n);
    add(n, parse_expression());
    eat(n, ")");
    add(n, parse_statement());
    return n;
  }

  int parse_switch() {
    int n = make(NodeKind::SwitchStmt);
    take(n);  // switch
    eat(n, "(");
    add(n, parse_expression());
    eat(n, ")");
    eat(n, "{");
    while (!at_eof() && !at("}")) {
      if (at_word("case") || at_word("default")) {
        int c = make(NodeKind::SwitchCase);
        take(c);  // case / default
        while (!at_eof() && !at(":") && !at("->") && !at("}")) {
          int before = p_;
          add(c, parse_expression());
          if (!eat(c, ",")) {
            if (p_ == before) add(c, unknown_one());
            break;
          }
        }
        bool arrow = at("->");
        eat(c, ":") || eat(c, "->");
        if (arrow) {
          if (at("{"))
            add(c, parse_block());
          else {
            add(c, parse_statement());
          }
        } else {
          while (!at_eof() && !at("}") && !at_word("case") && !at_word("default")) {
            int before = p_;
            add(c, parse_statement());
            if (p_ == before) add(c, unknown_one());
          }
        }
        add(n, c);
        continue;
      }
      int before = p_;
      add(n, parse_statement());
      if (p_ == before) add(n, unknown_one());
    }
    eat(n, "}");
    return n;
  }

  int parse_try() {
    int n = make(NodeKind::TryStmt);
    take(n);  // try
    if (at("(")) {
      int r = make(NodeKind::ResourceList);
      take(r);  // (
      while (!at_eof() && !at(")")) {
        int before = p_;
        if (looks_like_local_decl())
          add(r, parse_local_decl(/*eat_semi=*/false));
        else
          add(r, parse_expression());
        if (!eat(r, ";") && !at(")")) {
          if (p_ == before) add(r, unknown_one());
        }
        if (p_ == before && !at(")")) add(r, unknown_one());
      }
      eat(r, ")");
      add(n, r);
    }
    add(n, parse_block());
    while (at_word("catch")) {
      int c = make(NodeKind::CatchClause);
      take(c);  // catch
      if (at("(")) {
        take(c);
        int param = make(NodeKind::Param);
        add(param, parse_modifiers());
        add(param, parse_type_ref());
        while (at("|")) {  // multi-catch
          take(param);
          add(param, parse_type_ref());
        }
        if (at_kind(TokenKind::Identifier)) {
          tree_.nodes[param].label = tok().text;
          tree_.nodes[param].name_tok = idx_[p_];
          take(param);
        }
        add(c, param);
        eat(c, ")");
      }
      add(c, parse_block());
      add(n, c);
    }
    if (at_word("finally")) {
      int f = make(NodeKind::FinallyClause);
      take(f);
      add(f, parse_block());
      add(n, f);
    }
    return n;
  }

  // ----- expressions --------------------------------------------------------

  int parse_expression() { return parse_assignment(); }

  bool is_lambda_start() const {
    if (at_kind(TokenKind::Identifier) &&
        (tok(1).is(TokenKind::Operator, "->") || tok(1).is(TokenKind::Operator, "=>")))
      return true;
    if (at("(")) {
      int after = scan_balanced(0);
      if (after >= 0 && (peek_at(after).is(TokenKind::Operator, "->") ||
                         peek_at(after).is(TokenKind::Operator, "=>")))
        return true;
    }
    return false;
  }

  int parse_assignment() {
    if (is_lambda_start()) return parse_lambda();
    int lhs = parse_ternary();
    static const char* kAssignOps[] = {"=",  "+=",  "-=",  "*=",  "/=",  "%=",
                                       "&=", "|=",  "^=",  "<<=", ">>=", ">>>="};
    for (const char* op : kAssignOps) {
      if (at(op)) {
        int n = make(NodeKind::Assign, op);
        add(n, lhs);
        take(n);
        add(n, parse_assignment());
        return n;
      }
    }
    return lhs;
  }

  int parse_ternary() {
    int cond = parse_coalesce();
    if (!at("?")) return cond;
    int n = make(NodeKind::Ternary);
    add(n, cond);
    take(n);  // ?
    add(n, parse_expression());
    eat(n, ":");
    add(n, parse_assignment());
    return n;
  }

  int parse_coalesce() {
    int lhs = parse_binary(0);
    while (lang_ == Language::CSharp && at("??")) {
      int n = make(NodeKind::Binary, "??");
      add(n, lhs);
      take(n);
      add(n, parse_binary(0));
      lhs = n;
    }
    return lhs;
  }

  // Precedence-climbing over the standard binary levels.
  int parse_binary(int level) {
    static const std::vector<std::vector<std::string_view>> kLevels = {
        {"||"}, {"&&"}, {"|"}, {"^"}, {"&"}, {"==", "!="},
        {"<", ">", "<=", ">="},  // also instanceof / is / as
        {"<<"},                  // '>>' and '>>>' joined from '>' pairs
        {"+", "-"}, {"*", "/", "%"}};
    if (level >= static_cast<int>(kLevels.size())) return parse_unary();
    int lhs = parse_binary(level + 1);
    while (true) {
      if (level == 6) {
        if (at_word("instanceof") || (lang_ == Language::CSharp && (at_word("is") || at_word("as")))) {
          int n = make(NodeKind::InstanceOf, tok().text);
          add(n, lhs);
          take(n);  // keyword
          add(n, parse_type_ref());
          if (at_kind(TokenKind::Identifier)) take(n);  // pattern binding
          lhs = n;
          continue;
        }
      }
      if (level == 7) {
        // re-join adjacent '>' tokens into >> / >>>
        if (at(">") && adjacent(0) && tok(1).is(TokenKind::Operator, ">")) {
          bool triple = adjacent(1) && tok(2).is(TokenKind::Operator, ">");
          int n = make(NodeKind::Binary, triple ? ">>>" : ">>");
          add(n, lhs);
          take(n);
          take(n);
          if (triple) take(n);
          add(n, parse_binary(level + 1));
          lhs = n;
          continue;
        }
      }
      if (level == 6 && at(">") && adjacent(0) && tok(1).is(TokenKind::Operator, ">")) {
        break;  // let level 7 pick up the shift
      }
      bool matched = false;
      for (std::string_view op : kLevels[level]) {
        if (at(op)) {
          int n = make(NodeKind::Binary, std::string(op));
          add(n, lhs);
          take(n);
          add(n, parse_binary(level + 1));
          lhs = n;
          matched = true;
          break;
        }
      }
      if (!matched) break;
    }
    return lhs;
  }

  bool looks_like_cast() const {
    if (!at("(")) return false;
    int t = scan_type(1);
    if (t < 0 || !peek_at(t).is(TokenKind::Operator, ")")) return false;
    const Token& inner = peek_at(1);
    bool primitive = inner.kind == TokenKind::Keyword && is_primitive_word(lang_, inner.text);
    const Token& after = peek_at(t + 1);
    switch (after.kind) {
      case TokenKind::Identifier:
      case TokenKind::Number:
      case TokenKind::String:
      case TokenKind::Char:
        return true;
      case TokenKind::Keyword:
        return after.text == "this" || after.text == "super" || after.text == "new" ||
               after.text == "true" || after.text == "false" || after.text == "null";
      case TokenKind::Operator:
        if (after.text == "(" || after.text == "!" || after.text == "~") return true;
        if (primitive && (after.text == "+" || after.text == "-")) return true;
        return false;
      default:
        return false;
    }
  }

  int parse_unary() {
    static const char* kPrefix[] = {"+", "-", "!", "~", "++", "--"};
    for (const char* op : kPrefix) {
      if (at(op)) {
        int n = make(NodeKind::Unary, op);
        take(n);
        add(n, parse_unary());
        return n;
      }
    }
    if (looks_like_cast()) {
      int n = make(NodeKind::Cast);
      take(n);  // (
      add(n, parse_type_ref());
      eat(n, ")");
      add(n, parse_unary());
      return n;
    }
    return parse_postfix();
  }

  int parse_postfix() {
    int base = parse_primary();
    while (!at_eof()) {
      if (at(".") && (tok(1).kind == TokenKind::Identifier ||
                      tok(1).kind == TokenKind::Keyword ||
                      tok(1).is(TokenKind::Operator, "<"))) {
        int n = make(NodeKind::MemberAccess);
        add(n, base);
        take(n);  // .
        if (at("<") && scan_type_args(0) >= 0) add(n, parse_type_args());
        if (at_kind(TokenKind::Identifier) || at_kind(TokenKind::Keyword)) {
          tree_.nodes[n].label = tok().text;
          tree_.nodes[n].name_tok = idx_[p_];
          take(n);
        }
        base = n;
        if (at("(")) {
          int call = make(NodeKind::Call);
          add(call, base);
          add(call, parse_arglist());
          base = call;
        }
        continue;
      }
      if (at("?.") && lang_ == Language::CSharp) {
        int n = make(NodeKind::MemberAccess, "?.");
        add(n, base);
        take(n);
        if (at_kind(TokenKind::Identifier)) {
          tree_.nodes[n].label = tok().text;
          tree_.nodes[n].name_tok = idx_[p_];
          take(n);
        }
        base = n;
        continue;
      }
      if (at("(")) {
        int call = make(NodeKind::Call);
        add(call, base);
        add(call, parse_arglist());
        base = call;
        continue;
      }
      if (at("[")) {
        int n = make(NodeKind::IndexAccess);
        add(n, base);
        take(n);  // [
        if (!at("]")) add(n, parse_expression());
        eat(n, "]");
        base = n;
        continue;
      }
      if (at("::")) {
        int n = make(NodeKind::MethodRef);
        add(n, base);
        take(n);
        if (at_kind(TokenKind::Identifier) || at_word("new")) {
          tree_.nodes[n].label = tok().text;
          take(n);
        }
        base = n;
        continue;
      }
      if (at("++") || at("--")) {
        int n = make(NodeKind::PostfixOp, tok().text);
        add(n, base);
        take(n);
        base = n;
        continue;
      }
      break;
    }
    return base;
  }

  int parse_arglist() {
    int n = make(NodeKind::ArgList);
    if (!eat(n, "(")) return n;
    while (!at_eof() && !at(")")) {
      int before = p_;
      add(n, parse_expression());
      if (!eat(n, ",") && !at(")")) {
        if (p_ == before) add(n, unknown_one());
      }
      if (p_ == before && !at(")")) add(n, unknown_one());
    }
    eat(n, ")");
    return n;
  }

  int parse_lambda() {
    int n = make(NodeKind::Lambda);
    if (at_kind(TokenKind::Identifier)) {
      int param = make(NodeKind::Param);
      tree_.nodes[param].label = tok().text;
      tree_.nodes[param].name_tok = idx_[p_];
      take(param);
      add(n, param);
    } else if (at("(")) {
      take(n);  // (
      while (!at_eof() && !at(")")) {
        int before = p_;
        int param = make(NodeKind::Param);
        // typed or bare parameter; a bare name is the common case
        if (looks_like_bare_lambda_param()) {
          tree_.nodes[param].label = tok().text;
          tree_.nodes[param].name_tok = idx_[p_];
          take(param);
        } else {
          add(param, parse_modifiers());
          add(param, parse_type_ref());
          if (at_kind(TokenKind::Identifier)) {
            tree_.nodes[param].label = tok().text;
            tree_.nodes[param].name_tok = idx_[p_];
            take(param);
          }
        }
        add(n, param);
        if (!eat(n, ",") && !at(")")) {
          if (p_ == before) add(n, unknown_one());
        }
        if (p_ == before && !at(")")) add(n, unknown_one());
      }
      eat(n, ")");
    }
    if (at("->") || at("=>")) take(n);
    if (at("{"))
      add(n, parse_block());
    else
      add(n, parse_expression());
    return n;
  }

  bool looks_like_bare_lambda_param() const {
    return at_kind(TokenKind::Identifier) &&
           (tok(1).is(TokenKind::Operator, ",") || tok(1).is(TokenKind::Operator, ")"));
  }

  int parse_primary() {
    if (at_kind(TokenKind::Number) || at_kind(TokenKind::String) ||
        at_kind(TokenKind::Char)) {
      int n = make(NodeKind::LiteralExpr);
      take(n);
      return n;
    }
    if (at_word("true") || at_word("false") || at_word("null")) {
      int n = make(NodeKind::LiteralExpr);
      take(n);
      return n;
    }
    if (at_word("this")) {
      int n = make(NodeKind::ThisExpr);
      take(n);
      return n;
    }
    if (at_word("super") || (lang_ == Language::CSharp && at_word("base"))) {
      int n = make(NodeKind::SuperExpr);
      take(n);
      return n;
    }
    if (at_word("new")) return parse_new();
    if (at_word("switch")) return parse_switch();  // switch expression, tolerated
    if (at_kind(TokenKind::Keyword)) {
      // primitive types in `int.class`, C# typeof/default/nameof-style heads
      int n = make(NodeKind::NameRef, tok().text);
      take(n);
      return n;
    }
    if (at_kind(TokenKind::Identifier)) {
      int n = make(NodeKind::NameRef, tok().text);
      tree_.nodes[n].name_tok = idx_[p_];
      take(n);
      return n;
    }
    if (at("(")) {
      int n = make(NodeKind::Paren);
      take(n);
      add(n, parse_expression());
      eat(n, ")");
      return n;
    }
    if (at("{")) return parse_array_init();
    // no valid operand; consume one token as recovery
    return unknown_one();
  }

  int parse_new() {
    int n = make(NodeKind::NewExpr);
    take(n);  // new
    add(n, parse_type_ref());
    if (at("(")) {
      add(n, parse_arglist());
      if (at("{")) {
        // anonymous class body
        int body = make(NodeKind::TypeDecl, "(anonymous)");
        take(body);  // {
        while (!at_eof() && !at("}")) {
          int before = p_;
          add(body, parse_member());
          if (p_ == before) add(body, unknown_one());
        }
        eat(body, "}");
        add(n, body);
      }
      return n;
    }
    while (at("[")) {
      take(n);
      if (!at("]")) add(n, parse_expression());
      eat(n, "]");
    }
    if (at("{")) add(n, parse_array_init());
    return n;
  }

  int parse_array_init() {
    int n = make(NodeKind::ArrayInit);
    take(n);  // {
    while (!at_eof() && !at("}")) {
      int before = p_;
      if (at("{"))
        add(n, parse_array_init());
      else
        add(n, parse_expression());
      if (!eat(n, ",") && !at("}")) {
        if (p_ == before) add(n, unknown_one());
      }
      if (p_ == before && !at("}")) add(n, unknown_one());
    }
    eat(n, "}");
    return n;
  }
};

}  // namespace

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::TokenLeaf: return "TokenLeaf";
    case NodeKind::CompilationUnit: return "CompilationUnit";
    case NodeKind::PackageDecl: return "PackageDecl";
    case NodeKind::ImportDecl: return "ImportDecl";
    case NodeKind::TypeDecl: return "TypeDecl";
    case NodeKind::Modifiers: return "Modifiers";
    case NodeKind::Annotation: return "Annotation";
    case NodeKind::TypeRef: return "TypeRef";
    case NodeKind::TypeArgs: return "TypeArgs";
    case NodeKind::MethodDecl: return "MethodDecl";
    case NodeKind::ConstructorDecl: return "ConstructorDecl";
    case NodeKind::ParamList: return "ParamList";
    case NodeKind::Param: return "Param";
    case NodeKind::ThrowsClause: return "ThrowsClause";
    case NodeKind::FieldDecl: return "FieldDecl";
    case NodeKind::VarDeclarator: return "VarDeclarator";
    case NodeKind::InitializerBlock: return "InitializerBlock";
    case NodeKind::Block: return "Block";
    case NodeKind::LocalVarDecl: return "LocalVarDecl";
    case NodeKind::ExprStmt: return "ExprStmt";
    case NodeKind::IfStmt: return "IfStmt";
    case NodeKind::WhileStmt: return "WhileStmt";
    case NodeKind::DoStmt: return "DoStmt";
    case NodeKind::ForStmt: return "ForStmt";
    case NodeKind::ForEachStmt: return "ForEachStmt";
    case NodeKind::SwitchStmt: return "SwitchStmt";
    case NodeKind::SwitchCase: return "SwitchCase";
    case NodeKind::TryStmt: return "TryStmt";
    case NodeKind::ResourceList: return "ResourceList";
    case NodeKind::CatchClause: return "CatchClause";
    case NodeKind::FinallyClause: return "FinallyClause";
    case NodeKind::ReturnStmt: return "ReturnStmt";
    case NodeKind::ThrowStmt: return "ThrowStmt";
    case NodeKind::BreakStmt: return "BreakStmt";
    case NodeKind::ContinueStmt: return "ContinueStmt";
    case NodeKind::SyncStmt: return "SyncStmt";
    case NodeKind::AssertStmt: return "AssertStmt";
    case NodeKind::EmptyStmt: return "EmptyStmt";
    case NodeKind::LabeledStmt: return "LabeledStmt";
    case NodeKind::UsingStmt: return "UsingStmt";
    case NodeKind::Assign: return "Assign";
    case NodeKind::Ternary: return "Ternary";
    case NodeKind::Binary: return "Binary";
    case NodeKind::Unary: return "Unary";
    case NodeKind::PostfixOp: return "PostfixOp";
    case NodeKind::Cast: return "Cast";
    case NodeKind::InstanceOf: return "InstanceOf";
    case NodeKind::Call: return "Call";
    case NodeKind::ArgList: return "ArgList";
    case NodeKind::MemberAccess: return "MemberAccess";
    case NodeKind::IndexAccess: return "IndexAccess";
    case NodeKind::NewExpr: return "NewExpr";
    case NodeKind::ArrayInit: return "ArrayInit";
    case NodeKind::Lambda: return "Lambda";
    case NodeKind::MethodRef: return "MethodRef";
    case NodeKind::Paren: return "Paren";
    case NodeKind::LiteralExpr: return "LiteralExpr";
    case NodeKind::NameRef: return "NameRef";
    case NodeKind::ThisExpr: return "ThisExpr";
    case NodeKind::SuperExpr: return "SuperExpr";
    case NodeKind::Unknown: return "Unknown";
  }
  return "?";
}

SyntaxTree parse_tokens(const TokenStream& ts) {
  Parser p(ts);
  return p.run();
}

void preorder(const SyntaxTree& tree, const std::function<void(int)>& fn) {
  if (tree.root < 0) return;
  std::vector<int> stack = {tree.root};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    fn(id);
    const Node& n = tree.at(id);
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
}

std::vector<int> collect_kind(const SyntaxTree& tree, NodeKind kind) {
  std::vector<int> out;
  preorder(tree, [&](int id) {
    if (tree.at(id).kind == kind) out.push_back(id);
  });
  return out;
}

bool leaves_cover_stream(const SyntaxTree& tree, const TokenStream& ts) {
  std::vector<int> count(ts.tokens.size(), 0);
  preorder(tree, [&](int id) {
    const Node& n = tree.at(id);
    if (n.kind == NodeKind::TokenLeaf && n.first_tok >= 0 &&
        n.first_tok < static_cast<int>(count.size()))
      ++count[n.first_tok];
  });
  for (size_t i = 0; i + 1 < ts.tokens.size(); ++i) {
    if (ts.tokens[i].kind == TokenKind::Comment) {
      if (count[i] != 0) return false;
    } else if (count[i] != 1) {
      return false;
    }
  }
  return true;
}

}  // namespace cgbench
