#include "cgbench/analysis.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "cgbench/strutil.hpp"

namespace cgbench {

namespace {

int first_child_of_kind(const SyntaxTree& tree, int id, NodeKind kind) {
  for (int c : tree.at(id).children)
    if (tree.at(c).kind == kind) return c;
  return -1;
}

// ---------------------------------------------------------------------------
// Symbol resolution: scope-aware binding of simple names to the parameters
// and local variables declared inside a unit, plus a single left-to-right
// reaching-definition pass (assignments evaluate their right side first).
// ---------------------------------------------------------------------------

struct Resolver {
  const SyntaxTree& tree;
  const TokenStream& ts;
  int arg_list_id;  // ParamList whose entries count as method arguments

  struct Sym {
    std::string name;
    bool is_arg = false;
    int decl_tok = -1;
  };
  std::vector<Sym> syms;
  std::vector<std::unordered_map<std::string, int>> scopes;
  std::unordered_map<int, int> tok2sym;   // name token index -> symbol id
  std::unordered_map<int, int> last_def;  // symbol id -> filtered position
  struct RawEdge {
    int sym, use_pos, def_pos;
  };
  std::vector<RawEdge> edges;
  std::vector<int> ordinal_of_sym;  // assigned on first def/use event
  int next_ordinal = 0;
  std::vector<int> filtered_pos;  // token index -> non-comment ordinal

  Resolver(const SyntaxTree& t, const TokenStream& s, int arg_list)
      : tree(t), ts(s), arg_list_id(arg_list) {
    filtered_pos.resize(ts.tokens.size(), -1);
    int ord = 0;
    for (size_t i = 0; i < ts.tokens.size(); ++i) {
      if (ts.tokens[i].kind != TokenKind::Comment) filtered_pos[i] = ord++;
    }
    scopes.emplace_back();
  }

  void push() { scopes.emplace_back(); }
  void pop() { scopes.pop_back(); }

  int lookup(const std::string& name) const {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    return -1;
  }

  void touch_ordinal(int sym) {
    if (ordinal_of_sym[sym] < 0) ordinal_of_sym[sym] = next_ordinal++;
  }

  void def_event(int sym, int name_tok) {
    touch_ordinal(sym);
    last_def[sym] = filtered_pos[name_tok];
  }

  void use_event(int sym, int name_tok) {
    touch_ordinal(sym);
    auto it = last_def.find(sym);
    if (it != last_def.end())
      edges.push_back({sym, filtered_pos[name_tok], it->second});
  }

  int declare(const std::string& name, int name_tok, bool is_arg) {
    int id = static_cast<int>(syms.size());
    syms.push_back({name, is_arg, name_tok});
    ordinal_of_sym.push_back(-1);
    scopes.back()[name] = id;
    tok2sym[name_tok] = id;
    return id;
  }

  void declare_param(int id, bool as_arg) {
    const Node& n = tree.at(id);
    // default values / initializers inside the param are uses first
    for (int c : n.children)
      if (tree.at(c).kind != NodeKind::TokenLeaf) walk(c);
    if (n.name_tok >= 0) {
      int sym = declare(n.label, n.name_tok, as_arg);
      def_event(sym, n.name_tok);
    }
  }

  void walk_children(int id) {
    for (int c : tree.at(id).children) walk(c);
  }

  void walk(int id) {
    const Node& n = tree.at(id);
    switch (n.kind) {
      case NodeKind::TokenLeaf:
      case NodeKind::Modifiers:
      case NodeKind::Annotation:
      case NodeKind::TypeRef:
      case NodeKind::TypeArgs:
      case NodeKind::ThrowsClause:
      case NodeKind::PackageDecl:
      case NodeKind::ImportDecl:
        return;

      case NodeKind::MethodDecl:
      case NodeKind::ConstructorDecl: {
        push();
        for (int c : tree.at(id).children) {
          if (tree.at(c).kind == NodeKind::ParamList) {
            bool as_arg = (c == arg_list_id);
            for (int p : tree.at(c).children)
              if (tree.at(p).kind == NodeKind::Param) declare_param(p, as_arg);
          } else {
            walk(c);
          }
        }
        pop();
        return;
      }

      case NodeKind::Block:
      case NodeKind::ForStmt:
      case NodeKind::ForEachStmt:
      case NodeKind::CatchClause:
      case NodeKind::Lambda:
      case NodeKind::TryStmt:
      case NodeKind::UsingStmt:
      case NodeKind::SwitchStmt:
      case NodeKind::TypeDecl: {
        push();
        walk_children(id);
        pop();
        return;
      }

      case NodeKind::Param:
        declare_param(id, false);
        return;

      case NodeKind::LocalVarDecl:
      case NodeKind::FieldDecl: {
        for (int c : n.children) {
          if (tree.at(c).kind == NodeKind::VarDeclarator) {
            const Node& d = tree.at(c);
            for (int g : d.children)
              if (tree.at(g).kind != NodeKind::TokenLeaf) walk(g);  // initializer uses
            if (d.name_tok >= 0) {
              int sym = declare(d.label, d.name_tok, false);
              def_event(sym, d.name_tok);
            }
          } else {
            walk(c);
          }
        }
        return;
      }

      case NodeKind::Assign: {
        // children: [lhs, op leaf, rhs]; right side evaluates first
        int lhs = -1, rhs = -1;
        for (int c : n.children) {
          if (tree.at(c).kind == NodeKind::TokenLeaf) continue;
          if (lhs < 0)
            lhs = c;
          else
            rhs = c;
        }
        if (rhs >= 0) walk(rhs);
        if (lhs >= 0) {
          const Node& l = tree.at(lhs);
          if (l.kind == NodeKind::NameRef && l.name_tok >= 0) {
            int sym = lookup(l.label);
            if (sym >= 0) {
              tok2sym[l.name_tok] = sym;
              if (n.label != "=") use_event(sym, l.name_tok);  // compound op reads
              def_event(sym, l.name_tok);
            }
          } else {
            walk(lhs);
          }
        }
        return;
      }

      case NodeKind::Unary:
      case NodeKind::PostfixOp: {
        if (n.label == "++" || n.label == "--") {
          int operand = -1;
          for (int c : n.children)
            if (tree.at(c).kind != NodeKind::TokenLeaf) operand = c;
          if (operand >= 0) {
            const Node& o = tree.at(operand);
            if (o.kind == NodeKind::NameRef && o.name_tok >= 0) {
              int sym = lookup(o.label);
              if (sym >= 0) {
                tok2sym[o.name_tok] = sym;
                use_event(sym, o.name_tok);
                def_event(sym, o.name_tok);
              }
              return;
            }
            walk(operand);
          }
          return;
        }
        walk_children(id);
        return;
      }

      case NodeKind::Call: {
        const auto& ch = n.children;
        for (size_t i = 0; i < ch.size(); ++i) {
          const Node& c = tree.at(ch[i]);
          if (i == 0 && c.kind == NodeKind::NameRef) continue;  // method name
          walk(ch[i]);
        }
        return;
      }

      case NodeKind::MemberAccess:
      case NodeKind::MethodRef: {
        if (!n.children.empty()) walk(n.children[0]);  // receiver only
        return;
      }

      case NodeKind::NameRef: {
        if (n.name_tok >= 0) {
          int sym = lookup(n.label);
          if (sym >= 0) {
            tok2sym[n.name_tok] = sym;
            use_event(sym, n.name_tok);
          }
        }
        return;
      }

      case NodeKind::InstanceOf: {
        if (!n.children.empty()) walk(n.children[0]);
        return;
      }

      default:
        walk_children(id);
        return;
    }
  }
};

Resolver resolve(const CodeUnit& unit, int top_method) {
  int arg_list = -1;
  if (top_method >= 0)
    arg_list = first_child_of_kind(unit.tree, top_method, NodeKind::ParamList);
  Resolver r(unit.tree, unit.tokens, arg_list);
  if (unit.tree.root >= 0) r.walk(unit.tree.root);
  return r;
}

int find_top_method(const SyntaxTree& tree) {
  auto methods = collect_kind(tree, NodeKind::MethodDecl);
  return methods.empty() ? -1 : methods.front();
}

// Whether collapsing the gap between two characters would glue them into a
// different token (identifier run, comment opener, longer operator...).
bool needs_space(char prev, char next) {
  auto ident = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '$' ||
           static_cast<unsigned char>(c) >= 0x80;
  };
  if (ident(prev) && ident(next)) return true;
  static const std::string glue = "+-*/%&|^<>=!.:?@";
  return glue.find(prev) != std::string::npos && glue.find(next) != std::string::npos;
}

}  // namespace

std::vector<std::string> CodeUnit::lexemes() const {
  std::vector<std::string> out;
  out.reserve(tokens.tokens.size());
  for (const Token& t : tokens.tokens)
    if (t.kind != TokenKind::Comment && t.kind != TokenKind::Eof) out.push_back(t.text);
  return out;
}

CodeUnit parse_unit(Language lang, std::string source) {
  CodeUnit u;
  u.language = lang;
  u.source = std::move(source);
  u.tokens = lex(lang, u.source);
  u.tree = parse_tokens(u.tokens);
  return u;
}

BehaviourSpec extract_behaviour(const CodeUnit& unit) {
  BehaviourSpec spec;
  // gather call names with their source positions, then order and dedupe
  std::vector<std::pair<int, std::string>> found;
  preorder(unit.tree, [&](int id) {
    const Node& n = unit.tree.at(id);
    if (n.kind == NodeKind::Call && !n.children.empty()) {
      const Node& callee = unit.tree.at(n.children[0]);
      std::string name;
      int pos = -1;
      if (callee.kind == NodeKind::NameRef && callee.name_tok >= 0) {
        name = callee.label;
        pos = callee.name_tok;
      } else if (callee.kind == NodeKind::MemberAccess && callee.name_tok >= 0) {
        name = callee.label;
        pos = callee.name_tok;
      }
      if (!name.empty() && pos >= 0 &&
          unit.tokens.tokens[pos].kind == TokenKind::Identifier)
        found.emplace_back(pos, std::move(name));
    }
    if (n.kind == NodeKind::TryStmt || n.kind == NodeKind::ThrowStmt)
      spec.uses_exceptions = true;
  });
  std::sort(found.begin(), found.end());
  std::unordered_set<std::string> seen;
  for (auto& [pos, name] : found) {
    if (seen.insert(name).second) spec.api_names.push_back(std::move(name));
  }
  return spec;
}

std::string extract_code_block(const std::string& response) {
  size_t fence = response.find("```");
  if (fence == std::string::npos) return trim(response);
  size_t line_end = response.find('\n', fence + 3);
  size_t body;
  if (line_end == std::string::npos) {
    // fence with no newline after the tag: treat the rest as the body
    body = fence + 3;
  } else {
    // anything between the fence and the newline is a language tag
    body = line_end + 1;
  }
  size_t close = response.find("```", body);
  std::string code = close == std::string::npos ? response.substr(body)
                                                : response.substr(body, close - body);
  while (!code.empty() && (code.back() == '\n' || code.back() == '\r')) code.pop_back();
  return code;
}

IsolatedMethod isolate_method(const CodeUnit& unit) {
  auto methods = collect_kind(unit.tree, NodeKind::MethodDecl);
  if (methods.empty())
    throw AnalysisError("no method declaration found in unit");
  IsolatedMethod out;
  out.ambiguous = methods.size() > 1;
  out.discarded = static_cast<int>(methods.size()) - 1;
  const Node& m = unit.tree.at(methods.front());
  const Token& first = unit.tokens.tokens[m.first_tok];
  const Token& last = unit.tokens.tokens[m.last_tok];
  size_t from = first.offset;
  size_t to = last.offset + last.text.size();
  out.text = unit.source.substr(from, to - from);
  return out;
}

NormalizedCode normalize(const CodeUnit& unit, NormalizeMode mode) {
  const auto& toks = unit.tokens.tokens;
  std::vector<char> deleted(toks.size(), 0);
  std::unordered_map<int, std::string> rename;
  NormalizedCode out;

  auto delete_range = [&](int first, int last) {
    if (first < 0) return;
    for (int i = first; i <= last && i < static_cast<int>(toks.size()); ++i)
      deleted[i] = 1;
  };

  // comments go in every mode
  for (size_t i = 0; i < toks.size(); ++i)
    if (toks[i].kind == TokenKind::Comment) deleted[i] = 1;

  // annotations go in every mode
  for (int a : collect_kind(unit.tree, NodeKind::Annotation)) {
    const Node& n = unit.tree.at(a);
    delete_range(n.first_tok, n.last_tok);
  }

  if (mode == NormalizeMode::TextToCode) {
    int method = find_top_method(unit.tree);
    if (method < 0) throw AnalysisError("normalize: unit holds no method declaration");
    const Node& m = unit.tree.at(method);

    // anything outside the method itself (stray prose, wrapper punctuation)
    for (size_t i = 0; i < toks.size(); ++i) {
      int ti = static_cast<int>(i);
      if (ti < m.first_tok || ti > m.last_tok) deleted[i] = 1;
    }

    // the method's own modifiers and throws clause
    if (int mods = first_child_of_kind(unit.tree, method, NodeKind::Modifiers); mods >= 0) {
      const Node& mn = unit.tree.at(mods);
      delete_range(mn.first_tok, mn.last_tok);
    }
    if (int th = first_child_of_kind(unit.tree, method, NodeKind::ThrowsClause); th >= 0) {
      const Node& tn = unit.tree.at(th);
      delete_range(tn.first_tok, tn.last_tok);
    }

    // name binding
    Resolver res = resolve(unit, method);

    // method name -> "function", incl. plain recursive calls
    const std::string original_name = m.label;
    if (m.name_tok >= 0) rename[m.name_tok] = "function";
    if (!original_name.empty()) {
      preorder(unit.tree, [&](int id) {
        const Node& n = unit.tree.at(id);
        if (n.kind != NodeKind::Call || n.children.empty()) return;
        const Node& callee = unit.tree.at(n.children[0]);
        bool plain = callee.kind == NodeKind::NameRef;
        bool via_this =
            callee.kind == NodeKind::MemberAccess && !callee.children.empty() &&
            unit.tree.at(callee.children[0]).kind == NodeKind::ThisExpr;
        if ((plain || via_this) && callee.label == original_name && callee.name_tok >= 0)
          rename[callee.name_tok] = "function";
      });
    }

    // arguments and locals, numbered in declaration order. Only symbols
    // declared inside the method body participate (a class wrapper's fields
    // keep their names).
    std::vector<int> args, locals;
    for (int s = 0; s < static_cast<int>(res.syms.size()); ++s) {
      int d = res.syms[s].decl_tok;
      if (d < m.first_tok || d > m.last_tok) continue;
      (res.syms[s].is_arg ? args : locals).push_back(s);
    }
    auto by_decl = [&](int a, int b) { return res.syms[a].decl_tok < res.syms[b].decl_tok; };
    std::sort(args.begin(), args.end(), by_decl);
    std::sort(locals.begin(), locals.end(), by_decl);

    // identifiers that stay put must not collide with the generated names;
    // tokens of renamed symbols (and the renamed method name) do not count
    std::unordered_set<int> renamed_toks;
    for (const auto& [tok, name] : rename) renamed_toks.insert(tok);
    std::unordered_set<int> renamed_syms(args.begin(), args.end());
    renamed_syms.insert(locals.begin(), locals.end());
    for (const auto& [tok, sym] : res.tok2sym)
      if (renamed_syms.count(sym)) renamed_toks.insert(tok);
    std::unordered_set<std::string> taken;
    for (size_t i = 0; i < toks.size(); ++i) {
      if (deleted[i] || renamed_toks.count(static_cast<int>(i))) continue;
      if (toks[i].kind == TokenKind::Identifier) taken.insert(toks[i].text);
    }

    std::vector<std::string> new_name_of(res.syms.size());
    auto assign_names = [&](const std::vector<int>& order, const char* stem) {
      int index = 0;
      for (int s : order) {
        std::string name;
        while (true) {
          name = std::string(stem) + std::to_string(index);
          if (!taken.count(name)) break;
          out.notes.push_back("index " + std::to_string(index) + " skipped: '" + name +
                              "' already present");
          ++index;
        }
        new_name_of[s] = name;
        ++index;
      }
    };
    assign_names(args, "arg");
    assign_names(locals, "loc");

    for (const auto& [tok, sym] : res.tok2sym)
      if (!new_name_of[sym].empty()) rename[tok] = new_name_of[sym];

    if (!original_name.empty() && original_name != "function")
      out.renames.emplace_back(original_name, "function");
    for (int s : args)
      if (res.syms[s].name != new_name_of[s])
        out.renames.emplace_back(res.syms[s].name, new_name_of[s]);
    for (int s : locals)
      if (res.syms[s].name != new_name_of[s])
        out.renames.emplace_back(res.syms[s].name, new_name_of[s]);
  }

  // emit surviving tokens; gaps left by deletions collapse, with a space
  // guard wherever gluing would change tokenization
  std::string text;
  bool after_gap = false;
  bool first_out = true;
  for (size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Eof) break;
    if (deleted[i]) {
      after_gap = true;
      continue;
    }
    std::string piece = rename.count(static_cast<int>(i)) ? rename[static_cast<int>(i)] : t.text;
    if (first_out) {
      // drop leading layout entirely
    } else if (after_gap) {
      if (!text.empty() && !piece.empty() && needs_space(text.back(), piece.front()))
        text += ' ';
    } else {
      text += t.leading;
    }
    text += piece;
    first_out = false;
    after_gap = false;
  }
  // canonical: no trailing layout (Eof trivia is dropped with the loop)

  out.text = text;
  out.unit = parse_unit(unit.language, out.text);
  return out;
}

std::map<std::string, int> ast_subtrees(const CodeUnit& unit) {
  std::map<std::string, int> counts;
  const SyntaxTree& tree = unit.tree;
  if (tree.root < 0) return counts;
  std::vector<std::string> repr(tree.nodes.size());

  // bottom-up: children first (postorder via explicit stack)
  std::vector<std::pair<int, bool>> stack{{tree.root, false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    const Node& n = tree.at(id);
    if (n.kind == NodeKind::TokenLeaf) {
      const Token& t = unit.tokens.tokens[n.first_tok];
      switch (t.kind) {
        case TokenKind::Keyword: repr[id] = "kw:" + t.text; break;
        case TokenKind::Identifier: repr[id] = "id"; break;
        case TokenKind::Number: repr[id] = "num"; break;
        case TokenKind::String: repr[id] = "str"; break;
        case TokenKind::Char: repr[id] = "chr"; break;
        default: repr[id].clear(); break;  // operators/punctuation fold away
      }
      continue;
    }
    if (!expanded) {
      stack.push_back({id, true});
      for (auto it = n.children.rbegin(); it != n.children.rend(); ++it)
        stack.push_back({*it, false});
      continue;
    }
    bool labeled = n.kind == NodeKind::Binary || n.kind == NodeKind::Assign ||
                   n.kind == NodeKind::Unary || n.kind == NodeKind::PostfixOp ||
                   n.kind == NodeKind::InstanceOf || n.kind == NodeKind::TypeRef;
    std::string sig = node_kind_name(n.kind);
    if (labeled && !n.label.empty()) {
      sig += ':';
      sig += n.label;
    }
    sig += '(';
    bool first = true;
    for (int c : n.children) {
      if (repr[c].empty()) continue;
      if (!first) sig += ',';
      sig += repr[c];
      first = false;
    }
    sig += ')';
    counts[sig] += 1;
    repr[id] = std::move(sig);
  }
  return counts;
}

std::vector<DataflowEdge> dataflow_edges(const CodeUnit& unit) {
  Resolver res = resolve(unit, find_top_method(unit.tree));
  std::vector<DataflowEdge> out;
  out.reserve(res.edges.size());
  for (const auto& e : res.edges)
    out.push_back({res.ordinal_of_sym[e.sym], e.use_pos, e.def_pos});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace cgbench
