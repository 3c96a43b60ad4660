#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cgbench/lexer.hpp"

namespace cgbench {

enum class NodeKind : unsigned char {
  TokenLeaf,  // one source token; first_tok == last_tok
  CompilationUnit,
  PackageDecl,
  ImportDecl,
  TypeDecl,  // class / interface / enum / record / struct / namespace
  Modifiers, // annotations + modifier keywords preceding a declaration
  Annotation,
  TypeRef,
  TypeArgs,
  MethodDecl,
  ConstructorDecl,
  ParamList,
  Param,
  ThrowsClause,
  FieldDecl,
  VarDeclarator,
  InitializerBlock,
  Block,
  LocalVarDecl,
  ExprStmt,
  IfStmt,
  WhileStmt,
  DoStmt,
  ForStmt,
  ForEachStmt,
  SwitchStmt,
  SwitchCase,
  TryStmt,
  ResourceList,
  CatchClause,
  FinallyClause,
  ReturnStmt,
  ThrowStmt,
  BreakStmt,
  ContinueStmt,
  SyncStmt,
  AssertStmt,
  EmptyStmt,
  LabeledStmt,
  UsingStmt,
  Assign,
  Ternary,
  Binary,
  Unary,
  PostfixOp,
  Cast,
  InstanceOf,
  Call,
  ArgList,
  MemberAccess,
  IndexAccess,
  NewExpr,
  ArrayInit,
  Lambda,
  MethodRef,
  Paren,
  LiteralExpr,
  NameRef,
  ThisExpr,
  SuperExpr,
  Unknown,  // recovery node; presence flips fully_parsed to false
};

const char* node_kind_name(NodeKind k);

struct Node {
  NodeKind kind = NodeKind::Unknown;
  int first_tok = -1;  // inclusive token range into the originating stream
  int last_tok = -1;
  int name_tok = -1;   // token of the declared or referenced name, if any
  std::string label;   // operator text, declared name, or small tag
  std::vector<int> children;  // node ids in source order
};

struct SyntaxTree {
  std::vector<Node> nodes;
  int root = -1;
  bool fully_parsed = true;
  int unknown_count = 0;

  const Node& at(int id) const { return nodes[id]; }
  Node& at(int id) { return nodes[id]; }
};

// Parses a token stream into a tolerant concrete syntax tree. Accepts whole
// files, bare class bodies, bare methods, and statement snippets. Malformed
// stretches become Unknown nodes instead of raising; comments never enter
// the tree. Every non-comment token is covered by exactly one leaf.
SyntaxTree parse_tokens(const TokenStream& ts);

// Preorder traversal (source order).
void preorder(const SyntaxTree& tree, const std::function<void(int)>& fn);

// All nodes of one kind, in source order.
std::vector<int> collect_kind(const SyntaxTree& tree, NodeKind kind);

// Test support: checks that leaf token indices cover each non-comment token
// exactly once.
bool leaves_cover_stream(const SyntaxTree& tree, const TokenStream& ts);

}  // namespace cgbench
