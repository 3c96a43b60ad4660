#include "support/methodgen.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

namespace testsupport {

namespace {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  size_t index(size_t n) { return static_cast<size_t>(rng_() % n); }
  bool chance(int percent) { return static_cast<int>(rng_() % 100) < percent; }
  int literal() { return static_cast<int>(rng_() % 9) + 1; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[index(v.size())];
  }

 private:
  std::mt19937_64 rng_;
};

const std::vector<std::string> kArgPool = {"alpha", "beta", "gamma", "delta"};
const std::vector<std::string> kLocalPool = {"tally", "cursorVal", "acc", "buffer",
                                             "stride", "probe"};
const std::vector<std::string> kMethodPool = {"computeTotal", "mergeParts", "scanRange",
                                              "foldItems", "packSlots"};
const std::vector<std::string> kCalleePool = {"helperOne", "helperTwo", "emitTrace"};
const std::vector<std::string> kOps = {"+", "-", "*"};

std::string expr(Gen& g, const std::vector<std::string>& vars, int depth) {
  if (depth <= 0 || g.chance(35)) {
    if (!vars.empty() && g.chance(70)) return g.pick(vars);
    return std::to_string(g.literal());
  }
  return expr(g, vars, depth - 1) + " " + g.pick(kOps) + " " + expr(g, vars, depth - 1);
}

struct Builder {
  std::ostringstream body;
  std::vector<std::string> vars;  // everything assignable in scope
  GenMethod out;
};

void emit_statement(Gen& g, Builder& b, bool decorated, bool allow_blocks) {
  int kind = static_cast<int>(g.index(allow_blocks ? 5 : 2));
  switch (kind) {
    case 0: {  // fresh local
      std::string name = kLocalPool[b.out.local_names.size() % kLocalPool.size()];
      if (std::find(b.out.local_names.begin(), b.out.local_names.end(), name) !=
          b.out.local_names.end())
        name += std::to_string(b.out.local_names.size());
      b.body << "    int " << name << " = " << expr(g, b.vars, 1) << ";";
      if (decorated && g.chance(40)) b.body << " // scratch";
      b.body << "\n";
      b.out.local_names.push_back(name);
      b.vars.push_back(name);
      break;
    }
    case 1: {  // assignment
      if (b.vars.empty()) {
        emit_statement(g, b, decorated, false);
        return;
      }
      b.body << "    " << g.pick(b.vars) << " = " << expr(g, b.vars, 2) << ";\n";
      break;
    }
    case 2: {  // if / else
      b.body << "    if (" << expr(g, b.vars, 1) << " > " << g.literal() << ") {\n";
      if (!b.vars.empty())
        b.body << "        " << g.pick(b.vars) << " = " << expr(g, b.vars, 1) << ";\n";
      b.body << "    }";
      if (g.chance(50) && !b.vars.empty()) {
        b.body << " else {\n        " << g.pick(b.vars) << " = 0;\n    }";
      }
      b.body << "\n";
      break;
    }
    case 3: {  // bounded while
      if (b.vars.empty()) {
        emit_statement(g, b, decorated, false);
        return;
      }
      const std::string& v = g.pick(b.vars);
      b.body << "    while (" << v << " > 0) {\n        " << v << " = " << v
             << " - 1;\n    }\n";
      break;
    }
    default: {  // helper call
      const std::string& callee = g.pick(kCalleePool);
      if (std::find(b.out.callee_names.begin(), b.out.callee_names.end(), callee) ==
          b.out.callee_names.end())
        b.out.callee_names.push_back(callee);
      b.body << "    " << callee << "(" << expr(g, b.vars, 1) << ");\n";
      break;
    }
  }
}

GenMethod build(std::uint64_t seed, bool decorated, bool straight) {
  Gen g(seed);
  Builder b;

  b.out.method_name = kMethodPool[g.index(kMethodPool.size())];
  size_t n_args = g.index(3) + (straight ? 1 : 0);  // straight always has input
  for (size_t i = 0; i < n_args && i < kArgPool.size(); ++i) {
    b.out.arg_names.push_back(kArgPool[i]);
    b.vars.push_back(kArgPool[i]);
  }

  size_t n_stmts = 2 + g.index(3);
  for (size_t i = 0; i < n_stmts; ++i) emit_statement(g, b, decorated, !straight);
  b.body << "    return " << expr(g, b.vars, 1) << ";\n";

  std::ostringstream m;
  if (decorated) {
    m << "/**\n * Computes a small deterministic value.\n */\n";
    if (g.chance(60)) m << "@Deprecated\n";
    m << "public static ";
  }
  m << "int " << b.out.method_name << "(";
  for (size_t i = 0; i < b.out.arg_names.size(); ++i) {
    if (i) m << ", ";
    m << "int " << b.out.arg_names[i];
  }
  m << ")";
  if (decorated) m << " throws Exception";
  m << " {\n";
  if (decorated) m << "    // generated body\n";
  m << b.body.str();
  m << "}";
  b.out.text = m.str();
  return b.out;
}

}  // namespace

GenMethod gen_method(std::uint64_t seed, bool decorated) {
  return build(seed, decorated, /*straight=*/false);
}

GenMethod gen_straight(std::uint64_t seed) {
  return build(seed, /*decorated=*/false, /*straight=*/true);
}

std::string rename_identifiers(const GenMethod& m, const std::string& suffix) {
  std::vector<std::string> targets = m.arg_names;
  targets.insert(targets.end(), m.local_names.begin(), m.local_names.end());
  targets.push_back(m.method_name);

  auto is_ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_ident = [&](char c) {
    return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
  };

  const std::string& src = m.text;
  std::string out;
  size_t i = 0;
  while (i < src.size()) {
    // generated sources only contain these three non-code regions
    if (src.compare(i, 2, "//") == 0) {
      while (i < src.size() && src[i] != '\n') out += src[i++];
      continue;
    }
    if (src.compare(i, 2, "/*") == 0) {
      size_t end = src.find("*/", i + 2);
      end = end == std::string::npos ? src.size() : end + 2;
      out += src.substr(i, end - i);
      i = end;
      continue;
    }
    if (src[i] == '"') {
      out += src[i++];
      while (i < src.size() && src[i] != '"') out += src[i++];
      if (i < src.size()) out += src[i++];
      continue;
    }
    if (is_ident_start(src[i])) {
      size_t j = i;
      while (j < src.size() && is_ident(src[j])) ++j;
      std::string word = src.substr(i, j - i);
      for (const auto& t : targets)
        if (word == t) {
          word += suffix;
          break;
        }
      out += word;
      i = j;
      continue;
    }
    out += src[i++];
  }
  return out;
}

}  // namespace testsupport
