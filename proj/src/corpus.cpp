#include "cgbench/corpus.hpp"

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "cgbench/strutil.hpp"

namespace cgbench {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::string text = read_file(path);
  std::vector<std::string> lines;
  size_t start = 0;
  for (size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      std::string line = text.substr(start, i - start);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
      start = i + 1;
    }
  }
  // the final newline produces one empty trailing entry; drop it
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> string_array(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_array()) throw CorpusError(where + ": \"" + key + "\" must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string())
      throw CorpusError(where + ": \"" + key + "\" must hold strings only");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

const char* task_name(TaskKind kind) {
  return kind == TaskKind::TextToCode ? "t2c" : "c2c";
}

TaskKind task_from_name(std::string_view name) {
  std::string n = to_lower(trim_view(name));
  if (n == "t2c" || n == "text-to-code" || n == "text2code") return TaskKind::TextToCode;
  if (n == "c2c" || n == "code-to-code" || n == "code2code") return TaskKind::CodeToCode;
  throw CorpusError("unknown task: " + std::string(name));
}

std::vector<TaskInstance> load_t2c(const std::string& path) {
  static const std::set<std::string> kKeys = {"id",    "nl",
                                              "class_name", "member_variables",
                                              "member_functions", "code"};
  std::vector<TaskInstance> out;
  std::set<std::string> ids;
  auto lines = read_lines(path);
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string where = path + ":" + std::to_string(ln + 1);
    const std::string& line = lines[ln];
    if (trim_view(line).empty()) throw CorpusError(where + ": empty record");
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw CorpusError(where + ": " + e.what());
    }
    if (!j.is_object()) throw CorpusError(where + ": record is not an object");
    std::set<std::string> present;
    for (auto it = j.begin(); it != j.end(); ++it) present.insert(it.key());
    for (const auto& k : present)
      if (!kKeys.count(k)) throw CorpusError(where + ": unexpected key \"" + k + "\"");
    for (const auto& k : kKeys)
      if (!present.count(k)) throw CorpusError(where + ": missing key \"" + k + "\"");
    for (const char* k : {"id", "nl", "class_name", "code"})
      if (!j.at(k).is_string())
        throw CorpusError(where + ": \"" + std::string(k) + "\" must be a string");

    TaskInstance inst;
    inst.kind = TaskKind::TextToCode;
    inst.id = j.at("id").get<std::string>();
    inst.nl_description = j.at("nl").get<std::string>();
    inst.environment.class_name = j.at("class_name").get<std::string>();
    inst.environment.member_variables = string_array(j, "member_variables", where);
    inst.environment.member_functions = string_array(j, "member_functions", where);
    inst.ground_truth = j.at("code").get<std::string>();

    if (inst.id.empty()) throw CorpusError(where + ": empty id");
    if (!ids.insert(inst.id).second)
      throw CorpusError(where + ": duplicate id \"" + inst.id + "\"");
    if (inst.environment.class_name.empty())
      throw CorpusError(where + ": class_name must be non-empty");
    if (trim_view(inst.ground_truth).empty())
      throw CorpusError(where + ": code must be non-empty");
    out.push_back(std::move(inst));
  }
  return out;
}

void save_t2c(const std::vector<TaskInstance>& instances, const std::string& path) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw CorpusError("cannot write file: " + path);
  for (const auto& inst : instances) {
    json j;
    j["id"] = inst.id;
    j["nl"] = inst.nl_description;
    j["class_name"] = inst.environment.class_name;
    j["member_variables"] = inst.environment.member_variables;
    j["member_functions"] = inst.environment.member_functions;
    j["code"] = inst.ground_truth;
    outf << j.dump() << "\n";
  }
  if (!outf) throw CorpusError("write failed: " + path);
}

std::vector<TaskInstance> load_c2c(const std::string& source_path,
                                   const std::string& target_path) {
  auto src = read_lines(source_path);
  auto tgt = read_lines(target_path);
  if (src.size() != tgt.size())
    throw CorpusError("line count mismatch: " + source_path + " has " +
                      std::to_string(src.size()) + " lines, " + target_path + " has " +
                      std::to_string(tgt.size()));
  std::vector<TaskInstance> out;
  out.reserve(src.size());
  for (size_t i = 0; i < src.size(); ++i) {
    if (trim_view(tgt[i]).empty())
      throw CorpusError(target_path + ":" + std::to_string(i + 1) + ": empty target line");
    if (trim_view(src[i]).empty())
      throw CorpusError(source_path + ":" + std::to_string(i + 1) + ": empty source line");
    TaskInstance inst;
    inst.kind = TaskKind::CodeToCode;
    inst.id = "c2c-" + std::to_string(i + 1);
    inst.source_code = src[i];
    inst.ground_truth = tgt[i];
    out.push_back(std::move(inst));
  }
  return out;
}

void save_c2c(const std::vector<TaskInstance>& instances, const std::string& source_path,
              const std::string& target_path) {
  std::ofstream sf(source_path, std::ios::binary), tf(target_path, std::ios::binary);
  if (!sf || !tf) throw CorpusError("cannot write c2c files");
  for (const auto& inst : instances) {
    sf << inst.source_code << "\n";
    tf << inst.ground_truth << "\n";
  }
}

namespace {

// Uniform value in [0, bound) by rejection, so the mapping from the engine's
// output stream to indices is fully specified (unlike uniform_int_distribution).
std::uint64_t bounded_rand(std::mt19937_64& gen, std::uint64_t bound) {
  std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = gen();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace

std::vector<TaskInstance> sample(const std::vector<TaskInstance>& instances, std::size_t n,
                                 std::uint64_t seed) {
  if (n > instances.size())
    throw CorpusError("sample: requested " + std::to_string(n) + " of " +
                      std::to_string(instances.size()) + " instances");
  std::vector<TaskInstance> pool = instances;
  std::mt19937_64 gen(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded_rand(gen, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

std::vector<TaskInstance> import_concode(const std::string& path,
                                         const ConcodeImportOptions& options) {
  std::vector<TaskInstance> out;
  auto lines = read_lines(path);
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string where = path + ":" + std::to_string(ln + 1);
    if (trim_view(lines[ln]).empty()) continue;  // raw dumps may hold blank lines
    json j;
    try {
      j = json::parse(lines[ln]);
    } catch (const json::exception& e) {
      throw CorpusError(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("nl") || !j.contains("code"))
      throw CorpusError(where + ": record needs \"nl\" and \"code\"");

    TaskInstance inst;
    inst.kind = TaskKind::TextToCode;
    inst.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>()
                                                      : options.id_prefix + "-" +
                                                            std::to_string(ln + 1);
    inst.ground_truth = j.at("code").get<std::string>();
    inst.environment.class_name = options.default_class_name;
    if (j.contains("class_name") && j["class_name"].is_string() &&
        !j["class_name"].get<std::string>().empty())
      inst.environment.class_name = j["class_name"].get<std::string>();

    // the flattened nl: description, then environment entries behind
    // field/elem separator markers
    std::string nl = j.at("nl").get<std::string>();
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      size_t pos = nl.find(options.field_sep, start);
      fields.push_back(nl.substr(start, pos == std::string::npos ? pos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + options.field_sep.size();
    }
    inst.nl_description = trim(fields.front());
    for (size_t f = 1; f < fields.size(); ++f) {
      // each field may hold several entries split by the element marker
      std::string field = fields[f];
      size_t es = 0;
      while (true) {
        size_t pos = field.find(options.elem_sep, es);
        std::string entry =
            trim(field.substr(es, pos == std::string::npos ? pos : pos - es));
        if (!entry.empty()) {
          if (entry.find('(') != std::string::npos)
            inst.environment.member_functions.push_back(entry);
          else
            inst.environment.member_variables.push_back(entry);
        }
        if (pos == std::string::npos) break;
        es = pos + options.elem_sep.size();
      }
    }
    if (trim_view(inst.ground_truth).empty())
      throw CorpusError(where + ": empty code");
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace cgbench
