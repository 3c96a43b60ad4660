#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cgbench {

enum class TaskKind { TextToCode, CodeToCode };

const char* task_name(TaskKind kind);             // "t2c" / "c2c"
TaskKind task_from_name(std::string_view name);   // accepts t2c/c2c (case-insensitive)

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The class the target method belongs to, as recorded in the dataset.
struct CodeEnvironment {
  std::string class_name;
  std::vector<std::string> member_variables;
  std::vector<std::string> member_functions;
};

struct TaskInstance {
  std::string id;
  TaskKind kind = TaskKind::TextToCode;
  std::string nl_description;   // text-to-code input
  CodeEnvironment environment;  // text-to-code context
  std::string source_code;      // code-to-code input (C#)
  std::string ground_truth;     // expected Java code
};

// JSONL with exactly the keys id/nl/class_name/member_variables/
// member_functions/code per line. Errors name the offending line.
std::vector<TaskInstance> load_t2c(const std::string& path);
void save_t2c(const std::vector<TaskInstance>& instances, const std::string& path);

// Two parallel line-oriented files: C# source and Java target, paired by
// line. A length mismatch or an empty target line is an error.
std::vector<TaskInstance> load_c2c(const std::string& source_path,
                                   const std::string& target_path);
void save_c2c(const std::vector<TaskInstance>& instances, const std::string& source_path,
              const std::string& target_path);

// Deterministic sample of n instances without replacement: a partial
// Fisher-Yates pass over a copy, driven by mt19937_64 with rejection-sampled
// bounds so the result is identical across platforms for the same seed.
std::vector<TaskInstance> sample(const std::vector<TaskInstance>& instances, std::size_t n,
                                 std::uint64_t seed);

// Import for the raw CONCODE-style distribution: JSONL records holding "nl"
// (description plus environment flattened with separator markers) and "code".
struct ConcodeImportOptions {
  std::string default_class_name = "Placeholder";
  std::string field_sep = "concode_field_sep";
  std::string elem_sep = "concode_elem_sep";
  std::string id_prefix = "t2c";
};

std::vector<TaskInstance> import_concode(const std::string& path,
                                         const ConcodeImportOptions& options = {});

}  // namespace cgbench
