#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgbench/analysis.hpp"
#include "cgbench/corpus.hpp"

namespace cgbench {

struct RenderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PromptPartKind { Task, Context, Processing, UpdatedTask, Behaviour };

const char* part_kind_name(PromptPartKind kind);
PromptPartKind part_kind_from_name(std::string_view name);

// How much guidance the prompt carries.
enum class PromptLevel { TaskOnly, Detail, Behaviour };

const char* level_name(PromptLevel level);
PromptLevel level_from_name(std::string_view name);

struct PromptVariant {
  PromptLevel level = PromptLevel::TaskOnly;
  bool concise = false;  // ask for a concise method/code
};

// The template texts, keyed by task and part. Slots: #{NL} #{CN} #{MV} #{MF}
// #{Code}, the optional "#{that calls ...}" clause, and the "with[out]" flag.
class TemplateSet {
 public:
  static TemplateSet defaults();

  void set(TaskKind task, PromptPartKind kind, std::string text);
  const std::string* find(TaskKind task, PromptPartKind kind) const;

  // Override file: lines of "<task>.<part> = <text>" ("t2c.task = ...").
  // Blank lines and lines starting with "//" or ";" are skipped; "\n" in the
  // value expands to a newline.
  void apply_overrides_text(const std::string& text);
  void apply_overrides_file(const std::string& path);

 private:
  std::map<std::pair<int, int>, std::string> templates_;
};

// Fills one template. `behaviour` may be null unless the template uses the
// call-list clause or the with[out] flag. Unknown or unfillable slots raise
// RenderError naming the slot.
std::string render_part(const TemplateSet& templates, TaskKind task, PromptPartKind kind,
                        const TaskInstance& instance, const BehaviourSpec* behaviour,
                        bool concise);

struct PromptPart {
  PromptPartKind kind;
  std::string text;
};

struct PromptBundle {
  TaskKind task = TaskKind::TextToCode;
  PromptVariant variant;
  std::string instance_id;
  std::vector<PromptPart> parts;

  std::string joined() const;  // parts joined with newlines: one user message
};

// Part order for each guidance level.
std::vector<PromptPartKind> recipe(TaskKind task, PromptLevel level);

PromptBundle assemble(const TemplateSet& templates, TaskKind task, PromptVariant variant,
                      const TaskInstance& instance, const BehaviourSpec* behaviour);

// Prompts used to pull behaviour facts out of ground-truth code via a model.
enum class ExtractionKind { ApiList, ExceptionHandling };

std::string extraction_prompt(ExtractionKind kind, const std::string& code);

}  // namespace cgbench
