#include "cgbench/prompt_forge.hpp"

#include <fstream>
#include <sstream>

#include "cgbench/strutil.hpp"

namespace cgbench {

namespace {

// Default templates. The environment slots keep their surrounding quotes;
// list-valued slots join with "; " since entries may hold commas.
constexpr const char* kT2cTask = "write a Java method that #{NL}";
constexpr const char* kT2cContext =
    "remember you have a Java class named '#{CN}', member variables '#{MV}', member "
    "functions '#{MF}'";
constexpr const char* kT2cProcessing =
    "remove comments; remove summary; remove throws; remove function modifiers; change "
    "method name to \"function\"; change argument names to \"arg0\", \"arg1\"...; change "
    "local variable names to \"loc0\", \"loc1\"...";
constexpr const char* kT2cBehaviour =
    "write a Java method #{that calls ...} with[out] exception handling to #{NL}";
constexpr const char* kC2cTask = "translate C# code into Java code: #{Code}";
constexpr const char* kC2cProcessing = "do not provide annotation";
constexpr const char* kC2cUpdatedTask =
    "translate C# code delimited by triple backticks into Java code: '''#{Code}'''";
constexpr const char* kC2cBehaviour =
    "translate C# code into Java code: '''#{Code}''' #{that calls ...} with[out] "
    "exception handling";

constexpr const char* kApiListPrompt =
    "list the used methods with names only in the following Java methods and do not "
    "explain: ";
constexpr const char* kExceptionPrompt = "does the code contain exception handling? ";

std::string expand_escapes(std::string_view v) {
  std::string out;
  out.reserve(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i] == '\\' && i + 1 < v.size() && v[i + 1] == 'n') {
      out.push_back('\n');
      ++i;
    } else {
      out.push_back(v[i]);
    }
  }
  return out;
}

}  // namespace

const char* part_kind_name(PromptPartKind kind) {
  switch (kind) {
    case PromptPartKind::Task: return "task";
    case PromptPartKind::Context: return "context";
    case PromptPartKind::Processing: return "processing";
    case PromptPartKind::UpdatedTask: return "updated_task";
    case PromptPartKind::Behaviour: return "behaviour";
  }
  return "?";
}

PromptPartKind part_kind_from_name(std::string_view name) {
  std::string n = to_lower(trim_view(name));
  if (n == "task") return PromptPartKind::Task;
  if (n == "context") return PromptPartKind::Context;
  if (n == "processing") return PromptPartKind::Processing;
  if (n == "updated_task") return PromptPartKind::UpdatedTask;
  if (n == "behaviour" || n == "behavior") return PromptPartKind::Behaviour;
  throw RenderError("unknown prompt part: " + std::string(name));
}

const char* level_name(PromptLevel level) {
  switch (level) {
    case PromptLevel::TaskOnly: return "task";
    case PromptLevel::Detail: return "detail";
    case PromptLevel::Behaviour: return "behaviour";
  }
  return "?";
}

PromptLevel level_from_name(std::string_view name) {
  std::string n = to_lower(trim_view(name));
  if (n == "task" || n == "taskonly" || n == "task-only") return PromptLevel::TaskOnly;
  if (n == "detail") return PromptLevel::Detail;
  if (n == "behaviour" || n == "behavior") return PromptLevel::Behaviour;
  throw RenderError("unknown prompt level: " + std::string(name));
}

TemplateSet TemplateSet::defaults() {
  TemplateSet t;
  t.set(TaskKind::TextToCode, PromptPartKind::Task, kT2cTask);
  t.set(TaskKind::TextToCode, PromptPartKind::Context, kT2cContext);
  t.set(TaskKind::TextToCode, PromptPartKind::Processing, kT2cProcessing);
  t.set(TaskKind::TextToCode, PromptPartKind::Behaviour, kT2cBehaviour);
  t.set(TaskKind::CodeToCode, PromptPartKind::Task, kC2cTask);
  t.set(TaskKind::CodeToCode, PromptPartKind::Processing, kC2cProcessing);
  t.set(TaskKind::CodeToCode, PromptPartKind::UpdatedTask, kC2cUpdatedTask);
  t.set(TaskKind::CodeToCode, PromptPartKind::Behaviour, kC2cBehaviour);
  return t;
}

void TemplateSet::set(TaskKind task, PromptPartKind kind, std::string text) {
  templates_[{static_cast<int>(task), static_cast<int>(kind)}] = std::move(text);
}

const std::string* TemplateSet::find(TaskKind task, PromptPartKind kind) const {
  auto it = templates_.find({static_cast<int>(task), static_cast<int>(kind)});
  return it == templates_.end() ? nullptr : &it->second;
}

void TemplateSet::apply_overrides_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    std::string_view v = trim_view(line);
    if (v.empty() || starts_with(v, "//") || starts_with(v, ";")) continue;
    size_t eq = v.find('=');
    size_t dot = v.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq)
      throw RenderError("template override line " + std::to_string(ln) +
                        ": expected <task>.<part> = <text>");
    TaskKind task = task_from_name(v.substr(0, dot));
    PromptPartKind kind = part_kind_from_name(v.substr(dot + 1, eq - dot - 1));
    set(task, kind, expand_escapes(trim_view(v.substr(eq + 1))));
  }
}

void TemplateSet::apply_overrides_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RenderError("cannot open template overrides: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_overrides_text(ss.str());
}

std::string render_part(const TemplateSet& templates, TaskKind task, PromptPartKind kind,
                        const TaskInstance& instance, const BehaviourSpec* behaviour,
                        bool concise) {
  const std::string* tpl = templates.find(task, kind);
  if (!tpl)
    throw RenderError(std::string("no template for ") + task_name(task) + "." +
                      part_kind_name(kind));
  std::string text = *tpl;

  // conciseness rewrites the generation-target noun phrase, before slot
  // values (which may contain the same words) enter the text
  if (concise) {
    size_t m = text.find("Java method");
    size_t c = text.find("Java code");
    size_t at = std::min(m, c);
    if (at != std::string::npos) text.insert(at, "concise ");
  }

  // call-list clause and exception flag
  bool wants_behaviour =
      contains(text, "#{that calls ...}") || contains(text, "with[out]");
  if (wants_behaviour && !behaviour)
    throw RenderError(std::string(part_kind_name(kind)) +
                      ": behaviour slots present but no behaviour spec given");
  if (contains(text, "#{that calls ...}")) {
    if (behaviour->api_names.empty()) {
      text = replace_all(std::move(text), " #{that calls ...}", "");
      text = replace_all(std::move(text), "#{that calls ...}", "");
    } else {
      text = replace_all(std::move(text), "#{that calls ...}",
                         "that calls " + join(behaviour->api_names, ", "));
    }
  }
  if (contains(text, "with[out]"))
    text = replace_all(std::move(text), "with[out]",
                       behaviour->uses_exceptions ? "with" : "without");

  // environment and payload slots
  auto require_task = [&](const char* slot, TaskKind needed) {
    if (task != needed || instance.kind != needed)
      throw RenderError(std::string(part_kind_name(kind)) + ": slot " + slot +
                        " not available for this task");
  };
  if (contains(text, "#{NL}")) {
    require_task("#{NL}", TaskKind::TextToCode);
    text = replace_all(std::move(text), "#{NL}", instance.nl_description);
  }
  if (contains(text, "#{CN}")) {
    require_task("#{CN}", TaskKind::TextToCode);
    text = replace_all(std::move(text), "#{CN}", instance.environment.class_name);
  }
  if (contains(text, "#{MV}")) {
    require_task("#{MV}", TaskKind::TextToCode);
    text = replace_all(std::move(text), "#{MV}",
                       join(instance.environment.member_variables, "; "));
  }
  if (contains(text, "#{MF}")) {
    require_task("#{MF}", TaskKind::TextToCode);
    text = replace_all(std::move(text), "#{MF}",
                       join(instance.environment.member_functions, "; "));
  }
  if (contains(text, "#{Code}")) {
    require_task("#{Code}", TaskKind::CodeToCode);
    if (trim_view(instance.source_code).empty())
      throw RenderError(std::string(part_kind_name(kind)) + ": slot #{Code} is empty");
    text = replace_all(std::move(text), "#{Code}", instance.source_code);
  }

  if (size_t left = text.find("#{"); left != std::string::npos) {
    size_t end = text.find('}', left);
    std::string slot = text.substr(left, end == std::string::npos ? 8 : end - left + 1);
    throw RenderError(std::string(part_kind_name(kind)) + ": unfilled slot " + slot);
  }
  return text;
}

std::string PromptBundle::joined() const {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '\n';
    out += parts[i].text;
  }
  return out;
}

std::vector<PromptPartKind> recipe(TaskKind task, PromptLevel level) {
  using K = PromptPartKind;
  if (task == TaskKind::TextToCode) {
    switch (level) {
      case PromptLevel::TaskOnly: return {K::Task};
      case PromptLevel::Detail: return {K::Context, K::Task, K::Processing};
      case PromptLevel::Behaviour: return {K::Context, K::Behaviour, K::Processing};
    }
  } else {
    switch (level) {
      case PromptLevel::TaskOnly: return {K::Task};
      case PromptLevel::Detail: return {K::UpdatedTask, K::Processing};
      case PromptLevel::Behaviour: return {K::Behaviour, K::Processing};
    }
  }
  return {};
}

PromptBundle assemble(const TemplateSet& templates, TaskKind task, PromptVariant variant,
                      const TaskInstance& instance, const BehaviourSpec* behaviour) {
  PromptBundle bundle;
  bundle.task = task;
  bundle.variant = variant;
  bundle.instance_id = instance.id;
  for (PromptPartKind kind : recipe(task, variant.level)) {
    bundle.parts.push_back(
        {kind, render_part(templates, task, kind, instance, behaviour, variant.concise)});
  }
  return bundle;
}

std::string extraction_prompt(ExtractionKind kind, const std::string& code) {
  if (trim_view(code).empty())
    throw RenderError("extraction prompt: empty code payload");
  switch (kind) {
    case ExtractionKind::ApiList: return kApiListPrompt + code;
    case ExtractionKind::ExceptionHandling: return kExceptionPrompt + code;
  }
  throw RenderError("extraction prompt: unknown kind");
}

}  // namespace cgbench
