#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cgbench/corpus.hpp"
#include "cgbench/gateway.hpp"
#include "cgbench/metrics.hpp"
#include "cgbench/prompt_forge.hpp"

namespace cgbench {

struct ExperimentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BackendMode { Live, Replay, Scripted };

const char* backend_mode_name(BackendMode mode);   // "live"/"replay"/"scripted"
BackendMode backend_mode_from_name(std::string_view name);

// Everything one run needs. The generate stage persists prompts, raw
// responses and transcripts under out_dir; score and report stages work from
// those artifacts.
struct ExperimentPlan {
  TaskKind task = TaskKind::TextToCode;
  PromptVariant variant;
  SessionPolicy policy;
  int rounds = 1;

  std::string corpus_path;  // t2c JSONL
  std::string source_path;  // c2c C# lines
  std::string target_path;  // c2c Java lines
  std::size_t sample_n = 0;  // 0 = whole corpus
  std::uint64_t seed = 0;

  // "static" parses the ground truth; "llm" asks the backend; "file" reads
  // precomputed specs (JSONL: id / api_names / uses_exceptions).
  std::string behaviour_source = "static";
  std::string behaviour_file;

  std::string templates_path;  // optional prompt-template overrides

  BackendMode backend = BackendMode::Replay;
  BackendConfig http;        // model + randomness also key replay requests
  std::string fixtures_dir;  // replay source / recording target
  std::string script_path;   // scripted responses
  bool record = false;       // wrap live/scripted backend with a recorder

  std::string out_dir;
  bool overwrite = false;  // allow writing into a non-empty out_dir
  nlohmann::json config_echo = nlohmann::json::object();  // resolved settings
};

// "ChatGPT-task" / "ChatGPT-detail" / "ChatGPT-behaviour", with -C for
// concise, -S for a continuous session, composed as -CS.
std::string variant_label(const PromptVariant& variant, const SessionPolicy& policy);

struct GenerateResult {
  int rounds = 0;
  int prompts_sent = 0;
  int skipped = 0;
  std::string fixture_digest;  // empty when no fixture store was involved
};

// Runs the prompt/response stage: assemble -> send (per session policy) ->
// persist. Per-instance failures are recorded as skips; a replay miss aborts
// the run naming the offending request key.
GenerateResult run_generate(const ExperimentPlan& plan);

struct ScoreOptions {
  BleuConfig bleu;
  CodeBleuWeights weights;
  std::string keywords_path;  // optional override for the weighted n-gram set
  int jobs = 1;
};

struct RoundScore {
  int round_index = 0;
  MetricReport report;
  int skipped = 0;
};

// Scores a generate-stage run directory: extract -> isolate -> normalize ->
// corpus score, per round. Writes metrics.json per round plus score.md /
// score.csv, and returns the per-round reports.
std::vector<RoundScore> run_score(const std::string& run_dir, const ScoreOptions& opts);

// Scores a directory of <name>.cand / <name>.ref files as one corpus.
// Unpaired or unreadable files raise an error listing every offender.
MetricReport score_pairs_dir(const std::string& dir, const ScoreOptions& opts,
                             Language language = Language::Java);

struct Stats {
  double min = 0, max = 0, avg = 0, std = 0;
};

// Sample standard deviation (divisor n-1); std = 0 for a single value.
// Values are accumulated in sorted order, so the result is permutation-
// invariant. Empty input is an error.
Stats summarize_values(std::vector<double> values);

struct StatSummary {
  Stats bleu;
  Stats codebleu;
  int rounds = 0;
};

StatSummary summarize(const std::vector<RoundScore>& rounds);

struct ComparisonRow {
  std::string label;
  double bleu = 0;
  double codebleu = 0;
  std::string bleu_delta;      // empty on the baseline row
  std::string codebleu_delta;  // empty on the baseline row
  bool is_baseline = false;
};

// Adds relative-delta strings against the named baseline row. The baseline
// must be present with positive scores.
std::vector<ComparisonRow> compare(
    const std::vector<std::pair<std::string, MetricReport>>& rows,
    const std::string& baseline_label);

struct ReportOptions {
  std::string baseline_label;  // empty = no delta columns
  std::string out_dir;         // empty = first run directory
};

struct ReportResult {
  std::string markdown_path;
  std::string csv_path;
  std::string summary_path;
};

// Builds comparison and multi-round tables from one or more scored run
// directories. Runs must share a task; runs with the same label pool their
// rounds.
ReportResult run_report(const std::vector<std::string>& run_dirs,
                        const ReportOptions& opts);

// Behaviour-spec extraction as a standalone stage (the `extract` subcommand).
// Returns JSONL text: one {id, api_names, uses_exceptions} row per instance.
std::string extract_behaviour_specs(const std::vector<TaskInstance>& instances,
                                    const std::string& mode,  // "static"/"llm"
                                    ChatBackend* backend, const BackendConfig& http);

}  // namespace cgbench
