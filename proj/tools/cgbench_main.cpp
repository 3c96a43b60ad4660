// cgbench: prompt-variant benchmarking for LLM code generation.
// Subcommands cover the pipeline stages: generate (prompts -> responses),
// score (responses -> metrics), report (metrics -> tables), plus extract
// (behaviour specs), record (fixture capture) and import-concode.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cgbench/corpus.hpp"
#include "cgbench/experiments.hpp"
#include "cgbench/run_config.hpp"
#include "cgbench/strutil.hpp"
#include "cgbench/version.hpp"

using namespace cgbench;

namespace {

// Flag combinations that CLI11 cannot check on its own (usage errors, exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Declared configuration keys shared by generate/record. Flags override
// CGBENCH_* environment variables, which override --config file entries.
void declare_run_keys(RunConfig& rc) {
  rc.declare("task", "t2c");
  rc.declare("variant", "task");
  rc.declare("concise", "false");
  rc.declare("session", "individual");
  rc.declare("session_limit", "20");
  rc.declare("rounds", "1");
  rc.declare("corpus");
  rc.declare("source");
  rc.declare("target");
  rc.declare("sample", "0");
  rc.declare("seed", "0");
  rc.declare("behaviour", "static");
  rc.declare("behaviour_file");
  rc.declare("templates");
  rc.declare("backend", "replay");
  rc.declare("fixtures");
  rc.declare("script");
  rc.declare("record", "false");
  rc.declare("model", "gpt-3.5-turbo");
  rc.declare("endpoint", "https://api.openai.com/v1/chat/completions");
  rc.declare("api_key_env", "OPENAI_API_KEY");
  rc.declare("randomness", "{}");
  rc.declare("max_attempts", "3");
  rc.declare("backoff_ms", "100");
  rc.declare("timeout_sec", "60");
  rc.declare("out");
  rc.declare("force", "false");
}

struct RunFlags {
  std::string config_path;
  std::string task, variant, session, backend, behaviour;
  std::string corpus, source, target, behaviour_file, templates, fixtures, script;
  std::string model, endpoint, api_key_env, randomness, out;
  long long session_limit = -1, rounds = -1, sample = -1, seed = -1;
  long long max_attempts = -1, backoff_ms = -1, timeout_sec = -1;
  bool concise = false, record = false, force = false;
};

// Registers the shared generate/record flags on a subcommand.
void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "key = value config file");
  cmd->add_option("--task", f.task, "generation task")
      ->check(CLI::IsMember({"t2c", "c2c"}));
  cmd->add_option("--variant", f.variant, "guidance level of the prompt")
      ->check(CLI::IsMember({"task", "detail", "behaviour"}));
  cmd->add_flag("--concise", f.concise, "ask for concise output");
  cmd->add_option("--session", f.session, "chat session policy")
      ->check(CLI::IsMember({"individual", "continuous"}));
  cmd->add_option("--session-limit", f.session_limit,
                  "max prompts per continuous session")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--rounds", f.rounds, "repeated runs over the corpus")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--corpus", f.corpus, "t2c corpus (JSONL)");
  cmd->add_option("--source", f.source, "c2c source file (C#, one method per line)");
  cmd->add_option("--target", f.target, "c2c target file (Java, one method per line)");
  cmd->add_option("--sample", f.sample, "sample size (0 = whole corpus)");
  cmd->add_option("--seed", f.seed, "sampling seed");
  cmd->add_option("--behaviour", f.behaviour, "behaviour spec source")
      ->check(CLI::IsMember({"static", "llm", "file"}));
  cmd->add_option("--behaviour-file", f.behaviour_file,
                  "precomputed behaviour specs (JSONL)");
  cmd->add_option("--templates", f.templates, "prompt template overrides");
  cmd->add_option("--fixtures", f.fixtures, "fixture store directory");
  cmd->add_option("--script", f.script, "scripted responses (JSONL)");
  cmd->add_option("--model", f.model, "backend model name");
  cmd->add_option("--endpoint", f.endpoint, "chat-completions endpoint");
  cmd->add_option("--api-key-env", f.api_key_env,
                  "environment variable holding the API key");
  cmd->add_option("--randomness", f.randomness,
                  "JSON object merged into request bodies");
  cmd->add_option("--max-attempts", f.max_attempts, "transport retry budget")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--backoff-ms", f.backoff_ms, "base retry backoff")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--timeout-sec", f.timeout_sec, "per-request timeout")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--force", f.force, "overwrite a non-empty output directory");
}

// Folds parsed flags into the config (flags win over env/file/defaults).
// Subcommands register different subsets of the run flags, so lookups are
// tolerant of absent options.
void apply_run_flags(CLI::App* cmd, const RunFlags& f, RunConfig& rc) {
  rc.load_env();
  auto passed = [&](const char* flag) {
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    return opt && opt->count() > 0;
  };
  if (passed("--config")) rc.load_file(f.config_path);
  auto set_if = [&](const char* flag, const char* key, const std::string& value) {
    if (passed(flag)) rc.set_flag(key, value);
  };
  set_if("--task", "task", f.task);
  set_if("--variant", "variant", f.variant);
  if (passed("--concise")) rc.set_flag("concise", "true");
  set_if("--session", "session", f.session);
  set_if("--session-limit", "session_limit", std::to_string(f.session_limit));
  set_if("--rounds", "rounds", std::to_string(f.rounds));
  set_if("--corpus", "corpus", f.corpus);
  set_if("--source", "source", f.source);
  set_if("--target", "target", f.target);
  set_if("--sample", "sample", std::to_string(f.sample));
  set_if("--seed", "seed", std::to_string(f.seed));
  set_if("--behaviour", "behaviour", f.behaviour);
  set_if("--behaviour-file", "behaviour_file", f.behaviour_file);
  set_if("--templates", "templates", f.templates);
  set_if("--fixtures", "fixtures", f.fixtures);
  set_if("--script", "script", f.script);
  set_if("--model", "model", f.model);
  set_if("--endpoint", "endpoint", f.endpoint);
  set_if("--api-key-env", "api_key_env", f.api_key_env);
  set_if("--randomness", "randomness", f.randomness);
  set_if("--max-attempts", "max_attempts", std::to_string(f.max_attempts));
  set_if("--backoff-ms", "backoff_ms", std::to_string(f.backoff_ms));
  set_if("--timeout-sec", "timeout_sec", std::to_string(f.timeout_sec));
  set_if("--out", "out", f.out);
  if (passed("--force")) rc.set_flag("force", "true");
  set_if("--backend", "backend", f.backend);
  if (passed("--record")) rc.set_flag("record", "true");
}

ExperimentPlan plan_from_config(const RunConfig& rc) {
  ExperimentPlan plan;
  plan.task = task_from_name(rc.get_or("task", "t2c"));
  plan.variant.level = level_from_name(rc.get_or("variant", "task"));
  plan.variant.concise = rc.get_bool("concise", false);
  plan.policy.mode = session_mode_from_name(rc.get_or("session", "individual"));
  plan.policy.max_prompts_per_session =
      static_cast<int>(rc.get_int("session_limit", 20));
  plan.rounds = static_cast<int>(rc.get_int("rounds", 1));
  plan.corpus_path = rc.get_or("corpus", "");
  plan.source_path = rc.get_or("source", "");
  plan.target_path = rc.get_or("target", "");
  plan.sample_n = static_cast<std::size_t>(rc.get_int("sample", 0));
  plan.seed = static_cast<std::uint64_t>(rc.get_int("seed", 0));
  plan.behaviour_source = rc.get_or("behaviour", "static");
  plan.behaviour_file = rc.get_or("behaviour_file", "");
  plan.templates_path = rc.get_or("templates", "");
  plan.backend = backend_mode_from_name(rc.get_or("backend", "replay"));
  plan.fixtures_dir = rc.get_or("fixtures", "");
  plan.script_path = rc.get_or("script", "");
  plan.record = rc.get_bool("record", false);
  plan.http.endpoint = rc.get_or("endpoint", plan.http.endpoint);
  plan.http.model = rc.get_or("model", plan.http.model);
  plan.http.api_key_env = rc.get_or("api_key_env", plan.http.api_key_env);
  try {
    plan.http.randomness = nlohmann::json::parse(rc.get_or("randomness", "{}"));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("--randomness is not valid JSON: ") + e.what());
  }
  if (!plan.http.randomness.is_object())
    throw UsageError("--randomness must be a JSON object");
  plan.http.max_attempts = static_cast<int>(rc.get_int("max_attempts", 3));
  plan.http.backoff_ms = static_cast<int>(rc.get_int("backoff_ms", 100));
  plan.http.timeout_sec = static_cast<int>(rc.get_int("timeout_sec", 60));
  plan.out_dir = rc.get_or("out", "");
  plan.overwrite = rc.get_bool("force", false);
  plan.config_echo = rc.echo();
  return plan;
}

// Usage-level checks shared by generate/record (CLI11 cannot see across flags).
void check_plan_usage(const ExperimentPlan& plan) {
  if (plan.out_dir.empty()) throw UsageError("--out is required");
  if (plan.task == TaskKind::TextToCode) {
    if (plan.corpus_path.empty()) throw UsageError("--task t2c requires --corpus");
  } else if (plan.source_path.empty() || plan.target_path.empty()) {
    throw UsageError("--task c2c requires --source and --target");
  }
  if (plan.backend == BackendMode::Replay && plan.fixtures_dir.empty())
    throw UsageError("--backend replay requires --fixtures");
  if (plan.backend == BackendMode::Scripted && plan.script_path.empty())
    throw UsageError("--backend scripted requires --script");
  if (plan.backend == BackendMode::Replay && plan.record)
    throw UsageError("recording needs --backend live or scripted");
  if (plan.record && plan.fixtures_dir.empty())
    throw UsageError("recording requires --fixtures");
  if (plan.behaviour_source == "file" && plan.behaviour_file.empty())
    throw UsageError("--behaviour file requires --behaviour-file");
}

int cmd_generate(CLI::App* cmd, const RunFlags& flags, bool force_record) {
  RunConfig rc;
  declare_run_keys(rc);
  apply_run_flags(cmd, flags, rc);
  if (force_record) {
    rc.set_flag("record", "true");
    // Recording replays nothing; default to a live backend unless a script
    // was supplied.
    if (!rc.has("backend") || rc.get_or("backend", "") == "replay")
      rc.set_flag("backend", rc.get_or("script", "").empty() ? "live" : "scripted");
  }
  ExperimentPlan plan = plan_from_config(rc);
  check_plan_usage(plan);
  GenerateResult result = run_generate(plan);
  std::cout << "generated " << result.prompts_sent << " responses over "
            << result.rounds << " round(s), " << result.skipped << " skipped\n";
  if (!result.fixture_digest.empty())
    std::cout << "fixture digest: " << result.fixture_digest << "\n";
  std::cout << "artifacts: " << plan.out_dir << "\n";
  return 0;
}

ScoreOptions score_options_from_flags(const std::string& weights_csv,
                                      const std::string& brevity, bool smoothing,
                                      long long max_n, const std::string& keywords,
                                      long long jobs) {
  ScoreOptions opts;
  if (!weights_csv.empty()) {
    auto parts = split(weights_csv, ',');
    if (parts.size() != 4) throw UsageError("--weights needs four comma-separated values");
    double w[4];
    try {
      for (int i = 0; i < 4; ++i) w[i] = std::stod(trim(parts[i]));
    } catch (const std::exception&) {
      throw UsageError("--weights values must be numbers");
    }
    opts.weights = {w[0], w[1], w[2], w[3]};
  }
  if (brevity == "standard") opts.bleu.brevity = BrevityMode::Standard;
  else if (!brevity.empty() && brevity != "paper")
    throw UsageError("--brevity-mode must be paper or standard");
  opts.bleu.smoothing = smoothing;
  if (max_n > 0) opts.bleu.max_n = static_cast<int>(max_n);
  opts.keywords_path = keywords;
  opts.jobs = static_cast<int>(jobs);
  return opts;
}

void print_report_line(const MetricReport& r) {
  std::cout << "pairs " << r.n_pairs << "  BLEU " << format_score(r.bleu)
            << "  CodeBLEU " << format_score(r.codebleu) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kToolName) + " " + kToolVersion +
               ": prompt-variant benchmarking for LLM code generation"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "run prompts against a backend");
  RunFlags gen_flags;
  add_run_flags(gen, gen_flags);
  gen->add_option("--backend", gen_flags.backend, "backend mode")
      ->check(CLI::IsMember({"live", "replay", "scripted"}));
  gen->add_flag("--record", gen_flags.record, "record fixtures while running");

  // record: generate with recording forced on
  auto* rec = app.add_subcommand("record", "capture backend fixtures for later replay");
  RunFlags rec_flags;
  add_run_flags(rec, rec_flags);
  rec->add_option("--backend", rec_flags.backend, "backend mode (live or scripted)")
      ->check(CLI::IsMember({"live", "scripted"}));

  // score
  auto* sco = app.add_subcommand("score", "score generated responses");
  std::string sco_run, sco_pairs, sco_weights, sco_brevity, sco_keywords, sco_lang = "java";
  bool sco_smoothing = false;
  long long sco_max_n = 0, sco_jobs = 1;
  sco->add_option("--run", sco_run, "run directory from `generate`");
  sco->add_option("--pairs", sco_pairs, "directory of <name>.cand/<name>.ref files");
  sco->add_option("--weights", sco_weights, "codebleu weights: ngram,weighted,tree,dataflow");
  sco->add_option("--brevity-mode", sco_brevity, "paper | standard")
      ->check(CLI::IsMember({"paper", "standard"}));
  sco->add_flag("--smoothing", sco_smoothing, "add-one smoothing on n >= 2");
  sco->add_option("--max-n", sco_max_n, "max n-gram order")->check(CLI::PositiveNumber);
  sco->add_option("--keywords", sco_keywords, "keyword list for weighted n-grams");
  sco->add_option("--lang", sco_lang, "language for --pairs mode")
      ->check(CLI::IsMember({"java", "csharp"}));
  sco->add_option("--jobs", sco_jobs, "parse workers")->check(CLI::PositiveNumber);

  // report
  auto* rep = app.add_subcommand("report", "build comparison / multi-round tables");
  std::vector<std::string> rep_runs;
  std::string rep_baseline, rep_out;
  rep->add_option("runs", rep_runs, "scored run directories")->required();
  rep->add_option("--baseline", rep_baseline, "label receiving no delta column");
  rep->add_option("--out", rep_out, "output directory (default: first run)");

  // extract
  auto* ext = app.add_subcommand("extract", "extract behaviour specs from ground truth");
  RunFlags ext_flags;
  std::string ext_mode = "static", ext_out;
  ext->add_option("--config", ext_flags.config_path, "key = value config file");
  ext->add_option("--task", ext_flags.task, "generation task")
      ->check(CLI::IsMember({"t2c", "c2c"}));
  ext->add_option("--corpus", ext_flags.corpus, "t2c corpus (JSONL)");
  ext->add_option("--source", ext_flags.source, "c2c source file");
  ext->add_option("--target", ext_flags.target, "c2c target file");
  ext->add_option("--sample", ext_flags.sample, "sample size (0 = all)");
  ext->add_option("--seed", ext_flags.seed, "sampling seed");
  ext->add_option("--mode", ext_mode, "static | llm")
      ->check(CLI::IsMember({"static", "llm"}));
  ext->add_option("--backend", ext_flags.backend, "backend mode for --mode llm")
      ->check(CLI::IsMember({"live", "replay", "scripted"}));
  ext->add_option("--fixtures", ext_flags.fixtures, "fixture store directory");
  ext->add_option("--script", ext_flags.script, "scripted responses (JSONL)");
  ext->add_option("--model", ext_flags.model, "backend model name");
  ext->add_option("--endpoint", ext_flags.endpoint, "chat-completions endpoint");
  ext->add_option("--api-key-env", ext_flags.api_key_env, "API key variable");
  ext->add_option("--randomness", ext_flags.randomness, "request randomness JSON");
  ext->add_option("--out", ext_out, "output JSONL path")->required();

  // import-concode
  auto* imp = app.add_subcommand("import-concode", "convert raw records to the corpus format");
  std::string imp_in, imp_out;
  ConcodeImportOptions imp_opts;
  imp->add_option("--in", imp_in, "raw JSONL input")->required();
  imp->add_option("--out", imp_out, "canonical corpus output")->required();
  imp->add_option("--default-class-name", imp_opts.default_class_name,
                  "class name when the record has none");
  imp->add_option("--field-sep", imp_opts.field_sep, "description/environment separator");
  imp->add_option("--elem-sep", imp_opts.elem_sep, "environment entry separator");
  imp->add_option("--id-prefix", imp_opts.id_prefix, "id prefix for unnamed records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the diagnostic
    return 2;
  }

  try {
    if (app.got_subcommand(gen)) return cmd_generate(gen, gen_flags, false);
    if (app.got_subcommand(rec)) return cmd_generate(rec, rec_flags, true);

    if (app.got_subcommand(sco)) {
      if (sco_run.empty() == sco_pairs.empty())
        throw UsageError("score needs exactly one of --run or --pairs");
      ScoreOptions opts = score_options_from_flags(sco_weights, sco_brevity, sco_smoothing,
                                                   sco_max_n, sco_keywords, sco_jobs);
      if (!sco_run.empty()) {
        auto rounds = run_score(sco_run, opts);
        for (const auto& r : rounds) {
          std::cout << "round " << r.round_index << ": ";
          print_report_line(r.report);
        }
        std::cout << "wrote " << sco_run << "/score.md and score.csv\n";
      } else {
        MetricReport report =
            score_pairs_dir(sco_pairs, opts, language_from_name(sco_lang));
        print_report_line(report);
      }
      return 0;
    }

    if (app.got_subcommand(rep)) {
      ReportOptions opts;
      opts.baseline_label = rep_baseline;
      opts.out_dir = rep_out;
      ReportResult result = run_report(rep_runs, opts);
      std::cout << "wrote " << result.markdown_path << ", " << result.csv_path << ", "
                << result.summary_path << "\n";
      return 0;
    }

    if (app.got_subcommand(ext)) {
      RunConfig rc;
      declare_run_keys(rc);
      apply_run_flags(ext, ext_flags, rc);
      ExperimentPlan plan = plan_from_config(rc);
      if (plan.task == TaskKind::TextToCode && plan.corpus_path.empty())
        throw UsageError("--task t2c requires --corpus");
      if (plan.task == TaskKind::CodeToCode &&
          (plan.source_path.empty() || plan.target_path.empty()))
        throw UsageError("--task c2c requires --source and --target");

      std::vector<TaskInstance> insts =
          plan.task == TaskKind::TextToCode
              ? load_t2c(plan.corpus_path)
              : load_c2c(plan.source_path, plan.target_path);
      if (plan.sample_n > 0) insts = sample(insts, plan.sample_n, plan.seed);

      std::unique_ptr<FixtureStore> store;
      std::unique_ptr<ChatBackend> backend;
      if (ext_mode == "llm") {
        switch (plan.backend) {
          case BackendMode::Live:
            backend = std::make_unique<HttpBackend>(plan.http);
            break;
          case BackendMode::Scripted:
            if (plan.script_path.empty())
              throw UsageError("--backend scripted requires --script");
            backend = std::make_unique<ScriptedBackend>(
                ScriptedBackend::from_file(plan.script_path));
            break;
          case BackendMode::Replay:
            if (plan.fixtures_dir.empty())
              throw UsageError("--backend replay requires --fixtures");
            store = std::make_unique<FixtureStore>(plan.fixtures_dir);
            backend = std::make_unique<ReplayBackend>(*store);
            break;
        }
      }
      std::string jsonl =
          extract_behaviour_specs(insts, ext_mode, backend.get(), plan.http);
      std::ofstream out_file(ext_out, std::ios::binary);
      if (!out_file) throw ExperimentError("cannot write file: " + ext_out);
      out_file << jsonl;
      std::cout << "wrote behaviour specs for " << insts.size() << " instance(s) to "
                << ext_out << "\n";
      return 0;
    }

    if (app.got_subcommand(imp)) {
      std::vector<TaskInstance> insts = import_concode(imp_in, imp_opts);
      save_t2c(insts, imp_out);
      std::cout << "imported " << insts.size() << " instance(s) to " << imp_out << "\n";
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
