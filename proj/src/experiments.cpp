#include "cgbench/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include "cgbench/strutil.hpp"
#include "cgbench/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace cgbench {

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExperimentError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExperimentError("cannot write file: " + path.string());
  out << content;
  if (!out) throw ExperimentError("write failed: " + path.string());
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ExperimentError(where + ": " + e.what());
  }
}

std::vector<json> read_jsonl(const std::string& path) {
  std::string text = read_text(path);
  std::vector<json> rows;
  size_t start = 0;
  int lineno = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++lineno;
    std::string line = text.substr(start, end - start);
    if (!trim(line).empty())
      rows.push_back(parse_json(line, path + ":" + std::to_string(lineno)));
    start = end + 1;
  }
  return rows;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

json report_to_json(const MetricReport& r) {
  return json{{"bleu", r.bleu},
              {"codebleu", r.codebleu},
              {"ngram", r.subs.ngram},
              {"weighted_ngram", r.subs.weighted_ngram},
              {"ast_match", r.subs.ast},
              {"dataflow_match", r.subs.dataflow},
              {"n_pairs", r.n_pairs}};
}

MetricReport report_from_json(const json& j, const std::string& where) {
  MetricReport r;
  try {
    r.bleu = j.at("bleu").get<double>();
    r.codebleu = j.at("codebleu").get<double>();
    r.subs.ngram = j.at("ngram").get<double>();
    r.subs.weighted_ngram = j.at("weighted_ngram").get<double>();
    r.subs.ast = j.at("ast_match").get<double>();
    r.subs.dataflow = j.at("dataflow_match").get<double>();
    r.n_pairs = j.at("n_pairs").get<int>();
  } catch (const json::exception& e) {
    throw ExperimentError(where + ": bad report: " + e.what());
  }
  return r;
}

fs::path round_dir(const std::string& run_dir, int round) {
  return fs::path(run_dir) / "rounds" / ("round_" + std::to_string(round));
}

// ---- generate stage ------------------------------------------------------

std::vector<TaskInstance> load_plan_corpus(const ExperimentPlan& plan) {
  std::vector<TaskInstance> insts;
  if (plan.task == TaskKind::TextToCode) {
    if (plan.corpus_path.empty())
      throw ExperimentError("text-to-code runs need a corpus path");
    insts = load_t2c(plan.corpus_path);
  } else {
    if (plan.source_path.empty() || plan.target_path.empty())
      throw ExperimentError("code-to-code runs need source and target paths");
    insts = load_c2c(plan.source_path, plan.target_path);
  }
  if (insts.empty()) throw ExperimentError("empty corpus");
  if (plan.sample_n > 0) insts = sample(insts, plan.sample_n, plan.seed);
  return insts;
}

struct BehaviourTable {
  std::map<std::string, BehaviourSpec> specs;
  std::map<std::string, std::string> errors;  // id -> reason
};

BehaviourTable behaviour_from_file(const std::string& path) {
  BehaviourTable table;
  for (const auto& row : read_jsonl(path)) {
    std::string id = row.value("id", "");
    if (id.empty()) throw ExperimentError(path + ": behaviour row without id");
    if (row.contains("error")) {
      table.errors[id] = row["error"].get<std::string>();
      continue;
    }
    BehaviourSpec spec;
    try {
      for (const auto& name : row.at("api_names")) spec.api_names.push_back(name.get<std::string>());
      spec.uses_exceptions = row.at("uses_exceptions").get<bool>();
    } catch (const json::exception& e) {
      throw ExperimentError(path + ": bad behaviour row for '" + id + "': " + e.what());
    }
    table.specs[id] = std::move(spec);
  }
  return table;
}

BehaviourTable build_behaviour(const ExperimentPlan& plan,
                               const std::vector<TaskInstance>& insts,
                               ChatBackend& backend) {
  BehaviourTable table;
  if (plan.behaviour_source == "file") {
    if (plan.behaviour_file.empty())
      throw ExperimentError("behaviour source 'file' needs a behaviour file path");
    return behaviour_from_file(plan.behaviour_file);
  }
  for (const auto& inst : insts) {
    try {
      if (plan.behaviour_source == "static") {
        CodeUnit unit = parse_unit(Language::Java, inst.ground_truth);
        table.specs[inst.id] = extract_behaviour(unit);
      } else if (plan.behaviour_source == "llm") {
        table.specs[inst.id] =
            extract_behaviour_via_llm(backend, plan.http, inst.ground_truth, 0, inst.id);
      } else {
        throw ExperimentError("unknown behaviour source '" + plan.behaviour_source + "'");
      }
    } catch (const ReplayMissError& e) {
      throw ExperimentError("behaviour extraction for '" + inst.id + "': " + e.what());
    } catch (const ExperimentError&) {
      throw;
    } catch (const std::exception& e) {
      table.errors[inst.id] = e.what();
    }
  }
  return table;
}

struct BackendBundle {
  std::unique_ptr<FixtureStore> store;
  std::unique_ptr<ChatBackend> inner;
  std::unique_ptr<ChatBackend> recorder;
  ChatBackend* active = nullptr;
};

BackendBundle build_backend(const ExperimentPlan& plan) {
  BackendBundle b;
  switch (plan.backend) {
    case BackendMode::Live:
      b.inner = std::make_unique<HttpBackend>(plan.http);
      break;
    case BackendMode::Scripted:
      if (plan.script_path.empty())
        throw ExperimentError("scripted backend needs a script path");
      b.inner = std::make_unique<ScriptedBackend>(ScriptedBackend::from_file(plan.script_path));
      break;
    case BackendMode::Replay:
      if (plan.fixtures_dir.empty())
        throw ExperimentError("replay backend needs a fixtures directory");
      if (plan.record)
        throw ExperimentError("recording requires a live or scripted backend");
      b.store = std::make_unique<FixtureStore>(plan.fixtures_dir);
      b.inner = std::make_unique<ReplayBackend>(*b.store);
      break;
  }
  b.active = b.inner.get();
  if (plan.record && plan.backend != BackendMode::Replay) {
    if (plan.fixtures_dir.empty())
      throw ExperimentError("recording needs a fixtures directory");
    b.store = std::make_unique<FixtureStore>(plan.fixtures_dir, /*create=*/true);
    b.recorder = std::make_unique<RecordingBackend>(*b.inner, *b.store);
    b.active = b.recorder.get();
  }
  return b;
}

void prepare_out_dir(const ExperimentPlan& plan) {
  fs::path out(plan.out_dir);
  if (fs::exists(out) && !fs::is_empty(out)) {
    if (!plan.overwrite)
      throw ExperimentError("output directory is not empty: " + plan.out_dir +
                            " (pass --force to overwrite)");
    fs::remove_all(out);
  }
  fs::create_directories(out);
}

json plan_header(const ExperimentPlan& plan, const std::vector<TaskInstance>& insts,
                 const std::string& digest, int skipped) {
  json run;
  run["tool"] = kToolName;
  run["version"] = kToolVersion;
  run["task"] = task_name(plan.task);
  run["label"] = variant_label(plan.variant, plan.policy);
  run["variant"] = {{"level", level_name(plan.variant.level)},
                    {"concise", plan.variant.concise}};
  run["policy"] = {{"mode", session_mode_name(plan.policy.mode)},
                   {"max_prompts_per_session", plan.policy.max_prompts_per_session}};
  run["rounds"] = plan.rounds;
  run["seed"] = plan.seed;
  run["sample"] = plan.sample_n;
  run["instances"] = insts.size();
  run["skipped_total"] = skipped;
  if (plan.task == TaskKind::TextToCode)
    run["corpus"] = {{"path", plan.corpus_path}};
  else
    run["corpus"] = {{"source", plan.source_path}, {"target", plan.target_path}};
  run["behaviour"] = plan.behaviour_source;
  if (!plan.behaviour_file.empty()) run["behaviour_file"] = plan.behaviour_file;
  if (!plan.templates_path.empty()) run["templates"] = plan.templates_path;
  run["backend"] = backend_mode_name(plan.backend);
  run["model"] = plan.http.model;
  run["randomness"] = plan.http.randomness;
  run["record"] = plan.record;
  run["fixtures_digest"] = digest;
  run["config"] = plan.config_echo;
  return run;
}

// ---- score stage ---------------------------------------------------------

struct PreparedPair {
  bool ok = false;
  std::string reason;
  bool ambiguous = false;
  int discarded = 0;
  NormalizedCode cand;
  NormalizedCode ref;
};

PreparedPair prepare_pair(TaskKind task, const std::string& response,
                          const std::string& reference) {
  PreparedPair p;
  try {
    std::string code = extract_code_block(response);
    if (task == TaskKind::TextToCode) {
      CodeUnit raw = parse_unit(Language::Java, code);
      IsolatedMethod iso = isolate_method(raw);
      p.ambiguous = iso.ambiguous;
      p.discarded = iso.discarded;
      CodeUnit method = parse_unit(Language::Java, iso.text);
      p.cand = normalize(method, NormalizeMode::TextToCode);
      CodeUnit ref_unit = parse_unit(Language::Java, reference);
      p.ref = normalize(ref_unit, NormalizeMode::TextToCode);
    } else {
      CodeUnit raw = parse_unit(Language::Java, code);
      p.cand = normalize(raw, NormalizeMode::CodeToCode);
      CodeUnit ref_unit = parse_unit(Language::Java, reference);
      p.ref = normalize(ref_unit, NormalizeMode::CodeToCode);
    }
    p.ok = true;
  } catch (const std::exception& e) {
    p.reason = e.what();
  }
  return p;
}

// Parses/normalizes pairs, possibly across threads; output order is fixed by
// index so scoring stays deterministic regardless of the job count.
std::vector<PreparedPair> prepare_all(TaskKind task,
                                      const std::vector<std::pair<std::string, std::string>>& items,
                                      int jobs) {
  std::vector<PreparedPair> out(items.size());
  if (jobs <= 1 || items.size() < 2) {
    for (size_t i = 0; i < items.size(); ++i)
      out[i] = prepare_pair(task, items[i].first, items[i].second);
    return out;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < items.size(); i = next.fetch_add(1))
      out[i] = prepare_pair(task, items[i].first, items[i].second);
  };
  size_t n_threads = std::min<size_t>(static_cast<size_t>(jobs), items.size());
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

struct RunMeta {
  TaskKind task = TaskKind::TextToCode;
  std::string label;
  int rounds = 0;
  json raw;
};

RunMeta load_run_meta(const std::string& run_dir) {
  fs::path path = fs::path(run_dir) / "run.json";
  json j = parse_json(read_text(path.string()), path.string());
  RunMeta meta;
  try {
    meta.task = task_from_name(j.at("task").get<std::string>());
    meta.label = j.at("label").get<std::string>();
    meta.rounds = j.at("rounds").get<int>();
  } catch (const std::exception& e) {
    throw ExperimentError(path.string() + ": not a run manifest: " + e.what());
  }
  if (meta.rounds < 1)
    throw ExperimentError(path.string() + ": run has no rounds");
  meta.raw = std::move(j);
  return meta;
}

json scoring_echo(const ScoreOptions& opts) {
  return json{{"max_n", opts.bleu.max_n},
              {"brevity", opts.bleu.brevity == BrevityMode::PaperRatio ? "paper" : "standard"},
              {"smoothing", opts.bleu.smoothing},
              {"weights",
               {opts.weights.ngram, opts.weights.weighted_ngram, opts.weights.ast,
                opts.weights.dataflow}},
              {"keywords", opts.keywords_path.empty() ? "builtin" : opts.keywords_path}};
}

std::string score_markdown(const RunMeta& meta, const std::vector<RoundScore>& rounds) {
  std::ostringstream md;
  md << "# scores: " << meta.label << "\n\n";
  md << "task: " << task_name(meta.task) << "\n\n";
  md << "| round | pairs | skipped | BLEU | CodeBLEU | ngram | weighted | tree | dataflow |\n";
  md << "|------:|------:|--------:|-----:|---------:|------:|---------:|-----:|---------:|\n";
  for (const auto& r : rounds) {
    md << "| " << r.round_index << " | " << r.report.n_pairs << " | " << r.skipped << " | "
       << format_score(r.report.bleu) << " | " << format_score(r.report.codebleu) << " | "
       << fixed4(r.report.subs.ngram) << " | " << fixed4(r.report.subs.weighted_ngram)
       << " | " << fixed4(r.report.subs.ast) << " | " << fixed4(r.report.subs.dataflow)
       << " |\n";
  }
  md << "\nskips are listed per round in rounds/*/metrics.json\n";
  return md.str();
}

std::string score_csv(const std::vector<RoundScore>& rounds) {
  std::ostringstream csv;
  csv << "round,pairs,skipped,bleu,codebleu,ngram,weighted_ngram,ast_match,dataflow_match\n";
  for (const auto& r : rounds) {
    csv << r.round_index << ',' << r.report.n_pairs << ',' << r.skipped << ','
        << fixed6(r.report.bleu) << ',' << fixed6(r.report.codebleu) << ','
        << fixed6(r.report.subs.ngram) << ',' << fixed6(r.report.subs.weighted_ngram) << ','
        << fixed6(r.report.subs.ast) << ',' << fixed6(r.report.subs.dataflow) << '\n';
  }
  return csv.str();
}

}  // namespace

const char* backend_mode_name(BackendMode mode) {
  switch (mode) {
    case BackendMode::Live: return "live";
    case BackendMode::Replay: return "replay";
    case BackendMode::Scripted: return "scripted";
  }
  return "replay";
}

BackendMode backend_mode_from_name(std::string_view name) {
  std::string n = to_lower(std::string(name));
  if (n == "live") return BackendMode::Live;
  if (n == "replay") return BackendMode::Replay;
  if (n == "scripted") return BackendMode::Scripted;
  throw ExperimentError("unknown backend mode '" + n + "' (live/replay/scripted)");
}

std::string variant_label(const PromptVariant& variant, const SessionPolicy& policy) {
  std::string label = std::string("ChatGPT-") + level_name(variant.level);
  std::string suffix;
  if (variant.concise) suffix += 'C';
  if (policy.mode == SessionMode::Continuous) suffix += 'S';
  if (!suffix.empty()) label += "-" + suffix;
  return label;
}

GenerateResult run_generate(const ExperimentPlan& plan) {
  if (plan.rounds < 1) throw ExperimentError("rounds must be >= 1");
  if (plan.out_dir.empty()) throw ExperimentError("generate needs an output directory");

  std::vector<TaskInstance> insts = load_plan_corpus(plan);
  TemplateSet templates = TemplateSet::defaults();
  if (!plan.templates_path.empty()) templates.apply_overrides_file(plan.templates_path);

  BackendBundle backend = build_backend(plan);

  BehaviourTable behaviour;
  if (plan.variant.level == PromptLevel::Behaviour)
    behaviour = build_behaviour(plan, insts, *backend.active);

  prepare_out_dir(plan);

  GenerateResult result;
  result.rounds = plan.rounds;

  for (int r = 0; r < plan.rounds; ++r) {
    SessionManager sessions(plan.policy, "r" + std::to_string(r));
    std::ostringstream rows;

    for (const auto& inst : insts) {
      json row;
      row["id"] = inst.id;
      row["reference"] = inst.ground_truth;
      if (plan.task == TaskKind::CodeToCode) row["source"] = inst.source_code;
      row["session_id"] = "";
      row["prompt"] = "";
      row["response"] = "";
      row["skipped"] = false;
      row["skip_reason"] = "";

      auto skip = [&](const std::string& reason) {
        row["skipped"] = true;
        row["skip_reason"] = reason;
        ++result.skipped;
      };

      const BehaviourSpec* spec = nullptr;
      if (plan.variant.level == PromptLevel::Behaviour) {
        auto it = behaviour.specs.find(inst.id);
        if (it == behaviour.specs.end()) {
          auto err = behaviour.errors.find(inst.id);
          skip("behaviour spec unavailable" +
               (err == behaviour.errors.end() ? std::string() : ": " + err->second));
          rows << row.dump() << '\n';
          continue;
        }
        spec = &it->second;
      }

      std::string prompt;
      try {
        PromptBundle bundle = assemble(templates, plan.task, plan.variant, inst, spec);
        prompt = bundle.joined();
      } catch (const RenderError& e) {
        skip(std::string("prompt: ") + e.what());
        rows << row.dump() << '\n';
        continue;
      }

      const auto& history = sessions.begin_prompt(prompt);
      RequestInfo req;
      req.model = plan.http.model;
      req.history = history;
      req.randomness = plan.http.randomness;
      req.round_index = r;
      req.instance_hint = inst.id;

      std::string response;
      try {
        response = backend.active->complete(req);
      } catch (const ReplayMissError& e) {
        throw ExperimentError("instance '" + inst.id + "' round " + std::to_string(r) +
                              ": " + e.what());
      } catch (const IntegrityError& e) {
        throw ExperimentError(e.what());
      } catch (const GatewayError& e) {
        sessions.abort_prompt();
        skip(std::string("backend: ") + e.what());
        rows << row.dump() << '\n';
        continue;
      }
      sessions.commit_response(response);
      ++result.prompts_sent;

      row["session_id"] = sessions.current_session_id();
      row["prompt"] = prompt;
      row["response"] = response;
      rows << row.dump() << '\n';
    }

    fs::path rdir = round_dir(plan.out_dir, r);
    fs::create_directories(rdir);
    write_text(rdir / "instances.jsonl", rows.str());

    std::ostringstream tx;
    for (const auto& t : sessions.transcripts()) {
      json msgs = json::array();
      for (const auto& m : t.messages) msgs.push_back({{"role", m.role}, {"text", m.text}});
      tx << json{{"session_id", t.session_id},
                 {"prompt_count", t.prompt_count},
                 {"messages", std::move(msgs)}}
                .dump()
         << '\n';
    }
    write_text(rdir / "transcripts.jsonl", tx.str());
  }

  if (backend.store) result.fixture_digest = backend.store->digest();
  json run = plan_header(plan, insts, result.fixture_digest, result.skipped);
  write_text(fs::path(plan.out_dir) / "run.json", run.dump(2) + "\n");
  return result;
}

std::vector<RoundScore> run_score(const std::string& run_dir, const ScoreOptions& opts) {
  RunMeta meta = load_run_meta(run_dir);

  std::unordered_set<std::string> custom_keywords;
  TokenWeights custom_weights;
  const TokenWeights* weights_ptr = nullptr;
  if (!opts.keywords_path.empty()) {
    std::istringstream in(read_text(opts.keywords_path));
    std::string line;
    while (std::getline(in, line)) {
      std::string word = trim(line);
      if (!word.empty() && word[0] != '#') custom_keywords.insert(word);
    }
    if (custom_keywords.empty())
      throw ExperimentError("keyword file has no entries: " + opts.keywords_path);
    custom_weights.keyword_set = &custom_keywords;
    weights_ptr = &custom_weights;
  }

  std::vector<RoundScore> scores;
  for (int r = 0; r < meta.rounds; ++r) {
    fs::path rdir = round_dir(run_dir, r);
    std::vector<json> rows = read_jsonl((rdir / "instances.jsonl").string());

    std::vector<std::pair<std::string, std::string>> items;  // response, reference
    std::vector<size_t> item_row;                            // items index -> rows index
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].value("skipped", false)) continue;
      items.emplace_back(rows[i].value("response", ""), rows[i].value("reference", ""));
      item_row.push_back(i);
    }
    std::vector<PreparedPair> prepared = prepare_all(meta.task, items, opts.jobs);

    CorpusScorer scorer(opts.bleu, opts.weights, weights_ptr);
    json pairs = json::array();
    json skipped = json::array();
    size_t item_idx = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
      const std::string id = rows[i].value("id", "");
      if (rows[i].value("skipped", false)) {
        skipped.push_back({{"id", id},
                           {"reason", "generate: " + rows[i].value("skip_reason", "")}});
        continue;
      }
      PreparedPair& p = prepared[item_idx++];
      if (!p.ok) {
        skipped.push_back({{"id", id}, {"reason", p.reason}});
        continue;
      }
      PairBreakdown pair = scorer.add(p.cand.unit, p.ref.unit);
      pairs.push_back({{"id", id},
                       {"bleu", pair.bleu},
                       {"codebleu", pair.codebleu},
                       {"ngram", pair.subs.ngram},
                       {"weighted_ngram", pair.subs.weighted_ngram},
                       {"ast_match", pair.subs.ast},
                       {"dataflow_match", pair.subs.dataflow},
                       {"ambiguous", p.ambiguous},
                       {"discarded_methods", p.discarded},
                       {"candidate", p.cand.text},
                       {"reference", p.ref.text}});
    }

    RoundScore rs;
    rs.round_index = r;
    rs.skipped = static_cast<int>(skipped.size());
    if (pairs.empty())
      throw ExperimentError("round " + std::to_string(r) + ": no scorable pairs");
    rs.report = scorer.finish();
    scores.push_back(rs);

    json metrics;
    metrics["round"] = r;
    metrics["scoring"] = scoring_echo(opts);
    metrics["report"] = report_to_json(rs.report);
    metrics["pairs"] = std::move(pairs);
    metrics["skipped"] = std::move(skipped);
    write_text(rdir / "metrics.json", metrics.dump(2) + "\n");
  }

  write_text(fs::path(run_dir) / "score.md", score_markdown(meta, scores));
  write_text(fs::path(run_dir) / "score.csv", score_csv(scores));
  return scores;
}

MetricReport score_pairs_dir(const std::string& dir, const ScoreOptions& opts,
                             Language language) {
  if (!fs::is_directory(dir)) throw ExperimentError("not a directory: " + dir);
  std::set<std::string> cands, refs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (ends_with(name, ".cand")) cands.insert(name.substr(0, name.size() - 5));
    else if (ends_with(name, ".ref")) refs.insert(name.substr(0, name.size() - 4));
  }
  std::vector<std::string> offenders;
  for (const auto& c : cands)
    if (!refs.count(c)) offenders.push_back(c + ".cand (no matching .ref)");
  for (const auto& r : refs)
    if (!cands.count(r)) offenders.push_back(r + ".ref (no matching .cand)");
  if (!offenders.empty())
    throw ExperimentError("unpaired files in " + dir + ": " + join(offenders, ", "));
  if (cands.empty())
    throw ExperimentError("no candidate/reference pairs in " + dir);

  CorpusScorer scorer(opts.bleu, opts.weights);
  for (const auto& base : cands) {
    std::string cand_path = (fs::path(dir) / (base + ".cand")).string();
    std::string ref_path = (fs::path(dir) / (base + ".ref")).string();
    try {
      CodeUnit cand = parse_unit(language, read_text(cand_path));
      CodeUnit ref = parse_unit(language, read_text(ref_path));
      scorer.add(cand, ref);
    } catch (const ExperimentError&) {
      throw;
    } catch (const std::exception& e) {
      throw ExperimentError("pair '" + base + "': " + e.what());
    }
  }
  return scorer.finish();
}

Stats summarize_values(std::vector<double> values) {
  if (values.empty()) throw ExperimentError("summarize: no values");
  std::sort(values.begin(), values.end());
  Stats s;
  s.min = values.front();
  s.max = values.back();
  double sum = 0;
  for (double v : values) sum += v;
  s.avg = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0;
    for (double v : values) sq += (v - s.avg) * (v - s.avg);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

StatSummary summarize(const std::vector<RoundScore>& rounds) {
  std::vector<double> bleu, codebleu;
  for (const auto& r : rounds) {
    bleu.push_back(r.report.bleu);
    codebleu.push_back(r.report.codebleu);
  }
  StatSummary s;
  s.bleu = summarize_values(bleu);
  s.codebleu = summarize_values(codebleu);
  s.rounds = static_cast<int>(rounds.size());
  return s;
}

std::vector<ComparisonRow> compare(
    const std::vector<std::pair<std::string, MetricReport>>& rows,
    const std::string& baseline_label) {
  const MetricReport* base = nullptr;
  for (const auto& [label, report] : rows)
    if (label == baseline_label) {
      base = &report;
      break;
    }
  if (!base) throw ExperimentError("baseline label not found: " + baseline_label);
  if (base->bleu <= 0 || base->codebleu <= 0)
    throw ExperimentError("baseline scores must be positive to compute deltas");

  std::vector<ComparisonRow> out;
  for (const auto& [label, report] : rows) {
    ComparisonRow row;
    row.label = label;
    row.bleu = report.bleu;
    row.codebleu = report.codebleu;
    row.is_baseline = (label == baseline_label);
    if (!row.is_baseline) {
      row.bleu_delta = relative_delta(report.bleu, base->bleu);
      row.codebleu_delta = relative_delta(report.codebleu, base->codebleu);
    }
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

struct LoadedRun {
  std::string dir;
  RunMeta meta;
  std::vector<RoundScore> rounds;
};

LoadedRun load_scored_run(const std::string& dir) {
  LoadedRun run;
  run.dir = dir;
  run.meta = load_run_meta(dir);
  for (int r = 0; r < run.meta.rounds; ++r) {
    fs::path mpath = round_dir(dir, r) / "metrics.json";
    if (!fs::exists(mpath))
      throw ExperimentError(dir + ": round " + std::to_string(r) +
                            " has no metrics (run the score stage first)");
    json m = parse_json(read_text(mpath.string()), mpath.string());
    RoundScore rs;
    rs.round_index = r;
    rs.report = report_from_json(m.at("report"), mpath.string());
    rs.skipped = static_cast<int>(m.value("skipped", json::array()).size());
    run.rounds.push_back(rs);
  }
  return run;
}

MetricReport mean_report(const std::vector<RoundScore>& rounds) {
  MetricReport mean;
  for (const auto& r : rounds) {
    mean.bleu += r.report.bleu;
    mean.codebleu += r.report.codebleu;
    mean.subs.ngram += r.report.subs.ngram;
    mean.subs.weighted_ngram += r.report.subs.weighted_ngram;
    mean.subs.ast += r.report.subs.ast;
    mean.subs.dataflow += r.report.subs.dataflow;
    mean.n_pairs += r.report.n_pairs;
  }
  double n = static_cast<double>(rounds.size());
  mean.bleu /= n;
  mean.codebleu /= n;
  mean.subs.ngram /= n;
  mean.subs.weighted_ngram /= n;
  mean.subs.ast /= n;
  mean.subs.dataflow /= n;
  return mean;
}

}  // namespace

ReportResult run_report(const std::vector<std::string>& run_dirs,
                        const ReportOptions& opts) {
  if (run_dirs.empty()) throw ExperimentError("report needs at least one run directory");

  std::vector<LoadedRun> runs;
  for (const auto& dir : run_dirs) runs.push_back(load_scored_run(dir));
  for (const auto& run : runs)
    if (run.meta.task != runs.front().meta.task)
      throw ExperimentError("runs mix tasks: " + run.dir + " is " +
                            task_name(run.meta.task) + ", " + runs.front().dir + " is " +
                            task_name(runs.front().meta.task));

  // Pool rounds of runs that share a label, in argument order.
  std::vector<std::string> labels;
  std::map<std::string, std::vector<RoundScore>> by_label;
  for (const auto& run : runs) {
    auto& bucket = by_label[run.meta.label];
    if (bucket.empty()) labels.push_back(run.meta.label);
    for (auto rs : run.rounds) {
      rs.round_index = static_cast<int>(bucket.size());
      bucket.push_back(rs);
    }
  }

  std::vector<std::pair<std::string, MetricReport>> score_rows;
  for (const auto& label : labels)
    score_rows.emplace_back(label, mean_report(by_label[label]));

  std::vector<ComparisonRow> comparison;
  if (!opts.baseline_label.empty()) {
    comparison = compare(score_rows, opts.baseline_label);
  } else {
    for (const auto& [label, report] : score_rows) {
      ComparisonRow row;
      row.label = label;
      row.bleu = report.bleu;
      row.codebleu = report.codebleu;
      comparison.push_back(std::move(row));
    }
  }

  size_t max_rounds = 0;
  for (const auto& label : labels)
    max_rounds = std::max(max_rounds, by_label[label].size());
  bool any_multi = max_rounds >= 2;

  // ---- markdown ----
  std::ostringstream md;
  md << "# " << kToolName << " report\n\n";
  md << "tool: " << kToolName << " " << kToolVersion << "\n\n";
  md << "task: " << task_name(runs.front().meta.task) << "\n";
  if (!opts.baseline_label.empty()) md << "baseline: " << opts.baseline_label << "\n";
  md << "\n## scores\n\n";
  md << "| model | BLEU | CodeBLEU |\n|---|---:|---:|\n";
  for (const auto& row : comparison) {
    md << "| " << row.label << " | " << format_score(row.bleu);
    if (!row.bleu_delta.empty()) md << " (" << row.bleu_delta << ")";
    md << " | " << format_score(row.codebleu);
    if (!row.codebleu_delta.empty()) md << " (" << row.codebleu_delta << ")";
    md << " |\n";
  }
  bool any_pooled = false;
  for (const auto& label : labels) any_pooled |= by_label[label].size() > 1;
  if (any_pooled) md << "\nmulti-round rows report round averages\n";

  if (any_multi) {
    md << "\n## rounds\n\n| model | metric |";
    for (size_t i = 1; i <= max_rounds; ++i) md << " R" << i << " |";
    md << " MIN | MAX | AVG | STD |\n|---|---|";
    for (size_t i = 0; i < max_rounds + 4; ++i) md << "---:|";
    md << "\n";
    for (const auto& label : labels) {
      const auto& rounds = by_label[label];
      if (rounds.size() < 2) continue;
      StatSummary stats = summarize(rounds);
      for (int metric = 0; metric < 2; ++metric) {
        md << "| " << label << " | " << (metric == 0 ? "BLEU" : "CodeBLEU") << " |";
        for (size_t i = 0; i < max_rounds; ++i) {
          if (i < rounds.size())
            md << " "
               << format_score(metric == 0 ? rounds[i].report.bleu
                                           : rounds[i].report.codebleu)
               << " |";
          else
            md << " - |";
        }
        const Stats& s = metric == 0 ? stats.bleu : stats.codebleu;
        md << " " << format_score(s.min) << " | " << format_score(s.max) << " | "
           << format_score(s.avg) << " | " << format_score(s.std) << " |\n";
      }
    }
  }

  md << "\n## runs\n";
  for (const auto& run : runs) {
    const json& raw = run.meta.raw;
    md << "\n### " << run.meta.label << "\n\n";
    md << "- directory: " << run.dir << "\n";
    int skipped = 0;
    int pairs = 0;
    for (const auto& r : run.rounds) {
      skipped += r.skipped;
      pairs += r.report.n_pairs;
    }
    md << "- rounds: " << run.meta.rounds << ", pairs: " << pairs
       << ", skipped: " << skipped << "\n";
    md << "- seed: " << raw.value("seed", 0ULL) << ", sample: " << raw.value("sample", 0ULL)
       << "\n";
    md << "- backend: " << raw.value("backend", "") << ", model: " << raw.value("model", "")
       << "\n";
    md << "- fixtures digest: "
       << (raw.value("fixtures_digest", "").empty() ? "(none)"
                                                    : raw.value("fixtures_digest", ""))
       << "\n";
    json config = raw.value("config", json::object());
    if (!config.empty()) {
      md << "- config:\n";
      for (const auto& [key, entry] : config.items())
        md << "  - " << key << " = " << entry.value("value", "") << " ("
           << entry.value("source", "") << ")\n";
    }
  }

  // ---- csv ----
  std::ostringstream csv;
  csv << "label,bleu,codebleu,bleu_delta,codebleu_delta\n";
  for (const auto& row : comparison)
    csv << csv_field(row.label) << ',' << format_score(row.bleu) << ','
        << format_score(row.codebleu) << ',' << row.bleu_delta << ','
        << row.codebleu_delta << '\n';
  if (any_multi) {
    csv << "\nlabel,metric";
    for (size_t i = 1; i <= max_rounds; ++i) csv << ",R" << i;
    csv << ",min,max,avg,std\n";
    for (const auto& label : labels) {
      const auto& rounds = by_label[label];
      if (rounds.size() < 2) continue;
      StatSummary stats = summarize(rounds);
      for (int metric = 0; metric < 2; ++metric) {
        csv << csv_field(label) << ',' << (metric == 0 ? "BLEU" : "CodeBLEU");
        for (size_t i = 0; i < max_rounds; ++i) {
          csv << ',';
          if (i < rounds.size())
            csv << format_score(metric == 0 ? rounds[i].report.bleu
                                            : rounds[i].report.codebleu);
        }
        const Stats& s = metric == 0 ? stats.bleu : stats.codebleu;
        csv << ',' << format_score(s.min) << ',' << format_score(s.max) << ','
            << format_score(s.avg) << ',' << format_score(s.std) << '\n';
      }
    }
  }

  // ---- summary json ----
  json summary;
  summary["tool"] = kToolName;
  summary["version"] = kToolVersion;
  summary["task"] = task_name(runs.front().meta.task);
  summary["baseline"] = opts.baseline_label;
  json jruns = json::array();
  for (const auto& run : runs) {
    json jr;
    jr["dir"] = run.dir;
    jr["label"] = run.meta.label;
    jr["seed"] = run.meta.raw.value("seed", 0ULL);
    jr["fixtures_digest"] = run.meta.raw.value("fixtures_digest", "");
    jr["config"] = run.meta.raw.value("config", json::object());
    json jrounds = json::array();
    for (const auto& r : run.rounds) jrounds.push_back(report_to_json(r.report));
    jr["rounds"] = std::move(jrounds);
    jruns.push_back(std::move(jr));
  }
  summary["runs"] = std::move(jruns);
  json jcomp = json::array();
  for (const auto& row : comparison)
    jcomp.push_back({{"label", row.label},
                     {"bleu", row.bleu},
                     {"codebleu", row.codebleu},
                     {"bleu_delta", row.bleu_delta},
                     {"codebleu_delta", row.codebleu_delta},
                     {"baseline", row.is_baseline}});
  summary["comparison"] = std::move(jcomp);
  json jstats = json::object();
  for (const auto& label : labels) {
    const auto& rounds = by_label[label];
    if (rounds.size() < 2) continue;
    StatSummary stats = summarize(rounds);
    auto stats_json = [](const Stats& s) {
      return json{{"min", s.min}, {"max", s.max}, {"avg", s.avg}, {"std", s.std}};
    };
    jstats[label] = {{"bleu", stats_json(stats.bleu)},
                     {"codebleu", stats_json(stats.codebleu)},
                     {"rounds", stats.rounds}};
  }
  summary["stats"] = std::move(jstats);

  fs::path out_dir = opts.out_dir.empty() ? fs::path(run_dirs.front()) : fs::path(opts.out_dir);
  fs::create_directories(out_dir);
  ReportResult result;
  result.markdown_path = (out_dir / "report.md").string();
  result.csv_path = (out_dir / "report.csv").string();
  result.summary_path = (out_dir / "summary.json").string();
  write_text(result.markdown_path, md.str());
  write_text(result.csv_path, csv.str());
  write_text(result.summary_path, summary.dump(2) + "\n");
  return result;
}

std::string extract_behaviour_specs(const std::vector<TaskInstance>& instances,
                                    const std::string& mode, ChatBackend* backend,
                                    const BackendConfig& http) {
  if (mode != "static" && mode != "llm")
    throw ExperimentError("unknown behaviour extraction mode '" + mode + "'");
  if (mode == "llm" && !backend)
    throw ExperimentError("llm behaviour extraction needs a backend");

  std::ostringstream out;
  for (const auto& inst : instances) {
    json row;
    row["id"] = inst.id;
    try {
      BehaviourSpec spec;
      if (mode == "static") {
        CodeUnit unit = parse_unit(Language::Java, inst.ground_truth);
        spec = extract_behaviour(unit);
      } else {
        spec = extract_behaviour_via_llm(*backend, http, inst.ground_truth, 0, inst.id);
      }
      row["api_names"] = spec.api_names;
      row["uses_exceptions"] = spec.uses_exceptions;
    } catch (const ReplayMissError&) {
      throw;
    } catch (const std::exception& e) {
      row["error"] = e.what();
    }
    out << row.dump() << '\n';
  }
  return out.str();
}

}  // namespace cgbench
