#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "cgbench/experiments.hpp"
#include "cgbench/reference_tables.hpp"
#include "cgbench/run_config.hpp"
#include "cgbench/strutil.hpp"
#include "support/paths.hpp"

using namespace cgbench;
using testsupport::TempDir;
using testsupport::read_file;
using testsupport::write_file;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Three-instance corpus: one near-match, one exact match, one instance whose
// scripted reply carries no code at all.
void write_t2c_fixture(const fs::path& dir) {
  json r1 = {{"id", "i1"},
             {"nl", "adds one to the given number"},
             {"class_name", "MathUtil"},
             {"member_variables", json::array()},
             {"member_functions", json::array({"int zero()"})},
             {"code", "public int addOne(int x) { return x + 1; }"}};
  json r2 = {{"id", "i2"},
             {"nl", "doubles the given number"},
             {"class_name", "MathUtil"},
             {"member_variables", json::array()},
             {"member_functions", json::array()},
             {"code", "public int twice(int v) { return v * 2; }"}};
  json r3 = {{"id", "i3"},
             {"nl", "does something mysterious"},
             {"class_name", "MathUtil"},
             {"member_variables", json::array()},
             {"member_functions", json::array()},
             {"code", "public int gone(int z) { return z; }"}};
  write_file(dir / "corpus.jsonl",
             r1.dump() + "\n" + r2.dump() + "\n" + r3.dump() + "\n");

  json s1 = {{"id", "i1"},
             {"response", "Sure:\n```java\nclass Solution { public int plusOne(int value) "
                          "{ return 1 + value; } }\n```\nEnjoy!"}};
  json s2 = {{"id", "i2"},
             {"response", "```java\npublic int twice(int v) { return v * 2; }\n```"}};
  json s3 = {{"id", "i3"}, {"response", "Sorry, I cannot help with that."}};
  write_file(dir / "responses.jsonl",
             s1.dump() + "\n" + s2.dump() + "\n" + s3.dump() + "\n");
}

ExperimentPlan scripted_t2c_plan(const fs::path& dir, const std::string& out) {
  ExperimentPlan plan;
  plan.task = TaskKind::TextToCode;
  plan.variant.level = PromptLevel::Detail;
  plan.corpus_path = (dir / "corpus.jsonl").string();
  plan.backend = BackendMode::Scripted;
  plan.script_path = (dir / "responses.jsonl").string();
  plan.out_dir = out;
  return plan;
}

void write_c2c_fixture(const fs::path& dir) {
  write_file(dir / "source.txt", "public int Sum(int a, int b) { return a + b; }\n");
  write_file(dir / "target.txt", "public int sum(int a, int b) { return a + b; }\n");
  json s = {{"id", "c2c-1"},
            {"response", "```java\npublic int sum(int a, int b) { return a + b; }\n```"}};
  write_file(dir / "c2c_responses.jsonl", s.dump() + "\n");
}

ExperimentPlan scripted_c2c_plan(const fs::path& dir, const std::string& out) {
  ExperimentPlan plan;
  plan.task = TaskKind::CodeToCode;
  plan.variant.level = PromptLevel::Detail;
  plan.source_path = (dir / "source.txt").string();
  plan.target_path = (dir / "target.txt").string();
  plan.backend = BackendMode::Scripted;
  plan.script_path = (dir / "c2c_responses.jsonl").string();
  plan.out_dir = out;
  return plan;
}

}  // namespace

TEST_CASE("variant labels") {
  PromptVariant v;
  SessionPolicy individual;
  SessionPolicy continuous{SessionMode::Continuous, 20};

  v.level = PromptLevel::TaskOnly;
  CHECK(variant_label(v, individual) == "ChatGPT-task");
  v.level = PromptLevel::Detail;
  CHECK(variant_label(v, individual) == "ChatGPT-detail");
  v.level = PromptLevel::Behaviour;
  CHECK(variant_label(v, individual) == "ChatGPT-behaviour");
  v.concise = true;
  CHECK(variant_label(v, individual) == "ChatGPT-behaviour-C");
  CHECK(variant_label(v, continuous) == "ChatGPT-behaviour-CS");
  v.concise = false;
  CHECK(variant_label(v, continuous) == "ChatGPT-behaviour-S");
}

TEST_CASE("backend mode names") {
  CHECK(backend_mode_from_name("live") == BackendMode::Live);
  CHECK(backend_mode_from_name("Replay") == BackendMode::Replay);
  CHECK(backend_mode_from_name("scripted") == BackendMode::Scripted);
  CHECK(std::string(backend_mode_name(BackendMode::Scripted)) == "scripted");
  CHECK_THROWS_AS(backend_mode_from_name("offline"), ExperimentError);
}

TEST_CASE("summarize_values: five-round statistics") {
  Stats s = summarize_values({26.86, 26.85, 27.02, 26.92, 27.00});
  CHECK(s.min == doctest::Approx(26.85));
  CHECK(s.max == doctest::Approx(27.02));
  CHECK(s.avg == doctest::Approx(26.93));
  CHECK(s.std == doctest::Approx(0.0781024967));  // sample std, divisor n-1
  CHECK(format_score(s.avg) == "26.93");
  CHECK(format_score(s.std) == "00.08");
}

TEST_CASE("summarize_values: single value and empty input") {
  Stats s = summarize_values({42.0});
  CHECK(s.min == 42.0);
  CHECK(s.max == 42.0);
  CHECK(s.avg == 42.0);
  CHECK(s.std == 0.0);
  CHECK_THROWS_AS(summarize_values({}), ExperimentError);
}

TEST_CASE("summarize_values is exactly permutation invariant") {
  std::vector<double> base = {16.82, 17.34, 17.23, 17.32, 17.21};
  Stats ref = summarize_values(base);
  std::vector<double> perm = base;
  std::sort(perm.begin(), perm.end());
  do {
    Stats s = summarize_values(perm);
    // bit-for-bit equality: accumulation order is canonicalized inside
    CHECK(s.min == ref.min);
    CHECK(s.max == ref.max);
    CHECK(s.avg == ref.avg);
    CHECK(s.std == ref.std);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("compare computes deltas against the named baseline") {
  MetricReport task, detail, behaviour;
  task.bleu = 5.63;
  task.codebleu = 28.05;
  detail.bleu = 14.09;
  detail.codebleu = 39.90;
  behaviour.bleu = 21.59;
  behaviour.codebleu = 48.69;
  std::vector<std::pair<std::string, MetricReport>> rows = {
      {"ChatGPT-task", task}, {"ChatGPT-detail", detail}, {"ChatGPT-behaviour", behaviour}};

  auto out = compare(rows, "ChatGPT-task");
  REQUIRE(out.size() == 3);
  CHECK(out[0].is_baseline);
  CHECK(out[0].bleu_delta.empty());
  CHECK(out[0].codebleu_delta.empty());
  CHECK(out[1].bleu_delta == "+150.27%");
  CHECK(out[1].codebleu_delta == "+42.25%");
  CHECK(out[2].bleu_delta == "+283.48%");
  CHECK(out[2].codebleu_delta == "+73.58%");

  CHECK_THROWS_WITH_AS(compare(rows, "ChatGPT-other"),
                       doctest::Contains("baseline label not found"), ExperimentError);
  rows[0].second.bleu = 0.0;
  CHECK_THROWS_AS(compare(rows, "ChatGPT-task"), ExperimentError);
}

TEST_CASE("published delta table: frozen flags match live recomputation") {
  const auto& rows = published_deltas();
  CHECK(rows.size() == 16);
  int inconsistent = 0;
  for (const auto& r : rows)
    if (!r.consistent) ++inconsistent;
  CHECK(inconsistent == 2);

  auto audits = audit_published_deltas();
  REQUIRE(audits.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CAPTURE(audits[i].cell);
    CHECK(audits[i].consistent == rows[i].consistent);
    if (rows[i].consistent) CHECK(audits[i].printed == audits[i].computed);
    else CHECK(audits[i].printed != audits[i].computed);
  }

  // the two cells where print and arithmetic disagree
  auto find = [&](const std::string& cell) -> const CellAudit& {
    for (const auto& a : audits)
      if (a.cell == cell) return a;
    static CellAudit none;
    FAIL("missing audit cell ", cell);
    return none;
  };
  const CellAudit& d1 = find("guidance-t2c/ChatGPT-detail/BLEU");
  CHECK(d1.printed == "+140.27%");
  CHECK(d1.computed == "+150.27%");
  const CellAudit& d2 = find("guidance-c2c/ChatGPT-behaviour/CodeBLEU");
  CHECK(d2.printed == "+02.32%");
  CHECK(d2.computed == "+02.73%");
}

TEST_CASE("published round statistics: frozen flags match live recomputation") {
  const auto& rows = published_round_stats();
  CHECK(rows.size() == 4);
  auto audits = audit_published_stats();
  CHECK(audits.size() == 16);  // min/max/avg/std per row

  int inconsistent = 0;
  for (const auto& a : audits) {
    if (!a.consistent) ++inconsistent;
    if (a.consistent) CHECK(a.printed == a.computed);
  }
  CHECK(inconsistent == 3);

  for (const auto& a : audits) {
    if (a.cell == "rounds-t2c/BLEU/min") {
      CHECK_FALSE(a.consistent);
      CHECK(a.printed == "26.86");
      CHECK(a.computed == "26.85");
    }
    if (a.cell == "rounds-c2c/CodeBLEU/min") {
      CHECK_FALSE(a.consistent);
      CHECK(a.printed == "48.80");
      CHECK(a.computed == "48.38");
    }
    if (a.cell == "rounds-c2c/CodeBLEU/std") {
      CHECK_FALSE(a.consistent);
      CHECK(a.printed == "00.33");
      CHECK(a.computed == "00.32");
    }
  }
}

TEST_CASE("generate stage: scripted run produces the full artifact tree") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());
  ExperimentPlan plan = scripted_t2c_plan(tmp.path(), (tmp / "run").string());
  plan.rounds = 2;

  GenerateResult res = run_generate(plan);
  CHECK(res.rounds == 2);
  CHECK(res.prompts_sent == 6);
  CHECK(res.skipped == 0);
  CHECK(res.fixture_digest.empty());  // no store involved

  json run = json::parse(read_file(tmp / "run/run.json"));
  CHECK(run["task"] == "t2c");
  CHECK(run["label"] == "ChatGPT-detail");
  CHECK(run["rounds"] == 2);
  CHECK(run["instances"] == 3);
  CHECK(run["backend"] == "scripted");
  CHECK(run["skipped_total"] == 0);

  for (int r = 0; r < 2; ++r) {
    std::string base = "run/rounds/round_" + std::to_string(r) + "/";
    std::string lines = read_file(tmp / (base + "instances.jsonl"));
    std::vector<json> rows;
    for (const auto& line : split(trim(lines), '\n')) rows.push_back(json::parse(line));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0]["id"] == "i1");
    CHECK(contains(rows[0]["prompt"].get<std::string>(), "MathUtil"));
    CHECK(contains(rows[0]["response"].get<std::string>(), "plusOne"));
    CHECK(rows[0]["session_id"] == ("r" + std::to_string(r) + "-0000"));
    CHECK(rows[2]["response"] == "Sorry, I cannot help with that.");

    std::string tx = read_file(tmp / (base + "transcripts.jsonl"));
    std::vector<json> sessions;
    for (const auto& line : split(trim(tx), '\n')) sessions.push_back(json::parse(line));
    CHECK(sessions.size() == 3);  // individual policy: one session per prompt
    CHECK(sessions[0]["prompt_count"] == 1);
    CHECK(sessions[0]["messages"].size() == 2);
  }
}

TEST_CASE("generate stage: continuous sessions share transcripts") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());
  ExperimentPlan plan = scripted_t2c_plan(tmp.path(), (tmp / "run").string());
  plan.policy = {SessionMode::Continuous, 2};

  run_generate(plan);
  json run = json::parse(read_file(tmp / "run/run.json"));
  CHECK(run["label"] == "ChatGPT-detail-S");

  std::string tx = read_file(tmp / "run/rounds/round_0/transcripts.jsonl");
  std::vector<json> sessions;
  for (const auto& line : split(trim(tx), '\n')) sessions.push_back(json::parse(line));
  REQUIRE(sessions.size() == 2);  // 3 prompts at limit 2 -> [2, 1]
  CHECK(sessions[0]["prompt_count"] == 2);
  CHECK(sessions[1]["prompt_count"] == 1);
  CHECK(sessions[0]["messages"].size() == 4);
}

TEST_CASE("generate stage: out-dir protection and rerun determinism") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());
  ExperimentPlan plan = scripted_t2c_plan(tmp.path(), (tmp / "run").string());

  run_generate(plan);
  std::string first_run = read_file(tmp / "run/run.json");
  std::string first_rows = read_file(tmp / "run/rounds/round_0/instances.jsonl");

  // a non-empty output directory is refused without overwrite
  CHECK_THROWS_WITH_AS(run_generate(plan), doctest::Contains("not empty"),
                       ExperimentError);

  plan.overwrite = true;
  run_generate(plan);
  CHECK(read_file(tmp / "run/run.json") == first_run);
  CHECK(read_file(tmp / "run/rounds/round_0/instances.jsonl") == first_rows);
}

TEST_CASE("generate stage: plan validation") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());
  ExperimentPlan plan = scripted_t2c_plan(tmp.path(), (tmp / "run").string());

  ExperimentPlan bad = plan;
  bad.rounds = 0;
  CHECK_THROWS_AS(run_generate(bad), ExperimentError);

  bad = plan;
  bad.out_dir.clear();
  CHECK_THROWS_AS(run_generate(bad), ExperimentError);

  bad = plan;
  bad.corpus_path.clear();
  CHECK_THROWS_WITH_AS(run_generate(bad), doctest::Contains("corpus"), ExperimentError);

  bad = plan;
  bad.script_path.clear();
  CHECK_THROWS_AS(run_generate(bad), ExperimentError);

  bad = plan;
  bad.backend = BackendMode::Replay;
  bad.fixtures_dir = (tmp / "nofixtures").string();
  bad.record = true;
  CHECK_THROWS_WITH_AS(run_generate(bad), doctest::Contains("recording"),
                       ExperimentError);
}

TEST_CASE("generate stage: behaviour specs from a file, with skips") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());
  ExperimentPlan plan = scripted_t2c_plan(tmp.path(), (tmp / "run").string());
  plan.variant.level = PromptLevel::Behaviour;
  plan.behaviour_source = "file";

  CHECK_THROWS_WITH_AS(run_generate(plan), doctest::Contains("behaviour file"),
                       ExperimentError);

  json b1 = {{"id", "i1"}, {"api_names", json::array({"increment"})},
             {"uses_exceptions", false}};
  json b2 = {{"id", "i2"}, {"error", "extraction exploded"}};
  json b3 = {{"id", "i3"}, {"api_names", json::array()}, {"uses_exceptions", true}};
  write_file(tmp / "behaviour.jsonl", b1.dump() + "\n" + b2.dump() + "\n" + b3.dump() + "\n");
  plan.behaviour_file = (tmp / "behaviour.jsonl").string();

  GenerateResult res = run_generate(plan);
  CHECK(res.prompts_sent == 2);
  CHECK(res.skipped == 1);

  std::string lines = read_file(tmp / "run/rounds/round_0/instances.jsonl");
  std::vector<json> rows;
  for (const auto& line : split(trim(lines), '\n')) rows.push_back(json::parse(line));
  REQUIRE(rows.size() == 3);
  CHECK(contains(rows[0]["prompt"].get<std::string>(), "that calls increment"));
  CHECK(contains(rows[0]["prompt"].get<std::string>(), "without exception handling"));
  CHECK(rows[1]["skipped"] == true);
  CHECK(contains(rows[1]["skip_reason"].get<std::string>(), "extraction exploded"));
  CHECK(contains(rows[2]["prompt"].get<std::string>(), "with exception handling"));
}

TEST_CASE("generate stage: static behaviour extraction feeds the prompts") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());
  // ground truth of i1 calls nothing, so the clause is dropped
  ExperimentPlan plan = scripted_t2c_plan(tmp.path(), (tmp / "run").string());
  plan.variant.level = PromptLevel::Behaviour;
  plan.behaviour_source = "static";

  GenerateResult res = run_generate(plan);
  CHECK(res.prompts_sent == 3);
  CHECK(res.skipped == 0);
  json run = json::parse(read_file(tmp / "run/run.json"));
  CHECK(run["label"] == "ChatGPT-behaviour");
  CHECK(run["behaviour"] == "static");
}

TEST_CASE("generate stage: a replay miss aborts and names the instance") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());
  fs::create_directories(tmp / "fixtures");
  ExperimentPlan plan = scripted_t2c_plan(tmp.path(), (tmp / "run").string());
  plan.backend = BackendMode::Replay;
  plan.script_path.clear();
  plan.fixtures_dir = (tmp / "fixtures").string();

  CHECK_THROWS_WITH_AS(run_generate(plan), doctest::Contains("instance 'i1'"),
                       ExperimentError);
}

TEST_CASE("record then replay: fixtures round-trip byte for byte") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());

  ExperimentPlan rec = scripted_t2c_plan(tmp.path(), (tmp / "run_rec").string());
  rec.record = true;
  rec.fixtures_dir = (tmp / "fixtures").string();
  GenerateResult rec_res = run_generate(rec);
  CHECK_FALSE(rec_res.fixture_digest.empty());

  ExperimentPlan rep = scripted_t2c_plan(tmp.path(), (tmp / "run_rep").string());
  rep.backend = BackendMode::Replay;
  rep.script_path.clear();
  rep.fixtures_dir = (tmp / "fixtures").string();
  GenerateResult rep_res = run_generate(rep);
  CHECK(rep_res.prompts_sent == rec_res.prompts_sent);
  CHECK(rep_res.fixture_digest == rec_res.fixture_digest);

  CHECK(read_file(tmp / "run_rec/rounds/round_0/instances.jsonl") ==
        read_file(tmp / "run_rep/rounds/round_0/instances.jsonl"));
}

TEST_CASE("score stage: corpus metrics, per-pair rows, and skips") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());
  ExperimentPlan plan = scripted_t2c_plan(tmp.path(), (tmp / "run").string());
  plan.rounds = 2;
  run_generate(plan);

  auto scores = run_score(plan.out_dir, {});
  REQUIRE(scores.size() == 2);
  for (const auto& rs : scores) {
    CHECK(rs.report.n_pairs == 2);  // i3's reply has no method in it
    CHECK(rs.skipped == 1);
    CHECK(rs.report.bleu > 0.0);
    CHECK(rs.report.codebleu > 0.0);
  }

  json metrics = json::parse(read_file(tmp / "run/rounds/round_0/metrics.json"));
  CHECK(metrics["round"] == 0);
  REQUIRE(metrics["pairs"].size() == 2);
  CHECK(metrics["pairs"][0]["id"] == "i1");
  CHECK(metrics["pairs"][1]["id"] == "i2");
  // i2's reply is the ground truth verbatim
  CHECK(metrics["pairs"][1]["bleu"].get<double>() == doctest::Approx(100.0));
  CHECK(metrics["pairs"][1]["codebleu"].get<double>() == doctest::Approx(100.0));
  // i1 swaps the operands, so nothing scores perfect but everything parses
  CHECK(metrics["pairs"][0]["bleu"].get<double>() < 100.0);
  CHECK(metrics["pairs"][0]["bleu"].get<double>() > 0.0);
  CHECK(metrics["pairs"][0]["ast_match"].get<double>() > 0.0);
  CHECK(metrics["pairs"][0]["ast_match"].get<double>() <= 1.0);
  CHECK(contains(metrics["pairs"][0]["candidate"].get<std::string>(), "function(int arg0)"));
  REQUIRE(metrics["skipped"].size() == 1);
  CHECK(metrics["skipped"][0]["id"] == "i3");
  CHECK(contains(metrics["skipped"][0]["reason"].get<std::string>(), "no method"));

  CHECK(contains(read_file(tmp / "run/score.md"), "| round |"));
  CHECK(contains(read_file(tmp / "run/score.csv"), "round,pairs,skipped,bleu"));
}

TEST_CASE("score stage: rescoring reproduces metrics byte for byte") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());
  ExperimentPlan plan = scripted_t2c_plan(tmp.path(), (tmp / "run").string());
  run_generate(plan);

  run_score(plan.out_dir, {});
  std::string first = read_file(tmp / "run/rounds/round_0/metrics.json");
  std::string first_md = read_file(tmp / "run/score.md");

  run_score(plan.out_dir, {});
  CHECK(read_file(tmp / "run/rounds/round_0/metrics.json") == first);
  CHECK(read_file(tmp / "run/score.md") == first_md);
}

TEST_CASE("score stage: job count never changes the result") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());
  ExperimentPlan plan = scripted_t2c_plan(tmp.path(), (tmp / "run").string());
  run_generate(plan);

  run_score(plan.out_dir, {});
  std::string serial = read_file(tmp / "run/rounds/round_0/metrics.json");

  ScoreOptions parallel;
  parallel.jobs = 4;
  run_score(plan.out_dir, parallel);
  CHECK(read_file(tmp / "run/rounds/round_0/metrics.json") == serial);
}

TEST_CASE("score stage: scoring knobs reach the scorer and the echo") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());
  ExperimentPlan plan = scripted_t2c_plan(tmp.path(), (tmp / "run").string());
  run_generate(plan);

  ScoreOptions opts;
  opts.weights = {1.0, 0.0, 0.0, 0.0};
  auto scores = run_score(plan.out_dir, opts);
  REQUIRE(scores.size() == 1);
  CHECK(scores[0].report.codebleu ==
        doctest::Approx(scores[0].report.subs.ngram * 100.0));

  json metrics = json::parse(read_file(tmp / "run/rounds/round_0/metrics.json"));
  CHECK(metrics["scoring"]["weights"][0] == doctest::Approx(1.0));
  CHECK(metrics["scoring"]["brevity"] == "paper");

  write_file(tmp / "kw.txt", "# custom set\nreturn\nint\n");
  ScoreOptions kw;
  kw.keywords_path = (tmp / "kw.txt").string();
  run_score(plan.out_dir, kw);
  metrics = json::parse(read_file(tmp / "run/rounds/round_0/metrics.json"));
  CHECK(metrics["scoring"]["keywords"] == kw.keywords_path);

  write_file(tmp / "empty.txt", "# nothing\n");
  ScoreOptions empty_kw;
  empty_kw.keywords_path = (tmp / "empty.txt").string();
  CHECK_THROWS_WITH_AS(run_score(plan.out_dir, empty_kw), doctest::Contains("no entries"),
                       ExperimentError);
}

TEST_CASE("score stage: a run directory without a manifest is rejected") {
  TempDir tmp;
  CHECK_THROWS_AS(run_score((tmp / "nothing").string(), {}), ExperimentError);
  fs::create_directories(tmp / "shallow");
  write_file(tmp / "shallow/run.json", "{\"task\": \"t2c\"}\n");
  CHECK_THROWS_WITH_AS(run_score((tmp / "shallow").string(), {}),
                       doctest::Contains("manifest"), ExperimentError);
}

TEST_CASE("pairs directory scoring") {
  TempDir tmp;
  fs::create_directories(tmp / "pairs");
  write_file(tmp / "pairs/a.cand", "int f(int x) { return x + 1; }");
  write_file(tmp / "pairs/a.ref", "int f(int x) { return x + 1; }");
  write_file(tmp / "pairs/b.cand", "int g() { return 0; }");
  write_file(tmp / "pairs/b.ref", "int g() { return 1; }");

  MetricReport r = score_pairs_dir((tmp / "pairs").string(), {});
  CHECK(r.n_pairs == 2);
  CHECK(r.codebleu > 0.0);

  write_file(tmp / "pairs/c.cand", "int h() { return 2; }");
  CHECK_THROWS_WITH_AS(score_pairs_dir((tmp / "pairs").string(), {}),
                       doctest::Contains("c.cand (no matching .ref)"), ExperimentError);

  fs::create_directories(tmp / "none");
  CHECK_THROWS_WITH_AS(score_pairs_dir((tmp / "none").string(), {}),
                       doctest::Contains("no candidate/reference pairs"), ExperimentError);
  CHECK_THROWS_AS(score_pairs_dir((tmp / "missing").string(), {}), ExperimentError);
}

TEST_CASE("report stage: comparison, rounds table, and summary") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());

  ExperimentPlan base = scripted_t2c_plan(tmp.path(), (tmp / "run_task").string());
  base.variant.level = PromptLevel::TaskOnly;
  base.rounds = 2;
  run_generate(base);
  run_score(base.out_dir, {});

  ExperimentPlan detail = scripted_t2c_plan(tmp.path(), (tmp / "run_detail").string());
  detail.rounds = 2;
  run_generate(detail);
  run_score(detail.out_dir, {});

  ReportOptions opts;
  opts.baseline_label = "ChatGPT-task";
  opts.out_dir = (tmp / "report").string();
  ReportResult res = run_report({base.out_dir, detail.out_dir}, opts);

  std::string md = read_file(res.markdown_path);
  CHECK(contains(md, "## scores"));
  CHECK(contains(md, "| ChatGPT-task |"));
  CHECK(contains(md, "| ChatGPT-detail |"));
  CHECK(contains(md, "## rounds"));
  CHECK(contains(md, "MIN | MAX | AVG | STD"));
  CHECK(contains(md, "## runs"));
  CHECK(contains(md, "baseline: ChatGPT-task"));

  std::string csv = read_file(res.csv_path);
  CHECK(contains(csv, "label,bleu,codebleu,bleu_delta,codebleu_delta"));
  CHECK(contains(csv, "label,metric,R1,R2,min,max,avg,std"));

  json summary = json::parse(read_file(res.summary_path));
  CHECK(summary["task"] == "t2c");
  CHECK(summary["baseline"] == "ChatGPT-task");
  REQUIRE(summary["comparison"].size() == 2);
  CHECK(summary["comparison"][0]["label"] == "ChatGPT-task");
  CHECK(summary["comparison"][0]["baseline"] == true);
  CHECK(summary["comparison"][0]["bleu_delta"] == "");
  CHECK(summary["comparison"][1]["baseline"] == false);
  CHECK(summary["comparison"][1]["bleu_delta"] != "");
  CHECK(summary["stats"].contains("ChatGPT-task"));
  CHECK(summary["stats"]["ChatGPT-task"]["rounds"] == 2);
  CHECK(summary["runs"].size() == 2);

  // scripted responses repeat across rounds, so the spread collapses to zero
  CHECK(summary["stats"]["ChatGPT-task"]["bleu"]["std"].get<double>() ==
        doctest::Approx(0.0));
}

TEST_CASE("report stage: same-label runs pool their rounds") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());

  ExperimentPlan a = scripted_t2c_plan(tmp.path(), (tmp / "run_a").string());
  run_generate(a);
  run_score(a.out_dir, {});
  ExperimentPlan b = scripted_t2c_plan(tmp.path(), (tmp / "run_b").string());
  run_generate(b);
  run_score(b.out_dir, {});

  ReportOptions opts;
  opts.out_dir = (tmp / "report").string();
  ReportResult res = run_report({a.out_dir, b.out_dir}, opts);
  json summary = json::parse(read_file(res.summary_path));
  REQUIRE(summary["comparison"].size() == 1);  // one label, two runs
  CHECK(summary["stats"]["ChatGPT-detail"]["rounds"] == 2);
  CHECK(contains(read_file(res.markdown_path), "multi-round rows report round averages"));
}

TEST_CASE("report stage: unscored and mixed-task runs are rejected") {
  TempDir tmp;
  write_t2c_fixture(tmp.path());
  write_c2c_fixture(tmp.path());

  ExperimentPlan t2c = scripted_t2c_plan(tmp.path(), (tmp / "run_t2c").string());
  run_generate(t2c);
  CHECK_THROWS_WITH_AS(run_report({t2c.out_dir}, {}),
                       doctest::Contains("score stage"), ExperimentError);
  run_score(t2c.out_dir, {});

  ExperimentPlan c2c = scripted_c2c_plan(tmp.path(), (tmp / "run_c2c").string());
  run_generate(c2c);
  run_score(c2c.out_dir, {});

  CHECK_THROWS_WITH_AS(run_report({t2c.out_dir, c2c.out_dir}, {}),
                       doctest::Contains("mix tasks"), ExperimentError);
}

TEST_CASE("c2c pipeline end to end: exact translation scores 100") {
  TempDir tmp;
  write_c2c_fixture(tmp.path());
  ExperimentPlan plan = scripted_c2c_plan(tmp.path(), (tmp / "run").string());
  GenerateResult gen = run_generate(plan);
  CHECK(gen.prompts_sent == 1);

  std::string rows = read_file(tmp / "run/rounds/round_0/instances.jsonl");
  json row = json::parse(split(trim(rows), '\n')[0]);
  CHECK(row["id"] == "c2c-1");
  CHECK(contains(row["prompt"].get<std::string>(), "triple backticks"));
  CHECK(contains(row["source"].get<std::string>(), "Sum"));

  auto scores = run_score(plan.out_dir, {});
  REQUIRE(scores.size() == 1);
  CHECK(scores[0].report.n_pairs == 1);
  CHECK(scores[0].report.bleu == doctest::Approx(100.0));
  CHECK(scores[0].report.codebleu == doctest::Approx(100.0));
}

TEST_CASE("behaviour spec extraction stage") {
  std::vector<TaskInstance> insts(2);
  insts[0].id = "a";
  insts[0].ground_truth = "int f() { try { return g(); } catch (Exception e) { return 0; } }";
  insts[1].id = "b";
  insts[1].ground_truth = "int h() { return 1; }";

  std::string out = extract_behaviour_specs(insts, "static", nullptr, {});
  auto lines = split(trim(out), '\n');
  REQUIRE(lines.size() == 2);
  json a = json::parse(lines[0]);
  CHECK(a["id"] == "a");
  CHECK(a["api_names"] == json::array({"g"}));
  CHECK(a["uses_exceptions"] == true);
  json b = json::parse(lines[1]);
  CHECK(b["uses_exceptions"] == false);

  CHECK_THROWS_AS(extract_behaviour_specs(insts, "llm", nullptr, {}), ExperimentError);
  CHECK_THROWS_AS(extract_behaviour_specs(insts, "psychic", nullptr, {}), ExperimentError);

  ScriptedBackend backend;
  backend.add("a#api", "g");
  backend.add("a#exc", "yes");
  backend.add("b#api", "none");
  backend.add("b#exc", "no");
  std::string via_llm = extract_behaviour_specs(insts, "llm", &backend, {});
  auto llm_lines = split(trim(via_llm), '\n');
  REQUIRE(llm_lines.size() == 2);
  CHECK(json::parse(llm_lines[0])["api_names"] == json::array({"g"}));
  CHECK(json::parse(llm_lines[1])["api_names"] == json::array());
}

TEST_CASE("run config: precedence, types, and the echo") {
  TempDir tmp;
  RunConfig rc;
  rc.declare("task", "t2c");
  rc.declare("rounds", "1");
  rc.declare("ratio", "0.5");
  rc.declare("verbose", "false");
  rc.declare("api_key_env", "OPENAI_API_KEY");
  rc.declare("api_token", "");

  CHECK(rc.get_or("task", "?") == "t2c");
  CHECK(*rc.get("rounds") == "1");

  write_file(tmp / "cfg.txt",
             "# comment\n"
             "task = c2c\n"
             "rounds = 3\n"
             "verbose = true\n");
  rc.load_file((tmp / "cfg.txt").string());
  CHECK(rc.get_or("task", "?") == "c2c");
  CHECK(rc.get_int("rounds", 0) == 3);
  CHECK(rc.get_bool("verbose", false) == true);

  setenv("CGBENCH_ROUNDS", "5", 1);
  rc.load_env();
  CHECK(rc.get_int("rounds", 0) == 5);  // env beats file
  unsetenv("CGBENCH_ROUNDS");

  rc.set_flag("rounds", "7");
  CHECK(rc.get_int("rounds", 0) == 7);  // flag beats env

  // a weaker layer cannot override a stronger one
  rc.load_file((tmp / "cfg.txt").string());
  CHECK(rc.get_int("rounds", 0) == 7);

  CHECK(rc.get_double("ratio", 0.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(rc.set_flag("nonexistent", "x"), ConfigError);
  rc.set_flag("ratio", "not-a-number");
  CHECK_THROWS_AS(rc.get_double("ratio", 0.0), ConfigError);

  json echo = rc.echo();
  CHECK(echo["task"]["value"] == "c2c");
  CHECK(echo["task"]["source"] == "file");
  CHECK(echo["rounds"]["source"] == "flag");
  // credential-looking keys stay out of the echo; the env-var *name* is fine
  rc.set_flag("api_token", "s3cret");
  echo = rc.echo();
  CHECK_FALSE(echo.contains("api_token"));
  CHECK(echo.contains("api_key_env"));
}

TEST_CASE("run config: file errors") {
  TempDir tmp;
  RunConfig rc;
  rc.declare("known");
  write_file(tmp / "bad.txt", "unknown_key = 1\n");
  CHECK_THROWS_WITH_AS(rc.load_file((tmp / "bad.txt").string()),
                       doctest::Contains("unknown_key"), ConfigError);
  write_file(tmp / "noeq.txt", "known\n");
  CHECK_THROWS_AS(rc.load_file((tmp / "noeq.txt").string()), ConfigError);
  CHECK_THROWS_AS(rc.load_file("/nonexistent/cfg.txt"), ConfigError);
}
