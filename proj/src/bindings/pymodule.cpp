// Python bindings: thin, dict-in / dict-out wrappers over the C++ core. The
// CLI stays the primary interface; this module exists for notebook poking and
// the smoke tests.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "cgbench/analysis.hpp"
#include "cgbench/corpus.hpp"
#include "cgbench/digest.hpp"
#include "cgbench/experiments.hpp"
#include "cgbench/gateway.hpp"
#include "cgbench/metrics.hpp"
#include "cgbench/prompt_forge.hpp"

namespace py = pybind11;
using namespace cgbench;

namespace {

nlohmann::json to_json(py::handle obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::dict>(obj)) {
    nlohmann::json j = nlohmann::json::object();
    for (auto item : obj.cast<py::dict>())
      j[item.first.cast<std::string>()] = to_json(item.second);
    return j;
  }
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    nlohmann::json j = nlohmann::json::array();
    for (auto item : obj.cast<py::sequence>()) j.push_back(to_json(item));
    return j;
  }
  throw py::type_error("unsupported value type in JSON-like argument");
}

BleuConfig bleu_config(int max_n, const std::string& brevity, bool smoothing) {
  BleuConfig cfg;
  cfg.max_n = max_n;
  cfg.smoothing = smoothing;
  if (brevity == "paper")
    cfg.brevity = BrevityMode::PaperRatio;
  else if (brevity == "standard")
    cfg.brevity = BrevityMode::Standard;
  else
    throw py::value_error("brevity must be 'paper' or 'standard'");
  return cfg;
}

CodeBleuWeights codebleu_weights(const std::vector<double>& w) {
  if (w.size() != 4) throw py::value_error("weights needs 4 entries");
  return CodeBleuWeights{w[0], w[1], w[2], w[3]};
}

py::dict breakdown_dict(const PairBreakdown& pb) {
  py::dict d;
  d["bleu"] = pb.bleu;
  d["codebleu"] = pb.codebleu;
  d["ngram"] = pb.subs.ngram;
  d["weighted_ngram"] = pb.subs.weighted_ngram;
  d["ast"] = pb.subs.ast;
  d["dataflow"] = pb.subs.dataflow;
  return d;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["bleu"] = r.bleu;
  d["codebleu"] = r.codebleu;
  d["ngram"] = r.subs.ngram;
  d["weighted_ngram"] = r.subs.weighted_ngram;
  d["ast"] = r.subs.ast;
  d["dataflow"] = r.subs.dataflow;
  d["pairs"] = r.n_pairs;
  return d;
}

TaskInstance instance_from_dict(const py::dict& d, TaskKind task) {
  TaskInstance inst;
  inst.kind = task;
  if (d.contains("id")) inst.id = d["id"].cast<std::string>();
  if (d.contains("nl")) inst.nl_description = d["nl"].cast<std::string>();
  if (d.contains("class_name"))
    inst.environment.class_name = d["class_name"].cast<std::string>();
  if (d.contains("member_variables"))
    inst.environment.member_variables =
        d["member_variables"].cast<std::vector<std::string>>();
  if (d.contains("member_functions"))
    inst.environment.member_functions =
        d["member_functions"].cast<std::vector<std::string>>();
  if (d.contains("source")) inst.source_code = d["source"].cast<std::string>();
  if (d.contains("code")) inst.ground_truth = d["code"].cast<std::string>();
  return inst;
}

ExperimentPlan plan_from_dict(const py::dict& d) {
  ExperimentPlan plan;
  for (auto item : d) {
    std::string key = item.first.cast<std::string>();
    py::handle v = item.second;
    if (key == "task") plan.task = task_from_name(v.cast<std::string>());
    else if (key == "variant") plan.variant.level = level_from_name(v.cast<std::string>());
    else if (key == "concise") plan.variant.concise = v.cast<bool>();
    else if (key == "session")
      plan.policy.mode = session_mode_from_name(v.cast<std::string>());
    else if (key == "session_limit")
      plan.policy.max_prompts_per_session = v.cast<int>();
    else if (key == "rounds") plan.rounds = v.cast<int>();
    else if (key == "corpus") plan.corpus_path = v.cast<std::string>();
    else if (key == "source") plan.source_path = v.cast<std::string>();
    else if (key == "target") plan.target_path = v.cast<std::string>();
    else if (key == "sample_n") plan.sample_n = v.cast<std::size_t>();
    else if (key == "seed") plan.seed = v.cast<std::uint64_t>();
    else if (key == "behaviour") plan.behaviour_source = v.cast<std::string>();
    else if (key == "behaviour_file") plan.behaviour_file = v.cast<std::string>();
    else if (key == "templates") plan.templates_path = v.cast<std::string>();
    else if (key == "backend")
      plan.backend = backend_mode_from_name(v.cast<std::string>());
    else if (key == "model") plan.http.model = v.cast<std::string>();
    else if (key == "endpoint") plan.http.endpoint = v.cast<std::string>();
    else if (key == "api_key_env") plan.http.api_key_env = v.cast<std::string>();
    else if (key == "randomness") plan.http.randomness = to_json(v);
    else if (key == "fixtures") plan.fixtures_dir = v.cast<std::string>();
    else if (key == "script") plan.script_path = v.cast<std::string>();
    else if (key == "record") plan.record = v.cast<bool>();
    else if (key == "out") plan.out_dir = v.cast<std::string>();
    else if (key == "overwrite") plan.overwrite = v.cast<bool>();
    else throw py::value_error("unknown plan key '" + key + "'");
  }
  return plan;
}

}  // namespace

PYBIND11_MODULE(_cgbench, m) {
  m.doc() = "code-generation benchmarking core";

  // --- code analysis ---------------------------------------------------
  m.def(
      "tokens",
      [](const std::string& text, const std::string& language) {
        TokenStream ts = lex(language_from_name(language), text);
        std::vector<std::string> out;
        for (const auto& t : ts.tokens)
          if (t.kind != TokenKind::Eof && t.kind != TokenKind::Comment)
            out.push_back(t.text);
        return out;
      },
      py::arg("text"), py::arg("language") = "java");

  m.def(
      "normalize",
      [](const std::string& text, const std::string& mode, const std::string& language) {
        NormalizeMode nm;
        if (mode == "t2c") nm = NormalizeMode::TextToCode;
        else if (mode == "c2c") nm = NormalizeMode::CodeToCode;
        else throw py::value_error("mode must be 't2c' or 'c2c'");
        CodeUnit unit = parse_unit(language_from_name(language), text);
        NormalizedCode n = normalize(unit, nm);
        py::dict d;
        d["text"] = n.text;
        d["renames"] = n.renames;
        d["notes"] = n.notes;
        return d;
      },
      py::arg("text"), py::arg("mode") = "t2c", py::arg("language") = "java");

  m.def("extract_code_block", &extract_code_block, py::arg("response"));

  m.def(
      "isolate_method",
      [](const std::string& text, const std::string& language) {
        IsolatedMethod im =
            isolate_method(parse_unit(language_from_name(language), text));
        py::dict d;
        d["text"] = im.text;
        d["ambiguous"] = im.ambiguous;
        d["discarded"] = im.discarded;
        return d;
      },
      py::arg("text"), py::arg("language") = "java");

  m.def(
      "extract_behaviour",
      [](const std::string& code, const std::string& language) {
        BehaviourSpec spec =
            extract_behaviour(parse_unit(language_from_name(language), code));
        py::dict d;
        d["api_names"] = spec.api_names;
        d["uses_exceptions"] = spec.uses_exceptions;
        return d;
      },
      py::arg("code"), py::arg("language") = "java");

  // --- metrics -----------------------------------------------------------
  m.def(
      "bleu",
      [](const std::vector<std::string>& candidate,
         const std::vector<std::string>& reference, int max_n,
         const std::string& brevity, bool smoothing) {
        return bleu(candidate, reference, bleu_config(max_n, brevity, smoothing));
      },
      py::arg("candidate"), py::arg("reference"), py::arg("max_n") = 4,
      py::arg("brevity") = "paper", py::arg("smoothing") = false);

  m.def(
      "codebleu",
      [](const std::string& candidate, const std::string& reference,
         const std::string& language, const std::vector<double>& weights,
         const std::vector<std::string>& keywords_extra) {
        Language lang = language_from_name(language);
        CodeUnit cand = parse_unit(lang, candidate);
        CodeUnit ref = parse_unit(lang, reference);
        std::unordered_set<std::string> kw = keywords(lang);
        for (const auto& k : keywords_extra) kw.insert(k);
        TokenWeights tw;
        tw.keyword_set = &kw;
        return breakdown_dict(codebleu(cand, ref, codebleu_weights(weights), {}, &tw));
      },
      py::arg("candidate"), py::arg("reference"), py::arg("language") = "java",
      py::arg("weights") = std::vector<double>{0.25, 0.25, 0.25, 0.25},
      py::arg("keywords_extra") = std::vector<std::string>{});

  m.def(
      "score_pairs",
      [](const std::vector<std::pair<std::string, std::string>>& pairs,
         const std::string& language, const std::vector<double>& weights) {
        Language lang = language_from_name(language);
        std::unordered_set<std::string> kw = keywords(lang);
        TokenWeights tw;
        tw.keyword_set = &kw;
        CorpusScorer scorer({}, codebleu_weights(weights), &tw);
        for (const auto& [cand, ref] : pairs)
          scorer.add(parse_unit(lang, cand), parse_unit(lang, ref));
        return report_dict(scorer.finish());
      },
      py::arg("pairs"), py::arg("language") = "java",
      py::arg("weights") = std::vector<double>{0.25, 0.25, 0.25, 0.25});

  m.def("format_score", &format_score, py::arg("value"));
  m.def("relative_delta", &relative_delta, py::arg("next"), py::arg("base"));
  m.def("sha256_hex",
        [](const std::string& data) { return sha256_hex(data); },
        py::arg("data"));

  // --- prompts -------------------------------------------------------------
  m.def(
      "prompt",
      [](const py::dict& instance, const std::string& task, const std::string& variant,
         bool concise, py::object behaviour, const std::string& templates_path) {
        TaskKind kind = task_from_name(task);
        TaskInstance inst = instance_from_dict(instance, kind);
        PromptVariant pv;
        pv.level = level_from_name(variant);
        pv.concise = concise;
        TemplateSet templates = TemplateSet::defaults();
        if (!templates_path.empty()) templates.apply_overrides_file(templates_path);
        BehaviourSpec spec;
        const BehaviourSpec* spec_ptr = nullptr;
        if (!behaviour.is_none()) {
          py::dict b = behaviour.cast<py::dict>();
          if (b.contains("api_names"))
            spec.api_names = b["api_names"].cast<std::vector<std::string>>();
          if (b.contains("uses_exceptions"))
            spec.uses_exceptions = b["uses_exceptions"].cast<bool>();
          spec_ptr = &spec;
        }
        return assemble(templates, kind, pv, inst, spec_ptr).joined();
      },
      py::arg("instance"), py::arg("task") = "t2c", py::arg("variant") = "task",
      py::arg("concise") = false, py::arg("behaviour") = py::none(),
      py::arg("templates") = "");

  m.def(
      "extraction_prompt",
      [](const std::string& kind, const std::string& code) {
        if (kind == "api") return extraction_prompt(ExtractionKind::ApiList, code);
        if (kind == "exceptions")
          return extraction_prompt(ExtractionKind::ExceptionHandling, code);
        throw py::value_error("kind must be 'api' or 'exceptions'");
      },
      py::arg("kind"), py::arg("code"));

  m.def(
      "variant_label",
      [](const std::string& variant, bool concise, const std::string& session) {
        PromptVariant pv;
        pv.level = level_from_name(variant);
        pv.concise = concise;
        SessionPolicy policy;
        policy.mode = session_mode_from_name(session);
        return variant_label(pv, policy);
      },
      py::arg("variant") = "task", py::arg("concise") = false,
      py::arg("session") = "individual");

  m.def(
      "session_partition",
      [](int prompts, const std::string& mode, int limit) {
        SessionPolicy policy;
        policy.mode = session_mode_from_name(mode);
        policy.max_prompts_per_session = limit;
        return session_partition(prompts, policy);
      },
      py::arg("prompts"), py::arg("mode") = "individual", py::arg("limit") = 20);

  // --- pipeline stages -------------------------------------------------------
  m.def(
      "generate",
      [](const py::dict& plan) {
        GenerateResult r = run_generate(plan_from_dict(plan));
        py::dict d;
        d["rounds"] = r.rounds;
        d["prompts_sent"] = r.prompts_sent;
        d["skipped"] = r.skipped;
        d["fixture_digest"] = r.fixture_digest;
        return d;
      },
      py::arg("plan"));

  m.def(
      "score",
      [](const std::string& run_dir, const std::vector<double>& weights, int max_n,
         const std::string& brevity, bool smoothing, const std::string& keywords_path,
         int jobs) {
        ScoreOptions opts;
        opts.bleu = bleu_config(max_n, brevity, smoothing);
        opts.weights = codebleu_weights(weights);
        opts.keywords_path = keywords_path;
        opts.jobs = jobs;
        py::list out;
        for (const RoundScore& rs : run_score(run_dir, opts)) {
          py::dict d = report_dict(rs.report);
          d["round"] = rs.round_index;
          d["skipped"] = rs.skipped;
          out.append(d);
        }
        return out;
      },
      py::arg("run_dir"), py::arg("weights") = std::vector<double>{0.25, 0.25, 0.25, 0.25},
      py::arg("max_n") = 4, py::arg("brevity") = "paper", py::arg("smoothing") = false,
      py::arg("keywords") = "", py::arg("jobs") = 1);

  m.def(
      "report",
      [](const std::vector<std::string>& run_dirs, const std::string& baseline,
         const std::string& out_dir) {
        ReportOptions opts;
        opts.baseline_label = baseline;
        opts.out_dir = out_dir;
        ReportResult r = run_report(run_dirs, opts);
        py::dict d;
        d["markdown"] = r.markdown_path;
        d["csv"] = r.csv_path;
        d["summary"] = r.summary_path;
        return d;
      },
      py::arg("run_dirs"), py::arg("baseline") = "", py::arg("out_dir") = "");
}
