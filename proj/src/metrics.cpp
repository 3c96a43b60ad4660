#include "cgbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cgbench {

namespace {

// n-gram key: tokens joined on an unlikely separator byte
std::string gram_key(const std::vector<std::string>& toks, size_t from, int n) {
  std::string key;
  for (int k = 0; k < n; ++k) {
    if (k) key.push_back('\x1f');
    key += toks[from + k];
  }
  return key;
}

std::unordered_map<std::string, int> count_grams(const std::vector<std::string>& toks,
                                                 int n) {
  std::unordered_map<std::string, int> counts;
  if (static_cast<int>(toks.size()) >= n) {
    for (size_t i = 0; i + n <= toks.size(); ++i) counts[gram_key(toks, i, n)] += 1;
  }
  return counts;
}

double brevity_penalty(BrevityMode mode, long long cand_len, long long ref_len) {
  if (cand_len >= ref_len) return 1.0;
  if (cand_len == 0) return 0.0;
  if (mode == BrevityMode::PaperRatio)
    return static_cast<double>(cand_len) / static_cast<double>(ref_len);
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
}

// Geometric mean of the modified precisions times the brevity penalty.
// Orders where the candidate has no n-grams at all (shorter than n) fall out
// of the mean instead of zeroing it, so a short identical pair still scores
// 100; an order with n-grams but no matches still zeroes the score unless
// smoothing is on.
template <typename Num>
double finish_bleu(const std::vector<Num>& clipped, const std::vector<Num>& total,
                   long long cand_len, long long ref_len, const BleuConfig& cfg) {
  if (cand_len == 0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (int i = 0; i < cfg.max_n; ++i) {
    double num = static_cast<double>(clipped[i]);
    double den = static_cast<double>(total[i]);
    if (den <= 0.0) continue;
    if (cfg.smoothing && i >= 1) {
      num += 1.0;
      den += 1.0;
    }
    if (num <= 0.0) return 0.0;
    log_sum += std::log(num / den);
    ++orders;
  }
  if (orders == 0) return 0.0;
  double geo = std::exp(log_sum / orders);
  return 100.0 * brevity_penalty(cfg.brevity, cand_len, ref_len) * geo;
}

}  // namespace

BleuAccumulator::BleuAccumulator(int max_n)
    : max_n_(max_n), clipped_(max_n, 0), total_(max_n, 0) {
  if (max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");
}

void BleuAccumulator::add_pair(const std::vector<std::string>& candidate,
                               const std::vector<std::string>& reference) {
  if (reference.empty()) throw std::invalid_argument("bleu: empty reference");
  cand_len_ += static_cast<long long>(candidate.size());
  ref_len_ += static_cast<long long>(reference.size());
  for (int n = 1; n <= max_n_; ++n) {
    auto cand_counts = count_grams(candidate, n);
    auto ref_counts = count_grams(reference, n);
    long long clipped = 0, total = 0;
    for (const auto& [gram, c] : cand_counts) {
      total += c;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) clipped += std::min(c, it->second);
    }
    clipped_[n - 1] += clipped;
    total_[n - 1] += total;
  }
  ++pairs_;
}

double BleuAccumulator::score(const BleuConfig& cfg) const {
  if (pairs_ == 0) throw std::invalid_argument("bleu: no pairs scored");
  if (cfg.max_n != max_n_) throw std::invalid_argument("bleu: max_n mismatch");
  return finish_bleu(clipped_, total_, cand_len_, ref_len_, cfg);
}

double bleu(const std::vector<std::string>& candidate,
            const std::vector<std::string>& reference, const BleuConfig& cfg) {
  BleuAccumulator acc(cfg.max_n);
  acc.add_pair(candidate, reference);
  return acc.score(cfg);
}

WeightedBleuAccumulator::WeightedBleuAccumulator(int max_n)
    : max_n_(max_n), clipped_(max_n, 0.0), total_(max_n, 0.0) {
  if (max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");
}

void WeightedBleuAccumulator::add_pair(const std::vector<std::string>& candidate,
                                       const std::vector<std::string>& reference,
                                       const TokenWeights& weights) {
  if (reference.empty()) throw std::invalid_argument("bleu: empty reference");
  cand_len_ += static_cast<long long>(candidate.size());
  ref_len_ += static_cast<long long>(reference.size());
  for (int n = 1; n <= max_n_; ++n) {
    auto cand_counts = count_grams(candidate, n);
    auto ref_counts = count_grams(reference, n);
    double clipped = 0, total = 0;
    for (const auto& [gram, c] : cand_counts) {
      // mean token weight of the gram
      double w = 0;
      int k = 0;
      size_t start = 0;
      while (true) {
        size_t sep = gram.find('\x1f', start);
        std::string tok = gram.substr(start, sep == std::string::npos ? sep : sep - start);
        w += weights.of(tok);
        ++k;
        if (sep == std::string::npos) break;
        start = sep + 1;
      }
      w /= k;
      total += w * c;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) clipped += w * std::min(c, it->second);
    }
    clipped_[n - 1] += clipped;
    total_[n - 1] += total;
  }
}

double WeightedBleuAccumulator::score(const BleuConfig& cfg) const {
  if (cfg.max_n != max_n_) throw std::invalid_argument("bleu: max_n mismatch");
  return finish_bleu(clipped_, total_, cand_len_, ref_len_, cfg);
}

double ast_match(const std::map<std::string, int>& candidate,
                 const std::map<std::string, int>& reference) {
  long long ref_total = 0, matched = 0;
  for (const auto& [sig, count] : reference) {
    ref_total += count;
    auto it = candidate.find(sig);
    if (it != candidate.end()) matched += std::min(count, it->second);
  }
  if (ref_total == 0) return 1.0;
  return static_cast<double>(matched) / static_cast<double>(ref_total);
}

double dataflow_match(const std::vector<DataflowEdge>& candidate,
                      const std::vector<DataflowEdge>& reference) {
  if (reference.empty()) return 1.0;  // nothing to get wrong
  std::vector<DataflowEdge> c = candidate, r = reference;
  std::sort(c.begin(), c.end());
  std::sort(r.begin(), r.end());
  std::vector<DataflowEdge> both;
  std::set_intersection(c.begin(), c.end(), r.begin(), r.end(), std::back_inserter(both));
  return static_cast<double>(both.size()) / static_cast<double>(r.size());
}

PairBreakdown codebleu(const CodeUnit& candidate, const CodeUnit& reference,
                       const CodeBleuWeights& weights, const BleuConfig& cfg,
                       const TokenWeights* token_weights) {
  TokenWeights tw;
  if (token_weights)
    tw = *token_weights;
  else
    tw.keyword_set = &keywords(reference.language);

  auto cand_toks = candidate.lexemes();
  auto ref_toks = reference.lexemes();

  PairBreakdown out;
  out.subs.ngram = bleu(cand_toks, ref_toks, cfg) / 100.0;
  WeightedBleuAccumulator wacc(cfg.max_n);
  wacc.add_pair(cand_toks, ref_toks, tw);
  out.subs.weighted_ngram = wacc.score(cfg) / 100.0;
  out.subs.ast = ast_match(ast_subtrees(candidate), ast_subtrees(reference));
  out.subs.dataflow = dataflow_match(dataflow_edges(candidate), dataflow_edges(reference));

  out.bleu = out.subs.ngram * 100.0;
  out.codebleu = 100.0 * (weights.ngram * out.subs.ngram +
                          weights.weighted_ngram * out.subs.weighted_ngram +
                          weights.ast * out.subs.ast + weights.dataflow * out.subs.dataflow);
  return out;
}

CorpusScorer::CorpusScorer(const BleuConfig& cfg, const CodeBleuWeights& weights,
                           const TokenWeights* token_weights)
    : cfg_(cfg), weights_(weights), ngram_(cfg.max_n), weighted_(cfg.max_n) {
  if (token_weights) token_weights_ = *token_weights;
}

PairBreakdown CorpusScorer::add(const CodeUnit& candidate, const CodeUnit& reference) {
  TokenWeights tw = token_weights_;
  if (!tw.keyword_set) tw.keyword_set = &keywords(reference.language);

  auto cand_toks = candidate.lexemes();
  auto ref_toks = reference.lexemes();
  ngram_.add_pair(cand_toks, ref_toks);
  weighted_.add_pair(cand_toks, ref_toks, tw);

  PairBreakdown pair = codebleu(candidate, reference, weights_, cfg_,
                                tw.keyword_set ? &tw : nullptr);
  ast_sum_ += pair.subs.ast;
  dataflow_sum_ += pair.subs.dataflow;
  ++pairs_;
  return pair;
}

MetricReport CorpusScorer::finish() const {
  if (pairs_ == 0) throw std::invalid_argument("corpus score: no pairs");
  MetricReport r;
  r.n_pairs = pairs_;
  r.subs.ngram = ngram_.score(cfg_) / 100.0;
  r.subs.weighted_ngram = weighted_.score(cfg_) / 100.0;
  r.subs.ast = ast_sum_ / pairs_;
  r.subs.dataflow = dataflow_sum_ / pairs_;
  r.bleu = r.subs.ngram * 100.0;
  r.codebleu = 100.0 * (weights_.ngram * r.subs.ngram +
                        weights_.weighted_ngram * r.subs.weighted_ngram +
                        weights_.ast * r.subs.ast + weights_.dataflow * r.subs.dataflow);
  return r;
}

std::string format_score(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("format_score: non-finite value");
  long long cents = std::llround(value * 100.0);
  if (cents < 0) throw std::invalid_argument("format_score: negative value");
  long long ip = cents / 100, fp = cents % 100;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%02lld.%02lld", ip, fp);
  return buf;
}

double relative_delta_value(double next, double base) {
  if (!(base > 0.0)) throw std::domain_error("relative delta: base must be positive");
  return 100.0 * (next - base) / base;
}

std::string format_delta(double percent) {
  if (!std::isfinite(percent)) throw std::invalid_argument("format_delta: non-finite value");
  long long cents = std::llround(percent * 100.0);
  char sign = cents < 0 ? '-' : '+';
  long long mag = cents < 0 ? -cents : cents;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%c%02lld.%02lld%%", sign, mag / 100, mag % 100);
  return buf;
}

std::string relative_delta(double next, double base) {
  return format_delta(relative_delta_value(next, base));
}

}  // namespace cgbench
