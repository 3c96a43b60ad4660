#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cgbench/analysis.hpp"

namespace cgbench {

// Brevity penalty flavor. PaperRatio is the plain length ratio
// (candidate/reference, capped at 1); Standard is exp(1 - r/c).
enum class BrevityMode { PaperRatio, Standard };

struct BleuConfig {
  int max_n = 4;
  BrevityMode brevity = BrevityMode::PaperRatio;
  bool smoothing = false;  // add-one on orders >= 2 (sentence-level use)
};

// Sentence-level BLEU in [0, 100]. Throws std::invalid_argument on an empty
// reference; an empty candidate scores 0.
double bleu(const std::vector<std::string>& candidate,
            const std::vector<std::string>& reference, const BleuConfig& cfg = {});

// Corpus-level BLEU: n-gram counts and lengths pool across pairs and the
// brevity penalty applies once. A single added pair scores identically to
// bleu() under the same config.
class BleuAccumulator {
 public:
  explicit BleuAccumulator(int max_n = 4);
  void add_pair(const std::vector<std::string>& candidate,
                const std::vector<std::string>& reference);
  double score(const BleuConfig& cfg = {}) const;
  int pairs() const { return pairs_; }

 private:
  int max_n_;
  std::vector<long long> clipped_, total_;
  long long cand_len_ = 0, ref_len_ = 0;
  int pairs_ = 0;
};

// Token weighting for the keyword-aware n-gram component: reserved words
// carry full weight, everything else a fraction.
struct TokenWeights {
  const std::unordered_set<std::string>* keyword_set = nullptr;
  double keyword_weight = 1.0;
  double other_weight = 0.2;

  double of(const std::string& token) const {
    return keyword_set && keyword_set->count(token) ? keyword_weight : other_weight;
  }
};

class WeightedBleuAccumulator {
 public:
  explicit WeightedBleuAccumulator(int max_n = 4);
  void add_pair(const std::vector<std::string>& candidate,
                const std::vector<std::string>& reference, const TokenWeights& weights);
  double score(const BleuConfig& cfg = {}) const;

 private:
  int max_n_;
  std::vector<double> clipped_, total_;
  long long cand_len_ = 0, ref_len_ = 0;
};

// Syntactic and semantic sub-metric helpers (values in [0, 1]).
double ast_match(const std::map<std::string, int>& candidate,
                 const std::map<std::string, int>& reference);
double dataflow_match(const std::vector<DataflowEdge>& candidate,
                      const std::vector<DataflowEdge>& reference);

struct CodeBleuWeights {
  double ngram = 0.25;
  double weighted_ngram = 0.25;
  double ast = 0.25;
  double dataflow = 0.25;
};

struct SubScores {
  double ngram = 0;           // [0,1]
  double weighted_ngram = 0;  // [0,1]
  double ast = 0;             // [0,1]
  double dataflow = 0;        // [0,1]
};

struct PairBreakdown {
  double bleu = 0;      // [0,100]
  double codebleu = 0;  // [0,100]
  SubScores subs;
};

// CodeBLEU for one candidate/reference pair of parsed units.
PairBreakdown codebleu(const CodeUnit& candidate, const CodeUnit& reference,
                       const CodeBleuWeights& weights = {}, const BleuConfig& cfg = {},
                       const TokenWeights* token_weights = nullptr);

struct MetricReport {
  double bleu = 0;
  double codebleu = 0;
  SubScores subs;
  int n_pairs = 0;
};

// Corpus scoring: the two n-gram components pool counts across pairs; the
// tree and dataflow components average per pair.
class CorpusScorer {
 public:
  explicit CorpusScorer(const BleuConfig& cfg = {}, const CodeBleuWeights& weights = {},
                        const TokenWeights* token_weights = nullptr);
  PairBreakdown add(const CodeUnit& candidate, const CodeUnit& reference);
  MetricReport finish() const;  // throws std::invalid_argument when empty

 private:
  BleuConfig cfg_;
  CodeBleuWeights weights_;
  TokenWeights token_weights_;
  BleuAccumulator ngram_;
  WeightedBleuAccumulator weighted_;
  double ast_sum_ = 0, dataflow_sum_ = 0;
  int pairs_ = 0;
};

// "05.63"-style fixed-point rendering: two decimals, integer part padded to
// at least two digits.
std::string format_score(double value);

// Percent change from base to next.
double relative_delta_value(double next, double base);  // throws when base <= 0

// Signed, padded percent string: "+283.48%", "-00.88%", "+00.00%".
std::string format_delta(double percent);
std::string relative_delta(double next, double base);

}  // namespace cgbench
