#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "benchcut/run_store.hpp"

namespace benchcut {

// ROUGE-L F1 and embedding-cosine STS for one response.
struct QualityScores {
  std::string prompt_id;
  std::string cell_key;
  double rouge_l = 0.0;  // [0, 1]
  double sts = 0.0;      // [-1, 1]
  std::size_t reference_word_len = 0;
};

std::string quality_scores_to_json_line(const QualityScores& qs);
QualityScores quality_scores_from_json_line(const std::string& line,
                                            std::size_t lineno);
std::vector<QualityScores> load_scores(const std::string& path);

// Lowercase, split on whitespace, strip leading/trailing punctuation from
// each token. Absolute ROUGE values depend on this rule.
std::vector<std::string> rouge_tokenize(std::string_view text);

// Longest common subsequence length, O(|a|*|b|) dynamic program.
std::size_t lcs_len(std::span<const std::string> a, std::span<const std::string> b);

// ROUGE-L F1 (beta = 1): P = LCS/|cand|, R = LCS/|ref|, F1 = 2PR/(P+R).
// 0 if either side is empty or the LCS is empty.
double rouge_l(const std::string& candidate, const std::string& reference);

// dot(a,b) / (|a||b|), clamped to [-1, 1]. Throws on dimension mismatch
// or a zero vector.
double cosine(std::span<const double> a, std::span<const double> b);

using Embedder = std::function<std::vector<double>(const std::string&)>;

// Embedding cosine between candidate and reference. Both must be non-empty.
double sts(const std::string& candidate, const std::string& reference,
           const Embedder& embedder);

struct ScoreResult {
  std::vector<QualityScores> scores;
  std::size_t skipped = 0;
};

// One QualityScores per run whose prompt_id has a reference; runs without
// one are counted and skipped.
ScoreResult score_store(const std::vector<RunRecord>& runs,
                        const std::map<std::string, std::string>& references,
                        const Embedder& embedder);

}  // namespace benchcut
