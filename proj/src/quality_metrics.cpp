#include "benchcut/quality_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "benchcut/corpus.hpp"
#include "benchcut/errors.hpp"

namespace benchcut {

namespace {

using nlohmann::json;

bool is_strippable_punct(unsigned char c) {
  return std::ispunct(c) != 0;
}

}  // namespace

std::string quality_scores_to_json_line(const QualityScores& qs) {
  json obj = {
      {"prompt_id", qs.prompt_id},
      {"cell_key", qs.cell_key},
      {"rouge_l", qs.rouge_l},
      {"sts", qs.sts},
      {"reference_word_len", qs.reference_word_len},
  };
  return obj.dump();
}

QualityScores quality_scores_from_json_line(const std::string& line,
                                            std::size_t lineno) {
  json obj;
  try {
    obj = json::parse(line);
    QualityScores qs;
    qs.prompt_id = obj.at("prompt_id").get<std::string>();
    qs.cell_key = obj.at("cell_key").get<std::string>();
    qs.rouge_l = obj.at("rouge_l").get<double>();
    qs.sts = obj.at("sts").get<double>();
    qs.reference_word_len = obj.at("reference_word_len").get<std::size_t>();
    return qs;
  } catch (const json::exception& e) {
    throw ParseError("scores line " + std::to_string(lineno) + ": " + e.what());
  }
}

std::vector<QualityScores> load_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scores file: " + path);
  std::vector<QualityScores> scores;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    scores.push_back(quality_scores_from_json_line(line, lineno));
  }
  return scores;
}

std::vector<std::string> rouge_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) break;
    std::string_view raw = text.substr(start, i - start);
    while (!raw.empty() && is_strippable_punct(static_cast<unsigned char>(raw.front())))
      raw.remove_prefix(1);
    while (!raw.empty() && is_strippable_punct(static_cast<unsigned char>(raw.back())))
      raw.remove_suffix(1);
    if (raw.empty()) continue;
    std::string token(raw);
    std::transform(token.begin(), token.end(), token.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    tokens.push_back(std::move(token));
  }
  return tokens;
}

std::size_t lcs_len(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  // Two-row dynamic program over positions in a and b.
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const std::string& candidate, const std::string& reference) {
  auto cand = rouge_tokenize(candidate);
  auto ref = rouge_tokenize(reference);
  if (cand.empty() || ref.empty()) return 0.0;
  double lcs = static_cast<double>(lcs_len(cand, ref));
  if (lcs == 0.0) return 0.0;
  double precision = lcs / static_cast<double>(cand.size());
  double recall = lcs / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw UsageError("cosine: dimension mismatch (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  if (a.empty()) throw UsageError("cosine: empty vectors");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw UsageError("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double sts(const std::string& candidate, const std::string& reference,
           const Embedder& embedder) {
  if (candidate.empty() || reference.empty())
    throw UsageError("sts: candidate and reference must be non-empty");
  auto a = embedder(candidate);
  auto b = embedder(reference);
  return cosine(a, b);
}

ScoreResult score_store(const std::vector<RunRecord>& runs,
                        const std::map<std::string, std::string>& references,
                        const Embedder& embedder) {
  ScoreResult result;
  for (const auto& run : runs) {
    auto it = references.find(run.prompt_id);
    if (it == references.end() || it->second.empty() || run.response_text.empty()) {
      ++result.skipped;
      continue;
    }
    QualityScores qs;
    qs.prompt_id = run.prompt_id;
    qs.cell_key = run.cell_key;
    qs.rouge_l = rouge_l(run.response_text, it->second);
    qs.sts = sts(run.response_text, it->second, embedder);
    qs.reference_word_len = word_count(it->second);
    result.scores.push_back(std::move(qs));
  }
  return result;
}

}  // namespace benchcut
