#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "benchcut/corpus.hpp"
#include "benchcut/errors.hpp"
#include "benchcut/quality_metrics.hpp"

using namespace benchcut;
namespace fs = std::filesystem;

namespace {

// Exponential-time LCS by enumerating subsequences of the shorter side.
// Only usable for small inputs; serves as an independent check of the DP.
std::size_t lcs_brute(const std::vector<std::string>& a,
                      const std::vector<std::string>& b) {
  const auto& s = a.size() <= b.size() ? a : b;
  const auto& t = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << s.size()); ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (mask & (std::size_t{1} << i)) sub.push_back(s[i]);
    if (sub.size() <= best) continue;
    // Is sub a subsequence of t?
    std::size_t j = 0;
    for (const auto& w : t)
      if (j < sub.size() && w == sub[j]) ++j;
    if (j == sub.size()) best = sub.size();
  }
  return best;
}

std::vector<std::string> random_tokens(std::mt19937& rng, int n, int alphabet) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i)
    out.push_back(std::string(1, static_cast<char>('a' + rng() % alphabet)));
  return out;
}

std::string join(const std::vector<std::string>& toks) {
  std::string s;
  for (const auto& t : toks) {
    if (!s.empty()) s += ' ';
    s += t;
  }
  return s;
}

}  // namespace

TEST_CASE("rouge_tokenize lowercases and strips surrounding punctuation") {
  auto toks = rouge_tokenize("The cat, (quickly!) sat on \"the\" mat.");
  std::vector<std::string> want = {"the", "cat", "quickly", "sat",
                                   "on",  "the", "mat"};
  CHECK(toks == want);
  CHECK(rouge_tokenize("").empty());
  CHECK(rouge_tokenize("   \t ").empty());
  CHECK(rouge_tokenize("...") == std::vector<std::string>{});
  CHECK(rouge_tokenize("don't can't") ==
        std::vector<std::string>{"don't", "can't"});  // interior kept
  CHECK(rouge_tokenize("U.S.") == std::vector<std::string>{"u.s"});
}

TEST_CASE("lcs_len fixtures") {
  std::vector<std::string> a = {"the", "cat", "sat", "on", "the", "mat"};
  std::vector<std::string> b = {"the", "cat", "lay", "on", "the", "mat"};
  CHECK(lcs_len(a, b) == 5);
  CHECK(lcs_len(a, a) == 6);
  CHECK(lcs_len(a, {}) == 0);
  CHECK(lcs_len({}, {}) == 0);
  std::vector<std::string> c = {"x", "y", "z"};
  CHECK(lcs_len(a, c) == 0);
}

TEST_CASE("lcs_len matches a brute-force subsequence oracle") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 150; ++trial) {
    int na = 1 + static_cast<int>(rng() % 7);
    int nb = 1 + static_cast<int>(rng() % 7);  // combined <= 14
    auto a = random_tokens(rng, na, 3);
    auto b = random_tokens(rng, nb, 3);
    CHECK(lcs_len(a, b) == lcs_brute(a, b));
    CHECK(lcs_len(a, b) == lcs_len(b, a));
    CHECK(lcs_len(a, b) <= std::min(a.size(), b.size()));
  }
}

TEST_CASE("rouge_l fixtures") {
  // LCS=5, P=R=5/6, F1=5/6.
  CHECK(rouge_l("the cat sat on the mat", "the cat lay on the mat") ==
        doctest::Approx(5.0 / 6.0));
  CHECK(rouge_l("same words here", "same words here") == doctest::Approx(1.0));
  CHECK(rouge_l("", "anything at all") == 0.0);
  CHECK(rouge_l("anything at all", "") == 0.0);
  CHECK(rouge_l("alpha beta", "gamma delta") == 0.0);
  // Case and punctuation do not matter.
  CHECK(rouge_l("The CAT sat!", "the cat sat") == doctest::Approx(1.0));
  // Asymmetric lengths: cand "a b c d", ref "a c" -> LCS 2, P=1/2, R=1,
  // F1 = 2*(1/2)*1 / (3/2) = 2/3.
  CHECK(rouge_l("a b c d", "a c") == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("rouge_l properties") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = join(random_tokens(rng, 1 + rng() % 8, 4));
    auto b = join(random_tokens(rng, 1 + rng() % 8, 4));
    double ab = rouge_l(a, b), ba = rouge_l(b, a);
    CHECK(std::abs(ab - ba) < 1e-12);  // F1 is symmetric
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(rouge_l(a, a) == doctest::Approx(1.0));
  }
}

TEST_CASE("cosine fixtures and properties") {
  std::vector<double> x = {1, 0}, y = {0, 1}, z = {1, 1};
  CHECK(cosine(x, x) == doctest::Approx(1.0));
  CHECK(cosine(x, y) == doctest::Approx(0.0));
  CHECK(cosine(x, z) == doctest::Approx(1.0 / std::sqrt(2.0)));
  std::vector<double> neg = {-1, 0};
  CHECK(cosine(x, neg) == doctest::Approx(-1.0));

  std::vector<double> zero = {0, 0};
  CHECK_THROWS_AS(cosine(x, zero), UsageError);
  std::vector<double> threed = {1, 2, 3};
  CHECK_THROWS_AS(cosine(x, threed), UsageError);

  std::mt19937 rng(13);
  std::uniform_real_distribution<double> val(-5, 5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(8), b(8);
    for (auto& v : a) v = val(rng);
    for (auto& v : b) v = val(rng);
    double c = cosine(a, b);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    CHECK(std::abs(c - cosine(b, a)) < 1e-12);
    // Scale invariance.
    std::vector<double> a3(8);
    for (std::size_t i = 0; i < 8; ++i) a3[i] = 3.0 * a[i];
    CHECK(std::abs(c - cosine(a3, b)) < 1e-9);
    CHECK(cosine(a, a) == doctest::Approx(1.0));
  }
}

TEST_CASE("sts embeds both sides and returns their cosine") {
  Embedder embedder = [](const std::string& text) -> std::vector<double> {
    if (text == "hot") return {1, 0};
    if (text == "warm") return {1, 1};
    return {0, 1};
  };
  CHECK(sts("hot", "hot", embedder) == doctest::Approx(1.0));
  CHECK(sts("hot", "warm", embedder) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(sts("hot", "cold", embedder) == doctest::Approx(0.0));
  CHECK_THROWS_AS(sts("", "x", embedder), UsageError);
  CHECK_THROWS_AS(sts("x", "", embedder), UsageError);
}

TEST_CASE("score_store scores referenced runs and skips the rest") {
  auto make_run = [](const std::string& id, const std::string& text) {
    RunRecord r;
    r.cell_key = "2B/common/50";
    r.prompt_id = id;
    r.response_text = text;
    r.response_word_len = word_count(text);
    r.inference_time_s = 1.0;
    return r;
  };
  std::vector<RunRecord> runs = {
      make_run("p1", "the cat sat on the mat"),
      make_run("p2", "no reference for this one"),
      make_run("p3", ""),  // empty response, skipped even with a reference
      make_run("p4", "identical text"),
  };
  std::map<std::string, std::string> refs = {
      {"p1", "the cat lay on the mat"},
      {"p3", "something"},
      {"p4", "identical text"},
  };
  Embedder embedder = [](const std::string& text) {
    std::vector<double> v = {1.0, static_cast<double>(text.size() % 7)};
    return v;
  };
  ScoreResult result = score_store(runs, refs, embedder);
  REQUIRE(result.scores.size() == 2);
  CHECK(result.skipped == 2);
  CHECK(result.scores[0].prompt_id == "p1");
  CHECK(result.scores[0].cell_key == "2B/common/50");
  CHECK(result.scores[0].rouge_l == doctest::Approx(5.0 / 6.0));
  CHECK(result.scores[0].reference_word_len == 6);
  CHECK(result.scores[1].prompt_id == "p4");
  CHECK(result.scores[1].rouge_l == doctest::Approx(1.0));
  CHECK(result.scores[1].sts == doctest::Approx(1.0));
}

TEST_CASE("quality scores round-trip through jsonl") {
  QualityScores qs;
  qs.prompt_id = "p9";
  qs.cell_key = "7B/finance/none";
  qs.rouge_l = 0.42;
  qs.sts = -0.13;
  qs.reference_word_len = 55;
  QualityScores back = quality_scores_from_json_line(
      quality_scores_to_json_line(qs), 1);
  CHECK(back.prompt_id == qs.prompt_id);
  CHECK(back.cell_key == qs.cell_key);
  CHECK(back.rouge_l == qs.rouge_l);
  CHECK(back.sts == qs.sts);
  CHECK(back.reference_word_len == qs.reference_word_len);

  CHECK_THROWS_AS(quality_scores_from_json_line("not json", 3), ParseError);

  fs::path p = fs::temp_directory_path() /
               ("benchcut_scores_" + std::to_string(::getpid()) + ".jsonl");
  {
    std::ofstream out(p);
    out << quality_scores_to_json_line(qs) << "\n";
    out << quality_scores_to_json_line(qs) << "\n";
  }
  auto loaded = load_scores(p.string());
  CHECK(loaded.size() == 2);
  CHECK(loaded[1].cell_key == qs.cell_key);
  fs::remove(p);
  CHECK_THROWS_AS(load_scores("/nonexistent/scores.jsonl"), IoError);
}
