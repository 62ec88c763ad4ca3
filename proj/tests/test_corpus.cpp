#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <random>
#include <string>

#include "benchcut/corpus.hpp"
#include "benchcut/errors.hpp"

using namespace benchcut;
namespace fs = std::filesystem;

namespace {

// Writes content to a fresh temp file and cleans it up on destruction.
struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& content, const char* ext = ".jsonl") {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("benchcut_corpus_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++) + ext);
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { fs::remove(path); }
};

}  // namespace

TEST_CASE("word_count basics") {
  CHECK(word_count("") == 0);
  CHECK(word_count("hello   world ") == 2);
  CHECK(word_count("a b c d e") == 5);
  CHECK(word_count("   \t\n ") == 0);
}

TEST_CASE("word_count properties") {
  std::mt19937 rng(42);
  std::uniform_int_distribution<int> len(1, 8), ws(1, 3);
  auto random_words = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) {
      if (i > 0)
        for (int j = 0; j < ws(rng); ++j) s += " \t"[rng() % 2];
      for (int j = 0; j < len(rng); ++j) s += static_cast<char>('a' + rng() % 26);
    }
    return s;
  };
  for (int trial = 0; trial < 200; ++trial) {
    int na = 1 + static_cast<int>(rng() % 10), nb = 1 + static_cast<int>(rng() % 10);
    std::string a = random_words(na), b = random_words(nb);
    CHECK(word_count(a) == static_cast<std::size_t>(na));
    // Concatenation additivity and whitespace invariance.
    CHECK(word_count(a + " " + b) == word_count(a) + word_count(b));
    CHECK(word_count("  " + a + "\t\n") == word_count(a));
  }
}

TEST_CASE("load_prompts jsonl happy path") {
  TempFile f(R"({"id":"p1","domain":"common","text":"what is life"}
{"id":"p2","domain":"finance","text":"what is a bond","reference":"a debt instrument"}
)");
  Corpus c = load_prompts(f.path.string(), CorpusFormat::jsonl);
  REQUIRE(c.records.size() == 2);
  CHECK(c.records[0].id == "p1");
  CHECK(c.records[0].domain.name() == "common");
  CHECK(c.records[0].domain.is_builtin());
  CHECK(!c.records[0].reference.has_value());
  CHECK(c.records[1].reference == "a debt instrument");
  CHECK(c.domain_counts.at("common") == 1);
  CHECK(c.domain_counts.at("finance") == 1);
}

TEST_CASE("load_prompts is deterministic and order-preserving") {
  std::string body;
  for (int i = 0; i < 20; ++i)
    body += R"({"id":"p)" + std::to_string(i) +
            R"(","domain":"medical","text":"q )" + std::to_string(i) + "\"}\n";
  TempFile f(body);
  Corpus a = load_prompts(f.path.string(), CorpusFormat::jsonl);
  Corpus b = load_prompts(f.path.string(), CorpusFormat::jsonl);
  REQUIRE(a.records.size() == 20);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].id == b.records[i].id);
    CHECK(a.records[i].id == "p" + std::to_string(i));
  }
}

TEST_CASE("load_prompts reports the offending line") {
  TempFile f(R"({"id":"p1","domain":"common","text":"ok"}
{"id":"p2","domain":"common","text":"ok"}
{"id":"p3","domain":"common"}
)");
  CHECK_THROWS_WITH_AS(load_prompts(f.path.string(), CorpusFormat::jsonl),
                       doctest::Contains("line 3"), ParseError);
}

TEST_CASE("load_prompts rejects duplicate ids by name") {
  TempFile f(R"({"id":"dup","domain":"common","text":"a"}
{"id":"dup","domain":"common","text":"b"}
)");
  CHECK_THROWS_WITH_AS(load_prompts(f.path.string(), CorpusFormat::jsonl),
                       doctest::Contains("dup"), ParseError);
}

TEST_CASE("load_prompts missing file") {
  CHECK_THROWS_AS(load_prompts("/nonexistent/prompts.jsonl", CorpusFormat::jsonl),
                  IoError);
}

TEST_CASE("unknown domains become custom") {
  TempFile f(R"({"id":"p1","domain":"Astronomy","text":"what is a star"}
)");
  Corpus c = load_prompts(f.path.string(), CorpusFormat::jsonl);
  CHECK(c.records[0].domain.name() == "astronomy");
  CHECK(!c.records[0].domain.is_builtin());
}

TEST_CASE("load_prompts csv with quoting") {
  TempFile f(
      "id,domain,text,reference\n"
      "p1,common,\"what, pray tell, is life\",\n"
      "p2,cybersecurity,\"the attacker runs \"\"mimikatz\"\"\",dumped creds\n",
      ".csv");
  Corpus c = load_prompts(f.path.string(), CorpusFormat::csv);
  REQUIRE(c.records.size() == 2);
  CHECK(c.records[0].text == "what, pray tell, is life");
  CHECK(!c.records[0].reference.has_value());
  CHECK(c.records[1].text == "the attacker runs \"mimikatz\"");
  CHECK(c.records[1].reference == "dumped creds");
}

TEST_CASE("load_prompts csv requires the exact header") {
  TempFile f("id,text,domain,reference\np1,x,common,\n", ".csv");
  CHECK_THROWS_AS(load_prompts(f.path.string(), CorpusFormat::csv), ParseError);
}

TEST_CASE("filter_prompts case-insensitive substring") {
  TempFile f(R"({"id":"p1","domain":"common","text":"how to Kill a process"}
{"id":"p2","domain":"common","text":"how to bake bread"}
{"id":"p3","domain":"common","text":"skills and drills"}
)");
  Corpus c = load_prompts(f.path.string(), CorpusFormat::jsonl);

  FilterResult r = filter_prompts(c, {"kill"});
  CHECK(r.removed == 2);  // "Kill" and the "kill" inside "skills"
  REQUIRE(r.corpus.records.size() == 1);
  CHECK(r.corpus.records[0].id == "p2");
  CHECK(c.records.size() == 3);  // original untouched

  SUBCASE("empty blocklist is identity") {
    FilterResult same = filter_prompts(c, {});
    CHECK(same.removed == 0);
    CHECK(same.corpus.records.size() == c.records.size());
  }
  SUBCASE("blocklist hitting everything") {
    FilterResult none = filter_prompts(c, {"how", "skills"});
    CHECK(none.removed == 3);
    CHECK(none.corpus.records.empty());
  }
  SUBCASE("order preserved and subset") {
    FilterResult sub = filter_prompts(c, {"bread"});
    REQUIRE(sub.corpus.records.size() == 2);
    CHECK(sub.corpus.records[0].id == "p1");
    CHECK(sub.corpus.records[1].id == "p3");
  }
  SUBCASE("empty blocklist entry rejected") {
    CHECK_THROWS_AS(filter_prompts(c, {""}), UsageError);
  }
}

TEST_CASE("a 2019-row corpus loads fully") {
  std::string body;
  for (int i = 0; i < 2019; ++i)
    body += R"({"id":"c)" + std::to_string(i) +
            R"(","domain":"cybersecurity","text":"procedure )" +
            std::to_string(i) + "\"}\n";
  TempFile f(body);
  Corpus c = load_prompts(f.path.string(), CorpusFormat::jsonl);
  CHECK(c.records.size() == 2019);
  CHECK(c.domain_counts.at("cybersecurity") == 2019);
}
