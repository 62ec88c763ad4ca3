#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace benchcut {

// Prompt domain. The four names the harness knows about are canonical;
// anything else is carried through as a custom domain so users are not
// limited to the built-in set.
class Domain {
 public:
  Domain() = default;
  static Domain parse(std::string_view name);

  const std::string& name() const { return name_; }
  bool is_builtin() const;

  auto operator<=>(const Domain&) const = default;

 private:
  explicit Domain(std::string name) : name_(std::move(name)) {}
  std::string name_;
};

struct PromptRecord {
  std::string id;  // unique within a corpus
  Domain domain;
  std::string text;  // >= 1 word
  std::optional<std::string> reference;  // reference-model response, if known
};

struct Corpus {
  std::vector<PromptRecord> records;  // load order
  std::string source_path;
  std::map<std::string, std::size_t> domain_counts;
};

enum class CorpusFormat { jsonl, csv };

// Number of maximal non-whitespace runs in text.
std::size_t word_count(std::string_view text);

// Loads one PromptRecord per data row, in file order.
// Throws IoError / ParseError (with 1-based line number) / duplicate-id ParseError.
Corpus load_prompts(const std::string& path, CorpusFormat format);

struct FilterResult {
  Corpus corpus;
  std::size_t removed = 0;
};

// Retains records whose lowercased text contains no blocklist substring.
// The input corpus is left untouched.
FilterResult filter_prompts(const Corpus& corpus,
                            const std::vector<std::string>& blocklist);

}  // namespace benchcut
