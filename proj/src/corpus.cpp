#include "benchcut/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "benchcut/errors.hpp"

namespace benchcut {

namespace {

using nlohmann::json;

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Minimal RFC 4180 reader: quoted fields, "" escapes, quoted newlines.
// Returns one row per record and the 1-based line number it started on.
struct CsvRow {
  std::vector<std::string> fields;
  std::size_t lineno = 0;
};

std::vector<CsvRow> parse_csv(std::istream& in) {
  std::vector<CsvRow> rows;
  std::string field;
  CsvRow row;
  row.lineno = 1;
  std::size_t lineno = 1;
  bool in_quotes = false;
  bool row_has_data = false;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row = CsvRow{};
    row.lineno = lineno;
    row_has_data = false;
  };

  char c;
  while (in.get(c)) {
    if (c == '\n') ++lineno;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_data = true;
        break;
      case ',':
        end_field();
        row_has_data = true;
        break;
      case '\r':
        break;
      case '\n':
        row.lineno = lineno - 1;
        end_row();
        row.lineno = lineno;
        break;
      default:
        field.push_back(c);
        row_has_data = true;
        break;
    }
  }
  if (in_quotes) throw ParseError("csv: unterminated quoted field");
  if (row_has_data || !row.fields.empty()) {
    row.lineno = lineno;
    end_row();
  }
  return rows;
}

void validate_and_add(Corpus& corpus, std::set<std::string>& seen,
                      PromptRecord rec, std::size_t lineno) {
  if (rec.id.empty())
    throw ParseError("line " + std::to_string(lineno) + ": empty \"id\"");
  if (word_count(rec.text) == 0)
    throw ParseError("line " + std::to_string(lineno) +
                     ": \"text\" must contain at least one word");
  if (!seen.insert(rec.id).second)
    throw ParseError("duplicate id \"" + rec.id + "\" at line " +
                     std::to_string(lineno));
  ++corpus.domain_counts[rec.domain.name()];
  corpus.records.push_back(std::move(rec));
}

Corpus load_jsonl(std::istream& in, const std::string& path) {
  Corpus corpus;
  corpus.source_path = path;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!obj.is_object())
      throw ParseError("line " + std::to_string(lineno) + ": expected an object");
    for (const char* key : {"id", "domain", "text"}) {
      if (!obj.contains(key))
        throw ParseError("line " + std::to_string(lineno) +
                         ": missing required field \"" + key + "\"");
      if (!obj[key].is_string())
        throw ParseError("line " + std::to_string(lineno) + ": field \"" + key +
                         "\" must be a string");
    }
    PromptRecord rec;
    rec.id = obj["id"].get<std::string>();
    rec.domain = Domain::parse(obj["domain"].get<std::string>());
    rec.text = obj["text"].get<std::string>();
    if (obj.contains("reference") && obj["reference"].is_string())
      rec.reference = obj["reference"].get<std::string>();
    validate_and_add(corpus, seen, std::move(rec), lineno);
  }
  return corpus;
}

Corpus load_csv(std::istream& in, const std::string& path) {
  auto rows = parse_csv(in);
  if (rows.empty()) throw ParseError("csv: missing header row");
  const auto& header = rows.front().fields;
  const std::vector<std::string> expected = {"id", "domain", "text", "reference"};
  if (header != expected)
    throw ParseError("csv: header must be exactly id,domain,text,reference");

  Corpus corpus;
  corpus.source_path = path;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != 4)
      throw ParseError("line " + std::to_string(row.lineno) + ": expected 4 fields, got " +
                       std::to_string(row.fields.size()));
    PromptRecord rec;
    rec.id = row.fields[0];
    rec.domain = Domain::parse(row.fields[1]);
    rec.text = row.fields[2];
    if (!row.fields[3].empty()) rec.reference = row.fields[3];
    validate_and_add(corpus, seen, std::move(rec), row.lineno);
  }
  return corpus;
}

}  // namespace

Domain Domain::parse(std::string_view name) {
  return Domain(to_lower(name));
}

bool Domain::is_builtin() const {
  return name_ == "common" || name_ == "cybersecurity" || name_ == "medical" ||
         name_ == "finance";
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    bool ws = std::isspace(c) != 0;
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

Corpus load_prompts(const std::string& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open prompt file: " + path);
  try {
    return format == CorpusFormat::jsonl ? load_jsonl(in, path) : load_csv(in, path);
  } catch (ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

FilterResult filter_prompts(const Corpus& corpus,
                            const std::vector<std::string>& blocklist) {
  for (const auto& entry : blocklist)
    if (entry.empty()) throw UsageError("blocklist entries must be non-empty");

  FilterResult result;
  result.corpus.source_path = corpus.source_path;
  for (const auto& rec : corpus.records) {
    std::string lowered = to_lower(rec.text);
    bool blocked = std::any_of(blocklist.begin(), blocklist.end(),
                               [&](const std::string& term) {
                                 return lowered.find(term) != std::string::npos;
                               });
    if (blocked) {
      ++result.removed;
    } else {
      ++result.corpus.domain_counts[rec.domain.name()];
      result.corpus.records.push_back(rec);
    }
  }
  return result;
}

}  // namespace benchcut
