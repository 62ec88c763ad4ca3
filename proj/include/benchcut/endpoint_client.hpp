#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace benchcut {

struct EndpointConfig {
  std::string base_url;  // e.g. "http://localhost:8000/v1"
  std::optional<std::string> api_key;
  std::string model_name;
  double timeout_s = 120.0;
  int max_retries = 2;
  double temperature = 0.0;
  std::optional<int> max_tokens;
  int backoff_base_ms = 500;  // doubled per retry, +-20% jitter

  void validate() const;  // throws UsageError
};

enum class RestrictionMode { words_approx, unlimited };

// Response-length regime: either leave the prompt alone or append an
// instruction asking for roughly n_words words.
struct Restriction {
  RestrictionMode mode = RestrictionMode::unlimited;
  std::string instruction_template = "Answer in approximately {n} words.";
  int n_words = 50;

  // "50" / "none": the restriction component of a cell key.
  std::string key() const;
};

// unlimited: identity. words_approx: prompt + "\n" + template with {n}
// substituted. Apply exactly once per request; applying twice appends twice.
std::string apply_restriction(const std::string& prompt, const Restriction& r);

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct RawCompletion {
  std::string text;
  std::optional<TokenUsage> reported_usage;
  int http_status = 0;  // final, post-retry
};

// OpenAI-compatible chat-completions + embeddings client. Immutable after
// construction apart from the embedding cache, which is mutex-guarded.
class EndpointClient {
 public:
  explicit EndpointClient(EndpointConfig cfg,
                          const char* fallback_key_env = "BENCHCUT_API_KEY");
  ~EndpointClient();

  EndpointClient(const EndpointClient&) = delete;
  EndpointClient& operator=(const EndpointClient&) = delete;

  const EndpointConfig& config() const { return cfg_; }

  // POST {base_url}/chat/completions; first choice's message content.
  // Retries 5xx/connect failures up to max_retries; never retries 4xx.
  RawCompletion complete(const std::string& prompt) const;

  // Same transport semantics as complete; returns the text only.
  std::string fetch_reference(const std::string& prompt) const;

  // POST {base_url}/embeddings. Results cached by (model_name, text) for
  // the lifetime of the client.
  std::vector<double> embed(const std::string& text) const;

  std::size_t embed_cache_size() const;

 private:
  struct HttpResponse {
    int status = 0;
    std::string body;
  };
  HttpResponse post_with_retry(const std::string& path,
                               const std::string& body) const;

  EndpointConfig cfg_;
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // e.g. "/v1", may be empty

  mutable std::mutex cache_mu_;
  mutable std::unordered_map<std::string, std::vector<double>> embed_cache_;
};

}  // namespace benchcut
