#include "benchcut/endpoint_client.hpp"

#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "benchcut/errors.hpp"

namespace benchcut {

namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // no trailing slash
};

ParsedUrl parse_base_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw UsageError("base_url must include a scheme: " + url);
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw UsageError("unsupported scheme \"" + scheme + "\" in " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (url.find(':', scheme_end + 3) == std::string::npos &&
      url.size() == scheme_end + 3)
    throw UsageError("base_url has no host: " + url);
  ParsedUrl parsed;
  if (path_start == std::string::npos) {
    parsed.origin = url;
  } else {
    parsed.origin = url.substr(0, path_start);
    parsed.path_prefix = url.substr(path_start);
  }
  if (parsed.origin.size() <= scheme_end + 3)
    throw UsageError("base_url has no host: " + url);
  while (!parsed.path_prefix.empty() && parsed.path_prefix.back() == '/')
    parsed.path_prefix.pop_back();
  return parsed;
}

int backoff_ms(int base_ms, int attempt) {
  double delay = static_cast<double>(base_ms) * (1 << attempt);
  static thread_local std::mt19937 rng{std::random_device{}()};
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  return static_cast<int>(delay * jitter(rng));
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("response is not valid JSON: ") + e.what());
  }
}

}  // namespace

void EndpointConfig::validate() const {
  parse_base_url(base_url);
  if (timeout_s <= 0) throw UsageError("timeout must be > 0");
  if (max_retries < 0) throw UsageError("max_retries must be >= 0");
  if (temperature < 0) throw UsageError("temperature must be >= 0");
  if (model_name.empty()) throw UsageError("model_name must be set");
}

std::string Restriction::key() const {
  return mode == RestrictionMode::unlimited ? "none" : std::to_string(n_words);
}

std::string apply_restriction(const std::string& prompt, const Restriction& r) {
  if (r.mode == RestrictionMode::unlimited) return prompt;
  if (r.n_words < 1) throw UsageError("restriction n_words must be >= 1");
  auto pos = r.instruction_template.find("{n}");
  if (pos == std::string::npos)
    throw UsageError("restriction template lacks the {n} placeholder: " +
                     r.instruction_template);
  std::string instruction = r.instruction_template;
  instruction.replace(pos, 3, std::to_string(r.n_words));
  return prompt + "\n" + instruction;
}

EndpointClient::EndpointClient(EndpointConfig cfg, const char* fallback_key_env)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (!cfg_.api_key && fallback_key_env != nullptr) {
    if (const char* key = std::getenv(fallback_key_env); key && *key)
      cfg_.api_key = key;
  }
  auto parsed = parse_base_url(cfg_.base_url);
  origin_ = parsed.origin;
  path_prefix_ = parsed.path_prefix;
}

EndpointClient::~EndpointClient() = default;

EndpointClient::HttpResponse EndpointClient::post_with_retry(
    const std::string& path, const std::string& body) const {
  httplib::Client client(origin_);
  client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_s));
  client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_s));
  client.set_write_timeout(std::chrono::duration<double>(cfg_.timeout_s));
  httplib::Headers headers;
  if (cfg_.api_key) headers.emplace("Authorization", "Bearer " + *cfg_.api_key);

  std::string last_failure;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(backoff_ms(cfg_.backoff_base_ms, attempt - 1)));

    auto res = client.Post(path_prefix_ + path, headers, body, "application/json");
    if (!res) {
      auto err = res.error();
      if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
          err == httplib::Error::Write) {
        last_failure = "timeout talking to " + origin_;
      } else {
        last_failure = "connection to " + origin_ + " failed: " + httplib::to_string(err);
      }
      continue;  // connection-level failures are retryable
    }
    if (res->status == 401 || res->status == 403)
      throw AuthError("endpoint " + origin_ + " rejected credentials (HTTP " +
                      std::to_string(res->status) + ")");
    if (res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status) + " from " + origin_;
      continue;
    }
    if (res->status >= 400)
      throw TransportError("HTTP " + std::to_string(res->status) + " from " +
                           origin_ + path);
    return {res->status, res->body};
  }
  if (last_failure.find("timeout") == 0) throw TimeoutError(last_failure);
  throw TransportError("retries exhausted: " + last_failure);
}

RawCompletion EndpointClient::complete(const std::string& prompt) const {
  json body = {
      {"model", cfg_.model_name},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", cfg_.temperature},
  };
  if (cfg_.max_tokens) body["max_tokens"] = *cfg_.max_tokens;

  auto res = post_with_retry("/chat/completions", body.dump());
  json parsed = parse_body(res.body);
  if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
      parsed["choices"].empty())
    throw ProtocolError("completion response lacks choices");
  const auto& choice = parsed["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string())
    throw ProtocolError("completion response lacks message content");

  RawCompletion out;
  out.text = choice["message"]["content"].get<std::string>();
  out.http_status = res.status;
  if (parsed.contains("usage") && parsed["usage"].is_object()) {
    const auto& usage = parsed["usage"];
    TokenUsage u;
    u.prompt_tokens = usage.value("prompt_tokens", 0);
    u.completion_tokens = usage.value("completion_tokens", 0);
    out.reported_usage = u;
  }
  return out;
}

std::string EndpointClient::fetch_reference(const std::string& prompt) const {
  return complete(prompt).text;
}

std::vector<double> EndpointClient::embed(const std::string& text) const {
  if (text.empty()) throw UsageError("cannot embed an empty string");
  std::string cache_key = cfg_.model_name + '\x1f' + text;
  {
    std::scoped_lock lock(cache_mu_);
    if (auto it = embed_cache_.find(cache_key); it != embed_cache_.end())
      return it->second;
  }

  json body = {{"model", cfg_.model_name}, {"input", text}};
  auto res = post_with_retry("/embeddings", body.dump());
  json parsed = parse_body(res.body);
  if (!parsed.contains("data") || !parsed["data"].is_array() ||
      parsed["data"].empty() || !parsed["data"][0].contains("embedding") ||
      !parsed["data"][0]["embedding"].is_array())
    throw ProtocolError("embedding response lacks data[0].embedding");
  std::vector<double> vec =
      parsed["data"][0]["embedding"].get<std::vector<double>>();
  if (vec.empty()) throw ProtocolError("embedding endpoint returned an empty vector");

  std::scoped_lock lock(cache_mu_);
  embed_cache_.emplace(std::move(cache_key), vec);
  return vec;
}

std::size_t EndpointClient::embed_cache_size() const {
  std::scoped_lock lock(cache_mu_);
  return embed_cache_.size();
}

}  // namespace benchcut
