#include "benchcut/mock_server.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "benchcut/corpus.hpp"
#include "benchcut/errors.hpp"
#include "benchcut/quality_metrics.hpp"

namespace benchcut {

namespace {

using nlohmann::json;

const char* kFillerWords[] = {
    "alpha", "bravo",  "charlie", "delta", "echo",   "foxtrot", "golf",  "hotel",
    "india", "juliet", "kilo",    "lima",  "mike",   "november", "oscar", "papa"};

std::string first_token(const std::string& text) {
  std::istringstream in(text);
  std::string token;
  in >> token;
  return token;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

MockModelServer::MockModelServer() : MockModelServer(Options()) {}

MockModelServer::MockModelServer(Options opts) : opts_(std::move(opts)) {}

MockModelServer::~MockModelServer() {
  stop();
}

int MockModelServer::delay_ms_for_prompt(const std::string& prompt) const {
  std::string token = first_token(prompt);
  if (token.size() >= 2 && token[0] == 'q') {
    bool digits = true;
    for (std::size_t i = 1; i < token.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(token[i]))) digits = false;
    if (digits) {
      long k = std::stol(token.substr(1));
      if (k >= 1)
        return opts_.delay_schedule_ms[static_cast<std::size_t>(k - 1) %
                                       opts_.delay_schedule_ms.size()];
    }
  }
  return opts_.default_delay_ms;
}

std::string MockModelServer::response_for(const std::string& prompt,
                                          const std::string& model) const {
  double wps = 80.0;
  if (auto it = opts_.words_per_second.find(model); it != opts_.words_per_second.end())
    wps = it->second;
  int delay_ms = delay_ms_for_prompt(prompt);
  int words = std::max(1, static_cast<int>(std::lround(delay_ms / 1000.0 * wps)));
  if (prompt.find("approximately") != std::string::npos)
    words = std::min(words, opts_.restricted_cap_words);
  std::string text;
  for (int i = 0; i < words; ++i) {
    if (i > 0) text += ' ';
    text += kFillerWords[i % 16];
  }
  return text;
}

std::vector<double> MockModelServer::embedding_for(const std::string& text) const {
  std::vector<double> vec(static_cast<std::size_t>(opts_.embedding_dim), 0.0);
  for (const auto& token : rouge_tokenize(text))
    vec[fnv1a(token) % vec.size()] += 1.0;
  bool all_zero = true;
  for (double v : vec) all_zero &= v == 0.0;
  if (all_zero) vec[0] = 1.0;
  return vec;
}

int MockModelServer::start() {
  server_ = std::make_unique<httplib::Server>();

  server_->Post("/chat/completions", [this](const httplib::Request& req,
                                            httplib::Response& res) {
    ++chat_requests_;
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      res.status = 400;
      return;
    }
    std::string model = body.value("model", std::string{});
    std::string prompt;
    if (body.contains("messages") && body["messages"].is_array() &&
        !body["messages"].empty())
      prompt = body["messages"][0].value("content", std::string{});
    std::this_thread::sleep_for(
        std::chrono::milliseconds(delay_ms_for_prompt(prompt)));
    std::string text = response_for(prompt, model);
    json out = {
        {"choices",
         json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}})},
        {"usage",
         {{"prompt_tokens", word_count(prompt)},
          {"completion_tokens", word_count(text)}}},
    };
    res.set_content(out.dump(), "application/json");
  });

  server_->Post("/embeddings", [this](const httplib::Request& req,
                                      httplib::Response& res) {
    ++embed_requests_;
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      res.status = 400;
      return;
    }
    std::string input = body.value("input", std::string{});
    json out = {{"data", json::array({{{"embedding", embedding_for(input)}}})}};
    res.set_content(out.dump(), "application/json");
  });

  if (opts_.port != 0) {
    if (!server_->bind_to_port("127.0.0.1", opts_.port))
      throw IoError("mock server failed to bind port " +
                    std::to_string(opts_.port));
    port_ = opts_.port;
  } else {
    port_ = server_->bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw IoError("mock server failed to bind a port");
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockModelServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

std::string MockModelServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

}  // namespace benchcut
