#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace benchcut {

// Deterministic OpenAI-shaped mock: a chat-completions endpoint with
// scripted per-prompt delays and response lengths, plus a hash-based
// embeddings endpoint. Used by the acceptance suite and by benchcut-mockd
// so the CLI can be exercised without a real model server.
//
// Delay script: a prompt whose first token is "q<k>" sleeps
// delay_schedule_ms[(k-1) % size]; anything else sleeps default_delay_ms.
// Response length: round(delay_s * words_per_second[model]), capped at
// restricted_cap words when the prompt carries the "approximately" length
// instruction.
class MockModelServer {
 public:
  struct Options {
    std::map<std::string, double> words_per_second = {{"mock-fast", 100.0},
                                                      {"mock-slow", 60.0}};
    std::vector<int> delay_schedule_ms = {100, 150, 200, 300, 400};
    int default_delay_ms = 50;
    int restricted_cap_words = 30;
    int embedding_dim = 8;
    int port = 0;  // 0 = ephemeral
  };

  MockModelServer();
  explicit MockModelServer(Options opts);
  ~MockModelServer();

  MockModelServer(const MockModelServer&) = delete;
  MockModelServer& operator=(const MockModelServer&) = delete;

  // Binds 127.0.0.1 on an ephemeral port and serves on a background thread.
  int start();
  void stop();

  int port() const { return port_; }
  std::string base_url() const;

  int delay_ms_for_prompt(const std::string& prompt) const;
  // The exact text the mock returns for this prompt and model.
  std::string response_for(const std::string& prompt, const std::string& model) const;
  // The embedding the mock returns for this text.
  std::vector<double> embedding_for(const std::string& text) const;

  std::size_t chat_requests() const { return chat_requests_.load(); }
  std::size_t embed_requests() const { return embed_requests_.load(); }

 private:
  Options opts_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::size_t> chat_requests_{0};
  std::atomic<std::size_t> embed_requests_{0};
};

}  // namespace benchcut
