// Standalone mock model server, handy for trying the CLI without a real
// endpoint:
//   benchcut-mockd --port 8080
//   benchcut run --endpoint http://127.0.0.1:8080 --model mock-fast ...
#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include "benchcut/mock_server.hpp"
#include "benchcut/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic OpenAI-shaped mock server for benchcut"};
  app.set_version_flag("--version", benchcut::kVersion);
  int port = 0;
  int cap = 30;
  app.add_option("--port", port, "Port to bind (0 = ephemeral)");
  app.add_option("--restricted-cap", cap,
                 "Word cap applied when the prompt asks for ~n words");
  CLI11_PARSE(app, argc, argv);

  benchcut::MockModelServer::Options opts;
  opts.restricted_cap_words = cap;
  opts.port = port;
  benchcut::MockModelServer server(opts);
  int bound = server.start();
  std::cout << "benchcut-mockd listening on http://127.0.0.1:" << bound
            << " (models: mock-fast, mock-slow)" << std::endl;
  // Serve until interrupted.
  std::signal(SIGINT, [](int) { std::_Exit(0); });
  std::signal(SIGTERM, [](int) { std::_Exit(0); });
  for (;;) std::this_thread::sleep_for(std::chrono::seconds(3600));
}
