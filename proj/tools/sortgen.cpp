// Copyright 2026 The SortGen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point: simulate, train, rerank, evaluate, bench,
// oracle and serve.

#include <csignal>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"
#include "sortgen/app.hpp"
#include "sortgen/service.hpp"

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

int serve(const sortgen::CommandOptions& opts) {
  if (opts.ckpt.empty()) throw sortgen::ConfigError("missing --ckpt");
  sortgen::RerankService service;
  service.load_async(opts.ckpt);

  httplib::Server server;
  auto bind = [&](const char* method, const std::string& route) {
    return [&service, method, route](const httplib::Request& req, httplib::Response& res) {
      const sortgen::ServiceReply reply = service.handle(method, route, req.body);
      res.status = reply.status;
      res.set_content(reply.body, reply.content_type.c_str());
    };
  };
  server.Get("/healthz", bind("GET", "/healthz"));
  server.Post("/rerank", bind("POST", "/rerank"));
  server.Post("/healthz", bind("POST", "/healthz"));
  server.Get("/rerank", bind("GET", "/rerank"));

  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on 127.0.0.1:" << opts.port << "\n";
  if (!server.listen("127.0.0.1", opts.port)) {
    std::cerr << "cannot bind port " << opts.port << "\n";
    return 1;
  }
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sortgen: generative list re-ranking"};
  app.require_subcommand(1);

  sortgen::CommandOptions opts;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "key = value configuration file");
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--ckpt", opts.ckpt, "checkpoint path");
    sub->add_option("--data", opts.data, "dataset or request path");
    sub->add_option("--out", opts.out, "output path");
    sub->add_option("--port", opts.port, "listen port (serve)");
  };

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const sortgen::CommandOptions&, std::ostream&);
  };
  const Command commands[] = {
      {"simulate", "write a synthetic impression dataset and catalog", sortgen::cmd_simulate},
      {"train", "train a model on a dataset", sortgen::cmd_train},
      {"rerank", "rerank one request document", sortgen::cmd_rerank},
      {"evaluate", "cumulative-value curves per method", sortgen::cmd_evaluate},
      {"bench", "latency and invocation report", sortgen::cmd_bench},
      {"oracle", "greedy vs exhaustive regret study", sortgen::cmd_oracle},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    subs.emplace_back(sub, &c);
  }
  CLI::App* serve_cmd = app.add_subcommand("serve", "HTTP /rerank and /healthz");
  add_common(serve_cmd);

  CLI11_PARSE(app, argc, argv);

  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) opts.seed = seed;
  }

  try {
    if (serve_cmd->parsed()) return serve(opts);
    for (const auto& [sub, cmd] : subs) {
      if (sub->parsed()) return cmd->run(opts, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
