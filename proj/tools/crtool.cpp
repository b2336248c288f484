// Copyright 2026 The CodedReduce Authors. All Rights Reserved.
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

// crtool: command-line front end for the CodedReduce toolkit.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "codedreduce/commands.hpp"

namespace cr = codedreduce::cli;

int main(int argc, char** argv) {
  CLI::App app{"CodedReduce gradient aggregation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> trials;
  app.add_option("--config", config_path, "INI experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "override run.seed");
  app.add_option("--out", out, "override run.out");
  app.add_option("--trials", trials, "override latency.trials")->check(CLI::PositiveNumber);

  using Command = int (*)(cr::ExperimentConfig, std::ostream&);
  const std::pair<const char*, Command> commands[] = {
      {"validate", cr::cmd_validate},
      {"train", cr::cmd_train},
      {"latency", cr::cmd_latency},
      {"verify", cr::cmd_verify},
      {"transport-demo", cr::cmd_transport_demo},
  };
  const char* help[] = {
      "check the config and print loads",
      "run gradient descent for every scheme and write traces",
      "Monte Carlo iteration latency per scheme",
      "exhaustive straggler recovery and code validity checks",
      "one aggregation round as local processes over TCP",
  };
  Command chosen = nullptr;
  for (std::size_t k = 0; k < std::size(commands); ++k) {
    auto* sub = app.add_subcommand(commands[k].first, help[k]);
    sub->callback([&chosen, fn = commands[k].second] { chosen = fn; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    cr::ExperimentConfig cfg = config_path.empty() ? cr::ExperimentConfig{}
                                                   : cr::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (trials) cfg.trials = *trials;
    return chosen(std::move(cfg), std::cout);
  } catch (const cr::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
