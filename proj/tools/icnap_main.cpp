// Copyright 2026 The icnap Authors
// SPDX-License-Identifier: Apache-2.0
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

// icnap run <file> [--trace] [--metrics csv|table]
// icnap validate <file>
//
// Exit codes: 0 success, 1 bad input (usage or scenario), 2 internal error.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "icnap/scenario.hpp"
#include "icnap/sim.hpp"

int main(int argc, char** argv)
{
  CLI::App app{"CoAP group communication over an ICN publish/subscribe core"};
  app.require_subcommand(1);

  std::string runFile;
  bool trace = false;
  std::string metrics = "table";
  CLI::App* run = app.add_subcommand("run", "Run a scenario to quiescence");
  run->add_option("file", runFile, "scenario file")->required();
  run->add_flag("--trace", trace, "print the event trace before the metrics");
  run->add_option("--metrics", metrics, "metrics output format")
    ->check(CLI::IsMember({"csv", "table"}));

  std::string checkFile;
  CLI::App* validate = app.add_subcommand("validate", "Parse and check a scenario file");
  validate->add_option("file", checkFile, "scenario file")->required();

  try {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      icnap::Scenario scenario = icnap::loadScenarioFile(runFile);
      icnap::RunResult result = icnap::runScenario(scenario);
      if (trace) {
        std::fputs(result.traceText.c_str(), stdout);
      }
      std::fputs(metrics == "csv" ? result.metrics.csv().c_str()
                                  : result.metrics.table().c_str(),
                 stdout);
      return 0;
    }

    icnap::Scenario scenario = icnap::loadScenarioFile(checkFile);
    std::printf("OK: %zu naps, %zu servers, %zu resources, %zu clients, %zu actions\n",
                scenario.naps.size(), scenario.servers.size(), scenario.resources.size(),
                scenario.clients.size(), scenario.script.size());
    return 0;
  }
  catch (const icnap::ScenarioError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
}
