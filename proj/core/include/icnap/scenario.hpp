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

// Scenario files describe a deployment and a script:
//
//   hierarchy <level>...
//   nap <id> <level>=<value>...          # repeat the line for a second assignment
//   server <id> nap=<napid> fqdn=<dotted>
//   resource <serverid> </path> value=<text> [observable] [ready_at=<t>]
//   client <id> nap=<napid>
//   at <t> <clientid> GET|PUT|OBSERVE|UNOBSERVE <coap-uri> [<payload>]
//   at <t> SET <serverid> </path> <value>
//
// '#' starts a comment line; ids must be globally unique and "SET" is
// reserved.

#ifndef ICNAP_SCENARIO_HPP
#define ICNAP_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "icnap/event_loop.hpp"
#include "icnap/names.hpp"

namespace icnap {

/// Scenario input error; remembers the 1-based source line.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(int line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), m_line(line)
  {
  }

  int line() const { return m_line; }

 private:
  int m_line;
};

struct ParseError : ScenarioError {
  using ScenarioError::ScenarioError;
};

/// A directive references an id that was never declared.
struct UnknownReference : ScenarioError {
  using ScenarioError::ScenarioError;
};

/// A nap line leaves the hierarchy's root level unassigned.
struct UnassignedRoot : ScenarioError {
  using ScenarioError::ScenarioError;
};

struct NapDecl {
  std::string id;
  std::vector<AttributeAssignment> assignments;
};

struct ServerDecl {
  std::string id;
  std::string nap;
  std::string fqdn;
};

struct ResourceDecl {
  std::string server;
  std::string path;
  std::vector<std::uint8_t> value;
  bool observable = false;
  std::optional<SimTime> readyAt;
};

struct ClientDecl {
  std::string id;
  std::string nap;
};

enum class ActionKind : std::uint8_t {
  ClientGet,
  ClientPut,
  ClientObserve,
  ClientUnobserve,
  ServerSet,
};

struct ScriptAction {
  SimTime time = 0;
  int line = 0;
  ActionKind kind = ActionKind::ClientGet;
  std::string actor;   // client id, or server id for ServerSet
  std::string target;  // coap URI, or resource path for ServerSet
  std::vector<std::uint8_t> payload;
};

struct Scenario {
  AttributeHierarchy hierarchy;
  std::vector<NapDecl> naps;
  std::vector<ServerDecl> servers;
  std::vector<ResourceDecl> resources;
  std::vector<ClientDecl> clients;
  std::vector<ScriptAction> script;  // stably ordered by time
};

Scenario parseScenario(std::string_view text);

/// Reads and parses a scenario file; file-level problems surface as
/// ScenarioError with line 0.
Scenario loadScenarioFile(const std::string& path);

}  // namespace icnap

#endif  // ICNAP_SCENARIO_HPP
