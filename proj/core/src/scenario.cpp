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

#include "icnap/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "icnap/coap.hpp"

namespace icnap {

namespace {

std::vector<std::string> tokenize(const std::string& line)
{
  std::istringstream in(line);
  std::vector<std::string> tokens;
  std::string token;
  while (in >> token) {
    tokens.push_back(token);
  }
  return tokens;
}

SimTime parseTime(const std::string& text, int line)
{
  SimTime value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
    throw ParseError(line, "expected a non-negative time, got '" + text + "'");
  }
  return value;
}

/// Splits "key=value"; returns false when '=' is absent.
bool splitKeyValue(const std::string& token, std::string& key, std::string& value)
{
  std::size_t eq = token.find('=');
  if (eq == std::string::npos) {
    return false;
  }
  key = token.substr(0, eq);
  value = token.substr(eq + 1);
  return true;
}

std::vector<std::uint8_t> bytesOf(const std::string& text)
{
  return {text.begin(), text.end()};
}

class Parser {
 public:
  Scenario parse(std::string_view text)
  {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
      ++lineNo;
      std::vector<std::string> tokens = tokenize(line);
      if (tokens.empty() || tokens.front().front() == '#') {
        continue;
      }
      parseLine(tokens, lineNo);
    }
    finish();

    std::stable_sort(m_script.begin(), m_script.end(),
                     [](const ScriptAction& a, const ScriptAction& b) {
                       return a.time < b.time;
                     });
    Scenario scenario{AttributeHierarchy(m_levels), std::move(m_naps),
                      std::move(m_servers), std::move(m_resources),
                      std::move(m_clients), std::move(m_script)};
    return scenario;
  }

 private:
  void parseLine(const std::vector<std::string>& tokens, int line)
  {
    const std::string& directive = tokens.front();
    if (directive == "hierarchy") {
      parseHierarchy(tokens, line);
    }
    else if (directive == "nap") {
      parseNap(tokens, line);
    }
    else if (directive == "server") {
      parseServer(tokens, line);
    }
    else if (directive == "resource") {
      parseResource(tokens, line);
    }
    else if (directive == "client") {
      parseClient(tokens, line);
    }
    else if (directive == "at") {
      parseAction(tokens, line);
    }
    else {
      throw ParseError(line, "unknown directive '" + directive + "'");
    }
  }

  void parseHierarchy(const std::vector<std::string>& tokens, int line)
  {
    if (!m_levels.empty()) {
      throw ParseError(line, "hierarchy declared twice");
    }
    if (tokens.size() < 2) {
      throw ParseError(line, "hierarchy needs at least one level");
    }
    m_levels.assign(tokens.begin() + 1, tokens.end());
    try {
      m_hierarchy.emplace(m_levels);
    }
    catch (const InvalidHierarchy& e) {
      throw ParseError(line, e.what());
    }
  }

  void parseNap(const std::vector<std::string>& tokens, int line)
  {
    if (!m_hierarchy) {
      throw ParseError(line, "hierarchy must be declared before naps");
    }
    if (tokens.size() < 3) {
      throw ParseError(line, "nap needs an id and at least one <level>=<value>");
    }
    const std::string& id = tokens[1];
    checkId(id, line, /*mustBeNew=*/m_napIndex.find(id) == m_napIndex.end());

    AttributeAssignment assignment;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      std::string key;
      std::string value;
      if (!splitKeyValue(tokens[i], key, value)) {
        throw ParseError(line, "expected <level>=<value>, got '" + tokens[i] + "'");
      }
      try {
        assignment.assign(key, value);
      }
      catch (const InvalidAssignment& e) {
        throw ParseError(line, e.what());
      }
    }
    try {
      assignment.validate(*m_hierarchy);
    }
    catch (const MissingRoot& e) {
      throw UnassignedRoot(line, e.what());
    }
    catch (const InvalidAssignment& e) {
      throw ParseError(line, e.what());
    }

    auto it = m_napIndex.find(id);
    if (it == m_napIndex.end()) {
      m_napIndex.emplace(id, m_naps.size());
      m_naps.push_back(NapDecl{id, {std::move(assignment)}});
      m_ids.insert(id);
    }
    else {
      // A repeated nap line adds a further assignment to the same NAP.
      m_naps[it->second].assignments.push_back(std::move(assignment));
    }
  }

  void parseServer(const std::vector<std::string>& tokens, int line)
  {
    if (tokens.size() != 4) {
      throw ParseError(line, "server needs <id> nap=<napid> fqdn=<dotted>");
    }
    const std::string& id = tokens[1];
    checkId(id, line, /*mustBeNew=*/true);

    ServerDecl decl;
    decl.id = id;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      std::string key;
      std::string value;
      if (!splitKeyValue(tokens[i], key, value)) {
        throw ParseError(line, "expected key=value, got '" + tokens[i] + "'");
      }
      if (key == "nap") {
        decl.nap = value;
      }
      else if (key == "fqdn") {
        decl.fqdn = value;
      }
      else {
        throw ParseError(line, "unknown server field '" + key + "'");
      }
    }
    if (decl.nap.empty() || decl.fqdn.empty()) {
      throw ParseError(line, "server needs both nap= and fqdn=");
    }
    if (m_napIndex.find(decl.nap) == m_napIndex.end()) {
      throw UnknownReference(line, "unknown nap '" + decl.nap + "'");
    }
    try {
      decl.fqdn = nameFromAuthority(decl.fqdn).render();
    }
    catch (const InvalidName& e) {
      throw ParseError(line, std::string("bad fqdn: ") + e.what());
    }
    if (!m_fqdns.insert(decl.fqdn).second) {
      throw ParseError(line, "duplicate fqdn '" + decl.fqdn + "'");
    }
    m_serverIds.insert(id);
    m_ids.insert(id);
    m_servers.push_back(std::move(decl));
  }

  void parseResource(const std::vector<std::string>& tokens, int line)
  {
    if (tokens.size() < 4) {
      throw ParseError(line, "resource needs <serverid> </path> value=<text>");
    }
    ResourceDecl decl;
    decl.server = tokens[1];
    if (m_serverIds.find(decl.server) == m_serverIds.end()) {
      throw UnknownReference(line, "unknown server '" + decl.server + "'");
    }
    decl.path = tokens[2];
    if (decl.path.empty() || decl.path.front() != '/') {
      throw ParseError(line, "resource path must start with '/'");
    }

    bool haveValue = false;
    for (std::size_t i = 3; i < tokens.size(); ++i) {
      std::string key;
      std::string value;
      if (tokens[i] == "observable") {
        decl.observable = true;
      }
      else if (splitKeyValue(tokens[i], key, value) && key == "value") {
        decl.value = bytesOf(value);
        haveValue = true;
      }
      else if (splitKeyValue(tokens[i], key, value) && key == "ready_at") {
        decl.readyAt = parseTime(value, line);
      }
      else {
        throw ParseError(line, "unknown resource field '" + tokens[i] + "'");
      }
    }
    if (!haveValue) {
      throw ParseError(line, "resource needs value=<text>");
    }
    if (!m_resourceKeys.insert(decl.server + " " + decl.path).second) {
      throw ParseError(line, "duplicate resource " + decl.server + " " + decl.path);
    }
    m_resources.push_back(std::move(decl));
  }

  void parseClient(const std::vector<std::string>& tokens, int line)
  {
    if (tokens.size() != 3) {
      throw ParseError(line, "client needs <id> nap=<napid>");
    }
    const std::string& id = tokens[1];
    checkId(id, line, /*mustBeNew=*/true);

    std::string key;
    std::string value;
    if (!splitKeyValue(tokens[2], key, value) || key != "nap") {
      throw ParseError(line, "expected nap=<napid>");
    }
    if (m_napIndex.find(value) == m_napIndex.end()) {
      throw UnknownReference(line, "unknown nap '" + value + "'");
    }
    m_clientIds.insert(id);
    m_ids.insert(id);
    m_clients.push_back(ClientDecl{id, value});
  }

  void parseAction(const std::vector<std::string>& tokens, int line)
  {
    if (tokens.size() < 4) {
      throw ParseError(line, "incomplete at-line");
    }
    ScriptAction action;
    action.time = parseTime(tokens[1], line);
    action.line = line;

    if (tokens[2] == "SET") {
      if (tokens.size() != 6) {
        throw ParseError(line, "at <t> SET <serverid> </path> <value>");
      }
      action.kind = ActionKind::ServerSet;
      action.actor = tokens[3];
      action.target = tokens[4];
      action.payload = bytesOf(tokens[5]);
      if (m_serverIds.find(action.actor) == m_serverIds.end()) {
        throw UnknownReference(line, "unknown server '" + action.actor + "'");
      }
      if (m_resourceKeys.find(action.actor + " " + action.target)
          == m_resourceKeys.end()) {
        throw UnknownReference(line,
                               "server " + action.actor + " has no resource "
                                 + action.target);
      }
      m_script.push_back(std::move(action));
      return;
    }

    action.actor = tokens[2];
    if (m_clientIds.find(action.actor) == m_clientIds.end()) {
      throw UnknownReference(line, "unknown client '" + action.actor + "'");
    }
    const std::string& verb = tokens[3];
    if (verb == "GET") {
      action.kind = ActionKind::ClientGet;
    }
    else if (verb == "PUT") {
      action.kind = ActionKind::ClientPut;
    }
    else if (verb == "OBSERVE") {
      action.kind = ActionKind::ClientObserve;
    }
    else if (verb == "UNOBSERVE") {
      action.kind = ActionKind::ClientUnobserve;
    }
    else {
      throw ParseError(line, "unknown verb '" + verb + "'");
    }
    if (tokens.size() < 5) {
      throw ParseError(line, "missing URI");
    }
    action.target = tokens[4];
    try {
      coap::parseUri(action.target);
    }
    catch (const coap::InvalidUri& e) {
      throw ParseError(line, e.what());
    }
    if (tokens.size() == 6) {
      if (action.kind != ActionKind::ClientPut) {
        throw ParseError(line, "only PUT takes a payload");
      }
      action.payload = bytesOf(tokens[5]);
    }
    else if (tokens.size() > 6) {
      throw ParseError(line, "trailing tokens");
    }
    else if (action.kind == ActionKind::ClientPut) {
      throw ParseError(line, "PUT needs a payload");
    }
    m_script.push_back(std::move(action));
  }

  void checkId(const std::string& id, int line, bool mustBeNew)
  {
    if (id == "SET") {
      throw ParseError(line, "'SET' is reserved");
    }
    if (id.find('/') != std::string::npos || id.find('=') != std::string::npos) {
      throw ParseError(line, "id must not contain '/' or '=': '" + id + "'");
    }
    if (mustBeNew && m_ids.find(id) != m_ids.end()) {
      throw ParseError(line, "duplicate id '" + id + "'");
    }
  }

  void finish() const
  {
    if (!m_hierarchy) {
      throw ParseError(0, "scenario declares no hierarchy");
    }
  }

  std::vector<std::string> m_levels;
  std::optional<AttributeHierarchy> m_hierarchy;
  std::vector<NapDecl> m_naps;
  std::vector<ServerDecl> m_servers;
  std::vector<ResourceDecl> m_resources;
  std::vector<ClientDecl> m_clients;
  std::vector<ScriptAction> m_script;

  std::map<std::string, std::size_t> m_napIndex;
  std::set<std::string> m_serverIds;
  std::set<std::string> m_clientIds;
  std::set<std::string> m_fqdns;
  std::set<std::string> m_resourceKeys;
  std::set<std::string> m_ids;
};

}  // namespace

Scenario parseScenario(std::string_view text)
{
  return Parser().parse(text);
}

Scenario loadScenarioFile(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ScenarioError(0, "cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parseScenario(buffer.str());
}

}  // namespace icnap
