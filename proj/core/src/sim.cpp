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

#include "icnap/sim.hpp"

#include <algorithm>
#include <cstdio>

namespace icnap {

namespace {

std::string pathOf(const coap::Message& message)
{
  std::string path;
  for (const coap::Option& opt : message.options()) {
    if (opt.number == coap::options::UriPath) {
      path += '/';
      path += coap::optionText(opt);
    }
  }
  return path.empty() ? "/" : path;
}

ClientVerb verbOf(ActionKind kind)
{
  switch (kind) {
  case ActionKind::ClientGet:
    return ClientVerb::Get;
  case ActionKind::ClientPut:
    return ClientVerb::Put;
  case ActionKind::ClientObserve:
    return ClientVerb::Observe;
  case ActionKind::ClientUnobserve:
    return ClientVerb::Unobserve;
  case ActionKind::ServerSet:
    break;
  }
  throw InternalError("not a client action");
}

std::string formatRatio(double value)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

}  // namespace

std::string MetricsReport::table() const
{
  auto row = [](const char* name, const std::string& value) {
    std::string line(name);
    line.resize(30, ' ');
    return line + value + "\n";
  };
  std::string out;
  out += row("icn_publications", std::to_string(icnPublications));
  out += row("icn_deliveries", std::to_string(icnDeliveries));
  out += row("edge_coap_messages", std::to_string(edgeCoapMessages));
  out += row("server_observe_registrations", std::to_string(serverObserveRegistrations));
  out += row("unicast_baseline_messages", std::to_string(unicastBaselineMessages));
  out += row("savings_ratio", formatRatio(savingsRatio));
  return out;
}

std::string MetricsReport::csv() const
{
  std::string out =
    "icn_publications,icn_deliveries,edge_coap_messages,"
    "server_observe_registrations,unicast_baseline_messages,savings_ratio\n";
  out += std::to_string(icnPublications) + ',' + std::to_string(icnDeliveries) + ','
         + std::to_string(edgeCoapMessages) + ',' + std::to_string(serverObserveRegistrations)
         + ',' + std::to_string(unicastBaselineMessages) + ',' + formatRatio(savingsRatio)
         + '\n';
  return out;
}

Simulation::Simulation(const Scenario& scenario, SimConfig config)
  : m_scenario(scenario), m_config(config), m_tracer(m_loop)
{
  m_core = std::make_unique<IcnCore>(
    [this](const NodeId& node, const ContentItem& item, SimTime at) {
      m_loop.schedule(at, [this, node, item] { m_naps.at(node.value)->handleIcnDelivery(item); });
    },
    m_config.hopLatency);
  buildDeployment();
  m_loop.setPostEventHook([this] { sampleRegistrations(); });
}

void Simulation::buildDeployment()
{
  std::set<std::string> directory;
  for (const ServerDecl& server : m_scenario.servers) {
    directory.insert(server.fqdn);
  }

  for (const NapDecl& decl : m_scenario.naps) {
    Nap::Links links;
    links.toServer = [this](const std::string& serverId, const coap::Message& message) {
      ++m_stats.serverEdgeMessages;
      m_loop.schedule(m_loop.now() + m_config.hopLatency, [this, serverId, message] {
        if (message.code == coap::codes::Put) {
          recordUpdateBaseline(serverId, pathOf(message));
        }
        m_servers.at(serverId)->handle(message);
      });
    };
    links.toClient = [this](const std::string& clientId, const coap::Message& message) {
      ++m_stats.clientEdgeMessages;
      m_loop.schedule(m_loop.now() + m_config.hopLatency, [this, clientId, message] {
        m_clients.at(clientId)->receive(message);
      });
    };
    m_naps.emplace(decl.id, std::make_unique<Nap>(
                              NodeId{decl.id}, m_scenario.hierarchy, decl.assignments,
                              *m_core, m_loop, m_tracer, std::move(links), directory,
                              m_config.exchangeTimeout));
  }

  for (const ServerDecl& decl : m_scenario.servers) {
    m_serverNap.emplace(decl.id, decl.nap);
    m_naps.at(decl.nap)->attachServer(decl.id, decl.fqdn);
    std::string serverId = decl.id;
    auto server = std::make_unique<CoapServer>(
      serverId, m_loop, m_tracer, [this, serverId](const coap::Message& message) {
        ++m_stats.serverEdgeMessages;
        m_loop.schedule(m_loop.now() + m_config.hopLatency, [this, serverId, message] {
          m_naps.at(m_serverNap.at(serverId))->handleServerResponse(serverId, message);
        });
      });
    m_servers.emplace(decl.id, std::move(server));
  }
  for (const ResourceDecl& decl : m_scenario.resources) {
    Resource resource;
    resource.path = decl.path;
    resource.value = decl.value;
    resource.observable = decl.observable;
    resource.readyAt = decl.readyAt;
    m_servers.at(decl.server)->addResource(std::move(resource));
  }

  for (const ClientDecl& decl : m_scenario.clients) {
    m_clientNap.emplace(decl.id, decl.nap);
    m_naps.at(decl.nap)->attachClient(decl.id);
    std::string clientId = decl.id;
    auto client = std::make_unique<CoapClient>(
      clientId, m_loop, m_tracer, [this, clientId](const coap::Message& message) {
        ++m_stats.clientEdgeMessages;
        m_loop.schedule(m_loop.now() + m_config.hopLatency, [this, clientId, message] {
          try {
            m_naps.at(m_clientNap.at(clientId))->handleClientRequest(clientId, message);
          }
          catch (const NotObserving&) {
            // Already traced as a drop by the NAP.
          }
        });
      });
    m_clients.emplace(decl.id, std::move(client));
  }
}

const std::set<std::string>& Simulation::resolveAuthority(const std::string& authority)
{
  auto it = m_authorityServers.find(authority);
  if (it != m_authorityServers.end()) {
    return it->second;
  }

  std::set<std::string> servers;
  bool unicast = false;
  for (const ServerDecl& server : m_scenario.servers) {
    if (server.fqdn == authority) {
      servers.insert(server.id);
      unicast = true;
    }
  }
  if (!unicast) {
    try {
      GroupName name = nameFromAuthority(authority);
      for (const ServerDecl& server : m_scenario.servers) {
        const NapDecl* nap = nullptr;
        for (const NapDecl& decl : m_scenario.naps) {
          if (decl.id == server.nap) {
            nap = &decl;
            break;
          }
        }
        if (nap == nullptr) {
          throw InternalError("server on undeclared nap: " + server.id);
        }
        for (const AttributeAssignment& assignment : nap->assignments) {
          if (matchesName(assignment, name, m_scenario.hierarchy)) {
            servers.insert(server.id);
            break;
          }
        }
      }
    }
    catch (const InvalidName&) {
      // Unresolvable authority: empty set.
    }
  }
  return m_authorityServers.emplace(authority, std::move(servers)).first->second;
}

void Simulation::recordUpdateBaseline(const std::string& serverId, const std::string& path)
{
  // In the unicast deployment every registered client gets its own
  // notification; registrations there mirror the local observers that
  // resolve to this server and path.
  std::uint64_t observers = 0;
  for (const auto& [napId, nap] : m_naps) {
    for (const auto& [key, aggregation] : nap->aggregations()) {
      if (aggregation.resource.pathSegments.empty()) {
        continue;
      }
      std::string aggPath;
      for (const std::string& segment : aggregation.resource.pathSegments) {
        aggPath += '/';
        aggPath += segment;
      }
      if (aggPath != path) {
        continue;
      }
      const std::set<std::string>& servers = resolveAuthority(aggregation.resource.authority);
      if (servers.count(serverId) > 0) {
        observers += aggregation.observers.size();
      }
    }
  }
  m_baseline += observers;
}

void Simulation::scheduleScript()
{
  for (const ScriptAction& action : m_scenario.script) {
    const ScriptAction* act = &action;  // stable; the script never changes
    if (action.kind == ActionKind::ServerSet) {
      m_loop.schedule(action.time, [this, act] {
        recordUpdateBaseline(act->actor, act->target);
        m_servers.at(act->actor)->updateResource(act->target, act->payload);
      });
      continue;
    }

    // Request cost against the unicast baseline is fixed by the script:
    // two messages per reached server for GET/PUT, two per observe
    // (de)registration.
    coap::Uri uri = coap::parseUri(action.target);
    if (action.kind == ActionKind::ClientGet || action.kind == ActionKind::ClientPut) {
      m_baseline += 2 * resolveAuthority(uri.authority).size();
    }
    else {
      m_baseline += 2;
    }

    m_loop.schedule(action.time, [this, act, uri] {
      m_clients.at(act->actor)->issue(verbOf(act->kind), uri, act->payload);
    });
  }
}

void Simulation::sampleRegistrations()
{
  std::uint64_t total = 0;
  for (const auto& [id, server] : m_servers) {
    total += server->registrations().size();
  }
  m_registrationPeak = std::max(m_registrationPeak, total);
}

RunResult Simulation::run()
{
  if (m_ran) {
    throw InternalError("run() called twice");
  }
  m_ran = true;

  scheduleScript();
  m_stats.eventsExecuted = m_loop.run();
  m_stats.finishedAt = m_loop.now();
  for (const auto& [id, server] : m_servers) {
    m_stats.registrationReplacements += server->registrationReplacements();
  }
  for (const auto& [id, nap] : m_naps) {
    m_stats.staleNotifications += nap->counters().staleNotifications;
  }

  RunResult result;
  result.trace = m_tracer.entries();
  result.traceText = m_tracer.render();
  result.stats = m_stats;

  const CoreMetrics& core = m_core->metrics();
  result.metrics.icnPublications = core.publications;
  result.metrics.icnDeliveries = core.deliveries;
  result.metrics.edgeCoapMessages = m_stats.serverEdgeMessages;
  result.metrics.serverObserveRegistrations = m_registrationPeak;
  result.metrics.unicastBaselineMessages = m_baseline;
  std::uint64_t icnTotal =
    core.publications + core.deliveries + m_stats.serverEdgeMessages;
  result.metrics.savingsRatio =
    static_cast<double>(m_baseline) / static_cast<double>(std::max<std::uint64_t>(1, icnTotal));
  return result;
}

RunResult runScenario(const Scenario& scenario, SimConfig config)
{
  return Simulation(scenario, config).run();
}

}  // namespace icnap
