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

#ifndef ICNAP_SIM_HPP
#define ICNAP_SIM_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "icnap/endpoints.hpp"
#include "icnap/event_loop.hpp"
#include "icnap/icn_core.hpp"
#include "icnap/nap.hpp"
#include "icnap/scenario.hpp"
#include "icnap/trace.hpp"

namespace icnap {

/// Message-count comparison of the run against a plain CoAP unicast
/// deployment serving the same script.
struct MetricsReport {
  std::uint64_t icnPublications = 0;
  std::uint64_t icnDeliveries = 0;
  /// CoAP messages that crossed a NAP<->server link, either direction.
  std::uint64_t edgeCoapMessages = 0;
  /// Peak number of simultaneously held server-side observe registrations.
  std::uint64_t serverObserveRegistrations = 0;
  /// What the script would cost without ICN: 2 messages per unicast
  /// exchange, 2G per group request reaching G servers, 2 per observe
  /// (de)registration, and M notifications per update with M registered
  /// clients.
  std::uint64_t unicastBaselineMessages = 0;
  /// unicast_baseline_messages / max(1, publications+deliveries+edge).
  double savingsRatio = 0.0;

  std::string table() const;
  std::string csv() const;
};

struct RunStats {
  std::uint64_t clientEdgeMessages = 0;
  std::uint64_t serverEdgeMessages = 0;
  std::uint64_t registrationReplacements = 0;
  std::uint64_t staleNotifications = 0;
  std::uint64_t eventsExecuted = 0;
  SimTime finishedAt = 0;
};

struct SimConfig {
  SimTime hopLatency = 1;
  SimTime exchangeTimeout = kDefaultExchangeTimeout;
};

struct RunResult {
  std::vector<TraceEntry> trace;
  std::string traceText;
  MetricsReport metrics;
  RunStats stats;
};

/// Owns one deployment (core, NAPs, endpoints) built from a scenario and
/// drives its script to quiescence. Attachments happen at construction
/// (time 0); run() executes the script. Components stay inspectable after
/// the run.
class Simulation {
 public:
  explicit Simulation(const Scenario& scenario, SimConfig config = {});

  /// Single-shot; throws InternalError when called twice.
  RunResult run();

  const IcnCore& core() const { return *m_core; }
  const Nap& nap(const std::string& id) const { return *m_naps.at(id); }
  const CoapServer& server(const std::string& id) const { return *m_servers.at(id); }
  const CoapClient& client(const std::string& id) const { return *m_clients.at(id); }
  const Tracer& tracer() const { return m_tracer; }
  const std::vector<NapDecl>& napDecls() const { return m_scenario.naps; }

 private:
  void buildDeployment();
  void scheduleScript();
  void sampleRegistrations();
  void recordUpdateBaseline(const std::string& serverId, const std::string& path);
  const std::set<std::string>& resolveAuthority(const std::string& authority);

  Scenario m_scenario;
  SimConfig m_config;
  EventLoop m_loop;
  Tracer m_tracer;
  std::unique_ptr<IcnCore> m_core;

  std::map<std::string, std::unique_ptr<Nap>> m_naps;
  std::map<std::string, std::unique_ptr<CoapServer>> m_servers;
  std::map<std::string, std::unique_ptr<CoapClient>> m_clients;
  std::map<std::string, std::string> m_serverNap;
  std::map<std::string, std::string> m_clientNap;

  std::map<std::string, std::set<std::string>> m_authorityServers;
  std::uint64_t m_baseline = 0;
  std::uint64_t m_registrationPeak = 0;
  RunStats m_stats;
  bool m_ran = false;
};

RunResult runScenario(const Scenario& scenario, SimConfig config = {});

}  // namespace icnap

#endif  // ICNAP_SIM_HPP
