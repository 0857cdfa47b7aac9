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

// Plain RFC 7252/7641 endpoints. They speak CoAP to whatever sits on the
// other side of their link and know nothing about groups, attribute
// hierarchies or ICN identifiers; keeping them that way is the point.

#ifndef ICNAP_ENDPOINTS_HPP
#define ICNAP_ENDPOINTS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icnap/coap.hpp"
#include "icnap/event_loop.hpp"
#include "icnap/trace.hpp"

namespace icnap {

struct UnknownPath : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Resource {
  std::string path;  // "/temperature"
  std::vector<std::uint8_t> value;
  bool observable = false;
  /// When set, GETs before this time get an empty ACK and the content
  /// follows as a separate CON response at readyAt.
  std::optional<SimTime> readyAt;
  /// Next notification sequence; 0 and 1 are request markers (RFC 7641).
  std::uint32_t observeSeq = 2;
};

struct ObserveRegistration {
  std::vector<std::uint8_t> token;
};

/// Path-dispatched CoAP server. GET/PUT plus observe registrations; CON
/// requests get piggybacked ACK responses, NON requests get NON responses,
/// notifications go out as NON.
class CoapServer {
 public:
  using SendFn = std::function<void(const coap::Message&)>;

  CoapServer(std::string id, EventLoop& loop, Tracer& tracer, SendFn send);

  void addResource(Resource resource);

  /// Handles one request (CON or NON); ACK/RST input is ignored. Every
  /// request produces exactly one immediate reply.
  void handle(const coap::Message& request);

  /// External state change ("SET"). Notifies the observer if one is
  /// registered, even when the value is unchanged. Throws UnknownPath.
  void updateResource(const std::string& path, std::vector<std::uint8_t> value);

  const std::string& id() const { return m_id; }
  const std::map<std::string, Resource>& resources() const { return m_resources; }
  const std::map<std::string, ObserveRegistration>& registrations() const
  {
    return m_registrations;
  }
  /// Times an observe registration displaced a different token; stays 0
  /// while at most one client is ever visible per resource.
  std::uint64_t registrationReplacements() const { return m_replacements; }

 private:
  void send(const coap::Message& message);
  void reply(const coap::Message& request, coap::Code code,
             std::vector<std::uint8_t> payload, std::optional<std::uint32_t> observe);
  void registerObserver(const std::string& path, const std::vector<std::uint8_t>& token);
  void applyUpdate(Resource& resource, std::vector<std::uint8_t> value);

  std::string m_id;
  EventLoop* m_loop;
  Tracer* m_tracer;
  SendFn m_send;
  std::map<std::string, Resource> m_resources;
  std::map<std::string, ObserveRegistration> m_registrations;
  std::uint16_t m_nextMessageId = 0;
  std::uint64_t m_replacements = 0;
};

enum class ClientVerb : std::uint8_t { Get, Put, Observe, Unobserve };

const char* toString(ClientVerb verb);

struct LoggedMessage {
  SimTime time;
  coap::Message message;
};

struct ClientLog {
  std::vector<LoggedMessage> sent;
  std::vector<LoggedMessage> received;
};

/// Scripted CoAP client. Tokens are minted deterministically from the
/// client id and a per-client counter, so a given script always emits
/// byte-identical messages.
class CoapClient {
 public:
  using SendFn = std::function<void(const coap::Message&)>;

  CoapClient(std::string id, EventLoop& loop, Tracer& tracer, SendFn send);

  /// Builds and sends the request; returns what was sent. Observe and
  /// Unobserve are GETs carrying Observe=0 / Observe=1.
  coap::Message issue(ClientVerb verb, const coap::Uri& uri,
                      std::vector<std::uint8_t> payload = {});

  void receive(const coap::Message& message);

  const std::string& id() const { return m_id; }
  const ClientLog& log() const { return m_log; }

 private:
  std::string m_id;
  EventLoop* m_loop;
  Tracer* m_tracer;
  SendFn m_send;
  std::uint16_t m_tokenPrefix;
  std::uint16_t m_nextTokenSeq = 0;
  std::uint16_t m_nextMessageId = 0;
  ClientLog m_log;
};

}  // namespace icnap

#endif  // ICNAP_ENDPOINTS_HPP
