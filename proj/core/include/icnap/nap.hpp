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

#ifndef ICNAP_NAP_HPP
#define ICNAP_NAP_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "icnap/coap.hpp"
#include "icnap/event_loop.hpp"
#include "icnap/icn_core.hpp"
#include "icnap/names.hpp"
#include "icnap/trace.hpp"

namespace icnap {

inline constexpr SimTime kDefaultExchangeTimeout = 250;

struct DuplicateServer : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidRequest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a client deregisters an observation it never made.
struct NotObserving : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One outstanding client request: remembers how to translate the eventual
/// response back onto the client link, and which rsp/ identifier answers
/// will arrive on. Garbage-collected after a fixed idle period so group
/// exchanges (whose response count is unknown) cannot leak.
struct PendingExchange {
  std::string id;
  std::string client;
  std::vector<std::uint8_t> clientToken;
  std::uint16_t clientMessageId = 0;
  IcnIdentifier replyIdentifier;
  SimTime createdAt = 0;
  SimTime lastActivity = 0;
  bool isObserve = false;  // opened by an Observe=0 registration
  bool unicast = false;    // authority named a concrete server FQDN
  std::string resourceKey; // requested URI in canonical form
};

/// Client-side observe state for one resource: every local observer with
/// its token, plus the last accepted notification for replay and
/// freshness checks (RFC 7641 Section 3.4).
struct ObserveAggregation {
  coap::Uri resource;
  IcnIdentifier notificationId;
  std::map<std::string, std::vector<std::uint8_t>> observers;  // client -> token
  std::optional<std::uint32_t> lastSeq;
  std::optional<coap::Message> lastNotification;
};

/// Server-side observe state for one (server, resource): exactly one
/// registration towards the server regardless of how many NAPs are
/// interested. Until the server's first reply, waiters holds the
/// (replyTo, exchange) routes that need a failure response if the
/// registration is rejected.
struct UpstreamRegistration {
  coap::Uri resource;
  std::string server;
  std::vector<std::uint8_t> serverToken;
  std::uint16_t forwardMessageId = 0;
  std::set<NodeId> interestedNaps;
  std::optional<coap::Message> lastNotification;
  std::vector<std::pair<IcnIdentifier, std::string>> waiters;
};

/// A non-observe request forwarded to an attached server, awaiting its
/// reply.
struct ForwardedRequest {
  std::string server;
  std::vector<std::uint8_t> serverToken;
  std::uint16_t messageId = 0;
  std::string exchangeId;
  IcnIdentifier replyTo;
};

struct AttachedServer {
  std::string id;
  std::string fqdn;
};

struct NapCounters {
  std::uint64_t unknownExchange = 0;
  std::uint64_t unknownToken = 0;
  std::uint64_t noMatchingServer = 0;
  std::uint64_t staleNotifications = 0;
};

/// Network attachment point: the only element that speaks both CoAP (to
/// its local clients and servers) and pub/sub (to the ICN core). Client
/// NAPs absorb duplicate observe registrations; server NAPs keep a single
/// upstream registration per (server, resource), so a server only ever
/// sees one CoAP client.
class Nap {
 public:
  struct Links {
    std::function<void(const std::string& serverId, const coap::Message&)> toServer;
    std::function<void(const std::string& clientId, const coap::Message&)> toClient;
  };

  /// serverDirectory lists the FQDNs of every server in the deployment
  /// (attachment configuration); it is what lets the NAP tell a unicast
  /// authority from a group name when deciding exchange lifetimes.
  Nap(NodeId node, AttributeHierarchy hierarchy,
      std::vector<AttributeAssignment> assignments, IcnCore& core, EventLoop& loop,
      Tracer& tracer, Links links, std::set<std::string> serverDirectory,
      SimTime exchangeTimeout = kDefaultExchangeTimeout);

  /// Subscribes to the server's FQDN and to every group name constructed
  /// from this NAP's assignments; returns the newly added identifiers.
  std::vector<IcnIdentifier> attachServer(const std::string& serverId,
                                          const std::string& fqdn);
  void attachClient(const std::string& clientId);

  /// Entry point for the client link. Returns the exchange id, or "" when
  /// the request was absorbed locally (duplicate observe registration,
  /// or a deregistration answered from cache).
  std::string handleClientRequest(const std::string& clientId, const coap::Message& message);

  /// Entry point for the ICN side: REQ at server NAPs, RSP/NTF at client
  /// NAPs.
  void handleIcnDelivery(const ContentItem& item);

  /// Entry point for the server link.
  void handleServerResponse(const std::string& serverId, const coap::Message& message);

  /// Client-side observe teardown; duplicate registrations peel off
  /// silently, the last one triggers the upstream deregistration. Throws
  /// NotObserving if the client holds no registration for the URI.
  std::string deregisterObserve(const std::string& clientId, const coap::Message& message);

  const NodeId& node() const { return m_node; }
  const NapCounters& counters() const { return m_counters; }
  std::size_t openExchangeCount() const { return m_exchanges.size(); }
  const std::map<std::string, ObserveAggregation>& aggregations() const
  {
    return m_aggregations;
  }
  const std::map<std::pair<std::string, std::string>, UpstreamRegistration>&
  upstreamRegistrations() const
  {
    return m_upstream;
  }
  const std::map<std::string, AttachedServer>& servers() const { return m_servers; }
  /// Identifiers subscribed at attach time; steady-state subscriptions
  /// must return to exactly this set once all activity quiesces.
  const std::set<IcnIdentifier>& baseSubscriptions() const { return m_baseSubscriptions; }

 private:
  std::string newExchangeId();
  std::vector<std::uint8_t> mintToken();
  std::uint16_t mintMessageId();
  IcnIdentifier replyIdentifierFor(const std::string& exchangeId) const;
  static std::string napFromReplyIdentifier(const IcnIdentifier& id);

  std::vector<std::string> selectServers(const std::string& authority) const;

  void publishItem(ItemKind kind, const IcnIdentifier& id, const coap::Message& message,
                   std::optional<IcnIdentifier> replyTo, const std::string& exchangeId);
  void sendToServer(const std::string& serverId, const coap::Message& message);
  void sendToClient(const std::string& clientId, const coap::Message& message);

  std::string openExchange(const std::string& clientId, const coap::Message& message,
                           const coap::Uri& uri, bool isObserve);
  std::string registerObserve(const std::string& clientId, const coap::Message& message,
                              const coap::Uri& uri);

  void handleRequestItem(const ContentItem& item);
  void handleResponseItem(const ContentItem& item);
  void handleNotificationItem(const ContentItem& item);

  void upstreamRegister(const std::string& serverId, const coap::Uri& uri,
                        const coap::Message& message, const ContentItem& item);
  void upstreamDeregister(const std::string& serverId, const coap::Uri& uri,
                          const ContentItem& item);
  void forwardPlain(const std::string& serverId, const coap::Message& message,
                    const ContentItem& item);
  coap::Message stripForServer(const coap::Message& message);

  void eraseUpstream(const std::pair<std::string, std::string>& key, const char* reason);
  void closeExchange(const std::string& exchangeId, const char* reason);
  void scheduleExpiry(const std::string& exchangeId);
  void expiryCheck(const std::string& exchangeId);

  NodeId m_node;
  AttributeHierarchy m_hierarchy;
  std::vector<AttributeAssignment> m_assignments;
  IcnCore* m_core;
  EventLoop* m_loop;
  Tracer* m_tracer;
  Links m_links;
  std::set<std::string> m_serverDirectory;
  SimTime m_exchangeTimeout;

  std::map<std::string, AttachedServer> m_servers;
  std::set<std::string> m_clients;
  std::set<IcnIdentifier> m_baseSubscriptions;

  std::map<std::string, PendingExchange> m_exchanges;
  std::map<std::string, ObserveAggregation> m_aggregations;  // by canonical URI

  std::map<std::pair<std::string, std::string>, UpstreamRegistration> m_upstream;
  std::map<std::pair<std::string, std::string>, std::pair<std::string, std::string>>
      m_upstreamByToken;  // (server, token hex) -> upstream key
  std::map<std::pair<std::string, std::string>, ForwardedRequest> m_forwarded;

  NapCounters m_counters;
  std::uint64_t m_nextExchange = 0;
  std::uint32_t m_nextToken = 0;
  std::uint16_t m_nextMessageId = 0;
};

}  // namespace icnap

#endif  // ICNAP_NAP_HPP
