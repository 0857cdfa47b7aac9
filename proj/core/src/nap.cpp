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

#include "icnap/nap.hpp"

#include <algorithm>

namespace icnap {

namespace {

IcnIdentifier notificationIdFor(const coap::Uri& uri)
{
  return IcnIdentifier{std::string(kNotificationPrefix) + uri.canonical()};
}

/// RFC 7641 Section 3.4 freshness: v2 is newer than v1 in 24-bit serial
/// arithmetic.
bool fresher(std::uint32_t v2, std::uint32_t v1)
{
  constexpr std::uint32_t half = coap::kObserveModulus / 2;
  return (v1 < v2 && v2 - v1 < half) || (v1 > v2 && v1 - v2 > half);
}

}  // namespace

Nap::Nap(NodeId node, AttributeHierarchy hierarchy,
         std::vector<AttributeAssignment> assignments, IcnCore& core, EventLoop& loop,
         Tracer& tracer, Links links, std::set<std::string> serverDirectory,
         SimTime exchangeTimeout)
  : m_node(std::move(node)), m_hierarchy(std::move(hierarchy)),
    m_assignments(std::move(assignments)), m_core(&core), m_loop(&loop),
    m_tracer(&tracer), m_links(std::move(links)),
    m_serverDirectory(std::move(serverDirectory)), m_exchangeTimeout(exchangeTimeout)
{
  for (const AttributeAssignment& assignment : m_assignments) {
    assignment.validate(m_hierarchy);
  }
}

std::string Nap::newExchangeId()
{
  return "e" + std::to_string(++m_nextExchange);
}

std::vector<std::uint8_t> Nap::mintToken()
{
  std::uint32_t v = ++m_nextToken;
  return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
          static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

std::uint16_t Nap::mintMessageId()
{
  return ++m_nextMessageId;
}

IcnIdentifier Nap::replyIdentifierFor(const std::string& exchangeId) const
{
  return IcnIdentifier{std::string(kResponsePrefix) + m_node.value + "/" + exchangeId};
}

std::string Nap::napFromReplyIdentifier(const IcnIdentifier& id)
{
  std::size_t start = kResponsePrefix.size();
  std::size_t slash = id.value.find('/', start);
  if (id.value.substr(0, start) != kResponsePrefix || slash == std::string::npos) {
    throw InternalError("malformed reply identifier: " + id.value);
  }
  return id.value.substr(start, slash - start);
}

std::vector<std::string> Nap::selectServers(const std::string& authority) const
{
  for (const auto& [id, server] : m_servers) {
    if (server.fqdn == authority) {
      return {id};
    }
  }
  GroupName name = [&] {
    try {
      return nameFromAuthority(authority);
    }
    catch (const InvalidName&) {
      return GroupName({authority});  // unreachable via parseUri; stay total
    }
  }();
  for (const AttributeAssignment& assignment : m_assignments) {
    if (matchesName(assignment, name, m_hierarchy)) {
      std::vector<std::string> all;
      for (const auto& [id, server] : m_servers) {
        all.push_back(id);
      }
      return all;
    }
  }
  return {};
}

std::vector<IcnIdentifier> Nap::attachServer(const std::string& serverId,
                                             const std::string& fqdn)
{
  if (m_servers.count(serverId) > 0) {
    throw DuplicateServer("server already attached: " + serverId);
  }
  GroupName fqdnName = nameFromAuthority(fqdn);  // validates and lowercases
  std::string canonical = fqdnName.render();
  m_servers.emplace(serverId, AttachedServer{serverId, canonical});
  m_tracer->emit(m_node.value, "attach_server", serverId + " fqdn=" + canonical);

  std::set<IcnIdentifier> wanted;
  wanted.insert(identifierFor(fqdnName));
  for (const AttributeAssignment& assignment : m_assignments) {
    for (const GroupName& name : constructNames(m_hierarchy, assignment)) {
      wanted.insert(identifierFor(name));
    }
  }

  std::vector<IcnIdentifier> added;
  for (const IcnIdentifier& id : wanted) {
    if (m_core->subscribe(m_node, id)) {
      m_tracer->emit(m_node.value, "subscribe", id.value);
      added.push_back(id);
    }
    m_baseSubscriptions.insert(id);
  }
  return added;
}

void Nap::attachClient(const std::string& clientId)
{
  m_clients.insert(clientId);
  m_tracer->emit(m_node.value, "attach_client", clientId);
}

void Nap::publishItem(ItemKind kind, const IcnIdentifier& id, const coap::Message& message,
                      std::optional<IcnIdentifier> replyTo, const std::string& exchangeId)
{
  ContentItem item;
  item.identifier = id;
  item.kind = kind;
  item.payload = coap::encode(message);
  item.replyTo = std::move(replyTo);
  item.exchangeId = exchangeId;

  std::vector<NodeId> subscribers = m_core->publish(item, m_loop->now());
  std::string detail = id.value;
  detail += " kind=";
  detail += toString(kind);
  detail += " ex=" + (exchangeId.empty() ? "-" : exchangeId);
  detail += " reply=" + (item.replyTo ? item.replyTo->value : "-");
  detail += " subs=" + std::to_string(subscribers.size());
  m_tracer->emit("core", "publish", detail);
}

void Nap::sendToServer(const std::string& serverId, const coap::Message& message)
{
  m_tracer->emit(m_node.value, "server_forward", "to=" + serverId + " " + coap::summary(message));
  m_links.toServer(serverId, message);
}

void Nap::sendToClient(const std::string& clientId, const coap::Message& message)
{
  m_tracer->emit(m_node.value, "client_send", "to=" + clientId + " " + coap::summary(message));
  m_links.toClient(clientId, message);
}

std::string Nap::handleClientRequest(const std::string& clientId,
                                     const coap::Message& message)
{
  m_tracer->emit(m_node.value, "client_request",
                 "from=" + clientId + " " + coap::summary(message));
  if (m_clients.count(clientId) == 0) {
    throw InvalidRequest("client not attached: " + clientId);
  }
  if (!message.code.isRequest()) {
    throw InvalidRequest("not a request: " + message.code.str());
  }
  coap::Uri uri = coap::uriFromOptions(message);

  auto observe = message.observe();
  if (message.code == coap::codes::Get && observe == coap::kObserveDeregister) {
    return deregisterObserve(clientId, message);
  }
  if (message.code == coap::codes::Get && observe == coap::kObserveRegister) {
    return registerObserve(clientId, message, uri);
  }
  return openExchange(clientId, message, uri, false);
}

std::string Nap::openExchange(const std::string& clientId, const coap::Message& message,
                              const coap::Uri& uri, bool isObserve)
{
  std::string exchangeId = newExchangeId();

  PendingExchange exchange;
  exchange.id = exchangeId;
  exchange.client = clientId;
  exchange.clientToken = message.token;
  exchange.clientMessageId = message.messageId;
  exchange.replyIdentifier = replyIdentifierFor(exchangeId);
  exchange.createdAt = exchange.lastActivity = m_loop->now();
  exchange.isObserve = isObserve;
  exchange.unicast = m_serverDirectory.count(uri.authority) > 0;
  exchange.resourceKey = uri.canonical();

  m_tracer->emit(m_node.value, "exchange_open",
                 exchangeId + " reply=" + exchange.replyIdentifier.value
                   + " observe=" + (isObserve ? "1" : "0")
                   + " unicast=" + (exchange.unicast ? "1" : "0"));
  if (m_core->subscribe(m_node, exchange.replyIdentifier)) {
    m_tracer->emit(m_node.value, "subscribe", exchange.replyIdentifier.value);
  }

  IcnIdentifier groupId = identifierFor(nameFromAuthority(uri.authority));
  std::optional<IcnIdentifier> replyTo = exchange.replyIdentifier;
  m_exchanges.emplace(exchangeId, std::move(exchange));
  scheduleExpiry(exchangeId);

  publishItem(ItemKind::Request, groupId, message, std::move(replyTo), exchangeId);
  return exchangeId;
}

std::string Nap::registerObserve(const std::string& clientId, const coap::Message& message,
                                 const coap::Uri& uri)
{
  std::string key = uri.canonical();
  auto it = m_aggregations.find(key);
  if (it != m_aggregations.end()) {
    // Another local client already observes this resource: absorb the
    // registration, no ICN traffic.
    ObserveAggregation& aggregation = it->second;
    aggregation.observers[clientId] = message.token;
    m_tracer->emit(m_node.value, "observe_add",
                   clientId + " " + aggregation.notificationId.value + " n="
                     + std::to_string(aggregation.observers.size()) + " absorbed=1");
    if (aggregation.lastNotification) {
      coap::Message replay = *aggregation.lastNotification;
      replay.type = coap::Type::Ack;
      replay.messageId = message.messageId;
      replay.token = message.token;
      sendToClient(clientId, replay);
    }
    return "";
  }

  ObserveAggregation aggregation;
  aggregation.resource = uri;
  aggregation.notificationId = notificationIdFor(uri);
  aggregation.observers[clientId] = message.token;
  m_tracer->emit(m_node.value, "aggregation_open", aggregation.notificationId.value);
  m_tracer->emit(m_node.value, "observe_add",
                 clientId + " " + aggregation.notificationId.value + " n=1 absorbed=0");
  if (m_core->subscribe(m_node, aggregation.notificationId)) {
    m_tracer->emit(m_node.value, "subscribe", aggregation.notificationId.value);
  }
  m_aggregations.emplace(key, std::move(aggregation));

  return openExchange(clientId, message, uri, true);
}

std::string Nap::deregisterObserve(const std::string& clientId,
                                   const coap::Message& message)
{
  coap::Uri uri = coap::uriFromOptions(message);
  std::string key = uri.canonical();
  auto it = m_aggregations.find(key);
  if (it == m_aggregations.end() || it->second.observers.count(clientId) == 0) {
    m_tracer->emit(m_node.value, "drop", "not_observing " + clientId + " " + uri.str());
    throw NotObserving(clientId + " does not observe " + uri.str());
  }
  ObserveAggregation& aggregation = it->second;
  aggregation.observers.erase(clientId);
  m_tracer->emit(m_node.value, "observe_remove",
                 clientId + " " + aggregation.notificationId.value + " n="
                   + std::to_string(aggregation.observers.size()));

  if (!aggregation.observers.empty()) {
    // Other observers remain; answer from cache, nothing leaves the NAP.
    coap::Message confirm;
    confirm.type = coap::Type::Ack;
    confirm.code = coap::codes::Content;
    confirm.messageId = message.messageId;
    confirm.token = message.token;
    if (aggregation.lastNotification) {
      confirm.payload = aggregation.lastNotification->payload;
    }
    sendToClient(clientId, confirm);
    return "";
  }

  if (m_core->unsubscribe(m_node, aggregation.notificationId)) {
    m_tracer->emit(m_node.value, "unsubscribe", aggregation.notificationId.value);
  }
  m_tracer->emit(m_node.value, "aggregation_close", aggregation.notificationId.value);
  m_aggregations.erase(it);

  // The last local observer left: run the deregistration as an ordinary
  // exchange so the confirmation comes back end to end.
  return openExchange(clientId, message, uri, false);
}

void Nap::handleIcnDelivery(const ContentItem& item)
{
  m_tracer->emit(m_node.value, "icn_recv",
                 item.identifier.value + " kind=" + toString(item.kind) + " ex="
                   + (item.exchangeId.empty() ? "-" : item.exchangeId));
  switch (item.kind) {
  case ItemKind::Request:
    handleRequestItem(item);
    return;
  case ItemKind::Response:
    handleResponseItem(item);
    return;
  case ItemKind::Notification:
    handleNotificationItem(item);
    return;
  }
}

void Nap::handleRequestItem(const ContentItem& item)
{
  if (!item.replyTo) {
    throw InternalError("request item without reply identifier");
  }
  coap::Message message = coap::decode(item.payload);
  coap::Uri uri = coap::uriFromOptions(message);

  std::vector<std::string> serverIds = selectServers(uri.authority);
  if (serverIds.empty()) {
    ++m_counters.noMatchingServer;
    m_tracer->emit(m_node.value, "drop", "no_matching_server authority=" + uri.authority);
    return;
  }

  auto observe = message.observe();
  for (const std::string& serverId : serverIds) {
    if (message.code == coap::codes::Get && observe == coap::kObserveRegister) {
      upstreamRegister(serverId, uri, message, item);
    }
    else if (message.code == coap::codes::Get && observe == coap::kObserveDeregister) {
      upstreamDeregister(serverId, uri, item);
    }
    else {
      forwardPlain(serverId, message, item);
    }
  }
}

coap::Message Nap::stripForServer(const coap::Message& message)
{
  // Servers address resources by path alone; the group machinery stays on
  // the NAP side of the link.
  coap::Message out = message;
  out.removeOptions(coap::options::UriHost);
  out.token = mintToken();
  out.messageId = mintMessageId();
  return out;
}

void Nap::forwardPlain(const std::string& serverId, const coap::Message& message,
                       const ContentItem& item)
{
  coap::Message forward = stripForServer(message);

  ForwardedRequest entry;
  entry.server = serverId;
  entry.serverToken = forward.token;
  entry.messageId = forward.messageId;
  entry.exchangeId = item.exchangeId;
  entry.replyTo = *item.replyTo;
  m_forwarded.emplace(std::make_pair(serverId, coap::toHex(forward.token)),
                      std::move(entry));

  sendToServer(serverId, forward);
}

void Nap::upstreamRegister(const std::string& serverId, const coap::Uri& uri,
                           const coap::Message& message, const ContentItem& item)
{
  auto key = std::make_pair(serverId, uri.canonical());
  NodeId requester{napFromReplyIdentifier(*item.replyTo)};

  auto it = m_upstream.find(key);
  if (it != m_upstream.end()) {
    UpstreamRegistration& registration = it->second;
    registration.interestedNaps.insert(requester);
    m_tracer->emit(m_node.value, "upstream_join",
                   requester.value + " " + serverId + " " + uri.str() + " n="
                     + std::to_string(registration.interestedNaps.size()));
    if (registration.lastNotification) {
      // Already established: answer this NAP directly from the cache; the
      // server is not consulted again.
      publishItem(ItemKind::Response, *item.replyTo, *registration.lastNotification,
                  std::nullopt, item.exchangeId);
    }
    else {
      registration.waiters.emplace_back(*item.replyTo, item.exchangeId);
    }
    return;
  }

  coap::Message forward = stripForServer(message);

  UpstreamRegistration registration;
  registration.resource = uri;
  registration.server = serverId;
  registration.serverToken = forward.token;
  registration.forwardMessageId = forward.messageId;
  registration.interestedNaps.insert(requester);
  registration.waiters.emplace_back(*item.replyTo, item.exchangeId);

  m_tracer->emit(m_node.value, "upstream_open",
                 serverId + " " + uri.str() + " tok=" + coap::toHex(forward.token));
  m_upstreamByToken.emplace(std::make_pair(serverId, coap::toHex(forward.token)), key);
  m_upstream.emplace(key, std::move(registration));

  sendToServer(serverId, forward);
}

void Nap::upstreamDeregister(const std::string& serverId, const coap::Uri& uri,
                             const ContentItem& item)
{
  auto key = std::make_pair(serverId, uri.canonical());
  auto it = m_upstream.find(key);
  if (it == m_upstream.end()) {
    m_tracer->emit(m_node.value, "drop",
                   "unknown_registration " + serverId + " " + uri.str());
    return;
  }
  UpstreamRegistration& registration = it->second;
  NodeId requester{napFromReplyIdentifier(*item.replyTo)};
  registration.interestedNaps.erase(requester);
  m_tracer->emit(m_node.value, "upstream_leave",
                 requester.value + " " + serverId + " " + uri.str() + " n="
                   + std::to_string(registration.interestedNaps.size()));

  if (!registration.interestedNaps.empty()) {
    // Other NAPs still depend on this registration: confirm from cache
    // without touching the server.
    coap::Message confirm;
    confirm.type = coap::Type::Ack;
    confirm.code = coap::codes::Content;
    if (registration.lastNotification) {
      confirm.payload = registration.lastNotification->payload;
    }
    publishItem(ItemKind::Response, *item.replyTo, confirm, std::nullopt, item.exchangeId);
    return;
  }

  eraseUpstream(key, "deregistered");

  // Last interested NAP left: deregister at the server for real. The
  // server's plain reply travels back over this forwarded request.
  coap::Message forward;
  forward.type = coap::Type::Con;
  forward.code = coap::codes::Get;
  forward.messageId = mintMessageId();
  forward.token = mintToken();
  forward.addOption(coap::uintOption(coap::options::Observe, coap::kObserveDeregister));
  for (const std::string& segment : uri.pathSegments) {
    forward.addOption(coap::stringOption(coap::options::UriPath, segment));
  }

  ForwardedRequest entry;
  entry.server = serverId;
  entry.serverToken = forward.token;
  entry.messageId = forward.messageId;
  entry.exchangeId = item.exchangeId;
  entry.replyTo = *item.replyTo;
  m_forwarded.emplace(std::make_pair(serverId, coap::toHex(forward.token)),
                      std::move(entry));

  sendToServer(serverId, forward);
}

void Nap::handleServerResponse(const std::string& serverId, const coap::Message& message)
{
  m_tracer->emit(m_node.value, "server_response",
                 "from=" + serverId + " " + coap::summary(message));

  if (message.isEmpty()) {
    // Empty ACK: no token, so match on the message id we forwarded with.
    for (const auto& [key, forwarded] : m_forwarded) {
      if (key.first == serverId && forwarded.messageId == message.messageId) {
        publishItem(ItemKind::Response, forwarded.replyTo, message, std::nullopt,
                    forwarded.exchangeId);
        return;
      }
    }
    for (const auto& [key, registration] : m_upstream) {
      if (key.first == serverId && registration.forwardMessageId == message.messageId) {
        for (const auto& [replyTo, exchangeId] : registration.waiters) {
          publishItem(ItemKind::Response, replyTo, message, std::nullopt, exchangeId);
        }
        return;
      }
    }
    ++m_counters.unknownToken;
    m_tracer->emit(m_node.value, "drop",
                   "unknown_ack " + serverId + " mid=" + std::to_string(message.messageId));
    return;
  }

  auto tokenKey = std::make_pair(serverId, coap::toHex(message.token));
  if (auto byToken = m_upstreamByToken.find(tokenKey); byToken != m_upstreamByToken.end()) {
    auto key = byToken->second;
    UpstreamRegistration& registration = m_upstream.at(key);
    if (message.observe()) {
      // Initial confirmation or a later notification: cache it and fan it
      // out once; every interested NAP is subscribed to the ntf/ id.
      registration.lastNotification = message;
      registration.waiters.clear();
      publishItem(ItemKind::Notification, notificationIdFor(registration.resource),
                  message, std::nullopt, "");
    }
    else {
      // The server declined the registration: plain response to each
      // waiting exchange, then forget the registration.
      for (const auto& [replyTo, exchangeId] : registration.waiters) {
        publishItem(ItemKind::Response, replyTo, message, std::nullopt, exchangeId);
      }
      eraseUpstream(key, "rejected");
    }
    return;
  }

  if (auto it = m_forwarded.find(tokenKey); it != m_forwarded.end()) {
    ForwardedRequest forwarded = std::move(it->second);
    m_forwarded.erase(it);
    publishItem(ItemKind::Response, forwarded.replyTo, message, std::nullopt,
                forwarded.exchangeId);
    return;
  }

  ++m_counters.unknownToken;
  m_tracer->emit(m_node.value, "drop",
                 "unknown_token " + serverId + " tok=" + coap::tokenHex(message.token));
}

void Nap::handleResponseItem(const ContentItem& item)
{
  auto it = m_exchanges.find(item.exchangeId);
  if (it == m_exchanges.end() || it->second.replyIdentifier != item.identifier) {
    ++m_counters.unknownExchange;
    m_tracer->emit(m_node.value, "drop",
                   "unknown_exchange ex=" + (item.exchangeId.empty() ? "-" : item.exchangeId));
    return;
  }
  PendingExchange& exchange = it->second;
  exchange.lastActivity = m_loop->now();
  coap::Message message = coap::decode(item.payload);

  if (message.isEmpty()) {
    // Relay the separate-response ACK with the id the client is waiting on.
    coap::Message ack;
    ack.type = coap::Type::Ack;
    ack.code = coap::codes::Empty;
    ack.messageId = exchange.clientMessageId;
    sendToClient(exchange.client, ack);
    return;  // the real response is still to come
  }

  if (!exchange.isObserve) {
    coap::Message out = message;
    out.token = exchange.clientToken;
    if (out.type == coap::Type::Ack) {
      out.messageId = exchange.clientMessageId;
    }
    else {
      out.messageId = mintMessageId();
    }
    sendToClient(exchange.client, out);
    if (exchange.unicast) {
      closeExchange(item.exchangeId, "completed");
    }
    return;
  }

  // Observe exchange answered with a targeted response (cache replay from
  // the server NAP).
  auto aggIt = m_aggregations.find(exchange.resourceKey);
  if (message.observe()) {
    if (aggIt == m_aggregations.end()) {
      // Observers vanished while the registration was in flight; the
      // upstream side was (or will be) torn down by the deregistration.
      m_tracer->emit(m_node.value, "drop", "no_aggregation " + exchange.resourceKey);
      closeExchange(item.exchangeId, "orphaned");
      return;
    }
    ObserveAggregation& aggregation = aggIt->second;
    aggregation.lastSeq = message.observe();
    aggregation.lastNotification = message;
    for (const auto& [clientId, token] : aggregation.observers) {
      coap::Message out = message;
      out.token = token;
      if (clientId == exchange.client && message.type == coap::Type::Ack) {
        out.messageId = exchange.clientMessageId;
      }
      else {
        out.type = coap::Type::Non;
        out.messageId = mintMessageId();
      }
      sendToClient(clientId, out);
    }
    closeExchange(item.exchangeId, "confirmed");
    return;
  }

  // Registration failed (response carries no Observe option): hand the
  // plain response to the registering client and drop it from the
  // aggregation.
  if (aggIt != m_aggregations.end()
      && aggIt->second.observers.erase(exchange.client) > 0) {
    ObserveAggregation& aggregation = aggIt->second;
    m_tracer->emit(m_node.value, "observe_remove",
                   exchange.client + " " + aggregation.notificationId.value + " n="
                     + std::to_string(aggregation.observers.size()));
    if (aggregation.observers.empty()) {
      if (m_core->unsubscribe(m_node, aggregation.notificationId)) {
        m_tracer->emit(m_node.value, "unsubscribe", aggregation.notificationId.value);
      }
      m_tracer->emit(m_node.value, "aggregation_close", aggregation.notificationId.value);
      m_aggregations.erase(aggIt);
    }
  }
  coap::Message out = message;
  out.token = exchange.clientToken;
  if (out.type == coap::Type::Ack) {
    out.messageId = exchange.clientMessageId;
  }
  else {
    out.messageId = mintMessageId();
  }
  sendToClient(exchange.client, out);
  closeExchange(item.exchangeId, "completed");
}

void Nap::handleNotificationItem(const ContentItem& item)
{
  std::string key = item.identifier.value.substr(kNotificationPrefix.size());
  auto it = m_aggregations.find(key);
  if (it == m_aggregations.end()) {
    m_tracer->emit(m_node.value, "drop", "no_aggregation " + item.identifier.value);
    return;
  }
  ObserveAggregation& aggregation = it->second;
  coap::Message message = coap::decode(item.payload);
  auto seq = message.observe();
  if (!seq) {
    m_tracer->emit(m_node.value, "drop", "notification_without_observe " + key);
    return;
  }
  if (aggregation.lastSeq && !fresher(*seq, *aggregation.lastSeq)) {
    ++m_counters.staleNotifications;
    m_tracer->emit(m_node.value, "drop",
                   "stale_notification " + item.identifier.value + " seq="
                     + std::to_string(*seq) + " last="
                     + std::to_string(*aggregation.lastSeq));
    return;
  }
  aggregation.lastSeq = seq;
  aggregation.lastNotification = message;

  for (const auto& [clientId, token] : aggregation.observers) {
    coap::Message out = message;
    out.type = coap::Type::Non;
    out.messageId = mintMessageId();
    out.token = token;
    sendToClient(clientId, out);
  }

  // A first notification also confirms any registration exchange still in
  // flight for this resource.
  std::vector<std::string> confirmed;
  for (const auto& [exchangeId, exchange] : m_exchanges) {
    if (exchange.isObserve && exchange.resourceKey == key) {
      confirmed.push_back(exchangeId);
    }
  }
  for (const std::string& exchangeId : confirmed) {
    closeExchange(exchangeId, "confirmed");
  }
}

void Nap::eraseUpstream(const std::pair<std::string, std::string>& key, const char* reason)
{
  auto it = m_upstream.find(key);
  if (it == m_upstream.end()) {
    return;
  }
  m_tracer->emit(m_node.value, "upstream_close",
                 it->second.server + " " + it->second.resource.str() + " reason="
                   + reason);
  m_upstreamByToken.erase(
    std::make_pair(key.first, coap::toHex(it->second.serverToken)));
  m_upstream.erase(it);
}

void Nap::closeExchange(const std::string& exchangeId, const char* reason)
{
  auto it = m_exchanges.find(exchangeId);
  if (it == m_exchanges.end()) {
    return;
  }
  if (m_core->unsubscribe(m_node, it->second.replyIdentifier)) {
    m_tracer->emit(m_node.value, "unsubscribe", it->second.replyIdentifier.value);
  }
  m_tracer->emit(m_node.value, "exchange_close",
                 exchangeId + std::string(" reason=") + reason);
  m_exchanges.erase(it);
}

void Nap::scheduleExpiry(const std::string& exchangeId)
{
  m_loop->schedule(m_loop->now() + m_exchangeTimeout,
                   [this, exchangeId] { expiryCheck(exchangeId); });
}

void Nap::expiryCheck(const std::string& exchangeId)
{
  auto it = m_exchanges.find(exchangeId);
  if (it == m_exchanges.end()) {
    return;
  }
  SimTime idle = m_loop->now() - it->second.lastActivity;
  if (idle >= m_exchangeTimeout) {
    closeExchange(exchangeId, "timeout");
    return;
  }
  m_loop->schedule(it->second.lastActivity + m_exchangeTimeout,
                   [this, exchangeId] { expiryCheck(exchangeId); });
}

}  // namespace icnap
