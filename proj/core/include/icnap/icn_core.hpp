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

#ifndef ICNAP_ICN_CORE_HPP
#define ICNAP_ICN_CORE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "icnap/event_loop.hpp"
#include "icnap/names.hpp"

namespace icnap {

struct NodeId {
  std::string value;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

enum class ItemKind : std::uint8_t {
  Request,       // CoAP request, published to a grp/ identifier
  Response,      // reply routed to one rsp/<nap>/<exchange> identifier
  Notification,  // observe update fanned out on a ntf/ identifier
};

const char* toString(ItemKind kind);

/// Payload plus routing metadata carried through the rendezvous fabric.
struct ContentItem {
  IcnIdentifier identifier;
  ItemKind kind = ItemKind::Request;
  std::vector<std::uint8_t> payload;        // an encoded CoAP message
  std::optional<IcnIdentifier> replyTo;     // requests only
  std::string exchangeId;                   // empty for notifications
};

struct IdentifierMetrics {
  std::uint64_t publications = 0;
  std::uint64_t deliveries = 0;
};

struct CoreMetrics {
  std::uint64_t publications = 0;
  std::uint64_t deliveries = 0;
  std::map<IcnIdentifier, IdentifierMetrics> perIdentifier;
};

/// Rendezvous point and forwarder in one: flat exact-match identifiers,
/// and each publication fans out to the identifier's current subscribers
/// immediately. Nothing is stored; a publication with no subscribers is
/// dropped (its metrics still count the publication).
class IcnCore {
 public:
  /// deliver(subscriber, item, deliverAt) is called once per subscriber,
  /// in ascending NodeId order, with deliverAt = publish time + hop latency.
  using DeliverFn = std::function<void(const NodeId&, const ContentItem&, SimTime)>;

  IcnCore(DeliverFn deliver, SimTime hopLatency)
    : m_deliver(std::move(deliver)), m_hopLatency(hopLatency)
  {
  }

  /// Returns true when the subscription is new.
  bool subscribe(const NodeId& node, const IcnIdentifier& id);
  /// Returns true when a subscription was actually removed.
  bool unsubscribe(const NodeId& node, const IcnIdentifier& id);

  /// Fans the item out to the current subscriber snapshot and returns it
  /// (ascending order). Deliveries equal the snapshot size, always.
  std::vector<NodeId> publish(const ContentItem& item, SimTime at);

  std::size_t subscriberCount(const IcnIdentifier& id) const;
  const std::map<IcnIdentifier, std::set<NodeId>>& subscriptions() const { return m_table; }
  const CoreMetrics& metrics() const { return m_metrics; }
  SimTime hopLatency() const { return m_hopLatency; }

 private:
  DeliverFn m_deliver;
  SimTime m_hopLatency;
  std::map<IcnIdentifier, std::set<NodeId>> m_table;
  CoreMetrics m_metrics;
};

}  // namespace icnap

#endif  // ICNAP_ICN_CORE_HPP
