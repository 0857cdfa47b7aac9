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

#include "icnap/icn_core.hpp"

namespace icnap {

const char* toString(ItemKind kind)
{
  switch (kind) {
  case ItemKind::Request:
    return "REQ";
  case ItemKind::Response:
    return "RSP";
  case ItemKind::Notification:
    return "NTF";
  }
  return "?";
}

bool IcnCore::subscribe(const NodeId& node, const IcnIdentifier& id)
{
  return m_table[id].insert(node).second;
}

bool IcnCore::unsubscribe(const NodeId& node, const IcnIdentifier& id)
{
  auto it = m_table.find(id);
  if (it == m_table.end()) {
    return false;
  }
  bool removed = it->second.erase(node) > 0;
  if (it->second.empty()) {
    m_table.erase(it);
  }
  return removed;
}

std::vector<NodeId> IcnCore::publish(const ContentItem& item, SimTime at)
{
  m_metrics.publications++;
  m_metrics.perIdentifier[item.identifier].publications++;

  // Snapshot first: deliveries must not see subscription changes made by
  // the deliver callback itself.
  std::vector<NodeId> snapshot;
  if (auto it = m_table.find(item.identifier); it != m_table.end()) {
    snapshot.assign(it->second.begin(), it->second.end());
  }
  for (const NodeId& node : snapshot) {
    m_metrics.deliveries++;
    m_metrics.perIdentifier[item.identifier].deliveries++;
    m_deliver(node, item, at + m_hopLatency);
  }
  return snapshot;
}

std::size_t IcnCore::subscriberCount(const IcnIdentifier& id) const
{
  auto it = m_table.find(id);
  return it == m_table.end() ? 0 : it->second.size();
}

}  // namespace icnap
