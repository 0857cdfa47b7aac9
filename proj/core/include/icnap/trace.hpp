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

#ifndef ICNAP_TRACE_HPP
#define ICNAP_TRACE_HPP

#include <string>
#include <string_view>
#include <vector>

#include "icnap/event_loop.hpp"

namespace icnap {

struct TraceEntry {
  SimTime time;
  std::string actor;
  std::string kind;
  std::string detail;

  /// "<time> <actor> <kind> <detail>"
  std::string line() const
  {
    return std::to_string(time) + ' ' + actor + ' ' + kind + ' ' + detail;
  }

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/// Append-only event log stamped with the loop clock. Trace text is part
/// of the observable behavior: identical runs produce identical bytes.
class Tracer {
 public:
  explicit Tracer(const EventLoop& clock) : m_clock(&clock) {}

  void emit(std::string_view actor, std::string_view kind, std::string_view detail)
  {
    m_entries.push_back(TraceEntry{m_clock->now(), std::string(actor), std::string(kind),
                                   std::string(detail)});
  }

  const std::vector<TraceEntry>& entries() const { return m_entries; }

  std::string render() const
  {
    std::string out;
    for (const TraceEntry& entry : m_entries) {
      out += entry.line();
      out += '\n';
    }
    return out;
  }

 private:
  const EventLoop* m_clock;
  std::vector<TraceEntry> m_entries;
};

}  // namespace icnap

#endif  // ICNAP_TRACE_HPP
