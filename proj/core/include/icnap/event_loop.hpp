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

#ifndef ICNAP_EVENT_LOOP_HPP
#define ICNAP_EVENT_LOOP_HPP

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace icnap {

using SimTime = std::int64_t;

/// Raised for bugs in the simulation machinery itself (never for bad
/// scenario input).
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Single-threaded discrete-event loop. Events run to completion in
/// (time, insertion order); handlers may schedule further events at or
/// after the current time. Determinism rests on this total order.
class EventLoop {
 public:
  void schedule(SimTime at, std::function<void()> fn)
  {
    if (at < m_now) {
      throw InternalError("event scheduled in the past");
    }
    m_queue.push(Event{at, m_nextSeq++, std::move(fn)});
  }

  SimTime now() const { return m_now; }
  std::size_t pending() const { return m_queue.size(); }

  /// Observer invoked after each handler returns; used for state sampling.
  void setPostEventHook(std::function<void()> hook) { m_postEvent = std::move(hook); }

  bool step()
  {
    if (m_queue.empty()) {
      return false;
    }
    // Moving the handler out keeps it valid while it schedules new events.
    auto fn = std::move(m_queue.top().fn);
    m_now = m_queue.top().at;
    m_queue.pop();
    fn();
    if (m_postEvent) {
      m_postEvent();
    }
    return true;
  }

  /// Runs to quiescence; returns the number of events executed.
  std::size_t run()
  {
    std::size_t executed = 0;
    while (step()) {
      ++executed;
    }
    return executed;
  }

 private:
  struct Event {
    SimTime at;
    std::uint64_t seq;
    mutable std::function<void()> fn;  // moved out of top() before pop
  };

  struct Later {
    bool operator()(const Event& a, const Event& b) const
    {
      return std::pair(a.at, a.seq) > std::pair(b.at, b.seq);
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> m_queue;
  SimTime m_now = 0;
  std::uint64_t m_nextSeq = 0;
  std::function<void()> m_postEvent;
};

}  // namespace icnap

#endif  // ICNAP_EVENT_LOOP_HPP
