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

#include <doctest.h>

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "icnap/endpoints.hpp"
#include "icnap/nap.hpp"

using namespace icnap;

namespace {

using Bytes = std::vector<std::uint8_t>;

Bytes bytes(std::string_view text)
{
  return Bytes(text.begin(), text.end());
}

struct Sent {
  SimTime time = 0;
  std::string nap;
  std::string peer;
  coap::Message message;
};

/// Two-sided world: real core, real loop, link shims that record every
/// CoAP message and optionally drive a live server.
struct NapFixture {
  EventLoop loop;
  Tracer tracer{loop};
  std::map<std::string, Nap*> route;
  IcnCore core;
  std::vector<Sent> serverWire;  // NAP -> server
  std::vector<Sent> clientWire;  // NAP -> client
  std::map<std::string, CoapServer*> liveServers;
  std::vector<std::unique_ptr<Nap>> naps;
  std::vector<std::unique_ptr<CoapServer>> servers;
  AttributeHierarchy hierarchy{std::vector<std::string>{"building", "wing", "floor"}};

  NapFixture()
    : core(
        [this](const NodeId& node, const ContentItem& item, SimTime at) {
          loop.schedule(at, [this, node, item] { route.at(node.value)->handleIcnDelivery(item); });
        },
        1)
  {
  }

  AttributeAssignment fullAssignment()
  {
    AttributeAssignment a;
    a.assign("building", "building6");
    a.assign("wing", "west");
    a.assign("floor", "floor3");
    return a;
  }

  Nap& addNap(const std::string& id, std::vector<AttributeAssignment> assignments,
              std::set<std::string> directory, SimTime timeout = kDefaultExchangeTimeout)
  {
    Nap::Links links{
      [this, id](const std::string& serverId, const coap::Message& m) {
        serverWire.push_back({loop.now(), id, serverId, m});
        auto it = liveServers.find(serverId);
        if (it != liveServers.end()) {
          CoapServer* srv = it->second;
          loop.schedule(loop.now() + 1, [srv, m] { srv->handle(m); });
        }
      },
      [this, id](const std::string& clientId, const coap::Message& m) {
        clientWire.push_back({loop.now(), id, clientId, m});
      }};
    naps.push_back(std::make_unique<Nap>(NodeId{id}, hierarchy, std::move(assignments),
                                         core, loop, tracer, std::move(links),
                                         std::move(directory), timeout));
    route[id] = naps.back().get();
    return *naps.back();
  }

  CoapServer& addLiveServer(Nap& nap, const std::string& serverId, const std::string& fqdn)
  {
    Nap* owner = &nap;
    servers.push_back(std::make_unique<CoapServer>(
      serverId, loop, tracer, [this, owner, serverId](const coap::Message& m) {
        loop.schedule(loop.now() + 1,
                      [owner, serverId, m] { owner->handleServerResponse(serverId, m); });
      }));
    liveServers[serverId] = servers.back().get();
    nap.attachServer(serverId, fqdn);
    return *servers.back();
  }

  static coap::Message clientRequest(coap::Code code, const std::string& uri,
                                     std::uint16_t mid, Bytes token,
                                     std::optional<std::uint32_t> observe = std::nullopt,
                                     Bytes payload = {})
  {
    coap::Message m;
    m.type = coap::Type::Con;
    m.code = code;
    m.messageId = mid;
    m.token = std::move(token);
    for (coap::Option& opt : coap::uriToOptions(coap::parseUri(uri))) {
      m.addOption(std::move(opt));
    }
    if (observe) {
      m.addOption(coap::uintOption(coap::options::Observe, *observe));
    }
    m.payload = std::move(payload);
    return m;
  }

  std::size_t traceCount(std::string_view kind) const
  {
    return static_cast<std::size_t>(
      std::count_if(tracer.entries().begin(), tracer.entries().end(),
                    [&](const TraceEntry& e) { return e.kind == kind; }));
  }
};

const std::string kFqdn = "s1.floor3.west.building6";

}  // namespace

TEST_CASE("attaching a server subscribes the FQDN plus every group name")
{
  NapFixture f;
  Nap& nap = f.addNap("N1", {f.fullAssignment()}, {kFqdn});
  std::vector<IcnIdentifier> added = nap.attachServer("S1", kFqdn);

  std::set<std::string> ids;
  for (const IcnIdentifier& id : added) {
    ids.insert(id.value);
  }
  CHECK(ids
        == std::set<std::string>{"grp/" + kFqdn, "grp/building6", "grp/west.building6",
                                 "grp/floor3.building6", "grp/floor3.west.building6"});
  CHECK(nap.baseSubscriptions().size() == 5);
  CHECK(f.core.subscriberCount(IcnIdentifier{"grp/building6"}) == 1);

  CHECK_THROWS_AS(nap.attachServer("S1", kFqdn), DuplicateServer);

  // A second server on the same NAP only adds its own FQDN.
  std::vector<IcnIdentifier> more = nap.attachServer("S2", "s2.floor3.west.building6");
  REQUIRE(more.size() == 1);
  CHECK(more[0].value == "grp/s2.floor3.west.building6");
}

TEST_CASE("client requests require an attached client and a request code")
{
  NapFixture f;
  Nap& nap = f.addNap("N1", {}, {});
  coap::Message get =
    NapFixture::clientRequest(coap::codes::Get, "coap://building6/temperature", 1, {0xC1});

  CHECK_THROWS_AS(nap.handleClientRequest("C1", get), InvalidRequest);

  nap.attachClient("C1");
  coap::Message response = get;
  response.code = coap::codes::Content;
  CHECK_THROWS_AS(nap.handleClientRequest("C1", response), InvalidRequest);
}

TEST_CASE("a group GET travels client NAP -> core -> server NAP -> server and back")
{
  NapFixture f;
  Nap& n1 = f.addNap("N1", {}, {kFqdn});
  Nap& n2 = f.addNap("N2", {f.fullAssignment()}, {kFqdn});
  CoapServer& server = f.addLiveServer(n2, "S1", kFqdn);
  server.addResource({"/temperature", bytes("21"), false, std::nullopt, 2});
  n1.attachClient("C1");

  coap::Message get =
    NapFixture::clientRequest(coap::codes::Get, "coap://building6/temperature", 1, {0xC1});
  std::string exchange = n1.handleClientRequest("C1", get);
  CHECK(exchange == "e1");
  CHECK(n1.openExchangeCount() == 1);

  f.loop.run();

  // The server saw exactly one request: host stripped, NAP-minted token.
  REQUIRE(f.serverWire.size() == 1);
  const coap::Message& forwarded = f.serverWire[0].message;
  CHECK(f.serverWire[0].peer == "S1");
  CHECK(forwarded.findOption(coap::options::UriHost) == nullptr);
  CHECK(coap::optionText(*forwarded.findOption(coap::options::UriPath)) == "temperature");
  CHECK(forwarded.token == Bytes{0x00, 0x00, 0x00, 0x01});

  // The client got the translated response under its own token and mid.
  REQUIRE(f.clientWire.size() == 1);
  const coap::Message& reply = f.clientWire[0].message;
  CHECK(f.clientWire[0].peer == "C1");
  CHECK(reply.type == coap::Type::Ack);
  CHECK(reply.code == coap::codes::Content);
  CHECK(reply.messageId == 1);
  CHECK(reply.token == Bytes{0xC1});
  CHECK(reply.payload == bytes("21"));

  // Group exchanges cannot know their response count; the idle timer
  // reclaims them and subscriptions return to the attach-time set.
  CHECK(n1.openExchangeCount() == 0);
  CHECK(f.traceCount("exchange_close") == 1);
  CHECK(f.core.subscriptions().size() == 5);

  NapCounters c = n1.counters();
  CHECK(c.unknownExchange == 0);
  CHECK(c.unknownToken == 0);
}

TEST_CASE("a unicast exchange closes as soon as its single response arrives")
{
  NapFixture f;
  Nap& n1 = f.addNap("N1", {}, {kFqdn});
  Nap& n2 = f.addNap("N2", {f.fullAssignment()}, {kFqdn});
  CoapServer& server = f.addLiveServer(n2, "S1", kFqdn);
  server.addResource({"/temperature", bytes("21"), false, std::nullopt, 2});
  n1.attachClient("C1");

  n1.handleClientRequest(
    "C1", NapFixture::clientRequest(coap::codes::Get, "coap://" + kFqdn + "/temperature",
                                    1, {0xC1}));
  f.loop.run();

  REQUIRE(f.clientWire.size() == 1);
  CHECK(n1.openExchangeCount() == 0);
  // Closed by the response itself, long before the idle timer.
  bool sawCompleted = false;
  for (const TraceEntry& e : f.tracer.entries()) {
    if (e.kind == "exchange_close") {
      CHECK(e.detail.find("reason=completed") != std::string::npos);
      CHECK(e.time < kDefaultExchangeTimeout);
      sawCompleted = true;
    }
  }
  CHECK(sawCompleted);
}

TEST_CASE("two NAPs observing one resource share a single upstream registration")
{
  NapFixture f;
  Nap& n1 = f.addNap("N1", {}, {kFqdn});
  Nap& n2 = f.addNap("N2", {}, {kFqdn});
  Nap& n3 = f.addNap("N3", {f.fullAssignment()}, {kFqdn});
  CoapServer& server = f.addLiveServer(n3, "S1", kFqdn);
  server.addResource({"/temperature", bytes("21"), true, std::nullopt, 2});
  n1.attachClient("C1");
  n2.attachClient("C2");

  const std::string uri = "coap://" + kFqdn + "/temperature";
  n1.handleClientRequest("C1", NapFixture::clientRequest(coap::codes::Get, uri, 1, {0xC1},
                                                         coap::kObserveRegister));
  f.loop.run();
  REQUIRE(f.clientWire.size() == 1);
  CHECK(f.clientWire[0].message.observe() == 2);

  std::size_t wireBefore = f.serverWire.size();
  n2.handleClientRequest("C2", NapFixture::clientRequest(coap::codes::Get, uri, 1, {0xC2},
                                                         coap::kObserveRegister));
  f.loop.run();

  // The second NAP joined the existing registration: no new server traffic,
  // its client answered from the sNAP cache.
  CHECK(f.serverWire.size() == wireBefore);
  CHECK(server.registrations().size() == 1);
  REQUIRE(f.clientWire.size() == 2);
  CHECK(f.clientWire[1].peer == "C2");
  CHECK(f.clientWire[1].message.token == Bytes{0xC2});
  CHECK(f.clientWire[1].message.observe() == 2);

  REQUIRE(n3.upstreamRegistrations().size() == 1);
  const UpstreamRegistration& up = n3.upstreamRegistrations().begin()->second;
  CHECK(up.interestedNaps == std::set<NodeId>{{"N1"}, {"N2"}});

  // One update: one notification publication fans out to both NAPs.
  std::uint64_t pubsBefore = f.core.metrics().publications;
  server.updateResource("/temperature", bytes("25"));
  f.loop.run();

  CHECK(f.core.metrics().publications == pubsBefore + 1);
  REQUIRE(f.clientWire.size() == 4);
  for (std::size_t i = 2; i < 4; ++i) {
    CHECK(f.clientWire[i].message.type == coap::Type::Non);
    CHECK(f.clientWire[i].message.payload == bytes("25"));
    CHECK(f.clientWire[i].message.observe() == 3);
  }
  CHECK(f.clientWire[2].message.token != f.clientWire[3].message.token);
}

TEST_CASE("duplicate local observers are absorbed without ICN traffic")
{
  NapFixture f;
  Nap& n1 = f.addNap("N1", {}, {kFqdn});
  Nap& n2 = f.addNap("N2", {f.fullAssignment()}, {kFqdn});
  CoapServer& server = f.addLiveServer(n2, "S1", kFqdn);
  server.addResource({"/temperature", bytes("21"), true, std::nullopt, 2});
  n1.attachClient("C1");
  n1.attachClient("C2");

  const std::string uri = "coap://" + kFqdn + "/temperature";
  CHECK(n1.handleClientRequest(
          "C1", NapFixture::clientRequest(coap::codes::Get, uri, 1, {0xC1},
                                          coap::kObserveRegister))
        == "e1");
  f.loop.run();

  std::uint64_t pubsBefore = f.core.metrics().publications;
  CHECK(n1.handleClientRequest(
          "C2", NapFixture::clientRequest(coap::codes::Get, uri, 7, {0xC2},
                                          coap::kObserveRegister))
        == "");
  f.loop.run();

  CHECK(f.core.metrics().publications == pubsBefore);
  REQUIRE(f.clientWire.size() == 2);
  // The absorbed registration is confirmed by replaying the cached state.
  CHECK(f.clientWire[1].peer == "C2");
  CHECK(f.clientWire[1].message.type == coap::Type::Ack);
  CHECK(f.clientWire[1].message.messageId == 7);
  CHECK(f.clientWire[1].message.token == Bytes{0xC2});
  CHECK(f.clientWire[1].message.payload == bytes("21"));

  REQUIRE(n1.aggregations().size() == 1);
  CHECK(n1.aggregations().begin()->second.observers.size() == 2);
}

TEST_CASE("observe teardown peels refcounts before touching the server")
{
  NapFixture f;
  Nap& n1 = f.addNap("N1", {}, {kFqdn});
  Nap& n2 = f.addNap("N2", {}, {kFqdn});
  Nap& n3 = f.addNap("N3", {f.fullAssignment()}, {kFqdn});
  CoapServer& server = f.addLiveServer(n3, "S1", kFqdn);
  server.addResource({"/temperature", bytes("21"), true, std::nullopt, 2});
  n1.attachClient("C1");
  n2.attachClient("C2");

  const std::string uri = "coap://" + kFqdn + "/temperature";
  n1.handleClientRequest("C1", NapFixture::clientRequest(coap::codes::Get, uri, 1, {0xC1},
                                                         coap::kObserveRegister));
  n2.handleClientRequest("C2", NapFixture::clientRequest(coap::codes::Get, uri, 1, {0xC2},
                                                         coap::kObserveRegister));
  f.loop.run();

  // First leave decrements the refcount; the server hears nothing and the
  // confirmation comes from the sNAP cache.
  std::size_t wireBefore = f.serverWire.size();
  n2.handleClientRequest("C2", NapFixture::clientRequest(coap::codes::Get, uri, 2, {0xC2},
                                                         coap::kObserveDeregister));
  f.loop.run();
  CHECK(f.serverWire.size() == wireBefore);
  CHECK(server.registrations().size() == 1);
  CHECK(n2.aggregations().empty());
  REQUIRE(n3.upstreamRegistrations().size() == 1);
  CHECK(n3.upstreamRegistrations().begin()->second.interestedNaps
        == std::set<NodeId>{{"N1"}});
  const coap::Message& confirm = f.clientWire.back().message;
  CHECK(confirm.code == coap::codes::Content);
  CHECK(confirm.token == Bytes{0xC2});
  CHECK(!confirm.observe().has_value());

  // The last leave deregisters at the server, end to end.
  n1.handleClientRequest("C1", NapFixture::clientRequest(coap::codes::Get, uri, 2, {0xC1},
                                                         coap::kObserveDeregister));
  f.loop.run();
  CHECK(f.serverWire.size() == wireBefore + 1);
  CHECK(f.serverWire.back().message.observe() == coap::kObserveDeregister);
  CHECK(server.registrations().empty());
  CHECK(n3.upstreamRegistrations().empty());
  CHECK(n1.aggregations().empty());
  const coap::Message& finalConfirm = f.clientWire.back().message;
  CHECK(finalConfirm.token == Bytes{0xC1});
  CHECK(finalConfirm.code == coap::codes::Content);

  // Quiesced: every NAP is back to its attach-time subscription set.
  for (const auto& [id, subscribers] : f.core.subscriptions()) {
    for (const NodeId& node : subscribers) {
      CHECK(f.route.at(node.value)->baseSubscriptions().count(id) == 1);
    }
  }

  CHECK_THROWS_AS(
    n1.handleClientRequest("C1", NapFixture::clientRequest(coap::codes::Get, uri, 3,
                                                           {0xC1},
                                                           coap::kObserveDeregister)),
    NotObserving);
}

TEST_CASE("notification freshness follows RFC 7641 serial arithmetic")
{
  NapFixture f;
  Nap& n1 = f.addNap("N1", {}, {kFqdn});
  Nap& n2 = f.addNap("N2", {f.fullAssignment()}, {kFqdn});
  CoapServer& server = f.addLiveServer(n2, "S1", kFqdn);
  server.addResource({"/temperature", bytes("21"), true, std::nullopt, 2});
  n1.attachClient("C1");

  const std::string uri = "coap://" + kFqdn + "/temperature";
  n1.handleClientRequest("C1", NapFixture::clientRequest(coap::codes::Get, uri, 1, {0xC1},
                                                         coap::kObserveRegister));
  f.loop.run();
  REQUIRE(n1.aggregations().size() == 1);
  CHECK(n1.aggregations().begin()->second.lastSeq == 2);

  auto notify = [&](std::uint32_t seq) {
    coap::Message n;
    n.type = coap::Type::Non;
    n.code = coap::codes::Content;
    n.messageId = 0x4000;
    n.token = {0xFE};
    n.addOption(coap::uintOption(coap::options::Observe, seq));
    n.payload = bytes("v" + std::to_string(seq));
    ContentItem item;
    item.identifier = IcnIdentifier{"ntf/" + kFqdn + "/temperature"};
    item.kind = ItemKind::Notification;
    item.payload = coap::encode(n);
    n1.handleIcnDelivery(item);
  };

  std::size_t delivered = f.clientWire.size();
  notify(5);
  CHECK(f.clientWire.size() == delivered + 1);  // fresher, forwarded
  notify(4);
  CHECK(f.clientWire.size() == delivered + 1);  // stale, dropped
  CHECK(n1.counters().staleNotifications == 1);

  // Climb to the top of the 24-bit space in half-window hops, then wrap.
  notify(1u << 23);
  notify((1u << 24) - 1);
  CHECK(n1.aggregations().begin()->second.lastSeq == (1u << 24) - 1);
  delivered = f.clientWire.size();
  notify(1);  // wraparound: 1 is fresher than 2^24-1
  CHECK(f.clientWire.size() == delivered + 1);
  CHECK(n1.aggregations().begin()->second.lastSeq == 1);
  notify((1u << 24) - 1);  // now ancient history
  CHECK(f.clientWire.size() == delivered + 1);
  CHECK(n1.counters().staleNotifications == 2);
}

TEST_CASE("requests that match no attached server are counted and dropped")
{
  NapFixture f;
  Nap& n2 = f.addNap("N2", {f.fullAssignment()}, {kFqdn});
  f.addLiveServer(n2, "S1", kFqdn);

  coap::Message get = NapFixture::clientRequest(
    coap::codes::Get, "coap://east.building6/temperature", 1, {0xC1});
  ContentItem item;
  item.identifier = IcnIdentifier{"grp/east.building6"};
  item.kind = ItemKind::Request;
  item.payload = coap::encode(get);
  item.replyTo = IcnIdentifier{"rsp/N9/e1"};
  item.exchangeId = "e1";
  n2.handleIcnDelivery(item);

  CHECK(n2.counters().noMatchingServer == 1);
  CHECK(f.serverWire.empty());
}

TEST_CASE("responses for unknown exchanges and tokens are counted")
{
  NapFixture f;
  Nap& n1 = f.addNap("N1", {}, {kFqdn});
  Nap& n2 = f.addNap("N2", {f.fullAssignment()}, {kFqdn});
  f.addLiveServer(n2, "S1", kFqdn);

  coap::Message response;
  response.type = coap::Type::Ack;
  response.code = coap::codes::Content;
  response.messageId = 1;
  response.token = {0x01};

  ContentItem item;
  item.identifier = IcnIdentifier{"rsp/N1/e99"};
  item.kind = ItemKind::Response;
  item.payload = coap::encode(response);
  item.exchangeId = "e99";
  n1.handleIcnDelivery(item);
  CHECK(n1.counters().unknownExchange == 1);
  CHECK(f.clientWire.empty());

  coap::Message stray;
  stray.type = coap::Type::Non;
  stray.code = coap::codes::Content;
  stray.messageId = 2;
  stray.token = {0xDE, 0xAD, 0xBE, 0xEF};
  n2.handleServerResponse("S1", stray);
  CHECK(n2.counters().unknownToken == 1);
}

TEST_CASE("a group exchange nobody answers is reclaimed by the idle timer")
{
  NapFixture f;
  Nap& n1 = f.addNap("N1", {}, {"elsewhere"}, 100);
  n1.attachClient("C1");

  n1.handleClientRequest(
    "C1",
    NapFixture::clientRequest(coap::codes::Get, "coap://building9/temperature", 1, {0xC1}));
  CHECK(n1.openExchangeCount() == 1);

  f.loop.run();

  CHECK(n1.openExchangeCount() == 0);
  CHECK(f.loop.now() >= 100);
  CHECK(f.clientWire.empty());
  bool sawTimeout = false;
  for (const TraceEntry& e : f.tracer.entries()) {
    if (e.kind == "exchange_close" && e.detail.find("reason=timeout") != std::string::npos) {
      sawTimeout = true;
    }
  }
  CHECK(sawTimeout);
  // The rsp/ subscription is gone again.
  CHECK(f.core.subscriptions().empty());
}
