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

#include <string>

#include "icnap/scenario.hpp"

using namespace icnap;

namespace {

const char* kFixture = R"(# cNAP/sNAP deployment
hierarchy building wing floor

nap N1 building=building6 wing=west floor=floor3
nap N2 building=building6

server S1 nap=N1 fqdn=s1.floor3.west.building6
resource S1 /temperature value=21 observable
resource S1 /boot value=ok ready_at=60

client C1 nap=N2

at 10 C1 GET coap://building6/temperature
at 10 C1 OBSERVE coap://s1.floor3.west.building6/temperature
at 5 C1 PUT coap://building6/temperature 25
at 20 SET S1 /temperature 30
at 30 C1 UNOBSERVE coap://s1.floor3.west.building6/temperature
)";

template <typename Error>
int lineOf(const std::string& text)
{
  try {
    (void)parseScenario(text);
  }
  catch (const Error& e) {
    return e.line();
  }
  FAIL("expected a scenario error");
  return -1;
}

}  // namespace

TEST_CASE("the fixture scenario parses into the expected declarations")
{
  Scenario s = parseScenario(kFixture);

  CHECK(s.hierarchy.levels() == std::vector<std::string>{"building", "wing", "floor"});

  REQUIRE(s.naps.size() == 2);
  CHECK(s.naps[0].id == "N1");
  REQUIRE(s.naps[0].assignments.size() == 1);
  CHECK(s.naps[0].assignments[0].valueOf("floor") == "floor3");
  CHECK(s.naps[1].assignments[0].valueOf("building") == "building6");

  REQUIRE(s.servers.size() == 1);
  CHECK(s.servers[0].nap == "N1");
  CHECK(s.servers[0].fqdn == "s1.floor3.west.building6");

  REQUIRE(s.resources.size() == 2);
  CHECK(s.resources[0].path == "/temperature");
  CHECK(s.resources[0].observable);
  CHECK(!s.resources[0].readyAt.has_value());
  CHECK(s.resources[1].readyAt == 60);
  CHECK(!s.resources[1].observable);

  REQUIRE(s.clients.size() == 1);
  CHECK(s.clients[0].nap == "N2");

  // The script is stably sorted by time: the PUT written last-but-two runs
  // first, and the two t=10 actions keep their file order.
  REQUIRE(s.script.size() == 5);
  CHECK(s.script[0].kind == ActionKind::ClientPut);
  CHECK(s.script[0].time == 5);
  CHECK(s.script[0].payload == std::vector<std::uint8_t>{'2', '5'});
  CHECK(s.script[1].kind == ActionKind::ClientGet);
  CHECK(s.script[2].kind == ActionKind::ClientObserve);
  CHECK(s.script[3].kind == ActionKind::ServerSet);
  CHECK(s.script[3].actor == "S1");
  CHECK(s.script[3].target == "/temperature");
  CHECK(s.script[4].kind == ActionKind::ClientUnobserve);
  CHECK(s.script[4].time == 30);
}

TEST_CASE("a second nap line adds an assignment to the same NAP")
{
  Scenario s = parseScenario("hierarchy building wing\n"
                             "nap N1 building=b6 wing=west\n"
                             "nap N1 building=b7\n");
  REQUIRE(s.naps.size() == 1);
  REQUIRE(s.naps[0].assignments.size() == 2);
  CHECK(s.naps[0].assignments[1].valueOf("building") == "b7");
}

TEST_CASE("structural errors carry the offending line number")
{
  SUBCASE("missing hierarchy before a nap")
  {
    CHECK(lineOf<ParseError>("nap N1 building=b6\n") == 1);
  }
  SUBCASE("duplicate hierarchy")
  {
    CHECK(lineOf<ParseError>("hierarchy a b\nhierarchy a b\n") == 2);
  }
  SUBCASE("nap without the root level")
  {
    CHECK(lineOf<UnassignedRoot>("hierarchy building wing\nnap N1 wing=west\n") == 2);
  }
  SUBCASE("assignment for a level outside the hierarchy")
  {
    CHECK(lineOf<ParseError>("hierarchy building\nnap N1 building=b6 floor=f3\n") == 2);
  }
  SUBCASE("duplicate ids across kinds")
  {
    CHECK(lineOf<ParseError>("hierarchy b\nnap N1 b=x\nclient N1 nap=N1\n") == 3);
  }
  SUBCASE("reserved id SET")
  {
    CHECK(lineOf<ParseError>("hierarchy b\nnap SET b=x\n") == 2);
  }
  SUBCASE("server referencing an unknown nap")
  {
    CHECK(lineOf<UnknownReference>("hierarchy b\nserver S1 nap=N9 fqdn=s1.b6\n") == 2);
  }
  SUBCASE("duplicate fqdn")
  {
    CHECK(lineOf<ParseError>("hierarchy b\nnap N1 b=b6\n"
                             "server S1 nap=N1 fqdn=s1.b6\n"
                             "server S2 nap=N1 fqdn=s1.b6\n")
          == 4);
  }
  SUBCASE("resource for an unknown server")
  {
    CHECK(lineOf<UnknownReference>("hierarchy b\nresource S9 /x value=1\n") == 2);
  }
  SUBCASE("resource path must start with a slash")
  {
    CHECK(lineOf<ParseError>("hierarchy b\nnap N1 b=b6\nserver S1 nap=N1 fqdn=s1.b6\n"
                             "resource S1 x value=1\n")
          == 4);
  }
  SUBCASE("duplicate resource path on one server")
  {
    CHECK(lineOf<ParseError>("hierarchy b\nnap N1 b=b6\nserver S1 nap=N1 fqdn=s1.b6\n"
                             "resource S1 /x value=1\nresource S1 /x value=2\n")
          == 5);
  }
  SUBCASE("client referencing an unknown nap")
  {
    CHECK(lineOf<UnknownReference>("hierarchy b\nclient C1 nap=N9\n") == 2);
  }
  SUBCASE("unknown directive")
  {
    CHECK(lineOf<ParseError>("hierarchy b\nrouter R1\n") == 2);
  }
}

TEST_CASE("script errors carry the offending line number")
{
  const std::string prologue = "hierarchy b\nnap N1 b=b6\nserver S1 nap=N1 fqdn=s1.b6\n"
                               "resource S1 /x value=1\nclient C1 nap=N1\n";
  SUBCASE("unknown client")
  {
    CHECK(lineOf<UnknownReference>(prologue + "at 1 C9 GET coap://b6/x\n") == 6);
  }
  SUBCASE("unknown verb")
  {
    CHECK(lineOf<ParseError>(prologue + "at 1 C1 POKE coap://b6/x\n") == 6);
  }
  SUBCASE("negative time")
  {
    CHECK(lineOf<ParseError>(prologue + "at -4 C1 GET coap://b6/x\n") == 6);
  }
  SUBCASE("malformed time")
  {
    CHECK(lineOf<ParseError>(prologue + "at soon C1 GET coap://b6/x\n") == 6);
  }
  SUBCASE("payload on a GET")
  {
    CHECK(lineOf<ParseError>(prologue + "at 1 C1 GET coap://b6/x 25\n") == 6);
  }
  SUBCASE("PUT without a payload")
  {
    CHECK(lineOf<ParseError>(prologue + "at 1 C1 PUT coap://b6/x\n") == 6);
  }
  SUBCASE("invalid URI")
  {
    CHECK(lineOf<ParseError>(prologue + "at 1 C1 GET http://b6/x\n") == 6);
  }
  SUBCASE("SET on an unknown server")
  {
    CHECK(lineOf<UnknownReference>(prologue + "at 1 SET S9 /x 2\n") == 6);
  }
  SUBCASE("SET on an undeclared resource")
  {
    CHECK(lineOf<UnknownReference>(prologue + "at 1 SET S1 /y 2\n") == 6);
  }
  SUBCASE("trailing tokens")
  {
    CHECK(lineOf<ParseError>(prologue + "at 1 SET S1 /x 2 extra\n") == 6);
  }
}

TEST_CASE("loading a missing file is a file-level error")
{
  try {
    (void)loadScenarioFile("/nonexistent/icnap.scn");
    FAIL("expected ScenarioError");
  }
  catch (const ScenarioError& e) {
    CHECK(e.line() == 0);
  }
}

TEST_CASE("the committed example scenarios all parse")
{
  const char* names[] = {"building6.scn",     "group3.scn",          "group_mixed.scn",
                         "observe_agg.scn",   "observe_savings.scn", "unicast_only.scn",
                         "delayed.scn",       "observe_teardown.scn", "empty_script.scn",
                         "dead_letter.scn"};
  for (const char* name : names) {
    CAPTURE(name);
    CHECK_NOTHROW((void)loadScenarioFile(std::string(ICNAP_SCENARIO_DIR) + "/" + name));
  }
}
