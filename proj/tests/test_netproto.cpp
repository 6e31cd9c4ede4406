#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <deque>
#include <set>

#include "elot/netproto.hpp"

using namespace elot;

namespace {

Zone make_zone(int id, double xmin, double xmax, int first_anchor) {
  Zone z;
  z.id = id;
  z.polygon = {xmin, 0.0, xmax, 10.0};
  z.anchor_ids = {first_anchor, first_anchor + 1, first_anchor + 2,
                  first_anchor + 3};
  z.head_anchor_id = first_anchor;
  return z;
}

}  // namespace

TEST_CASE("adjacent zones get distinct channels") {
  const std::vector<Zone> zones = {make_zone(1, 0, 20, 1), make_zone(2, 20, 40, 5)};
  const auto plan = allocate_channels(zones, {{1, 2}}, {12, 13}, 30.0);
  CHECK(plan.assignments.at(1) != plan.assignments.at(2));
  CHECK(plan.assignments.at(1) == 12);
}

TEST_CASE("a single zone takes the lowest channel") {
  const std::vector<Zone> zones = {make_zone(1, 0, 20, 1)};
  const auto plan = allocate_channels(zones, {}, {14, 12, 16}, 30.0);
  CHECK(plan.assignments.at(1) == 12);
}

TEST_CASE("five-zone chain with two channels alternates") {
  std::vector<Zone> zones;
  std::vector<std::pair<int, int>> adjacency;
  for (int i = 0; i < 5; ++i) {
    zones.push_back(make_zone(i + 1, i * 20.0, (i + 1) * 20.0, 1 + 4 * i));
    if (i > 0) adjacency.emplace_back(i, i + 1);
  }
  const auto plan = allocate_channels(zones, adjacency, {12, 13}, 30.0);
  for (int i = 1; i <= 5; ++i) {
    CHECK(plan.assignments.at(i) == (i % 2 == 1 ? 12 : 13));
  }
  // Exhaustively verify the produced plan against every constraint.
  for (const auto& [a, b] : adjacency) {
    CHECK(plan.assignments.at(a) != plan.assignments.at(b));
  }
  for (int a = 1; a <= 5; ++a) {
    for (int b = a + 1; b <= 5; ++b) {
      if (plan.assignments.at(a) == plan.assignments.at(b)) {
        CHECK(distance(zones[a - 1].polygon.centroid(),
                       zones[b - 1].polygon.centroid()) >= 30.0);
      }
    }
  }
}

TEST_CASE("infeasible allocation names the zone") {
  const std::vector<Zone> zones = {make_zone(1, 0, 20, 1), make_zone(2, 20, 40, 5)};
  CHECK_THROWS_AS(allocate_channels(zones, {{1, 2}}, {12}, 30.0),
                  AllocationInfeasibleError);
}

TEST_CASE("backhaul channel cannot be offered for allocation") {
  const std::vector<Zone> zones = {make_zone(1, 0, 20, 1)};
  CHECK_THROWS_AS(allocate_channels(zones, {}, {21}, 30.0), InvalidParameterError);
}

TEST_CASE("border-sharing rectangles are adjacent") {
  const std::vector<Zone> zones = {make_zone(1, 0, 20, 1), make_zone(2, 20, 40, 5),
                                   make_zone(3, 45, 60, 9)};
  const auto adj = derive_adjacency(zones);
  REQUIRE(adj.size() == 1);
  CHECK(adj[0] == std::pair<int, int>{1, 2});
}

TEST_CASE("backoff start formula") {
  RngStream rng(1, "backoff-test");
  const auto s = backoff_schedule(1, 0.1, rng);
  REQUIRE(s.starts.size() == 1);
  CHECK(s.starts[0] >= 0.1);
  CHECK(s.starts[0] < 0.2);

  RngStream rng3(2, "backoff-test");
  const auto s3 = backoff_schedule(3, 0.3, rng3);
  for (int i = 0; i < 3; ++i) {
    CHECK(s3.starts[i] >= (i + 1) * 0.1);
    CHECK(s3.starts[i] < (i + 2) * 0.1);
  }
}

TEST_CASE("backoff slots never overlap across draws") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    RngStream rng(seed, "backoff-mc");
    const auto s = backoff_schedule(3, 0.3, rng);
    for (std::size_t i = 1; i < s.starts.size(); ++i) {
      CHECK(s.starts[i] > s.starts[i - 1]);
      // Slot intervals [i*slot, (i+1)*slot) are disjoint by construction.
      CHECK(s.starts[i - 1] < (i + 1) * 0.1);
      CHECK(s.starts[i] >= (i + 1) * 0.1);
    }
  }
}

TEST_CASE("scan picks the lowest active channel, skipping the backhaul") {
  MnLinkState mn;
  mn.mn_id = 1;

  const MnLinkState idle = scan_and_access(mn, {});
  CHECK(idle.mode == LinkMode::scanning);

  const MnLinkState got13 = scan_and_access(mn, {13});
  CHECK(got13.mode == LinkMode::associated);
  CHECK(got13.current_channel == 13);

  const MnLinkState both = scan_and_access(mn, {14, 12});
  CHECK(both.current_channel == 12);

  // The backhaul channel never answers an access scan.
  const MnLinkState skip = scan_and_access(mn, {21, 22});
  CHECK(skip.current_channel == 22);
}

TEST_CASE("switch evaluation") {
  const std::vector<Zone> zones = {make_zone(1, 0, 20, 1), make_zone(2, 20, 40, 5)};
  const std::vector<std::pair<int, int>> adj = {{1, 2}};
  ChannelPlan plan;
  plan.assignments = {{1, 13}, {2, 12}};

  SUBCASE("healthy link stays put") {
    const std::vector<Rssi> rss = {Rssi{-50}, Rssi{-50}, Rssi{-50}, Rssi{-50}};
    const auto d = evaluate_switch(rss, -65, 3, {{10, 5}, {11, 5}}, 1, zones,
                                   adj, plan);
    CHECK_FALSE(d.target_channel.has_value());
    CHECK_FALSE(d.isolated);
  }

  SUBCASE("weak link switches toward the heading") {
    const std::vector<Rssi> rss = {Rssi{-50}, Rssi{-66}, std::nullopt, Rssi{-68}};
    const auto d = evaluate_switch(rss, -65, 3, {{17, 5}, {19, 5}}, 1, zones,
                                   adj, plan);
    REQUIRE(d.target_channel.has_value());
    CHECK(*d.target_channel == 12);
  }

  SUBCASE("isolated zone is flagged") {
    const auto d = evaluate_switch({Rssi{-70}, Rssi{-70}, Rssi{-70}, Rssi{-70}},
                                   -65, 3, {{10, 5}, {11, 5}}, 1, zones, {},
                                   plan);
    CHECK_FALSE(d.target_channel.has_value());
    CHECK(d.isolated);
  }

  SUBCASE("needs history") {
    CHECK_THROWS_AS(
        evaluate_switch({Rssi{-70}}, -65, 3, {{10, 5}}, 1, zones, adj, plan),
        InvalidParameterError);
  }
}

TEST_CASE("ambiguous heading ties break toward the lower zone id") {
  // Current zone 2 sits between zones 1 and 3; heading straight up is
  // equally aligned with both neighbours.
  const std::vector<Zone> zones = {make_zone(1, 0, 20, 1), make_zone(2, 20, 40, 5),
                                   make_zone(3, 40, 60, 9)};
  const std::vector<std::pair<int, int>> adj = {{1, 2}, {2, 3}};
  ChannelPlan plan;
  plan.assignments = {{1, 13}, {2, 12}, {3, 14}};
  const std::vector<Rssi> weak = {Rssi{-70}, Rssi{-70}, Rssi{-70}, Rssi{-70}};
  const auto d = evaluate_switch(weak, -65, 3, {{30, 4}, {30, 6}}, 2, zones,
                                 adj, plan);
  REQUIRE(d.target_channel.has_value());

  // Enumeration oracle over neighbour zones.
  int best_zone = 0;
  double best = -2.0;
  const Position here{30, 6}, prev{30, 4};
  for (int zid : {1, 3}) {
    const Position c = zones[zid - 1].polygon.centroid();
    const double hx = here.x - prev.x, hy = here.y - prev.y;
    const double dx = c.x - here.x, dy = c.y - here.y;
    const double score = (hx * dx + hy * dy) /
                         (std::hypot(hx, hy) * std::hypot(dx, dy));
    if (score > best + 1e-12) {
      best = score;
      best_zone = zid;
    }  // exact ties keep the earlier (lower) zone id
  }
  CHECK(*d.target_channel == plan.assignments.at(best_zone));
  CHECK(best_zone == 1);
}

TEST_CASE("switch application") {
  MnLinkState mn;
  mn.mn_id = 4;
  mn.mode = LinkMode::associated;
  mn.current_channel = 13;

  const MnLinkState moved = apply_switch(mn, 12);
  CHECK(moved.mode == LinkMode::associated);
  CHECK(moved.current_channel == 12);

  const MnLinkState same = apply_switch(mn, 13);
  CHECK(same.current_channel == 13);

  CHECK_THROWS_AS(apply_switch(mn, 21), ProtocolViolationError);

  const MnLinkState pending = mark_switch_pending(mn, 12);
  CHECK(pending.mode == LinkMode::switching);
  CHECK(pending.pending_channel == 12);
  const MnLinkState done = apply_switch(pending, 12);
  CHECK(done.mode == LinkMode::associated);
  CHECK_FALSE(done.pending_channel.has_value());
}

TEST_CASE("collision resolution") {
  const std::map<int, Position> rx = {{1, {0, 0}}, {2, {50, 0}}};

  SUBCASE("single frame is delivered everywhere") {
    const std::vector<FrameTx> frames = {{13, 0.0, 0.001, {1, 0}, {1, 2}}};
    const auto d = resolve_collisions(frames, rx, 100.0);
    CHECK(d[0][0]);
    CHECK(d[0][1]);
  }

  SUBCASE("overlapping same-channel frames kill each other") {
    const std::vector<FrameTx> frames = {{13, 0.0, 0.002, {1, 0}, {1}},
                                         {13, 0.001, 0.002, {2, 0}, {1}}};
    const auto d = resolve_collisions(frames, rx, 100.0);
    CHECK_FALSE(d[0][0]);
    CHECK_FALSE(d[1][0]);
  }

  SUBCASE("orthogonal channels do not interact") {
    const std::vector<FrameTx> frames = {{12, 0.0, 0.002, {1, 0}, {1}},
                                         {13, 0.001, 0.002, {2, 0}, {1}}};
    const auto d = resolve_collisions(frames, rx, 100.0);
    CHECK(d[0][0]);
    CHECK(d[1][0]);
  }

  SUBCASE("interferer out of range does not matter") {
    const std::vector<FrameTx> frames = {{13, 0.0, 0.002, {1, 0}, {1}},
                                         {13, 0.001, 0.002, {49, 0}, {2}}};
    const auto d = resolve_collisions(frames, rx, 10.0);
    CHECK(d[0][0]);  // receiver 1 is 48 m from the other transmitter
    CHECK(d[1][0]);
  }

  SUBCASE("back-to-back frames do not overlap") {
    const std::vector<FrameTx> frames = {{13, 0.0, 0.002, {1, 0}, {1}},
                                         {13, 0.002, 0.002, {2, 0}, {1}}};
    const auto d = resolve_collisions(frames, rx, 100.0);
    CHECK(d[0][0]);
    CHECK(d[1][0]);
  }
}

// Exhaustive exploration of the link state machine over every command
// sequence of bounded length. Transitions either succeed with invariants
// intact or throw a protocol error and leave the state untouched.
TEST_CASE("link state machine survives all command sequences") {
  struct Cmd {
    enum What { scan_none, scan_found, pending12, pending21, apply12, apply13, apply21 } what;
  };
  const std::vector<Cmd::What> alphabet = {
      Cmd::scan_none, Cmd::scan_found, Cmd::pending12, Cmd::pending21,
      Cmd::apply12,   Cmd::apply13,    Cmd::apply21};

  const auto step = [](MnLinkState state, Cmd::What what) {
    switch (what) {
      case Cmd::scan_none: return scan_and_access(state, {});
      case Cmd::scan_found: return scan_and_access(state, {13});
      case Cmd::pending12: return mark_switch_pending(state, 12);
      case Cmd::pending21: return mark_switch_pending(state, 21);
      case Cmd::apply12: return apply_switch(state, 12);
      case Cmd::apply13: return apply_switch(state, 13);
      case Cmd::apply21: return apply_switch(state, 21);
    }
    return state;
  };

  long explored = 0;
  std::deque<std::pair<MnLinkState, int>> frontier;
  frontier.push_back({MnLinkState{}, 0});
  while (!frontier.empty()) {
    auto [state, depth] = frontier.front();
    frontier.pop_front();
    if (depth >= 6) continue;
    for (const auto what : alphabet) {
      MnLinkState next = state;
      try {
        next = step(state, what);
      } catch (const ProtocolViolationError&) {
        next = state;  // rejected commands must not corrupt the state
      }
      CHECK_NOTHROW(check_link_invariants(next));
      ++explored;
      frontier.push_back({next, depth + 1});
    }
  }
  CHECK(explored > 10000);
}
