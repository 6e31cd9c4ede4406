#include "elot/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <string>
#include <utility>

namespace elot {

RadioMap synthesize_radio_map(const Scenario& scenario) {
  const auto& src = scenario.radio_map;
  const ReferenceGrid grid = make_reference_grid(src.bounds, src.spacing_m);
  std::vector<Fingerprint> fingerprints;
  fingerprints.reserve(grid.points.size());
  for (const GridPoint& gp : grid.points) {
    std::vector<std::vector<int>> samples(scenario.anchors.size());
    for (std::size_t j = 0; j < scenario.anchors.size(); ++j) {
      RngStream rng(scenario.seed, "mapbuild",
                    static_cast<std::uint64_t>(gp.index),
                    static_cast<std::uint64_t>(scenario.anchors[j].id));
      for (int scan = 0; scan < src.scans_per_point; ++scan) {
        const Rssi r = sample_rss(scenario.propagation, gp.location,
                                  scenario.anchors[j].location, rng);
        if (r) samples[j].push_back(*r);
      }
      // An anchor at the hearing fringe with too few scans to survive
      // trimming is recorded as unheard.
      if (static_cast<int>(samples[j].size()) < src.trim_count + 1) {
        samples[j].clear();
      }
    }
    Fingerprint fp;
    fp.grid_index = gp.index;
    fp.location = gp.location;
    fp.rss = build_fingerprint(samples, src.trim_count);
    fingerprints.push_back(std::move(fp));
  }
  return assemble_radio_map(grid, std::move(fingerprints), scenario.anchors);
}

namespace {

constexpr double kScanRetryS = 0.5;
constexpr double kReassociateDelayS = 0.05;
constexpr double kCommandTurnaroundS = 1e-3;

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::beacon_tx: return "beacon_tx";
    case EventKind::frame_rx: return "frame_rx";
    case EventKind::forward_tx: return "forward_tx";
    case EventKind::server_eval: return "server_eval";
    case EventKind::command_rx: return "command_rx";
    case EventKind::mobility_tick: return "mobility_tick";
  }
  return "?";
}

enum class FrameClass { beacon, forward, aggregate };

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind{};
  int mn_id = 0;
  int anchor_id = 0;          // receiver for frame_rx, transmitter for forward_tx
  int carried_anchor_id = 0;  // anchor whose measurement a forward carries
  int zone_id = 0;
  long beacon_id = -1;
  long frame_id = -1;
  FrameClass frame_class = FrameClass::beacon;
  int carried_rssi = 0;
  int generation = 0;
  bool listen_tick = false;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct AirFrame {
  long id = 0;
  int channel = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  Position tx_location;
  int tx_node = 0;
  FrameClass cls = FrameClass::beacon;
  int delivered = 0;
  int lost = 0;
};

struct CommandMsg {
  enum Kind { switch_channel, set_transmit_period, set_receive_period } kind;
  int channel = 0;
  double period_s = 0.0;
};

struct BeaconInfo {
  int mn_id = 0;
  double tx_time_s = 0.0;
  bool counted = false;
  bool delivered = false;
};

// HAN-side collection window for one (beacon, zone).
struct PendingMeasurement {
  std::map<int, int> anchor_rss;  // anchor id -> RSSI as received at the HAN
  BackoffSchedule schedule;
};

struct MnRuntime {
  MobileConfig cfg;
  MnLinkState link;
  MnLinkState server_view;
  TrackState track;
  double transmit_period_s = 1.0;
  double receive_period_s = 3.0;
  double next_beacon_s = -1.0;
  double next_listen_s = -1.0;
  int beacon_generation = 0;
  int listen_generation = 0;
  int serving_zone = 0;  // server-side belief
  std::deque<CommandMsg> pending_commands;
  double tx_s = 0.0;
  double rx_s = 0.0;
};

struct AnchorRuntime {
  AnchorSite site;
  int zone_id = 0;
  bool is_head = false;
  int channel = 0;
  int slot_index = 0;  // 1-based among the zone's forwarding anchors
  double tx_s = 0.0;
};

class Engine {
 public:
  Engine(const Scenario& scenario, const RadioMap& map, bool baseline)
      : sc_(scenario), map_(map), baseline_(baseline) {}

  void run();

  VariantStats stats;
  std::vector<FrameLogRow> frame_log;
  std::vector<TrackRow> track;
  std::map<int, EnergyLedger> node_energy;
  std::map<int, ModeDurations> node_durations;
  std::map<std::string, long> event_counts;
  ChannelPlan plan;

 private:
  void setup();
  void schedule(Event ev) {
    ev.seq = next_seq_++;
    if (ev.time < now_ - 1e-12) {
      throw InvariantViolationError("event " + std::string(kind_name(ev.kind)) +
                                    " scheduled in the past");
    }
    queue_.push(ev);
  }

  void handle_mobility_tick(const Event& ev);
  void handle_beacon_tx(const Event& ev);
  void handle_frame_rx(const Event& ev);
  void handle_forward_tx(const Event& ev);
  void handle_server_eval(const Event& ev);
  void handle_command_rx(const Event& ev);

  void try_associate(MnRuntime& mn);
  void schedule_command_delivery(MnRuntime& mn);
  long register_frame(int channel, double start, double duration,
                      const Position& tx_pos, int tx_node, FrameClass cls);
  bool reception_lost(long frame_id, const Position& rx_pos) const;
  void finish_frame_log();
  Position sink_position() const;
  const Zone& zone_by_id(int id) const;

  const Scenario& sc_;
  const RadioMap& map_;
  bool baseline_;

  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t next_seq_ = 0;
  double now_ = 0.0;
  double hearing_range_ = 0.0;
  double interference_range_ = 0.0;
  double plr_horizon_s_ = 0.0;
  int shared_channel_ = 0;

  std::map<int, MnRuntime> mobiles_;
  std::map<int, AnchorRuntime> anchors_;
  std::vector<AirFrame> frames_;
  std::map<long, BeaconInfo> beacons_;
  std::map<std::pair<long, int>, PendingMeasurement> pending_;
  long next_beacon_id_ = 0;

  struct LinkShadow {
    ShadowingProcess process;
    Position last_position;
    bool seen = false;
  };
  std::map<std::pair<int, int>, LinkShadow> shadowing_;  // (mn, anchor)
};

Position Engine::sink_position() const {
  double sx = 0.0, sy = 0.0;
  for (const auto& a : sc_.anchors) {
    sx += a.location.x;
    sy += a.location.y;
  }
  return {sx / sc_.anchors.size(), sy / sc_.anchors.size()};
}

const Zone& Engine::zone_by_id(int id) const {
  for (const Zone& z : sc_.zones) {
    if (z.id == id) return z;
  }
  throw InvariantViolationError("unknown zone " + std::to_string(id));
}

void Engine::setup() {
  hearing_range_ = hearing_range_m(sc_.propagation);
  interference_range_ = sc_.channel.interference_range_factor * hearing_range_;

  const std::vector<int> channels =
      sc_.channel.available.empty() ? default_mn_channels() : sc_.channel.available;
  auto adjacency = sc_.adjacency;
  if (adjacency.empty()) adjacency = derive_adjacency(sc_.zones);

  if (baseline_) {
    // Traditional WSN: every link, including the backhaul, on one channel.
    shared_channel_ = channels.front();
    plan.reuse_min_distance_m = 0.0;
    for (const Zone& z : sc_.zones) plan.assignments[z.id] = shared_channel_;
  } else {
    plan = allocate_channels(sc_.zones, adjacency, channels,
                             sc_.channel.reuse_min_distance_m);
  }

  for (const Zone& z : sc_.zones) {
    std::vector<int> forwarding = z.anchor_ids;
    std::sort(forwarding.begin(), forwarding.end());
    int slot = 0;
    for (int id : forwarding) {
      const auto site = std::find_if(
          sc_.anchors.begin(), sc_.anchors.end(),
          [&](const AnchorSite& a) { return a.id == id; });
      AnchorRuntime ar;
      ar.site = *site;
      ar.zone_id = z.id;
      ar.is_head = id == z.head_anchor_id;
      ar.channel = plan.assignments.at(z.id);
      if (!ar.is_head) ar.slot_index = ++slot;
      anchors_[id] = ar;
    }
  }

  // Beacons still in the delivery pipeline when the run ends are excluded
  // from loss accounting.
  const double pipeline = sc_.energy.model.tx_duration_s +
                          2.0 * sc_.channel.backoff_window_s +
                          2.0 * sc_.energy.forward_duration_s + 0.05;
  plr_horizon_s_ = sc_.duration_s - pipeline;

  for (const MobileConfig& cfg : sc_.mobiles) {
    MnRuntime mn;
    mn.cfg = cfg;
    mn.link.mn_id = cfg.id;
    mn.server_view.mn_id = cfg.id;
    mn.track.mn_id = cfg.id;
    mn.transmit_period_s = sc_.tracking.initial_transmit_period_s;
    mn.receive_period_s = sc_.tracking.initial_receive_period_s;
    mn.track.transmit_period_s = mn.transmit_period_s;
    mn.track.receive_period_s = mn.receive_period_s;
    mn.next_listen_s = mn.receive_period_s;
    mobiles_[cfg.id] = mn;

    Event scan;
    scan.time = 0.0;
    scan.kind = EventKind::mobility_tick;
    scan.mn_id = cfg.id;
    schedule(scan);

    Event listen;
    listen.time = mn.receive_period_s;
    listen.kind = EventKind::command_rx;
    listen.mn_id = cfg.id;
    listen.listen_tick = true;
    listen.generation = 0;
    schedule(listen);
  }
}

void Engine::try_associate(MnRuntime& mn) {
  const Position pos = mobility_position(mn.cfg.route, now_).first;
  std::vector<int> active;
  for (const Zone& z : sc_.zones) {
    if (!z.polygon.contains(pos)) continue;
    const bool audible = std::any_of(
        z.anchor_ids.begin(), z.anchor_ids.end(), [&](int id) {
          return distance(anchors_.at(id).site.location, pos) <= hearing_range_;
        });
    if (audible) active.push_back(plan.assignments.at(z.id));
  }
  mn.link = scan_and_access(mn.link, active);
  if (mn.link.mode == LinkMode::associated) {
    // Serving zone: lowest-id covering zone on the associated channel.
    for (const Zone& z : sc_.zones) {
      if (z.polygon.contains(pos) &&
          plan.assignments.at(z.id) == *mn.link.current_channel) {
        mn.serving_zone = z.id;
        break;
      }
    }
    mn.server_view = mn.link;
    RngStream phase(sc_.seed, "beacon-phase",
                    static_cast<std::uint64_t>(mn.cfg.id));
    mn.next_beacon_s =
        now_ + mn.transmit_period_s * (1.0 + 0.9 * phase.uniform());
    Event b;
    b.time = mn.next_beacon_s;
    b.kind = EventKind::beacon_tx;
    b.mn_id = mn.cfg.id;
    b.generation = mn.beacon_generation;
    schedule(b);
  } else {
    Event retry;
    retry.time = now_ + kScanRetryS;
    retry.kind = EventKind::mobility_tick;
    retry.mn_id = mn.cfg.id;
    schedule(retry);
  }
}

void Engine::handle_mobility_tick(const Event& ev) {
  MnRuntime& mn = mobiles_.at(ev.mn_id);
  if (mn.link.mode == LinkMode::scanning) try_associate(mn);
}

long Engine::register_frame(int channel, double start, double duration,
                            const Position& tx_pos, int tx_node,
                            FrameClass cls) {
  AirFrame f;
  f.id = static_cast<long>(frames_.size());
  f.channel = channel;
  f.start_s = start;
  f.end_s = start + duration;
  f.tx_location = tx_pos;
  f.tx_node = tx_node;
  f.cls = cls;
  frames_.push_back(f);
  ++stats.frames_sent;
  return f.id;
}

bool Engine::reception_lost(long frame_id, const Position& rx_pos) const {
  const AirFrame& f = frames_[static_cast<std::size_t>(frame_id)];
  for (const AirFrame& g : frames_) {
    if (g.id == f.id || g.channel != f.channel) continue;
    if (g.start_s < f.end_s && f.start_s < g.end_s &&
        distance(rx_pos, g.tx_location) <= interference_range_) {
      return true;
    }
  }
  return false;
}

void Engine::handle_beacon_tx(const Event& ev) {
  MnRuntime& mn = mobiles_.at(ev.mn_id);
  if (ev.generation != mn.beacon_generation) return;  // superseded schedule
  if (mn.link.mode == LinkMode::scanning) return;
  const double t_x = sc_.energy.model.tx_duration_s;
  if (now_ + t_x > sc_.duration_s) return;

  const Position pos = mobility_position(mn.cfg.route, now_).first;
  const long beacon_id = next_beacon_id_++;
  BeaconInfo info;
  info.mn_id = mn.cfg.id;
  info.tx_time_s = now_;
  info.counted = now_ <= plr_horizon_s_;
  beacons_[beacon_id] = info;
  if (info.counted) ++stats.beacons_sent;

  mn.tx_s += t_x;
  const int channel = *mn.link.current_channel;
  const long frame_id =
      register_frame(channel, now_, t_x, pos, mn.cfg.id, FrameClass::beacon);

  for (auto& [anchor_id, ar] : anchors_) {
    if (ar.channel != channel) continue;
    RngStream rng(sc_.seed, "propagation",
                  (static_cast<std::uint64_t>(mn.cfg.id) << 32) |
                      static_cast<std::uint64_t>(anchor_id),
                  static_cast<std::uint64_t>(beacon_id));
    LinkShadow& link = shadowing_[{mn.cfg.id, anchor_id}];
    const double moved = link.seen ? distance(pos, link.last_position) : 1e9;
    link.last_position = pos;
    link.seen = true;
    const double shadow =
        link.process.next(sc_.propagation, moved, rng.normal());
    const auto rss_db = predict_rss(sc_.propagation, pos, ar.site.location, shadow);
    if (!rss_db) continue;
    const Rssi rssi = quantize_rssi(*rss_db);
    Event rx;
    rx.time = now_ + t_x;
    rx.kind = EventKind::frame_rx;
    rx.mn_id = mn.cfg.id;
    rx.anchor_id = anchor_id;
    rx.zone_id = ar.zone_id;
    rx.beacon_id = beacon_id;
    rx.frame_id = frame_id;
    rx.frame_class = FrameClass::beacon;
    rx.carried_rssi = *rssi;
    schedule(rx);
  }

  mn.next_beacon_s = now_ + mn.transmit_period_s;
  Event next;
  next.time = mn.next_beacon_s;
  next.kind = EventKind::beacon_tx;
  next.mn_id = mn.cfg.id;
  next.generation = mn.beacon_generation;
  schedule(next);
}

void Engine::handle_frame_rx(const Event& ev) {
  // Receiver position: an anchor for beacons and forwards, the sink for
  // aggregates.
  Position rx_pos;
  if (ev.frame_class == FrameClass::aggregate) {
    rx_pos = sink_position();
  } else {
    rx_pos = anchors_.at(ev.anchor_id).site.location;
  }

  AirFrame& f = frames_[static_cast<std::size_t>(ev.frame_id)];
  const bool lost = reception_lost(ev.frame_id, rx_pos);
  if (lost) {
    ++f.lost;
    ++stats.receptions_lost;
    return;
  }
  ++f.delivered;
  ++stats.receptions_delivered;

  switch (ev.frame_class) {
    case FrameClass::beacon: {
      const AnchorRuntime& ar = anchors_.at(ev.anchor_id);
      const auto key = std::make_pair(ev.beacon_id, ar.zone_id);
      auto it = pending_.find(key);
      if (it == pending_.end()) {
        PendingMeasurement pm;
        const Zone& zone = zone_by_id(ar.zone_id);
        const int n_forwarding =
            static_cast<int>(zone.anchor_ids.size()) - 1;
        if (n_forwarding > 0 && !baseline_) {
          RngStream rng(sc_.seed, "backoff",
                        static_cast<std::uint64_t>(ev.beacon_id),
                        static_cast<std::uint64_t>(ar.zone_id));
          pm.schedule = backoff_schedule(
              n_forwarding, sc_.channel.backoff_window_s, rng);
        }
        it = pending_.emplace(key, std::move(pm)).first;

        // The HAN flushes its collection window after the last possible
        // forward has ended.
        const double slot =
            n_forwarding > 0
                ? sc_.channel.backoff_window_s / n_forwarding
                : 0.0;
        Event agg;
        agg.time = now_ + sc_.channel.backoff_window_s + slot +
                   sc_.energy.forward_duration_s;
        agg.kind = EventKind::forward_tx;
        agg.zone_id = ar.zone_id;
        agg.beacon_id = ev.beacon_id;
        agg.frame_class = FrameClass::aggregate;
        schedule(agg);
      }

      if (ar.is_head) {
        it->second.anchor_rss[ev.anchor_id] = ev.carried_rssi;
      } else {
        double delay = 0.0;
        if (baseline_) {
          RngStream rng(sc_.seed, "baseline-backoff",
                        static_cast<std::uint64_t>(ev.beacon_id),
                        static_cast<std::uint64_t>(ev.anchor_id));
          delay = rng.uniform(0.0, sc_.channel.backoff_window_s);
        } else {
          delay = it->second.schedule.starts[ar.slot_index - 1];
        }
        Event fwd;
        fwd.time = now_ + delay;
        fwd.kind = EventKind::forward_tx;
        fwd.anchor_id = ev.anchor_id;
        fwd.zone_id = ar.zone_id;
        fwd.beacon_id = ev.beacon_id;
        fwd.frame_class = FrameClass::forward;
        fwd.carried_rssi = ev.carried_rssi;
        schedule(fwd);
      }
      break;
    }
    case FrameClass::forward: {
      pending_[{ev.beacon_id, ev.zone_id}].anchor_rss[ev.carried_anchor_id] =
          ev.carried_rssi;
      break;
    }
    case FrameClass::aggregate: {
      Event eval;
      eval.time = now_;
      eval.kind = EventKind::server_eval;
      eval.beacon_id = ev.beacon_id;
      eval.zone_id = ev.zone_id;
      schedule(eval);
      break;
    }
  }
}

void Engine::handle_forward_tx(const Event& ev) {
  const double dur = sc_.energy.forward_duration_s;
  if (ev.frame_class == FrameClass::forward) {
    AnchorRuntime& ar = anchors_.at(ev.anchor_id);
    ar.tx_s += dur;
    const long frame_id = register_frame(ar.channel, now_, dur,
                                         ar.site.location, ev.anchor_id,
                                         FrameClass::forward);
    const Zone& zone = zone_by_id(ar.zone_id);
    Event rx;
    rx.time = now_ + dur;
    rx.kind = EventKind::frame_rx;
    rx.anchor_id = zone.head_anchor_id;  // receiver
    rx.carried_anchor_id = ev.anchor_id;
    rx.zone_id = ar.zone_id;
    rx.beacon_id = ev.beacon_id;
    rx.frame_id = frame_id;
    rx.frame_class = FrameClass::forward;
    rx.carried_rssi = ev.carried_rssi;
    schedule(rx);
  } else {
    // HAN -> SN aggregate on the backhaul (shared channel in the baseline).
    const auto it = pending_.find({ev.beacon_id, ev.zone_id});
    if (it == pending_.end() || it->second.anchor_rss.empty()) return;
    const Zone& zone = zone_by_id(ev.zone_id);
    AnchorRuntime& head = anchors_.at(zone.head_anchor_id);
    head.tx_s += dur;
    const int channel = baseline_ ? shared_channel_ : kBackhaulChannel;
    const long frame_id = register_frame(channel, now_, dur,
                                         head.site.location,
                                         zone.head_anchor_id,
                                         FrameClass::aggregate);
    Event rx;
    rx.time = now_ + dur;
    rx.kind = EventKind::frame_rx;
    rx.zone_id = ev.zone_id;
    rx.beacon_id = ev.beacon_id;
    rx.frame_id = frame_id;
    rx.frame_class = FrameClass::aggregate;
    schedule(rx);
  }
}

void Engine::handle_server_eval(const Event& ev) {
  BeaconInfo& info = beacons_.at(ev.beacon_id);
  if (info.delivered) return;  // a duplicate aggregate already served this
  const auto& pm = pending_.at({ev.beacon_id, ev.zone_id});
  if (pm.anchor_rss.empty()) return;

  Measurement m;
  m.mn_id = info.mn_id;
  m.timestamp_s = info.tx_time_s;
  m.rss.resize(map_.anchors.size());
  for (std::size_t j = 0; j < map_.anchors.size(); ++j) {
    const auto it = pm.anchor_rss.find(map_.anchors[j].id);
    if (it != pm.anchor_rss.end()) m.rss[j] = it->second;
  }

  info.delivered = true;
  if (info.counted) ++stats.beacons_delivered;

  MatchResult match;
  if (sc_.localization.algorithm == "knn") {
    match = knn_estimate(map_, m, std::min(sc_.localization.k, map_.size()));
  } else if (sc_.localization.algorithm == "wknn") {
    match = wknn_estimate(map_, m, std::min(sc_.localization.k, map_.size()));
  } else {
    match = awknn_estimate(map_, m, sc_.localization.awknn);
  }

  const Position truth =
      mobility_position(mobiles_.at(info.mn_id).cfg.route, info.tx_time_s).first;
  track.push_back({info.tx_time_s, info.mn_id, truth, match.estimate,
                   distance(truth, match.estimate)});

  if (baseline_) return;  // the traditional WSN has no location feedback

  MnRuntime& mn = mobiles_.at(info.mn_id);
  mn.track.history.emplace_back(info.tx_time_s, match.estimate);
  const auto speed =
      estimate_speed(mn.track.history, sc_.tracking.speed_window);
  if (speed) mn.track.speed_estimate_mps = *speed;

  // Sounding-cycle adaptation (debounced).
  if (sc_.tracking.adaptive_sounding && speed) {
    auto adjusted =
        maybe_adjust_sounding(mn.track, sc_.tracking.required_consecutive);
    mn.track = std::move(adjusted.state);
    if (adjusted.command_period_s) {
      mn.pending_commands.push_back({CommandMsg::set_transmit_period, 0,
                                     *adjusted.command_period_s});
      schedule_command_delivery(mn);
    }
  }

  // Receive-period adaptation near the serving-zone border. An estimate
  // outside the zone is treated as at the edge.
  const Zone& serving = zone_by_id(mn.serving_zone);
  const auto rp = receive_period_for_position(match.estimate, serving,
                                              sc_.tracking.edge_band_m);
  const double want_rp = rp.value_or(kEdgeReceivePeriodS);
  if (want_rp != mn.track.receive_period_s) {
    mn.track.receive_period_s = want_rp;
    mn.pending_commands.push_back({CommandMsg::set_receive_period, 0, want_rp});
    schedule_command_delivery(mn);
  }

  // Channel switching once the serving zone's anchors lose the node.
  if (mn.server_view.mode == LinkMode::switching) {
    if (plan.assignments.at(ev.zone_id) == *mn.server_view.pending_channel) {
      mn.server_view = apply_switch(mn.server_view,
                                    *mn.server_view.pending_channel);
      mn.serving_zone = ev.zone_id;
    }
  } else if (mn.server_view.mode == LinkMode::associated &&
             mn.track.history.size() >= 2) {
    std::vector<Rssi> zone_rss;
    std::vector<Position> history;
    for (int id : serving.anchor_ids) {
      const auto it = pm.anchor_rss.find(id);
      zone_rss.push_back(it == pm.anchor_rss.end() ? Rssi{} : Rssi{it->second});
    }
    for (const auto& [ts, p] : mn.track.history) history.push_back(p);
    auto adjacency = sc_.adjacency;
    if (adjacency.empty()) adjacency = derive_adjacency(sc_.zones);
    const SwitchDecision decision = evaluate_switch(
        zone_rss, sc_.channel.rss_threshold_dbm, sc_.channel.min_anchor_count,
        history, mn.serving_zone, sc_.zones, adjacency, plan);
    if (decision.target_channel &&
        *decision.target_channel != *mn.server_view.current_channel) {
      mn.server_view =
          mark_switch_pending(mn.server_view, *decision.target_channel);
      mn.pending_commands.push_back(
          {CommandMsg::switch_channel, *decision.target_channel, 0.0});
      schedule_command_delivery(mn);
    }
  }
}

void Engine::schedule_command_delivery(MnRuntime& mn) {
  // The node's radio is next on right after its coming beacon (poll
  // turnaround) or at its coming listen window, whichever is earlier.
  double at = mn.next_listen_s;
  if (mn.next_beacon_s >= now_) {
    at = std::min(at, mn.next_beacon_s + sc_.energy.model.tx_duration_s +
                          kCommandTurnaroundS);
  }
  if (at > sc_.duration_s) return;
  Event ev;
  ev.time = at;
  ev.kind = EventKind::command_rx;
  ev.mn_id = mn.cfg.id;
  ev.listen_tick = false;
  schedule(ev);
}

void Engine::handle_command_rx(const Event& ev) {
  MnRuntime& mn = mobiles_.at(ev.mn_id);

  if (ev.listen_tick) {
    if (ev.generation != mn.listen_generation) return;
    mn.rx_s += std::min(sc_.energy.receive_window_s, sc_.duration_s - now_);
    mn.next_listen_s = now_ + mn.receive_period_s;
    Event next;
    next.time = mn.next_listen_s;
    next.kind = EventKind::command_rx;
    next.mn_id = mn.cfg.id;
    next.listen_tick = true;
    next.generation = mn.listen_generation;
    schedule(next);
  }

  while (!mn.pending_commands.empty()) {
    const CommandMsg cmd = mn.pending_commands.front();
    mn.pending_commands.pop_front();
    switch (cmd.kind) {
      case CommandMsg::switch_channel: {
        if (cmd.channel == *mn.link.current_channel) break;
        mn.link = apply_switch(mn.link, cmd.channel);
        ++mn.beacon_generation;
        mn.next_beacon_s = now_ + kReassociateDelayS;
        Event b;
        b.time = mn.next_beacon_s;
        b.kind = EventKind::beacon_tx;
        b.mn_id = mn.cfg.id;
        b.generation = mn.beacon_generation;
        schedule(b);
        break;
      }
      case CommandMsg::set_transmit_period: {
        if (cmd.period_s == mn.transmit_period_s) break;
        mn.transmit_period_s = cmd.period_s;
        ++mn.beacon_generation;
        mn.next_beacon_s = now_ + cmd.period_s;
        Event b;
        b.time = mn.next_beacon_s;
        b.kind = EventKind::beacon_tx;
        b.mn_id = mn.cfg.id;
        b.generation = mn.beacon_generation;
        schedule(b);
        break;
      }
      case CommandMsg::set_receive_period: {
        if (cmd.period_s == mn.receive_period_s) break;
        mn.receive_period_s = cmd.period_s;
        ++mn.listen_generation;
        mn.next_listen_s = now_ + cmd.period_s;
        Event next;
        next.time = mn.next_listen_s;
        next.kind = EventKind::command_rx;
        next.mn_id = mn.cfg.id;
        next.listen_tick = true;
        next.generation = mn.listen_generation;
        schedule(next);
        break;
      }
    }
  }
}

void Engine::finish_frame_log() {
  frame_log.reserve(frames_.size());
  for (const AirFrame& f : frames_) {
    const char* kind = f.cls == FrameClass::beacon     ? "beacon"
                       : f.cls == FrameClass::forward  ? "forward"
                                                       : "aggregate";
    frame_log.push_back({f.channel, f.start_s, f.end_s - f.start_s, kind,
                         f.tx_node, f.delivered, f.lost});
  }
}

void Engine::run() {
  setup();
  while (!queue_.empty()) {
    const Event ev = queue_.top();
    queue_.pop();
    if (ev.time > sc_.duration_s) break;
    now_ = ev.time;
    ++event_counts[kind_name(ev.kind)];
    switch (ev.kind) {
      case EventKind::mobility_tick: handle_mobility_tick(ev); break;
      case EventKind::beacon_tx: handle_beacon_tx(ev); break;
      case EventKind::frame_rx: handle_frame_rx(ev); break;
      case EventKind::forward_tx: handle_forward_tx(ev); break;
      case EventKind::server_eval: handle_server_eval(ev); break;
      case EventKind::command_rx: handle_command_rx(ev); break;
    }
  }

  // Close the books: whatever time is left was spent asleep (mobiles) or
  // listening (anchors).
  for (auto& [id, mn] : mobiles_) {
    ModeDurations d;
    d.transmit_s = mn.tx_s;
    d.receive_s = mn.rx_s;
    d.sleep_s = std::max(0.0, sc_.duration_s - mn.tx_s - mn.rx_s);
    node_durations[id] = d;
    EnergyLedger ledger;
    ledger_accrue(ledger, RadioMode::transmit, d.transmit_s, sc_.energy.model);
    ledger_accrue(ledger, RadioMode::receive, d.receive_s, sc_.energy.model);
    ledger_accrue(ledger, RadioMode::sleep, d.sleep_s, sc_.energy.model);
    node_energy[id] = ledger;
  }
  for (auto& [id, ar] : anchors_) {
    ModeDurations d;
    d.transmit_s = ar.tx_s;
    d.receive_s = std::max(0.0, sc_.duration_s - ar.tx_s);
    d.sleep_s = 0.0;
    node_durations[id] = d;
    EnergyLedger ledger;
    ledger_accrue(ledger, RadioMode::transmit, d.transmit_s, sc_.energy.model);
    ledger_accrue(ledger, RadioMode::receive, d.receive_s, sc_.energy.model);
    node_energy[id] = ledger;
  }
  finish_frame_log();
}

}  // namespace

SimReport run_scenario(const Scenario& scenario, const RadioMap& map) {
  validate_scenario(scenario);
  if (map.anchor_count() != static_cast<int>(scenario.anchors.size())) {
    throw InconsistentMapError(
        "radio map anchor dimension does not match the scenario");
  }

  SimReport report;
  report.zones = scenario.zones;

  const bool primary_is_baseline = scenario.channel.shared_channel_baseline;
  Engine primary(scenario, map, primary_is_baseline);
  primary.run();
  const std::string primary_name = primary_is_baseline ? "baseline" : "elot";
  report.variants[primary_name] = primary.stats;
  report.frame_log[primary_name] = std::move(primary.frame_log);
  report.track = std::move(primary.track);
  report.node_energy = std::move(primary.node_energy);
  report.node_durations = std::move(primary.node_durations);
  report.event_counts = std::move(primary.event_counts);
  report.plan = primary.plan;

  if (scenario.channel.compare_baseline && !primary_is_baseline) {
    Engine base(scenario, map, true);
    base.run();
    report.variants["baseline"] = base.stats;
    report.frame_log["baseline"] = std::move(base.frame_log);
  }

  if (!report.track.empty()) {
    double err_sum = 0.0;
    for (const TrackRow& row : report.track) err_sum += row.error_m;
    const double mean_error = err_sum / report.track.size();
    double energy_sum = 0.0;
    int mn_count = 0;
    for (const MobileConfig& mn : scenario.mobiles) {
      energy_sum += report.node_energy.at(mn.id).total();
      ++mn_count;
    }
    const double mean_energy = energy_sum / mn_count;
    if (mean_error > 0.0 && mean_energy > 0.0) {
      report.efficiency = make_efficiency_report(mean_error, mean_energy);
      report.has_efficiency = true;
    }
  }
  return report;
}

SimReport run_scenario(const Scenario& scenario) {
  validate_scenario(scenario);
  const RadioMap map = synthesize_radio_map(scenario);
  return run_scenario(scenario, map);
}

}  // namespace elot
