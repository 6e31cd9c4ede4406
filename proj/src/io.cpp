#include "elot/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace elot {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError(context + ": bad number '" + s + "'");
  }
  return v;
}

namespace {

long parse_long(const std::string& s, const std::string& context) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError(context + ": bad integer '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct CsvReader {
  std::ifstream in;
  std::string path;
  int line_no = 0;

  CsvReader(const std::filesystem::path& p, const std::string& header)
      : in(p), path(p.string()) {
    if (!in) throw ConfigError(path + ": cannot open");
    std::string first;
    if (!std::getline(in, first)) throw ConfigError(path + ": empty file");
    ++line_no;
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first != header) {
      throw ConfigError(path + " line 1: expected header '" + header + "'");
    }
  }

  bool next(std::vector<std::string>& fields, std::size_t expected) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      fields = split_csv_line(line);
      if (fields.size() != expected) {
        throw ConfigError(path + " line " + std::to_string(line_no) + ": expected " +
                          std::to_string(expected) + " fields");
      }
      return true;
    }
    return false;
  }

  std::string where() const { return path + " line " + std::to_string(line_no); }
};

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError(p.string() + ": cannot write");
  return out;
}

// ---- scenario JSON -------------------------------------------------------

[[noreturn]] void fail_at(const std::string& path, const std::string& msg) {
  throw ConfigError("scenario: " + path + ": " + msg);
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail_at(path, "expected an object");
}

void expect_keys(const json& j, const std::string& path,
                 std::initializer_list<const char*> allowed) {
  expect_object(j, path);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail_at(path + "." + it.key(), "unknown key");
  }
}

double num_at(const json& j, const std::string& path, const char* key,
              std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail_at(path + "." + key, "missing required value");
  }
  if (!j.at(key).is_number()) fail_at(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

int int_at(const json& j, const std::string& path, const char* key,
           std::optional<int> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail_at(path + "." + key, "missing required value");
  }
  if (!j.at(key).is_number_integer()) fail_at(path + "." + key, "expected an integer");
  return j.at(key).get<int>();
}

bool bool_at(const json& j, const std::string& path, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) fail_at(path + "." + key, "expected a boolean");
  return j.at(key).get<bool>();
}

Position position_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail_at(path, "expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Rect rect_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) {
    fail_at(path, "expected [xmin, ymin, xmax, ymax]");
  }
  for (const auto& v : j) {
    if (!v.is_number()) fail_at(path, "expected numeric bounds");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

Rect zones_bounding_box(const std::vector<Zone>& zones) {
  Rect box = zones.front().polygon;
  for (const Zone& z : zones) {
    box.xmin = std::min(box.xmin, z.polygon.xmin);
    box.ymin = std::min(box.ymin, z.polygon.ymin);
    box.xmax = std::max(box.xmax, z.polygon.xmax);
    box.ymax = std::max(box.ymax, z.polygon.ymax);
  }
  return box;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
    throw ConfigError("scenario: line " + std::to_string(line) +
                      ": " + e.what());
  }

  expect_keys(root, "$",
              {"seed", "duration_s", "zones", "anchors", "adjacency",
               "propagation", "radio_map", "channel", "localization",
               "tracking", "energy", "mobiles"});

  Scenario s;
  if (!root.contains("seed")) fail_at("$.seed", "missing required value");
  if (!root.at("seed").is_number_unsigned()) {
    fail_at("$.seed", "expected an unsigned integer");
  }
  s.seed = root.at("seed").get<std::uint64_t>();
  s.duration_s = num_at(root, "$", "duration_s");

  if (!root.contains("zones") || !root.at("zones").is_array() ||
      root.at("zones").empty()) {
    fail_at("$.zones", "expected a non-empty array");
  }
  int zi = 0;
  for (const auto& jz : root.at("zones")) {
    const std::string path = "$.zones[" + std::to_string(zi++) + "]";
    expect_keys(jz, path, {"id", "rect", "anchors", "head_anchor"});
    Zone z;
    z.id = int_at(jz, path, "id");
    z.polygon = rect_at(jz.contains("rect") ? jz.at("rect") : json{}, path + ".rect");
    if (!jz.contains("anchors") || !jz.at("anchors").is_array()) {
      fail_at(path + ".anchors", "expected an array of anchor ids");
    }
    for (const auto& a : jz.at("anchors")) {
      if (!a.is_number_integer()) fail_at(path + ".anchors", "expected integers");
      z.anchor_ids.push_back(a.get<int>());
    }
    z.head_anchor_id = int_at(jz, path, "head_anchor");
    s.zones.push_back(std::move(z));
  }

  if (!root.contains("anchors") || !root.at("anchors").is_array() ||
      root.at("anchors").empty()) {
    fail_at("$.anchors", "expected a non-empty array");
  }
  int ai = 0;
  for (const auto& ja : root.at("anchors")) {
    const std::string path = "$.anchors[" + std::to_string(ai++) + "]";
    expect_keys(ja, path, {"id", "x_m", "y_m"});
    s.anchors.push_back({int_at(ja, path, "id"),
                         {num_at(ja, path, "x_m"), num_at(ja, path, "y_m")}});
  }

  if (root.contains("adjacency")) {
    if (!root.at("adjacency").is_array()) fail_at("$.adjacency", "expected an array");
    int pi = 0;
    for (const auto& jp : root.at("adjacency")) {
      const std::string path = "$.adjacency[" + std::to_string(pi++) + "]";
      if (!jp.is_array() || jp.size() != 2 || !jp[0].is_number_integer() ||
          !jp[1].is_number_integer()) {
        fail_at(path, "expected [zone_a, zone_b]");
      }
      s.adjacency.emplace_back(jp[0].get<int>(), jp[1].get<int>());
    }
  }

  if (root.contains("propagation")) {
    const auto& jp = root.at("propagation");
    const std::string path = "$.propagation";
    expect_keys(jp, path,
                {"tx_power_dbm", "pl_d0_db", "d0_m", "exponent",
                 "shadowing_sigma_db", "noise_floor_dbm"});
    PropagationModel& m = s.propagation;
    m.tx_power_dbm = num_at(jp, path, "tx_power_dbm", m.tx_power_dbm);
    m.pl_d0_db = num_at(jp, path, "pl_d0_db", m.pl_d0_db);
    m.d0_m = num_at(jp, path, "d0_m", m.d0_m);
    m.exponent = num_at(jp, path, "exponent", m.exponent);
    m.shadowing_sigma_db = num_at(jp, path, "shadowing_sigma_db", m.shadowing_sigma_db);
    m.noise_floor_dbm = num_at(jp, path, "noise_floor_dbm", m.noise_floor_dbm);
  }

  s.radio_map.bounds = zones_bounding_box(s.zones);
  if (root.contains("radio_map")) {
    const auto& jm = root.at("radio_map");
    const std::string path = "$.radio_map";
    expect_keys(jm, path,
                {"source", "bounds", "spacing_m", "scans_per_point",
                 "trim_count", "dir"});
    std::string source = "synthesize";
    if (jm.contains("source")) {
      if (!jm.at("source").is_string()) fail_at(path + ".source", "expected a string");
      source = jm.at("source").get<std::string>();
    }
    if (source == "synthesize") {
      s.radio_map.synthesize = true;
      if (jm.contains("bounds")) {
        s.radio_map.bounds = rect_at(jm.at("bounds"), path + ".bounds");
      }
      s.radio_map.spacing_m = num_at(jm, path, "spacing_m", s.radio_map.spacing_m);
      s.radio_map.scans_per_point =
          int_at(jm, path, "scans_per_point", s.radio_map.scans_per_point);
      s.radio_map.trim_count = int_at(jm, path, "trim_count", s.radio_map.trim_count);
    } else if (source == "file") {
      s.radio_map.synthesize = false;
      if (!jm.contains("dir") || !jm.at("dir").is_string()) {
        fail_at(path + ".dir", "expected a map directory");
      }
      s.radio_map.dir = jm.at("dir").get<std::string>();
    } else {
      fail_at(path + ".source", "expected 'synthesize' or 'file'");
    }
  }

  if (root.contains("channel")) {
    const auto& jc = root.at("channel");
    const std::string path = "$.channel";
    expect_keys(jc, path,
                {"available", "reuse_min_distance_m", "backoff_window_s",
                 "rss_threshold_dbm", "min_anchor_count",
                 "interference_range_factor", "shared_channel_baseline",
                 "compare_baseline"});
    ChannelConfig& c = s.channel;
    if (jc.contains("available")) {
      if (!jc.at("available").is_array()) fail_at(path + ".available", "expected an array");
      for (const auto& v : jc.at("available")) {
        if (!v.is_number_integer()) fail_at(path + ".available", "expected integers");
        c.available.push_back(v.get<int>());
      }
    }
    c.reuse_min_distance_m =
        num_at(jc, path, "reuse_min_distance_m", c.reuse_min_distance_m);
    c.backoff_window_s = num_at(jc, path, "backoff_window_s", c.backoff_window_s);
    c.rss_threshold_dbm = int_at(jc, path, "rss_threshold_dbm", c.rss_threshold_dbm);
    c.min_anchor_count = int_at(jc, path, "min_anchor_count", c.min_anchor_count);
    c.interference_range_factor = num_at(jc, path, "interference_range_factor",
                                         c.interference_range_factor);
    c.shared_channel_baseline =
        bool_at(jc, path, "shared_channel_baseline", c.shared_channel_baseline);
    c.compare_baseline = bool_at(jc, path, "compare_baseline", c.compare_baseline);
  }

  if (root.contains("localization")) {
    const auto& jl = root.at("localization");
    const std::string path = "$.localization";
    expect_keys(jl, path, {"algorithm", "k", "awknn"});
    if (jl.contains("algorithm")) {
      if (!jl.at("algorithm").is_string()) fail_at(path + ".algorithm", "expected a string");
      s.localization.algorithm = jl.at("algorithm").get<std::string>();
    }
    s.localization.k = int_at(jl, path, "k", s.localization.k);
    if (jl.contains("awknn")) {
      const auto& jw = jl.at("awknn");
      const std::string wpath = path + ".awknn";
      expect_keys(jw, wpath,
                  {"gamma0_offset_db", "delta_db", "theta_l", "theta_s",
                   "max_iters"});
      AwknnParams& p = s.localization.awknn;
      p.gamma0_offset_db = num_at(jw, wpath, "gamma0_offset_db", p.gamma0_offset_db);
      p.delta_db = num_at(jw, wpath, "delta_db", p.delta_db);
      p.theta_l = num_at(jw, wpath, "theta_l", p.theta_l);
      p.theta_s = num_at(jw, wpath, "theta_s", p.theta_s);
      p.max_iters = int_at(jw, wpath, "max_iters", p.max_iters);
    }
  }

  if (root.contains("tracking")) {
    const auto& jt = root.at("tracking");
    const std::string path = "$.tracking";
    expect_keys(jt, path,
                {"adaptive_sounding", "required_consecutive",
                 "initial_transmit_period_s", "initial_receive_period_s",
                 "edge_band_m", "speed_window"});
    TrackingConfig& t = s.tracking;
    t.adaptive_sounding = bool_at(jt, path, "adaptive_sounding", t.adaptive_sounding);
    t.required_consecutive =
        int_at(jt, path, "required_consecutive", t.required_consecutive);
    t.initial_transmit_period_s =
        num_at(jt, path, "initial_transmit_period_s", t.initial_transmit_period_s);
    t.initial_receive_period_s =
        num_at(jt, path, "initial_receive_period_s", t.initial_receive_period_s);
    t.edge_band_m = num_at(jt, path, "edge_band_m", t.edge_band_m);
    t.speed_window = int_at(jt, path, "speed_window", t.speed_window);
  }

  if (root.contains("energy")) {
    const auto& je = root.at("energy");
    const std::string path = "$.energy";
    expect_keys(je, path,
                {"voltage_v", "current_tx_a", "current_rx_a", "current_sleep_a",
                 "tx_duration_s", "forward_duration_s", "receive_window_s"});
    EnergyModel& m = s.energy.model;
    m.voltage_v = num_at(je, path, "voltage_v", m.voltage_v);
    m.current_tx_a = num_at(je, path, "current_tx_a", m.current_tx_a);
    m.current_rx_a = num_at(je, path, "current_rx_a", m.current_rx_a);
    m.current_sleep_a = num_at(je, path, "current_sleep_a", m.current_sleep_a);
    m.tx_duration_s = num_at(je, path, "tx_duration_s", m.tx_duration_s);
    s.energy.forward_duration_s =
        num_at(je, path, "forward_duration_s", s.energy.forward_duration_s);
    s.energy.receive_window_s =
        num_at(je, path, "receive_window_s", s.energy.receive_window_s);
  }

  if (!root.contains("mobiles") || !root.at("mobiles").is_array() ||
      root.at("mobiles").empty()) {
    fail_at("$.mobiles", "expected a non-empty array");
  }
  int mi = 0;
  for (const auto& jm : root.at("mobiles")) {
    const std::string path = "$.mobiles[" + std::to_string(mi++) + "]";
    expect_keys(jm, path, {"id", "route"});
    MobileConfig mn;
    mn.id = int_at(jm, path, "id");
    if (!jm.contains("route")) fail_at(path + ".route", "missing required value");
    const auto& jr = jm.at("route");
    const std::string rpath = path + ".route";
    expect_keys(jr, rpath, {"start", "legs"});
    if (!jr.contains("start")) fail_at(rpath + ".start", "missing required value");
    mn.route.start = position_at(jr.at("start"), rpath + ".start");
    if (jr.contains("legs")) {
      if (!jr.at("legs").is_array()) fail_at(rpath + ".legs", "expected an array");
      int li = 0;
      for (const auto& jl : jr.at("legs")) {
        const std::string lpath = rpath + ".legs[" + std::to_string(li++) + "]";
        expect_keys(jl, lpath, {"to", "speed_mps"});
        RouteLeg leg;
        if (!jl.contains("to")) fail_at(lpath + ".to", "missing required value");
        leg.to = position_at(jl.at("to"), lpath + ".to");
        leg.speed_mps = num_at(jl, lpath, "speed_mps");
        mn.route.legs.push_back(leg);
      }
    }
    s.mobiles.push_back(std::move(mn));
  }

  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError(file.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

// ---- radio map -----------------------------------------------------------

void write_radio_map(const RadioMap& map, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  auto refs = open_out(dir / "refs.csv");
  refs << "grid_id,x_m,y_m\n";
  for (const GridPoint& gp : map.grid.points) {
    refs << gp.index << ',' << format_double(gp.location.x) << ','
         << format_double(gp.location.y) << '\n';
  }

  auto rss = open_out(dir / "rss.csv");
  rss << "grid_id,anchor_id,rssi_dbm\n";
  for (const Fingerprint& fp : map.fingerprints) {
    for (std::size_t j = 0; j < fp.rss.size(); ++j) {
      if (!fp.rss[j]) continue;  // unheard rows are omitted
      rss << fp.grid_index << ',' << map.anchors[j].id << ',' << *fp.rss[j]
          << '\n';
    }
  }

  auto anchors = open_out(dir / "anchors.csv");
  anchors << "anchor_id,x_m,y_m\n";
  for (const AnchorSite& a : map.anchors) {
    anchors << a.id << ',' << format_double(a.location.x) << ','
            << format_double(a.location.y) << '\n';
  }

  auto meta = open_out(dir / "map_meta.json");
  json j;
  j["spacing_m"] = map.grid.spacing;
  meta << j.dump(2) << '\n';
}

RadioMap read_radio_map(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "map_meta.json");
  if (!meta_in) throw ConfigError((dir / "map_meta.json").string() + ": cannot open");
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::parse_error& e) {
    throw ConfigError((dir / "map_meta.json").string() + ": " + e.what());
  }
  if (!meta.is_object() || !meta.contains("spacing_m") ||
      !meta.at("spacing_m").is_number()) {
    throw ConfigError((dir / "map_meta.json").string() + ": missing spacing_m");
  }

  ReferenceGrid grid;
  grid.spacing = meta.at("spacing_m").get<double>();

  CsvReader refs(dir / "refs.csv", "grid_id,x_m,y_m");
  std::vector<std::string> fields;
  while (refs.next(fields, 3)) {
    GridPoint gp;
    gp.index = static_cast<int>(parse_long(fields[0], refs.where()));
    gp.location.x = parse_double(fields[1], refs.where());
    gp.location.y = parse_double(fields[2], refs.where());
    grid.points.push_back(gp);
  }
  std::sort(grid.points.begin(), grid.points.end(),
            [](const GridPoint& a, const GridPoint& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    if (grid.points[i].index != static_cast<int>(i) + 1) {
      throw ConfigError((dir / "refs.csv").string() +
                        ": grid ids not contiguous from 1");
    }
  }

  std::vector<AnchorSite> anchors;
  CsvReader anc(dir / "anchors.csv", "anchor_id,x_m,y_m");
  while (anc.next(fields, 3)) {
    anchors.push_back({static_cast<int>(parse_long(fields[0], anc.where())),
                       {parse_double(fields[1], anc.where()),
                        parse_double(fields[2], anc.where())}});
  }

  std::map<int, std::size_t> anchor_pos;
  for (std::size_t j = 0; j < anchors.size(); ++j) anchor_pos[anchors[j].id] = j;

  std::vector<Fingerprint> fps(grid.points.size());
  for (std::size_t i = 0; i < fps.size(); ++i) {
    fps[i].grid_index = grid.points[i].index;
    fps[i].location = grid.points[i].location;
    fps[i].rss.assign(anchors.size(), std::nullopt);
  }

  CsvReader rss(dir / "rss.csv", "grid_id,anchor_id,rssi_dbm");
  while (rss.next(fields, 3)) {
    const long gid = parse_long(fields[0], rss.where());
    const int aid = static_cast<int>(parse_long(fields[1], rss.where()));
    const long value = parse_long(fields[2], rss.where());
    if (gid < 1 || gid > static_cast<long>(fps.size())) {
      throw ConfigError(rss.where() + ": unknown grid id " + std::to_string(gid));
    }
    const auto it = anchor_pos.find(aid);
    if (it == anchor_pos.end()) {
      throw ConfigError(rss.where() + ": unknown anchor id " + std::to_string(aid));
    }
    fps[static_cast<std::size_t>(gid - 1)].rss[it->second] = static_cast<int>(value);
  }

  try {
    return assemble_radio_map(std::move(grid), std::move(fps), std::move(anchors));
  } catch (const InconsistentMapError& e) {
    throw ConfigError(dir.string() + ": " + e.what());
  }
}

// ---- reports -------------------------------------------------------------

ErrorStats error_stats(std::vector<double> errors) {
  ErrorStats st;
  st.count = errors.size();
  if (errors.empty()) return st;
  double sum = 0.0;
  for (double e : errors) sum += e;
  st.mean_m = sum / errors.size();
  std::sort(errors.begin(), errors.end());
  const auto rank = [&](double q) {
    const std::size_t r = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(errors.size())));
    return errors[std::max<std::size_t>(r, 1) - 1];
  };
  st.median_m = rank(0.5);
  st.p90_m = rank(0.9);
  return st;
}

namespace {

json stats_json(const ErrorStats& st) {
  json j;
  j["count"] = st.count;
  j["mean_m"] = st.mean_m;
  j["median_m"] = st.median_m;
  j["p90_m"] = st.p90_m;
  return j;
}

int zone_of(const std::vector<Zone>& zones, const Position& p) {
  for (const Zone& z : zones) {
    if (z.polygon.contains(p)) return z.id;
  }
  return -1;
}

}  // namespace

void write_report(const SimReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  auto track = open_out(dir / "track.csv");
  track << "timestamp_s,mn_id,true_x_m,true_y_m,est_x_m,est_y_m,error_m\n";
  for (const TrackRow& row : report.track) {
    track << format_double(row.timestamp_s) << ',' << row.mn_id << ','
          << format_double(row.true_position.x) << ','
          << format_double(row.true_position.y) << ','
          << format_double(row.estimate.x) << ','
          << format_double(row.estimate.y) << ','
          << format_double(row.error_m) << '\n';
  }

  auto frames = open_out(dir / "frames.csv");
  frames << "variant,kind,channel,tx_node,start_s,duration_s,delivered,lost\n";
  for (const auto& [variant, rows] : report.frame_log) {
    for (const FrameLogRow& f : rows) {
      frames << variant << ',' << f.kind << ',' << f.channel << ',' << f.tx_node
             << ',' << format_double(f.start_s) << ','
             << format_double(f.duration_s) << ',' << f.delivered << ','
             << f.lost << '\n';
    }
  }

  json summary;
  std::vector<double> overall;
  std::map<int, std::vector<double>> by_zone;
  for (const TrackRow& row : report.track) {
    overall.push_back(row.error_m);
    by_zone[zone_of(report.zones, row.true_position)].push_back(row.error_m);
  }
  summary["errors"]["overall"] = stats_json(error_stats(overall));
  for (auto& [zone, errors] : by_zone) {
    const std::string key = zone < 0 ? "outside" : std::to_string(zone);
    summary["errors"]["per_zone"][key] = stats_json(error_stats(std::move(errors)));
  }

  for (const auto& [variant, st] : report.variants) {
    json v;
    v["beacons_sent"] = st.beacons_sent;
    v["beacons_delivered"] = st.beacons_delivered;
    v["plr"] = st.plr();
    summary["plr"][variant] = v;
  }

  for (const auto& [node, ledger] : report.node_energy) {
    json e;
    e["transmit_j"] = ledger.transmit_j;
    e["receive_j"] = ledger.receive_j;
    e["sleep_j"] = ledger.sleep_j;
    e["total_j"] = ledger.total();
    summary["energy_per_node_j"][std::to_string(node)] = e;
  }

  if (report.has_efficiency) {
    json eff;
    eff["mean_error_m"] = report.efficiency.mean_error_m;
    eff["energy_j"] = report.efficiency.energy_j;
    eff["eta"] = report.efficiency.eta;
    summary["efficiency"] = eff;
  }

  summary["event_counts"] = report.event_counts;

  json plan;
  for (const auto& [zone, channel] : report.plan.assignments) {
    plan[std::to_string(zone)] = channel;
  }
  summary["channel_plan"] = plan;

  auto out = open_out(dir / "summary.json");
  out << summary.dump(2) << '\n';
}

std::vector<TrackRow> read_track_csv(const std::filesystem::path& file) {
  CsvReader in(file, "timestamp_s,mn_id,true_x_m,true_y_m,est_x_m,est_y_m,error_m");
  std::vector<TrackRow> rows;
  std::vector<std::string> fields;
  while (in.next(fields, 7)) {
    TrackRow row;
    row.timestamp_s = parse_double(fields[0], in.where());
    row.mn_id = static_cast<int>(parse_long(fields[1], in.where()));
    row.true_position = {parse_double(fields[2], in.where()),
                         parse_double(fields[3], in.where())};
    row.estimate = {parse_double(fields[4], in.where()),
                    parse_double(fields[5], in.where())};
    row.error_m = parse_double(fields[6], in.where());
    rows.push_back(row);
  }
  return rows;
}

std::vector<Measurement> read_query_csv(const std::filesystem::path& file,
                                        const std::vector<AnchorSite>& anchors) {
  std::map<int, std::size_t> anchor_pos;
  for (std::size_t j = 0; j < anchors.size(); ++j) anchor_pos[anchors[j].id] = j;

  std::map<int, Measurement> grouped;
  CsvReader in(file, "query_id,anchor_id,rssi_dbm");
  std::vector<std::string> fields;
  while (in.next(fields, 3)) {
    const int qid = static_cast<int>(parse_long(fields[0], in.where()));
    const int aid = static_cast<int>(parse_long(fields[1], in.where()));
    const long rssi = parse_long(fields[2], in.where());
    const auto it = anchor_pos.find(aid);
    if (it == anchor_pos.end()) {
      throw ConfigError(in.where() + ": unknown anchor id " + std::to_string(aid));
    }
    if (rssi < kRssiFloorDbm || rssi > kRssiCeilDbm) {
      throw ConfigError(in.where() + ": RSSI outside [" +
                        std::to_string(kRssiFloorDbm) + ", " +
                        std::to_string(kRssiCeilDbm) + "]");
    }
    auto& m = grouped[qid];
    m.mn_id = qid;
    if (m.rss.empty()) m.rss.assign(anchors.size(), std::nullopt);
    m.rss[it->second] = static_cast<int>(rssi);
  }
  std::vector<Measurement> out;
  out.reserve(grouped.size());
  for (auto& [qid, m] : grouped) out.push_back(std::move(m));
  return out;
}

void write_locate_csv(const std::vector<Measurement>& queries,
                      const std::vector<MatchResult>& results,
                      std::ostream& out) {
  out << "query_id,est_x_m,est_y_m,k_used\n";
  for (std::size_t i = 0; i < queries.size(); ++i) {
    out << queries[i].mn_id << ',' << format_double(results[i].estimate.x)
        << ',' << format_double(results[i].estimate.y) << ','
        << results[i].k_used << '\n';
  }
}

std::string render_report(const std::filesystem::path& dir) {
  const auto rows = read_track_csv(dir / "track.csv");
  std::ifstream sin(dir / "summary.json");
  if (!sin) throw ConfigError((dir / "summary.json").string() + ": cannot open");
  json summary;
  try {
    summary = json::parse(sin);
  } catch (const json::parse_error& e) {
    throw ConfigError((dir / "summary.json").string() + ": " + e.what());
  }

  std::vector<double> errors;
  for (const TrackRow& r : rows) errors.push_back(r.error_m);
  const ErrorStats st = error_stats(errors);

  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
  const auto& overall = summary.at("errors").at("overall");
  if (overall.at("count").get<std::size_t>() != st.count ||
      !close(overall.at("mean_m").get<double>(), st.mean_m) ||
      !close(overall.at("median_m").get<double>(), st.median_m) ||
      !close(overall.at("p90_m").get<double>(), st.p90_m)) {
    throw InvariantViolationError("summary.json disagrees with track.csv");
  }
  if (summary.contains("efficiency")) {
    const auto& eff = summary.at("efficiency");
    const double eta = localization_efficiency(eff.at("mean_error_m").get<double>(),
                                               eff.at("energy_j").get<double>());
    if (!close(eta, eff.at("eta").get<double>())) {
      throw InvariantViolationError("efficiency eta inconsistent with its inputs");
    }
  }

  std::ostringstream os;
  os << "track rows: " << st.count << "\n";
  os << "error mean/median/p90 (m): " << format_double(st.mean_m) << " / "
     << format_double(st.median_m) << " / " << format_double(st.p90_m) << "\n";
  if (summary.contains("plr")) {
    for (const auto& [variant, v] : summary.at("plr").items()) {
      os << "plr[" << variant << "]: " << format_double(v.at("plr").get<double>())
         << " (" << v.at("beacons_delivered").get<long>() << "/"
         << v.at("beacons_sent").get<long>() << " delivered)\n";
    }
  }
  if (summary.contains("efficiency")) {
    os << "eta: " << format_double(summary.at("efficiency").at("eta").get<double>())
       << " per m^2 J\n";
  }
  if (summary.contains("energy_per_node_j")) {
    for (const auto& [node, e] : summary.at("energy_per_node_j").items()) {
      os << "energy[" << node << "]: " << format_double(e.at("total_j").get<double>())
         << " J\n";
    }
  }
  return os.str();
}

}  // namespace elot
