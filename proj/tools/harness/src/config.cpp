#include "harness/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "racer/errors.hpp"

namespace racer::harness {

namespace {

struct Entry {
  const char* key;
  std::function<void(RunConfig*, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

double parseDouble(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw InvalidInput("config: bad numeric value for " + key + ": '" + v + "'");
  }
  if (used != v.size()) {
    throw InvalidInput("config: trailing characters in value for " + key + ": '" + v + "'");
  }
  return out;
}

long long parseInt(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw InvalidInput("config: bad integer value for " + key + ": '" + v + "'");
  }
  if (used != v.size()) {
    throw InvalidInput("config: trailing characters in value for " + key + ": '" + v + "'");
  }
  return out;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

Entry dbl(const char* key, double RunConfig::* field) {
  return {key,
          [key, field](RunConfig* c, const std::string& v) { c->*field = parseDouble(key, v); },
          [field](const RunConfig& c) { return fmt(c.*field); }};
}

Entry intval(const char* key, int RunConfig::* field) {
  return {key,
          [key, field](RunConfig* c, const std::string& v) {
            c->*field = static_cast<int>(parseInt(key, v));
          },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

template <typename Sub>
Entry dblSub(const char* key, Sub RunConfig::* sub, double Sub::* field) {
  return {key,
          [key, sub, field](RunConfig* c, const std::string& v) {
            (c->*sub).*field = parseDouble(key, v);
          },
          [sub, field](const RunConfig& c) { return fmt((c.*sub).*field); }};
}

template <typename Sub>
Entry intSub(const char* key, Sub RunConfig::* sub, int Sub::* field) {
  return {key,
          [key, sub, field](RunConfig* c, const std::string& v) {
            (c->*sub).*field = static_cast<int>(parseInt(key, v));
          },
          [sub, field](const RunConfig& c) { return std::to_string((c.*sub).*field); }};
}

template <typename Sub>
Entry boolSub(const char* key, Sub RunConfig::* sub, bool Sub::* field) {
  return {key,
          [key, sub, field](RunConfig* c, const std::string& v) {
            if (v == "true" || v == "1") (c->*sub).*field = true;
            else if (v == "false" || v == "0") (c->*sub).*field = false;
            else throw InvalidInput("config: bad boolean value for " + std::string(key));
          },
          [sub, field](const RunConfig& c) {
            return (c.*sub).*field ? std::string("true") : std::string("false");
          }};
}

const std::vector<Entry>& table() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> t;
    t.push_back({"seed",
                 [](RunConfig* c, const std::string& v) {
                   c->seed = static_cast<std::uint64_t>(parseInt("seed", v));
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    t.push_back({"controller",
                 [](RunConfig* c, const std::string& v) {
                   if (v != "mpc" && v != "pure_pursuit") {
                     throw InvalidInput("config: controller must be mpc or pure_pursuit");
                   }
                   c->controller = v;
                 },
                 [](const RunConfig& c) { return c.controller; }});

    t.push_back(dblSub("track.straight_length", &RunConfig::track, &TrackSpec::straight_length));
    t.push_back(dblSub("track.radius", &RunConfig::track, &TrackSpec::radius));
    t.push_back(dblSub("track.width", &RunConfig::track, &TrackSpec::width));
    t.push_back(dblSub("track.cone_spacing", &RunConfig::track, &TrackSpec::cone_spacing));

    t.push_back(dblSub("lidar.range_noise", &RunConfig::lidar, &LidarConfig::range_noise));
    t.push_back(dblSub("lidar.max_range", &RunConfig::lidar, &LidarConfig::max_range));
    t.push_back(dblSub("lidar.mount_height", &RunConfig::lidar, &LidarConfig::mount_height));
    t.push_back(
        dblSub("lidar.azimuth_step_deg", &RunConfig::lidar, &LidarConfig::azimuth_step_deg));

    t.push_back(dblSub("gps.pos_sigma", &RunConfig::gps, &GpsConfig::pos_sigma));
    t.push_back(dblSub("gps.heading_sigma", &RunConfig::gps, &GpsConfig::heading_sigma));
    t.push_back(dblSub("gps.dropout_prob", &RunConfig::gps, &GpsConfig::dropout_prob));

    t.push_back(dblSub("camera.noise_sigma", &RunConfig::camera, &CameraConfig::noise_sigma));
    t.push_back(dblSub("camera.max_range", &RunConfig::camera, &CameraConfig::max_range));

    t.push_back(dblSub("ransac.tau", &RunConfig::ransac, &RansacConfig::tau));
    t.push_back(intSub("ransac.max_iter", &RunConfig::ransac, &RansacConfig::max_iter));

    t.push_back(dblSub("odometry.edge_thresh", &RunConfig::odometry, &OdometryConfig::edge_thresh));
    t.push_back(
        dblSub("odometry.plane_thresh", &RunConfig::odometry, &OdometryConfig::plane_thresh));
    t.push_back(
        dblSub("odometry.max_corr_dist", &RunConfig::odometry, &OdometryConfig::max_corr_dist));

    t.push_back(dblSub("map.merge_radius", &RunConfig::map, &TrackMapConfig::merge_radius));

    t.push_back(dblSub("loop.threshold", &RunConfig::loop, &LoopClosureConfig::threshold));
    t.push_back(
        dblSub("loop.arming_distance", &RunConfig::loop, &LoopClosureConfig::arming_distance));
    t.push_back(dblSub("loop.w_cone", &RunConfig::loop, &LoopClosureConfig::w_cone));
    t.push_back(dblSub("loop.w_heading", &RunConfig::loop, &LoopClosureConfig::w_heading));
    t.push_back(dblSub("loop.w_dist", &RunConfig::loop, &LoopClosureConfig::w_dist));

    t.push_back(intSub("mpc.horizon", &RunConfig::mpc, &MpcConfig::horizon));
    t.push_back(dblSub("mpc.w_steer_rate", &RunConfig::mpc, &MpcConfig::w_steer_rate));
    t.push_back(dblSub("mpc.w_e_psi", &RunConfig::mpc, &MpcConfig::w_e_psi));
    t.push_back(dblSub("mpc.w_e_y", &RunConfig::mpc, &MpcConfig::w_e_y));
    t.push_back(dblSub("mpc.w_shoulder", &RunConfig::mpc, &MpcConfig::w_shoulder));
    t.push_back(dblSub("mpc.corridor", &RunConfig::mpc, &MpcConfig::corridor));
    t.push_back(dblSub("mpc.w_speed", &RunConfig::mpc, &MpcConfig::w_speed));
    t.push_back(dblSub("mpc.slack_bound", &RunConfig::mpc, &MpcConfig::slack_bound));
    t.push_back(intSub("mpc.max_iters", &RunConfig::mpc, &MpcConfig::max_iters));
    t.push_back(boolSub("mpc.extra_starts", &RunConfig::mpc, &MpcConfig::extra_starts));

    t.push_back(
        dblSub("pursuit.lookahead_gain", &RunConfig::pursuit, &PurePursuitConfig::lookahead_gain));
    t.push_back(
        dblSub("pursuit.min_lookahead", &RunConfig::pursuit, &PurePursuitConfig::min_lookahead));
    t.push_back(
        dblSub("pursuit.max_lookahead", &RunConfig::pursuit, &PurePursuitConfig::max_lookahead));
    t.push_back(dblSub("pursuit.kp_speed", &RunConfig::pursuit, &PurePursuitConfig::kp_speed));

    t.push_back(dblSub("governor.a_lat_max", &RunConfig::governor, &SpeedGovernorConfig::a_lat_max));
    t.push_back(
        dblSub("governor.error_gain", &RunConfig::governor, &SpeedGovernorConfig::error_gain));
    t.push_back(
        dblSub("governor.min_factor", &RunConfig::governor, &SpeedGovernorConfig::min_factor));
    t.push_back(dblSub("governor.corridor", &RunConfig::governor, &SpeedGovernorConfig::corridor));

    t.push_back(dblSub("vehicle.mass", &RunConfig::vehicle, &VehicleParams::mass));
    t.push_back(dblSub("vehicle.inertia_z", &RunConfig::vehicle, &VehicleParams::inertia_z));
    t.push_back(dblSub("vehicle.c_f", &RunConfig::vehicle, &VehicleParams::c_f));
    t.push_back(dblSub("vehicle.c_r", &RunConfig::vehicle, &VehicleParams::c_r));
    t.push_back(dblSub("vehicle.mu", &RunConfig::vehicle, &VehicleParams::mu));
    t.push_back(dblSub("vehicle.delta_max", &RunConfig::vehicle, &VehicleParams::delta_max));
    t.push_back(dblSub("vehicle.zeta_max", &RunConfig::vehicle, &VehicleParams::zeta_max));
    t.push_back(dblSub("vehicle.a_max", &RunConfig::vehicle, &VehicleParams::a_max));
    t.push_back(dblSub("vehicle.jerk_max", &RunConfig::vehicle, &VehicleParams::jerk_max));

    t.push_back(dbl("cluster.radius", &RunConfig::cluster_radius));
    t.push_back(intval("cluster.min_points", &RunConfig::cluster_min_points));

    t.push_back(dbl("mission.detection_speed", &RunConfig::detection_speed));
    t.push_back(dbl("mission.tracking_speed_factor", &RunConfig::tracking_speed_factor));
    t.push_back(dbl("mission.control_dt", &RunConfig::control_dt));
    t.push_back(dbl("mission.lidar_period", &RunConfig::lidar_period));
    t.push_back(intval("mission.accumulate_scans", &RunConfig::accumulate_scans));
    t.push_back(dbl("mission.max_time", &RunConfig::max_time));
    t.push_back(dbl("mission.waypoint_spacing", &RunConfig::waypoint_spacing));
    t.push_back(dbl("mission.pair_gate", &RunConfig::pair_gate));
    t.push_back(dbl("mission.local_chain_gate", &RunConfig::local_chain_gate));
    t.push_back(dbl("mission.local_range", &RunConfig::local_range));
    t.push_back(dbl("mission.fusion_alpha", &RunConfig::fusion_alpha));
    t.push_back(dbl("mission.alignment_gate", &RunConfig::alignment_gate));
    t.push_back(dbl("mission.gps_outage_start", &RunConfig::gps_outage_start));
    t.push_back(dbl("mission.gps_outage_duration", &RunConfig::gps_outage_duration));

    t.push_back(intval("svm.positives", &RunConfig::svm_positives));
    t.push_back(intval("svm.negatives", &RunConfig::svm_negatives));
    t.push_back(intval("svm.epochs", &RunConfig::svm_epochs));
    return t;
  }();
  return entries;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void applyOverride(RunConfig* cfg, const std::string& key, const std::string& value) {
  for (const Entry& e : table()) {
    if (key == e.key) {
      e.set(cfg, value);
      return;
    }
  }
  throw InvalidInput("config: unknown key '" + key + "'");
}

void applyOverrideExpr(RunConfig* cfg, const std::string& expr) {
  const auto eq = expr.find('=');
  if (eq == std::string::npos) {
    throw InvalidInput("config: override must look like key=value, got '" + expr + "'");
  }
  applyOverride(cfg, trim(expr.substr(0, eq)), trim(expr.substr(eq + 1)));
}

RunConfig loadRunConfig(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("loadRunConfig: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || trim(line) != "# racer-config v1") {
    throw IoError("loadRunConfig: missing format header in " + path);
  }
  RunConfig cfg;
  while (std::getline(f, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    applyOverrideExpr(&cfg, line);
  }
  return cfg;
}

void saveRunConfig(const std::string& path, const RunConfig& cfg) {
  std::ofstream f(path);
  if (!f) throw IoError("saveRunConfig: cannot open " + path);
  f << "# racer-config v1\n";
  for (const auto& kv : listConfig(cfg)) {
    f << kv.first << "=" << kv.second << "\n";
  }
  if (!f) throw IoError("saveRunConfig: write failed for " + path);
}

std::vector<std::pair<std::string, std::string>> listConfig(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(table().size());
  for (const Entry& e : table()) out.emplace_back(e.key, e.get(cfg));
  return out;
}

}  // namespace racer::harness
