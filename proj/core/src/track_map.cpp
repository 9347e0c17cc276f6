#include "racer/track_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "racer/errors.hpp"

namespace racer {

namespace {

int colorIndex(ConeColor c) {
  switch (c) {
    case ConeColor::Red: return 0;
    case ConeColor::Blue: return 1;
    case ConeColor::Yellow: return 2;
    default: return 3;
  }
}

ConeColor colorFromIndex(int i) {
  switch (i) {
    case 0: return ConeColor::Red;
    case 1: return ConeColor::Blue;
    case 2: return ConeColor::Yellow;
    default: return ConeColor::Unknown;
  }
}

}  // namespace

ConeColor MappedCone::color() const {
  int best = 3;
  int best_votes = 0;
  // Unknown wins only when nothing else has votes; earlier colors win ties.
  for (int i = 0; i < 3; ++i) {
    if (color_votes[i] > best_votes) {
      best_votes = color_votes[i];
      best = i;
    }
  }
  return colorFromIndex(best);
}

TrackMap::TrackMap(const TrackMapConfig& cfg) : cfg_(cfg) {
  if (cfg.merge_radius <= 0.0) throw InvalidInput("TrackMap: merge_radius must be positive");
}

std::size_t TrackMap::insert(const Vec2& position, ConeColor color) {
  std::size_t best = cones_.size();
  double best_d2 = cfg_.merge_radius * cfg_.merge_radius;
  for (std::size_t i = 0; i < cones_.size(); ++i) {
    const Vec2 d = cones_[i].position - position;
    const double d2 = d.dot(d);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  if (best == cones_.size()) {
    MappedCone c;
    c.position = position;
    c.observation_count = 1;
    c.color_votes[colorIndex(color)] = 1;
    cones_.push_back(c);
    return best;
  }
  MappedCone& c = cones_[best];
  const double n = static_cast<double>(c.observation_count);
  c.position = (c.position * n + position) * (1.0 / (n + 1.0));
  ++c.observation_count;
  ++c.color_votes[colorIndex(color)];
  return best;
}

LoopDetector::LoopDetector(const LoopClosureConfig& cfg, double start_x, double start_y,
                           double start_heading)
    : cfg_(cfg), start_x_(start_x), start_y_(start_y), start_heading_(start_heading) {
  if (cfg.threshold <= 0.0 || cfg.arming_distance < 0.0) {
    throw InvalidInput("LoopDetector: invalid configuration");
  }
}

bool LoopDetector::update(double x, double y, double heading, const std::vector<Vec2>& detections,
                          const TrackMap& map) {
  if (has_prev_) {
    const double step = std::hypot(x - prev_x_, y - prev_y_);
    traveled_ += step;
    since_event_ += step;
  }
  prev_x_ = x;
  prev_y_ = y;
  has_prev_ = true;

  double cone_term = 0.0;
  if (!map.cones().empty()) {
    for (const Vec2& d : detections) {
      double best = std::numeric_limits<double>::infinity();
      for (const MappedCone& c : map.cones()) {
        const Vec2 delta = c.position - d;
        best = std::min(best, delta.dot(delta));
      }
      cone_term += std::sqrt(best);
    }
  }
  const double dh = std::abs(wrapAngle(heading - start_heading_));
  const double dl = std::hypot(x - start_x_, y - start_y_);
  last_coefficient_ = cfg_.w_cone * cone_term + cfg_.w_heading * dh + cfg_.w_dist * dl;

  if (since_event_ >= cfg_.arming_distance && last_coefficient_ < cfg_.threshold) {
    ++closures_;
    since_event_ = 0.0;
    return true;
  }
  return false;
}

std::vector<Vec2> extractMidline(const TrackMap& map, const std::vector<Vec2>& travel_path,
                                 double pair_gate) {
  std::vector<const MappedCone*> reds, blues;
  for (const MappedCone& c : map.cones()) {
    const ConeColor col = c.color();
    if (col == ConeColor::Red) reds.push_back(&c);
    else if (col == ConeColor::Blue) blues.push_back(&c);
  }
  if (reds.empty() || blues.empty()) {
    throw InsufficientData("extractMidline: need at least one red and one blue cone");
  }
  if (travel_path.empty()) {
    throw InvalidInput("extractMidline: travel path must not be empty");
  }

  std::vector<Vec2> midpoints;
  midpoints.reserve(reds.size());
  for (const MappedCone* r : reds) {
    const MappedCone* best = nullptr;
    double best_d2 = pair_gate * pair_gate;
    for (const MappedCone* b : blues) {
      const Vec2 d = b->position - r->position;
      const double d2 = d.dot(d);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = b;
      }
    }
    if (best != nullptr) {
      midpoints.push_back((r->position + best->position) * 0.5);
    }
  }
  if (midpoints.empty()) {
    throw InsufficientData("extractMidline: no red/blue pair inside the gate");
  }

  // Order by arc-length projection onto the traveled path.
  std::vector<double> cum(travel_path.size(), 0.0);
  for (std::size_t i = 1; i < travel_path.size(); ++i) {
    cum[i] = cum[i - 1] + (travel_path[i] - travel_path[i - 1]).norm();
  }
  auto projectArc = [&](const Vec2& p) {
    if (travel_path.size() == 1) return 0.0;
    double best_d2 = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    for (std::size_t i = 0; i + 1 < travel_path.size(); ++i) {
      const Vec2 a = travel_path[i];
      const Vec2 ab = travel_path[i + 1] - a;
      const double len2 = ab.dot(ab);
      double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const Vec2 q = a + ab * t;
      const Vec2 dq = p - q;
      const double d2 = dq.dot(dq);
      if (d2 < best_d2) {
        best_d2 = d2;
        best_s = cum[i] + std::sqrt(len2) * t;
      }
    }
    return best_s;
  };

  std::vector<std::pair<double, Vec2>> keyed;
  keyed.reserve(midpoints.size());
  for (const Vec2& m : midpoints) keyed.emplace_back(projectArc(m), m);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Vec2> out;
  out.reserve(keyed.size());
  for (const auto& kv : keyed) out.push_back(kv.second);
  return out;
}

Vec2 PlanarCorrection::apply(const Vec2& p) const {
  const double c = std::cos(dtheta), s = std::sin(dtheta);
  return {c * p.x - s * p.y + dt.x, s * p.x + c * p.y + dt.y};
}

PlanarCorrection alignToMap(const TrackMap& map, const std::vector<Vec2>& world_detections,
                            double match_gate) {
  PlanarCorrection corr;
  if (map.cones().empty() || world_detections.empty()) return corr;

  std::vector<std::pair<Vec2, Vec2>> matches;  // detection -> map cone
  const double gate2 = match_gate * match_gate;
  for (const Vec2& d : world_detections) {
    double best_d2 = gate2;
    const MappedCone* best = nullptr;
    for (const MappedCone& c : map.cones()) {
      const Vec2 delta = c.position - d;
      const double d2 = delta.dot(delta);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = &c;
      }
    }
    if (best != nullptr) matches.emplace_back(d, best->position);
  }
  corr.matches = static_cast<int>(matches.size());
  if (corr.matches < 3) return corr;

  Vec2 cd{0.0, 0.0}, cm{0.0, 0.0};
  for (const auto& m : matches) {
    cd = cd + m.first;
    cm = cm + m.second;
  }
  const double inv = 1.0 / corr.matches;
  cd = cd * inv;
  cm = cm * inv;
  double sc = 0.0, sd = 0.0;
  for (const auto& m : matches) {
    const Vec2 a = m.first - cd;
    const Vec2 b = m.second - cm;
    sd += a.dot(b);
    sc += a.cross(b);
  }
  if (sc == 0.0 && sd == 0.0) {
    corr.matches = 0;  // degenerate spread; report nothing usable
    return corr;
  }
  corr.dtheta = std::atan2(sc, sd);
  const double c = std::cos(corr.dtheta), s = std::sin(corr.dtheta);
  corr.dt = {cm.x - (c * cd.x - s * cd.y), cm.y - (s * cd.x + c * cd.y)};
  return corr;
}

void saveTrackMap(const std::string& path, const TrackMapFile& file) {
  std::ofstream f(path);
  if (!f) throw IoError("saveTrackMap: cannot open " + path);
  char buf[160];
  f << "# racer-map v1\n";
  std::snprintf(buf, sizeof(buf), "start %.9g %.9g %.9g\n", file.start_x, file.start_y,
                file.start_heading);
  f << buf;
  f << "closed " << (file.closed ? 1 : 0) << "\n";
  f << "laps " << file.laps << "\n";
  f << "cones " << file.map.size() << "\n";
  for (const MappedCone& c : file.map.cones()) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %s %d\n", c.position.x, c.position.y,
                  toString(c.color()), c.observation_count);
    f << buf;
  }
  if (!f) throw IoError("saveTrackMap: write failed for " + path);
}

TrackMapFile loadTrackMap(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("loadTrackMap: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != "# racer-map v1") {
    throw IoError("loadTrackMap: missing format header in " + path);
  }
  TrackMapFile file;
  std::string key;
  f >> key >> file.start_x >> file.start_y >> file.start_heading;
  if (key != "start") throw IoError("loadTrackMap: expected start pose in " + path);
  int closed = 0;
  f >> key >> closed;
  if (key != "closed") throw IoError("loadTrackMap: expected closed flag in " + path);
  file.closed = closed != 0;
  f >> key >> file.laps;
  if (key != "laps") throw IoError("loadTrackMap: expected lap count in " + path);
  std::size_t count = 0;
  f >> key >> count;
  if (key != "cones") throw IoError("loadTrackMap: expected cone count in " + path);
  for (std::size_t i = 0; i < count; ++i) {
    double x = 0.0, y = 0.0;
    std::string color;
    int obs = 0;
    f >> x >> y >> color >> obs;
    if (!f) throw IoError("loadTrackMap: truncated cone list in " + path);
    const ConeColor col = coneColorFromString(color);
    MappedCone c;
    c.position = {x, y};
    c.observation_count = obs;
    c.color_votes[colorIndex(col)] = obs > 0 ? obs : 1;
    file.map.restore(c);
  }
  return file;
}

}  // namespace racer
