#include "harness/mission_runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "harness/classifier.hpp"
#include "harness/pipeline.hpp"
#include "harness/report.hpp"
#include "racer/errors.hpp"
#include "racer/random.hpp"
#include "racer/sim.hpp"

namespace racer::harness {

namespace {

std::vector<Waypoint> straightPath(double x, double y, double heading, double length,
                                   double spacing) {
  std::vector<Waypoint> wps;
  const int n = static_cast<int>(length / spacing);
  wps.reserve(n + 1);
  const double c = std::cos(heading), s = std::sin(heading);
  for (int i = 0; i <= n; ++i) {
    Waypoint wp;
    wp.s = i * spacing;
    wp.position = {x + c * wp.s, y + s * wp.s};
    wp.heading = heading;
    wp.curvature = 0.0;
    wps.push_back(wp);
  }
  return wps;
}

// Linear interpolation of the waypoint curvature field at arc position s.
double kappaAtArc(const std::vector<Waypoint>& wps, bool closed, double s);

// Linear sampling of a midpoint polyline; refinePath supplies the geometry.
// Fallback guidance for chains too short for the spline fit.
std::vector<Waypoint> polylineWaypoints(const std::vector<Vec2>& pts, double spacing) {
  std::vector<Waypoint> wps;
  if (pts.size() < 2) return wps;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 d = pts[i + 1] - pts[i];
    const double len = d.norm();
    if (len < 1e-9) continue;
    const double h = std::atan2(d.y, d.x);
    for (double u = 0.0; u < len; u += spacing) {
      Waypoint wp;
      wp.position = pts[i] + d * (u / len);
      wp.s = s + u;
      wp.heading = h;
      wp.curvature = 0.0;
      wps.push_back(wp);
    }
    s += len;
  }
  Waypoint last;
  last.position = pts.back();
  last.s = s;
  last.heading = wps.empty() ? 0.0 : wps.back().heading;
  last.curvature = 0.0;
  wps.push_back(last);
  return wps;
}

// Post-process sampled waypoints: repeated 1-2-1 position averaging (about a
// Gaussian of sigma ~= spacing*sqrt(passes/2)) removes the curvature wiggle
// the interpolating spline inherits from gate-detection noise, then s,
// heading, and curvature are rebuilt from the smoothed polyline by central
// differences.  At 0.5 m spacing the arc-radius bias is a few centimetres.
std::vector<Waypoint> refinePath(std::vector<Waypoint> wps, bool closed, int passes) {
  const std::size_t n = wps.size();
  if (n < 5) return wps;
  std::vector<Vec2> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = wps[i].position;
  const std::size_t lo = closed ? 0 : 1;
  const std::size_t hi = closed ? n : n - 1;
  for (int p = 0; p < passes; ++p) {
    std::vector<Vec2> out = pos;
    for (std::size_t i = lo; i < hi; ++i) {
      out[i] = pos[(i + n - 1) % n] * 0.25 + pos[i] * 0.5 + pos[(i + 1) % n] * 0.25;
    }
    pos = std::move(out);
  }
  for (std::size_t i = 0; i < n; ++i) wps[i].position = pos[i];
  wps[0].s = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    wps[i].s = wps[i - 1].s + (pos[i] - pos[i - 1]).norm();
  }
  auto tangent_heading = [&](std::size_t i) {
    Vec2 d;
    if (closed) {
      d = pos[(i + 1) % n] - pos[(i + n - 1) % n];
    } else if (i == 0) {
      d = pos[1] - pos[0];
    } else if (i + 1 == n) {
      d = pos[n - 1] - pos[n - 2];
    } else {
      d = pos[i + 1] - pos[i - 1];
    }
    return std::atan2(d.y, d.x);
  };
  std::vector<double> heading(n);
  for (std::size_t i = 0; i < n; ++i) heading[i] = tangent_heading(i);
  const double total = closed ? wps.back().s + (pos.front() - pos.back()).norm() : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wps[i].heading = heading[i];
    std::size_t a = i, b = i;
    double ds = 0.0;
    if (closed) {
      a = (i + n - 1) % n;
      b = (i + 1) % n;
      ds = wps[b].s - wps[a].s;
      if (ds <= 0.0) ds += total;
    } else if (i == 0) {
      b = 1;
      ds = wps[1].s - wps[0].s;
    } else if (i + 1 == n) {
      a = n - 2;
      ds = wps[n - 1].s - wps[n - 2].s;
    } else {
      a = i - 1;
      b = i + 1;
      ds = wps[b].s - wps[a].s;
    }
    wps[i].curvature = ds > 0.0 ? wrapAngle(heading[b] - heading[a]) / ds : 0.0;
  }

  // Double differentiation re-amplifies the millimetre residue the position
  // passes leave behind, and the curvature feed-forward scales it by speed
  // squared.  A short arc-length average trims that noise while leaving the
  // arc plateaus intact (the transition ramp smears by the window, which the
  // speed planner's braking look-ahead already covers).
  const double span = wps.back().s > 0.0 ? wps.back().s / static_cast<double>(n - 1) : 0.5;
  const int half = std::max(1, static_cast<int>(std::lround(2.5 / span)));
  std::vector<double> smooth_k(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    int cnt = 0;
    for (int j = -half; j <= half; ++j) {
      long idx = static_cast<long>(i) + j;
      if (closed) {
        idx = (idx % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n);
      } else {
        idx = std::clamp<long>(idx, 0, static_cast<long>(n) - 1);
      }
      acc += wps[static_cast<std::size_t>(idx)].curvature;
      ++cnt;
    }
    smooth_k[i] = acc / cnt;
  }
  for (std::size_t i = 0; i < n; ++i) wps[i].curvature = smooth_k[i];
  return wps;
}

// Curvature-limited speed reference with braking-distance anticipation: the
// allowed speed at s0 is capped so that every upcoming curvature limit
// within the scan window is reachable under a comfortable deceleration,
// v(s0) <= sqrt(v_lim(s_j)^2 + 2 a_dec (s_j - s0)).
double planSpeed(const std::vector<Waypoint>& wps, bool closed, double s0, double target,
                 double e_y, const SpeedGovernorConfig& gov) {
  constexpr double kDecel = 4.0;     // planning deceleration, below the actuator limit
  constexpr double kWindow = 30.0;   // scan distance; enough to shed top speed
  constexpr double kStep = 1.0;
  double allowed = governSpeed(target, e_y, kappaAtArc(wps, closed, s0), gov);
  for (double d = kStep; d <= kWindow; d += kStep) {
    const double v_lim = governSpeed(target, e_y, kappaAtArc(wps, closed, s0 + d), gov);
    allowed = std::min(allowed, std::sqrt(v_lim * v_lim + 2.0 * kDecel * d));
  }
  return allowed;
}

double kappaAtArc(const std::vector<Waypoint>& wps, bool closed, double s) {
  double total = wps.back().s;
  double wrap_len = 0.0;
  if (closed) {
    wrap_len = (wps.front().position - wps.back().position).norm();
    total += wrap_len;
  }
  if (total <= 0.0) return 0.0;
  if (closed) {
    s = std::fmod(s, total);
    if (s < 0.0) s += total;
  } else {
    s = std::clamp(s, 0.0, wps.back().s);
  }
  for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
    if (s <= wps[i + 1].s) {
      const double seg = wps[i + 1].s - wps[i].s;
      const double t = seg > 0.0 ? (s - wps[i].s) / seg : 0.0;
      return wps[i].curvature + (wps[i + 1].curvature - wps[i].curvature) * t;
    }
  }
  if (closed && wrap_len > 0.0) {
    const double t = std::clamp((s - wps.back().s) / wrap_len, 0.0, 1.0);
    return wps.back().curvature + (wps.front().curvature - wps.back().curvature) * t;
  }
  return wps.back().curvature;
}

// Midpoints of red/blue cone pairs near the vehicle, chained greedily along
// the direction of travel; the lap-1 local plan.
std::vector<Vec2> chainLocalMidpoints(const TrackMap& map, const Vec2& vehicle, double heading,
                                      double pair_gate, double chain_gate, double range) {
  std::vector<const MappedCone*> reds, blues, yellows;
  for (const MappedCone& c : map.cones()) {
    const Vec2 d = c.position - vehicle;
    if (d.norm() > range) continue;
    const ConeColor col = c.color();
    if (col == ConeColor::Red) reds.push_back(&c);
    else if (col == ConeColor::Blue) blues.push_back(&c);
    else if (col == ConeColor::Yellow) yellows.push_back(&c);
  }
  std::vector<Vec2> mids;
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
    if (best) mids.push_back((r->position + best->position) * 0.5);
  }
  // The start gate is a yellow pair; without its midpoint the midline has a
  // hole right at the start line.
  for (std::size_t i = 0; i < yellows.size(); ++i) {
    for (std::size_t j = i + 1; j < yellows.size(); ++j) {
      const Vec2 d = yellows[j]->position - yellows[i]->position;
      if (d.dot(d) < pair_gate * pair_gate) {
        mids.push_back((yellows[i]->position + yellows[j]->position) * 0.5);
      }
    }
  }

  // Keep a tail of midpoints behind the vehicle so the spline has support
  // on both sides even when sensing reach limits the lookahead.  The band
  // is generous because in arcs the gates behind fall away quickly in
  // forward projection.
  const Vec2 fwd{std::cos(heading), std::sin(heading)};
  std::vector<Vec2> ahead;
  for (const Vec2& m : mids) {
    if ((m - vehicle).dot(fwd) > -10.0) ahead.push_back(m);
  }
  if (ahead.empty()) return {};

  // Chain by nearest-neighbor hops starting from the rearmost midpoint, so
  // the result runs monotonically through the kept band.
  std::size_t rear = 0;
  for (std::size_t i = 1; i < ahead.size(); ++i) {
    if ((ahead[i] - vehicle).dot(fwd) < (ahead[rear] - vehicle).dot(fwd)) rear = i;
  }
  std::vector<Vec2> chain;
  std::vector<bool> used(ahead.size(), false);
  used[rear] = true;
  chain.push_back(ahead[rear]);
  Vec2 cur = ahead[rear];
  for (;;) {
    int best = -1;
    double best_d2 = chain_gate * chain_gate;
    for (std::size_t i = 0; i < ahead.size(); ++i) {
      if (used[i]) continue;
      const Vec2 d = ahead[i] - cur;
      const double d2 = d.dot(d);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) break;
    used[best] = true;
    chain.push_back(ahead[best]);
    cur = ahead[best];
  }
  return chain;
}

}  // namespace

MissionResult runTwoLapMission(const RunConfig& cfg) {
  MissionResult result;
  const SimTrack track(cfg.track);

  // Deterministic independent sensor streams.
  Rng lidar_rng(subSeed(cfg.seed, 1));
  Rng gps_rng(subSeed(cfg.seed, 2));

  const ClassifierBundle classifier = trainConeClassifier(
      cfg.camera, cfg.svm_positives, cfg.svm_negatives, cfg.svm_epochs, subSeed(cfg.seed, 4));
  result.classifier_train_accuracy = classifier.train_accuracy;

  // Truth starts at the lap origin.
  VehicleState truth;
  MissionStateMachine sm;
  sm.handle(MissionEvent::AsmsOn, 0.0);
  sm.handle(MissionEvent::SystemChecksPassed, 0.0);
  sm.handle(MissionEvent::GoSignal, 0.0);

  PerceptionPipeline pipeline(cfg, track, classifier.model, planarPose(0.0, 0.0, 0.0));
  LoopDetector loop(cfg.loop, 0.0, 0.0, 0.0);

  MpcController mpc(cfg.mpc, cfg.vehicle);
  PurePursuitConfig pp_cfg = cfg.pursuit;
  pp_cfg.dt = cfg.control_dt;
  const bool use_mpc = cfg.controller == "mpc";

  std::vector<Waypoint> path = straightPath(0.0, 0.0, 0.0, 20.0, cfg.waypoint_spacing);
  bool path_closed = false;
  bool have_global = false;
  double target_speed = cfg.detection_speed;

  const int scan_every = std::max(1, static_cast<int>(std::llround(cfg.lidar_period /
                                                                    cfg.control_dt)));
  const int max_ticks = static_cast<int>(cfg.max_time / cfg.control_dt);
  double est_x = 0.0, est_y = 0.0, est_heading = 0.0;
  bool braking = false;
  bool last_gps_valid = true;
  long scan_count = -1;
  double min_mid_lap_coeff = std::numeric_limits<double>::infinity();

  for (int tick = 0; tick <= max_ticks; ++tick) {
    const double t = tick * cfg.control_dt;
    result.total_time = t;

    if (tick == max_ticks && sm.state() != AsState::Finished) {
      result.failure_reason = "timeout";
      break;
    }

    // --- Perception on the lidar ticks -----------------------------------
    if (tick % scan_every == 0 && (sm.state() == AsState::Driving || braking)) {
      ++scan_count;
      const LaserScan scan =
          simulateLidar(track, truth.x, truth.y, truth.psi, cfg.lidar, lidar_rng, t);
      GpsFix fix = simulateGps(truth.x, truth.y, truth.psi, cfg.gps, gps_rng);
      if (cfg.gps_outage_start >= 0.0 && t >= cfg.gps_outage_start &&
          t < cfg.gps_outage_start + cfg.gps_outage_duration) {
        fix.valid = false;
      }
      last_gps_valid = fix.valid;

      PerceptionPipeline::ScanResult scan_res;
      try {
        scan_res = pipeline.processScan(scan, fix, truth.x, truth.y, truth.psi,
                                        sm.mode() == MissionMode::DetectionDrive);
      } catch (const LocalizationLost&) {
        result.localization_lost = true;
        result.failure_reason = "localization lost";
        sm.handle(MissionEvent::LocalizationLost, t);
        break;
      }
      est_x = scan_res.est_x;
      est_y = scan_res.est_y;
      est_heading = scan_res.est_heading;

      // While braking to the final stop the pose estimate must stay live,
      // but the mission has no more decisions to make.
      if (sm.state() == AsState::Driving) {
        const bool closure =
            loop.update(est_x, est_y, est_heading, scan_res.detections, pipeline.map());
        if (!closure && loop.armedDistance() >= cfg.loop.arming_distance &&
            std::hypot(truth.x, truth.y) > 10.0) {
          min_mid_lap_coeff = std::min(min_mid_lap_coeff, loop.lastCoefficient());
        }
        if (closure) {
          result.closure_times.push_back(t);
          result.closure_distances.push_back(std::hypot(truth.x, truth.y));
          sm.handle(MissionEvent::LapLoopDetected, t);
          if (loop.closureCount() == 1) {
            try {
              const std::vector<Vec2> mids =
                  extractMidline(pipeline.map(), pipeline.travelPath(), cfg.pair_gate);
              const Trajectory traj = buildTrajectory(mids, true);
              result.global_waypoints =
                  refinePath(sampleWaypoints(traj, cfg.waypoint_spacing), true, 24);
              path = result.global_waypoints;
              path_closed = true;
              have_global = true;
              target_speed = cfg.detection_speed * cfg.tracking_speed_factor;
            } catch (const std::exception& e) {
              result.failure_reason = std::string("midline extraction failed: ") + e.what();
              sm.handle(MissionEvent::SubsystemFailure, t);
              break;
            }
          } else if (loop.closureCount() >= 2) {
            sm.handle(MissionEvent::MissionComplete, t);
            braking = true;
          }
        } else if (sm.mode() == MissionMode::DetectionDrive && !have_global &&
                   scan_count % 5 == 0) {
          // Replanning every scan makes the path jump with each map update;
          // a 0.5 s cadence keeps it fresh without feeding jitter into the
          // controller.
          const std::vector<Vec2> chain =
              chainLocalMidpoints(pipeline.map(), {est_x, est_y}, est_heading, cfg.pair_gate,
                                  cfg.local_chain_gate, cfg.local_range);
          if (chain.size() >= 4) {
            try {
              const Trajectory traj = buildTrajectory(chain, false);
              path = refinePath(sampleWaypoints(traj, cfg.waypoint_spacing), false, 24);
              path_closed = false;
            } catch (const std::exception&) {
              // Keep the previous path on a failed fit (nearly coincident
              // midpoints right at startup can collapse the fit).
            }
          } else if (chain.size() >= 2) {
            // Too few gates for the spline (short sensing reach in arcs): a
            // refined polyline is rough guidance, so adopt it only as an
            // emergency when the current path is nearly exhausted, and only
            // when it reaches back past the vehicle so lateral error stays a
            // perpendicular distance.
            const bool path_low =
                !path_closed &&
                (path.empty() || (path.back().position - Vec2{est_x, est_y}).norm() < 6.0);
            const Vec2 rear_off = chain.front() - Vec2{est_x, est_y};
            const bool starts_behind =
                rear_off.x * std::cos(est_heading) + rear_off.y * std::sin(est_heading) < 0.0;
            const std::vector<Waypoint> poly = polylineWaypoints(chain, cfg.waypoint_spacing);
            if (path_low && starts_behind && !poly.empty() && poly.back().s > 4.0) {
              path = refinePath(poly, false, 24);
              path_closed = false;
            }
          }
        }
      }
    } else if (tick > 0) {
      // Between scan fixes the estimate dead-reckons on onboard velocity
      // sensing, so the controllers see a continuously advancing pose
      // rather than a zero-order hold of the last fix (at speed the hold
      // would trail the vehicle by a full control period).
      est_x += (truth.U * std::cos(est_heading) - truth.V * std::sin(est_heading)) *
               cfg.control_dt;
      est_y += (truth.U * std::sin(est_heading) + truth.V * std::cos(est_heading)) *
               cfg.control_dt;
      est_heading = wrapAngle(est_heading + truth.r * cfg.control_dt);
    }

    // --- Control ----------------------------------------------------------
    const PathProjection proj = projectOntoWaypoints(path, {est_x, est_y}, path_closed);
    const double e_y = proj.lateral;
    const double e_psi = wrapAngle(est_heading - proj.heading);

    VehicleState ctl_state = truth;  // onboard velocity sensing is treated as accurate
    ctl_state.x = est_x;
    ctl_state.y = est_y;
    ctl_state.psi = est_heading;
    ctl_state.e_y = e_y;
    ctl_state.e_psi = e_psi;

    ControlInput cmd;
    double u_ref_now = planSpeed(path, path_closed, proj.s, target_speed, e_y, cfg.governor);
    if (braking) {
      // Stop while still steering along the path: geometric tracking avoids
      // the open-loop drift a frozen wheel would produce mid-corner, while
      // the deceleration is commanded firmly rather than through the speed
      // servo, whose proportional law only creeps toward zero.
      const PurePursuitCommand pc =
          purePursuitStep(ctl_state, path, path_closed, 0.0, pp_cfg, cfg.vehicle);
      cmd.zeta_f = pc.zeta_f;
      cmd.j_x = std::clamp((-cfg.vehicle.a_max - truth.a_x) / cfg.control_dt,
                           -cfg.vehicle.jerk_max, cfg.vehicle.jerk_max);
      u_ref_now = 0.0;
      if (truth.U <= 0.05) {
        if (sm.state() == AsState::Finished) result.completed = true;
        break;
      }
    } else if (use_mpc) {
      std::vector<double> kappa_prev(cfg.mpc.horizon), uref_prev(cfg.mpc.horizon);
      const double u_pred = std::max(truth.U, 1.0);
      for (int k = 0; k < cfg.mpc.horizon; ++k) {
        const double s_k = proj.s + u_pred * cfg.mpc.dt * k;
        const double kap = kappaAtArc(path, path_closed, s_k);
        kappa_prev[k] = kap;
        uref_prev[k] = planSpeed(path, path_closed, s_k, target_speed, e_y, cfg.governor);
      }
      const MpcCommand mc = mpc.step(ctl_state, kappa_prev, uref_prev);
      cmd.zeta_f = mc.zeta_f;
      cmd.j_x = mc.j_x;
      if (mc.infeasible) {
        result.infeasible_stop = true;
        result.failure_reason = "predicted corridor violation";
        sm.handle(MissionEvent::SubsystemFailure, t);
        braking = true;
      }
    } else {
      const PurePursuitCommand pc =
          purePursuitStep(ctl_state, path, path_closed, u_ref_now, pp_cfg, cfg.vehicle);
      cmd.zeta_f = pc.zeta_f;
      cmd.j_x = pc.j_x;
    }

    // --- Plant ------------------------------------------------------------
    double s_true = 0.0, lat_true = 0.0;
    track.locate({truth.x, truth.y}, &s_true, &lat_true);
    truth = integrate(truth, cmd, proj.curvature, cfg.control_dt, 5, cfg.vehicle, true);
    clampActuators(&truth, cfg.vehicle);
    truth.U = std::max(truth.U, 0.0);  // the vehicle has no reverse gear

    track.locate({truth.x, truth.y}, &s_true, &lat_true);
    if (std::abs(lat_true) > cfg.track.width / 2.0 && !braking) {
      result.boundary_violation = true;
      result.failure_reason = "left the track corridor";
      sm.handle(MissionEvent::EStop, t);
      break;
    }

    StepRecord rec;
    rec.t = t;
    rec.truth = truth;
    rec.s_true = s_true;
    rec.lat_true = lat_true;
    rec.est_x = est_x;
    rec.est_y = est_y;
    rec.est_heading = est_heading;
    rec.e_y = e_y;
    rec.e_psi = e_psi;
    rec.zeta_cmd = cmd.zeta_f;
    rec.jerk_cmd = cmd.j_x;
    rec.u_ref = u_ref_now;
    rec.a_lat = truth.U * truth.r;
    rec.mode = sm.mode() == MissionMode::TrackingDrive ? 1 : 0;
    rec.closures = loop.closureCount();
    rec.gps_valid = last_gps_valid;
    result.steps.push_back(rec);
  }

  result.closures = loop.closureCount();
  result.transitions = sm.log();
  result.map_file.map = pipeline.map();
  result.map_file.start_x = 0.0;
  result.map_file.start_y = 0.0;
  result.map_file.start_heading = 0.0;
  result.map_file.closed = result.closures >= 1;
  result.map_file.laps = result.closures;
  if (!result.completed && result.failure_reason.empty()) {
    result.failure_reason = "mission did not finish";
  }
  if (std::isfinite(min_mid_lap_coeff)) {
    result.mid_lap_min_coefficient.push_back(min_mid_lap_coeff);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Metrics.

namespace {

MissionMetrics metricsImpl(const std::vector<StepRecord>& steps, bool completed,
                           double total_time, int closures, int boundary_violations) {
  MissionMetrics m;
  m.completed = completed;
  m.total_time = total_time;
  m.closures = closures;
  m.boundary_violations = boundary_violations;
  if (steps.empty()) return m;

  double lat_sum = 0.0, lat_max = 0.0, speed_sum = 0.0;
  double acc_sum = 0.0, acc_sq = 0.0, slip_sum = 0.0;
  double lat2_sum = 0.0, speed2_sum = 0.0;
  std::size_t n2 = 0;
  double lap1_end = 0.0, lap2_end = 0.0;
  for (const StepRecord& r : steps) {
    lat_sum += std::abs(r.lat_true);
    lat_max = std::max(lat_max, std::abs(r.lat_true));
    speed_sum += r.truth.U;
    acc_sum += r.a_lat;
    acc_sq += r.a_lat * r.a_lat;
    // Sideslip beta = atan(V/U); a standstill has no direction of travel,
    // so it contributes zero rather than an arbitrary angle.
    slip_sum += r.truth.U > 1e-9 ? std::atan(r.truth.V / r.truth.U) : 0.0;
    if (r.closures >= 1) {
      if (lap1_end == 0.0) lap1_end = r.t;
      lat2_sum += std::abs(r.lat_true);
      speed2_sum += r.truth.U;
      ++n2;
      if (r.closures >= 2 && lap2_end == 0.0) lap2_end = r.t;
    }
  }
  const double n = static_cast<double>(steps.size());
  m.mean_abs_lat = lat_sum / n;
  m.max_abs_lat = lat_max;
  m.mean_speed = speed_sum / n;
  const double mu = acc_sum / n;
  m.lat_acc_std = std::sqrt(std::max(0.0, acc_sq / n - mu * mu));
  m.mean_sideslip = slip_sum / n;
  if (n2 > 0) {
    m.mean_abs_lat_lap2 = lat2_sum / n2;
    m.mean_speed_lap2 = speed2_sum / n2;
  }
  m.lap1_time = lap1_end;
  m.lap2_time = lap2_end > lap1_end ? lap2_end - lap1_end : 0.0;
  return m;
}

}  // namespace

MissionMetrics computeMetrics(const MissionResult& result) {
  return metricsImpl(result.steps, result.completed, result.total_time, result.closures,
                     result.boundary_violation ? 1 : 0);
}

MissionMetrics metricsFromSteps(const std::vector<StepRecord>& steps) {
  const int closures = steps.empty() ? 0 : steps.back().closures;
  const double total = steps.empty() ? 0.0 : steps.back().t;
  return metricsImpl(steps, closures >= 2, total, closures, 0);
}

std::vector<std::pair<std::string, std::string>> metricsRows(const MissionMetrics& m) {
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("completed", m.completed ? "1" : "0");
  rows.emplace_back("total_time", fmtFixed(m.total_time));
  rows.emplace_back("lap1_time", fmtFixed(m.lap1_time));
  rows.emplace_back("lap2_time", fmtFixed(m.lap2_time));
  rows.emplace_back("mean_abs_lat", fmtFixed(m.mean_abs_lat));
  rows.emplace_back("max_abs_lat", fmtFixed(m.max_abs_lat));
  rows.emplace_back("mean_speed", fmtFixed(m.mean_speed));
  rows.emplace_back("lat_acc_std", fmtFixed(m.lat_acc_std));
  rows.emplace_back("mean_sideslip", fmtFixed(m.mean_sideslip));
  rows.emplace_back("mean_abs_lat_lap2", fmtFixed(m.mean_abs_lat_lap2));
  rows.emplace_back("mean_speed_lap2", fmtFixed(m.mean_speed_lap2));
  rows.emplace_back("closures", std::to_string(m.closures));
  rows.emplace_back("boundary_violations", std::to_string(m.boundary_violations));
  return rows;
}

// ---------------------------------------------------------------------------
// Steps file.

void saveSteps(const std::string& path, const std::vector<StepRecord>& steps) {
  std::ofstream f(path);
  if (!f) throw IoError("saveSteps: cannot open " + path);
  f << "# racer-steps v1\n";
  f << "t,x,y,psi,U,V,r,delta_f,a_x,s_true,lat_true,est_x,est_y,est_heading,e_y,e_psi,"
       "zeta_cmd,jerk_cmd,u_ref,a_lat,mode,closures,gps\n";
  char buf[640];
  for (const StepRecord& r : steps) {
    std::snprintf(buf, sizeof(buf),
                  "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,"
                  "%.6f,%.6f,%.6f,%.6f,%.6f,%d,%d,%d\n",
                  r.t, r.truth.x, r.truth.y, r.truth.psi, r.truth.U, r.truth.V, r.truth.r,
                  r.truth.delta_f, r.truth.a_x, r.s_true, r.lat_true, r.est_x, r.est_y,
                  r.est_heading, r.e_y, r.e_psi, r.zeta_cmd, r.jerk_cmd, r.u_ref, r.a_lat,
                  r.mode, r.closures, r.gps_valid ? 1 : 0);
    f << buf;
  }
  if (!f) throw IoError("saveSteps: write failed for " + path);
}

std::vector<StepRecord> loadSteps(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("loadSteps: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != "# racer-steps v1") {
    throw IoError("loadSteps: missing format header in " + path);
  }
  if (!std::getline(f, line)) throw IoError("loadSteps: missing column header in " + path);
  std::vector<StepRecord> steps;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    StepRecord r;
    int mode = 0, closures = 0, gps = 0;
    const int got = std::sscanf(
        line.c_str(),
        "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%d,%d,"
        "%d",
        &r.t, &r.truth.x, &r.truth.y, &r.truth.psi, &r.truth.U, &r.truth.V, &r.truth.r,
        &r.truth.delta_f, &r.truth.a_x, &r.s_true, &r.lat_true, &r.est_x, &r.est_y,
        &r.est_heading, &r.e_y, &r.e_psi, &r.zeta_cmd, &r.jerk_cmd, &r.u_ref, &r.a_lat, &mode,
        &closures, &gps);
    if (got != 23) throw IoError("loadSteps: malformed row in " + path);
    r.mode = mode;
    r.closures = closures;
    r.gps_valid = gps != 0;
    steps.push_back(r);
  }
  return steps;
}

}  // namespace racer::harness
