// Command-line front end: track generation, closed-loop mission runs,
// single-scan perception demos, controller comparison, and metric
// recomputation from recorded step files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "harness/classifier.hpp"
#include "harness/config.hpp"
#include "harness/mission_runner.hpp"
#include "harness/pipeline.hpp"
#include "harness/report.hpp"
#include "racer/errors.hpp"
#include "racer/geometry.hpp"
#include "racer/mission.hpp"
#include "racer/planning.hpp"
#include "racer/scan.hpp"
#include "racer/sim.hpp"
#include "racer/track_map.hpp"

namespace {

using namespace racer;
using namespace racer::harness;

constexpr int kExitOk = 0;
constexpr int kExitIncomplete = 2;
constexpr int kExitBadConfig = 3;

struct CommonOpts {
  std::uint64_t seed = 1;
  std::string config_path;
  std::vector<std::string> overrides;
};

void addCommonOptions(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--seed", opts->seed, "Master random seed");
  cmd->add_option("--config", opts->config_path, "Config file to start from");
  cmd->add_option("-P,--param", opts->overrides,
                  "Override one config key, e.g. -P mpc.horizon=20 (repeatable)");
}

RunConfig resolveConfig(const CLI::App* cmd, const CommonOpts& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) cfg = loadRunConfig(opts.config_path);
  if (cmd->count("--seed") > 0) cfg.seed = opts.seed;
  for (const std::string& expr : opts.overrides) applyOverrideExpr(&cfg, expr);
  return cfg;
}

void writeMissionOutputs(const std::string& dir, const RunConfig& cfg,
                         const MissionResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);

  saveSteps((base / "steps.csv").string(), result.steps);
  saveTransitionLog((base / "transitions.txt").string(), result.transitions);
  saveTrackMap((base / "map.txt").string(), result.map_file);
  if (!result.global_waypoints.empty()) {
    saveWaypoints((base / "waypoints.txt").string(), result.global_waypoints);
  }
  saveRunConfig((base / "config.txt").string(), cfg);

  const MissionMetrics metrics = computeMetrics(result);
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("controller", cfg.controller);
  rows.emplace_back("seed", std::to_string(cfg.seed));
  for (auto& row : metricsRows(metrics)) rows.push_back(std::move(row));
  rows.emplace_back("classifier_train_accuracy", fmtFixed(result.classifier_train_accuracy));
  for (std::size_t i = 0; i < result.closure_times.size(); ++i) {
    rows.emplace_back("closure_time_" + std::to_string(i + 1),
                      fmtFixed(result.closure_times[i]));
    rows.emplace_back("closure_distance_" + std::to_string(i + 1),
                      fmtFixed(result.closure_distances[i]));
  }
  if (!result.failure_reason.empty()) rows.emplace_back("failure", result.failure_reason);
  writeReport((base / "report.txt").string(), rows);
}

void printMissionSummary(const RunConfig& cfg, const MissionResult& result) {
  const MissionMetrics m = computeMetrics(result);
  std::printf("controller=%s seed=%llu %s\n", cfg.controller.c_str(),
              static_cast<unsigned long long>(cfg.seed),
              result.completed ? "completed" : ("FAILED: " + result.failure_reason).c_str());
  std::printf("  total_time=%s lap1=%s lap2=%s closures=%d\n", fmtFixed(m.total_time).c_str(),
              fmtFixed(m.lap1_time).c_str(), fmtFixed(m.lap2_time).c_str(), m.closures);
  std::printf("  mean_abs_lat=%s max_abs_lat=%s mean_speed=%s lat_acc_std=%s\n",
              fmtFixed(m.mean_abs_lat).c_str(), fmtFixed(m.max_abs_lat).c_str(),
              fmtFixed(m.mean_speed).c_str(), fmtFixed(m.lat_acc_std).c_str());
}

int cmdGenerateTrack(const CLI::App* cmd, const CommonOpts& opts, const std::string& out_path) {
  const RunConfig cfg = resolveConfig(cmd, opts);
  const SimTrack track(cfg.track);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw IoError("generate-track: cannot open " + out_path);
    out = &file;
  }
  *out << "# racer-track v1\n";
  *out << "perimeter " << fmtFixed(track.perimeter()) << "\n";
  *out << "cones " << track.cones().size() << "\n";
  for (const TrackCone& cone : track.cones()) {
    *out << fmtFixed(cone.position.x) << " " << fmtFixed(cone.position.y) << " "
         << toString(cone.color) << "\n";
  }
  if (!out_path.empty()) {
    std::printf("wrote %zu cones (perimeter %s m) to %s\n", track.cones().size(),
                fmtFixed(track.perimeter()).c_str(), out_path.c_str());
  }
  return kExitOk;
}

int cmdRunMission(const CLI::App* cmd, const CommonOpts& opts, const std::string& controller,
                  const std::string& out_dir) {
  RunConfig cfg = resolveConfig(cmd, opts);
  if (!controller.empty()) applyOverride(&cfg, "controller", controller);

  const MissionResult result = runTwoLapMission(cfg);
  if (!out_dir.empty()) writeMissionOutputs(out_dir, cfg, result);
  printMissionSummary(cfg, result);
  return result.completed ? kExitOk : kExitIncomplete;
}

int cmdRunPerception(const CLI::App* cmd, const CommonOpts& opts, double arc_pos,
                     const std::string& out_dir) {
  const RunConfig cfg = resolveConfig(cmd, opts);
  const SimTrack track(cfg.track);

  const ClassifierBundle classifier = trainConeClassifier(
      cfg.camera, cfg.svm_positives, cfg.svm_negatives, cfg.svm_epochs, subSeed(cfg.seed, 4));

  Vec2 pos;
  double heading = 0.0, kappa = 0.0;
  track.centerline(arc_pos, &pos, &heading, &kappa);
  const PoseTransform initial = planarPose(pos.x, pos.y, heading);

  PerceptionPipeline pipeline(cfg, track, classifier.model, initial);
  Rng lidar_rng(subSeed(cfg.seed, 1));
  Rng gps_rng(subSeed(cfg.seed, 2));

  PerceptionPipeline::ScanResult res;
  LaserScan last_scan;
  for (int i = 0; i < cfg.accumulate_scans; ++i) {
    last_scan = simulateLidar(track, pos.x, pos.y, heading, cfg.lidar, lidar_rng,
                              i * cfg.lidar_period);
    const GpsFix fix = simulateGps(pos.x, pos.y, heading, cfg.gps, gps_rng);
    res = pipeline.processScan(last_scan, fix, pos.x, pos.y, heading, true);
  }

  std::printf("classifier train accuracy: %s\n",
              fmtFixed(classifier.train_accuracy).c_str());
  std::printf("pose truth=(%s, %s, %s) estimate=(%s, %s, %s)\n", fmtFixed(pos.x).c_str(),
              fmtFixed(pos.y).c_str(), fmtFixed(heading).c_str(), fmtFixed(res.est_x).c_str(),
              fmtFixed(res.est_y).c_str(), fmtFixed(res.est_heading).c_str());
  std::printf("last scan: %d candidates, %zu verified cones, %d inserted into map\n",
              res.candidates, res.detections.size(), res.inserted);
  for (const auto& [world, color] : res.colored_detections) {
    std::printf("  cone %-7s at (%s, %s)\n", toString(color),
                fmtFixed(world.x).c_str(), fmtFixed(world.y).c_str());
  }

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path base(out_dir);
    saveScan((base / "scan.txt").string(), last_scan);

    Rng patch_rng(subSeed(cfg.seed, 9));
    savePatch((base / "patch_red.txt").string(),
              renderConePatch(ConeColor::Red, 6.0, cfg.camera, patch_rng));
    savePatch((base / "patch_yellow.txt").string(),
              renderConePatch(ConeColor::Yellow, 6.0, cfg.camera, patch_rng));
    savePatch((base / "patch_blue.txt").string(),
              renderConePatch(ConeColor::Blue, 6.0, cfg.camera, patch_rng));
    savePatch((base / "patch_background.txt").string(),
              renderNegativePatch(cfg.camera, patch_rng));

    std::vector<std::pair<std::string, std::string>> rows;
    rows.emplace_back("seed", std::to_string(cfg.seed));
    rows.emplace_back("arc_pos", fmtFixed(arc_pos));
    rows.emplace_back("classifier_train_accuracy", fmtFixed(classifier.train_accuracy));
    rows.emplace_back("candidates", std::to_string(res.candidates));
    rows.emplace_back("verified", std::to_string(res.detections.size()));
    rows.emplace_back("inserted", std::to_string(res.inserted));
    rows.emplace_back("est_x", fmtFixed(res.est_x));
    rows.emplace_back("est_y", fmtFixed(res.est_y));
    rows.emplace_back("est_heading", fmtFixed(res.est_heading));
    writeReport((base / "report.txt").string(), rows);
    std::printf("outputs written to %s\n", out_dir.c_str());
  }
  return kExitOk;
}

int cmdCompareControllers(const CLI::App* cmd, const CommonOpts& opts,
                          const std::string& out_dir) {
  RunConfig cfg = resolveConfig(cmd, opts);

  applyOverride(&cfg, "controller", "mpc");
  const MissionResult mpc_result = runTwoLapMission(cfg);
  printMissionSummary(cfg, mpc_result);

  applyOverride(&cfg, "controller", "pure_pursuit");
  const MissionResult pp_result = runTwoLapMission(cfg);
  printMissionSummary(cfg, pp_result);

  const MissionMetrics mpc_m = computeMetrics(mpc_result);
  const MissionMetrics pp_m = computeMetrics(pp_result);

  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("seed", std::to_string(cfg.seed));
  for (const auto& [mode, m] : {std::pair<std::string, const MissionMetrics&>("mpc", mpc_m),
                                {"pure_pursuit", pp_m}}) {
    for (const auto& [key, value] : metricsRows(m)) rows.emplace_back(mode + "." + key, value);
  }
  if (pp_m.mean_abs_lat > 0.0) {
    rows.emplace_back("lat_error_ratio", fmtFixed(mpc_m.mean_abs_lat / pp_m.mean_abs_lat));
  }
  rows.emplace_back("speed_delta", fmtFixed(mpc_m.mean_speed - pp_m.mean_speed));
  rows.emplace_back("lat_acc_std_delta", fmtFixed(mpc_m.lat_acc_std - pp_m.lat_acc_std));

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    writeReport((fs::path(out_dir) / "comparison.txt").string(), rows);
  }
  std::printf("lat_error_ratio=%s speed_delta=%s lat_acc_std_delta=%s\n",
              pp_m.mean_abs_lat > 0.0 ? fmtFixed(mpc_m.mean_abs_lat / pp_m.mean_abs_lat).c_str()
                                      : "n/a",
              fmtFixed(mpc_m.mean_speed - pp_m.mean_speed).c_str(),
              fmtFixed(mpc_m.lat_acc_std - pp_m.lat_acc_std).c_str());
  return (mpc_result.completed && pp_result.completed) ? kExitOk : kExitIncomplete;
}

int cmdComputeMetrics(const std::string& steps_path, const std::string& out_path) {
  const std::vector<StepRecord> steps = loadSteps(steps_path);
  const MissionMetrics m = metricsFromSteps(steps);
  const auto rows = metricsRows(m);
  for (const auto& [key, value] : rows) std::printf("%s=%s\n", key.c_str(), value.c_str());
  if (!out_path.empty()) writeReport(out_path, rows);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cone-track autonomy stack: simulation, perception, mapping, and control"};
  app.require_subcommand(1);

  CommonOpts gen_opts;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("generate-track", "Emit the cone layout of a track");
  addCommonOptions(gen, &gen_opts);
  gen->add_option("--out", gen_out, "Output file (stdout when omitted)");

  CommonOpts run_opts;
  std::string run_controller, run_out;
  CLI::App* run = app.add_subcommand("run-mission", "Run a full two-lap mission");
  addCommonOptions(run, &run_opts);
  run->add_option("--controller", run_controller, "mpc or pure_pursuit");
  run->add_option("--out", run_out, "Directory for steps/report/map/waypoint files");

  CommonOpts perc_opts;
  double perc_arc = 0.0;
  std::string perc_out;
  CLI::App* perc = app.add_subcommand("run-perception", "Single-pose perception demo");
  addCommonOptions(perc, &perc_opts);
  perc->add_option("--arc-pos", perc_arc, "Vehicle position along the centerline (m)");
  perc->add_option("--out", perc_out, "Directory for scan/patch/report files");

  CommonOpts cmp_opts;
  std::string cmp_out;
  CLI::App* cmp = app.add_subcommand("compare-controllers",
                                     "Run both controllers on the same seed and compare");
  addCommonOptions(cmp, &cmp_opts);
  cmp->add_option("--out", cmp_out, "Directory for the comparison report");

  std::string met_steps, met_out;
  CLI::App* met = app.add_subcommand("compute-metrics", "Recompute metrics from a steps file");
  met->add_option("--steps", met_steps, "steps.csv produced by run-mission")->required();
  met->add_option("--out", met_out, "Optional report file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmdGenerateTrack(gen, gen_opts, gen_out);
    if (run->parsed()) return cmdRunMission(run, run_opts, run_controller, run_out);
    if (perc->parsed()) return cmdRunPerception(perc, perc_opts, perc_arc, perc_out);
    if (cmp->parsed()) return cmdCompareControllers(cmp, cmp_opts, cmp_out);
    if (met->parsed()) return cmdComputeMetrics(met_steps, met_out);
  } catch (const racer::InvalidInput& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return kExitBadConfig;
  } catch (const racer::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
