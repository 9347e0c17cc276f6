#include "racer/mission.hpp"

#include <cstdio>
#include <fstream>

#include "racer/errors.hpp"

namespace racer {

const char* toString(AsState s) {
  switch (s) {
    case AsState::Off: return "off";
    case AsState::Ready: return "ready";
    case AsState::Driving: return "driving";
    case AsState::Emergency: return "emergency";
    case AsState::Finished: return "finished";
  }
  return "?";
}

const char* toString(MissionEvent e) {
  switch (e) {
    case MissionEvent::AsmsOn: return "asms_on";
    case MissionEvent::SystemChecksPassed: return "system_checks_passed";
    case MissionEvent::GoSignal: return "go_signal";
    case MissionEvent::EStop: return "e_stop";
    case MissionEvent::SubsystemFailure: return "subsystem_failure";
    case MissionEvent::LocalizationLost: return "localization_lost";
    case MissionEvent::LapLoopDetected: return "lap_loop_detected";
    case MissionEvent::MissionComplete: return "mission_complete";
    case MissionEvent::Reset: return "reset";
  }
  return "?";
}

const char* toString(MissionMode m) {
  return m == MissionMode::DetectionDrive ? "detection_drive" : "tracking_drive";
}

AsState missionTransition(AsState state, MissionEvent event) {
  // Safety first: an emergency stop or a subsystem failure forces Emergency
  // from every state in which the system is powered.
  if (event == MissionEvent::EStop || event == MissionEvent::SubsystemFailure) {
    return state == AsState::Off ? AsState::Off : AsState::Emergency;
  }
  switch (state) {
    case AsState::Off:
      if (event == MissionEvent::SystemChecksPassed) return AsState::Ready;
      return AsState::Off;  // AsmsOn and everything else hold Off
    case AsState::Ready:
      if (event == MissionEvent::GoSignal) return AsState::Driving;
      return AsState::Ready;
    case AsState::Driving:
      if (event == MissionEvent::MissionComplete) return AsState::Finished;
      if (event == MissionEvent::LocalizationLost) return AsState::Emergency;
      return AsState::Driving;
    case AsState::Emergency:
      if (event == MissionEvent::Reset) return AsState::Off;
      return AsState::Emergency;
    case AsState::Finished:
      return AsState::Finished;
  }
  return state;
}

AsState MissionStateMachine::handle(MissionEvent event, double timestamp) {
  const AsState before = state_;
  state_ = missionTransition(before, event);
  if (state_ == AsState::Driving && event == MissionEvent::LapLoopDetected) {
    mode_ = MissionMode::TrackingDrive;
  }
  if (event == MissionEvent::Reset) {
    mode_ = MissionMode::DetectionDrive;
  }
  log_.push_back({timestamp, before, event, state_});
  return state_;
}

void saveTransitionLog(const std::string& path,
                       const std::vector<MissionTransitionRecord>& log) {
  std::ofstream f(path);
  if (!f) throw IoError("saveTransitionLog: cannot open " + path);
  f << "# racer-transitions v1\n";
  char buf[160];
  for (const MissionTransitionRecord& r : log) {
    std::snprintf(buf, sizeof(buf), "%.3f %s %s %s\n", r.timestamp, toString(r.from),
                  toString(r.event), toString(r.to));
    f << buf;
  }
  if (!f) throw IoError("saveTransitionLog: write failed for " + path);
}

}  // namespace racer
