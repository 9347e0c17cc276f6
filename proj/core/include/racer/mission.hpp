#pragma once

#include <string>
#include <vector>

namespace racer {

// Autonomous-system supervisory states and the events that move between
// them.  The transition function is total: every (state, event) pair maps to
// a state, with unhandled combinations staying put.
enum class AsState { Off, Ready, Driving, Emergency, Finished };

enum class MissionEvent {
  AsmsOn,
  SystemChecksPassed,
  GoSignal,
  EStop,
  SubsystemFailure,
  LocalizationLost,
  LapLoopDetected,
  MissionComplete,
  Reset,
};

// First lap maps the track; after the first loop closure the vehicle tracks
// the planned midline.  The mode latches until a full reset.
enum class MissionMode { DetectionDrive, TrackingDrive };

const char* toString(AsState s);
const char* toString(MissionEvent e);
const char* toString(MissionMode m);

constexpr int kAsStateCount = 5;
constexpr int kMissionEventCount = 9;

// Pure transition function (the complete supervisory table).
AsState missionTransition(AsState state, MissionEvent event);

struct MissionTransitionRecord {
  double timestamp = 0.0;
  AsState from = AsState::Off;
  MissionEvent event = MissionEvent::AsmsOn;
  AsState to = AsState::Off;
};

class MissionStateMachine {
 public:
  MissionStateMachine() = default;

  // Apply one event, record it, and return the resulting state.
  AsState handle(MissionEvent event, double timestamp);

  AsState state() const { return state_; }
  MissionMode mode() const { return mode_; }
  const std::vector<MissionTransitionRecord>& log() const { return log_; }

 private:
  AsState state_ = AsState::Off;
  MissionMode mode_ = MissionMode::DetectionDrive;
  std::vector<MissionTransitionRecord> log_;
};

void saveTransitionLog(const std::string& path,
                       const std::vector<MissionTransitionRecord>& log);

}  // namespace racer
