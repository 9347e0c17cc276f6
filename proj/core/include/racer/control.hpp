#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

#include "racer/geometry.hpp"
#include "racer/planning.hpp"

namespace racer {

// Planar single-track (bicycle) model with linear tires, optional friction
// saturation, steering-rate and longitudinal-jerk inputs, and curvilinear
// tracking-error states carried along for prediction.
//
// State fields:
//   x, y, psi     world pose (planar frame, heading counterclockwise)
//   U, V          body-frame longitudinal / lateral velocity
//   r             yaw rate
//   delta_f       front steering angle (an actuator state; input is its rate)
//   a_x           longitudinal acceleration (input is its jerk)
//   e_y, e_psi    lateral and heading error relative to a reference path
struct VehicleState {
  double x = 0.0, y = 0.0, psi = 0.0;
  double U = 0.0, V = 0.0, r = 0.0;
  double delta_f = 0.0;
  double a_x = 0.0;
  double e_y = 0.0, e_psi = 0.0;

  std::array<double, 10> toArray() const;
  static VehicleState fromArray(const std::array<double, 10>& a);
};

struct ControlInput {
  double zeta_f = 0.0;  // steering rate
  double j_x = 0.0;     // longitudinal jerk
};

struct VehicleParams {
  double mass = 300.0;
  double inertia_z = 150.0;
  double l_f = 0.8;
  double l_r = 0.8;
  double c_f = 30000.0;  // front cornering stiffness
  double c_r = 30000.0;  // rear cornering stiffness
  double mu = 1.5;       // tire friction coefficient (saturation cap)
  double gravity = 9.81;
  double u_min = 0.5;        // low-speed regularization for slip-angle denominators
  double delta_max = 0.45;   // steering angle limit
  double zeta_max = 1.2;     // steering rate limit
  double a_max = 6.0;        // longitudinal acceleration limit
  double jerk_max = 40.0;    // longitudinal jerk limit

  double wheelbase() const { return l_f + l_r; }
};

// Time derivative of the state under the model.  kappa_ref is the reference
// path curvature used by the error-state dynamics.  With friction_limit the
// axle lateral forces saturate at mu times the static axle load.
VehicleState stateDerivative(const VehicleState& s, const ControlInput& u, double kappa_ref,
                             const VehicleParams& p, bool friction_limit = true);

// One classical fourth-order Runge-Kutta step of the model above.
VehicleState rk4Step(const VehicleState& s, const ControlInput& u, double kappa_ref, double dt,
                     const VehicleParams& p, bool friction_limit = true);

// Integrate over dt in `substeps` equal RK4 steps.
VehicleState integrate(const VehicleState& s, const ControlInput& u, double kappa_ref, double dt,
                       int substeps, const VehicleParams& p, bool friction_limit = true);

// Clamp the actuator states (steering angle, longitudinal acceleration) to
// their physical limits; the plant applies this after each integration step.
void clampActuators(VehicleState* s, const VehicleParams& p);

// Analytic Jacobian of stateDerivative with respect to the state (A, 10x10)
// and the input (B, 10x2), valid away from the friction-saturation and
// low-speed clamp boundaries where the model is smooth.
void dynamicsJacobian(const VehicleState& s, const ControlInput& u, double kappa_ref,
                      const VehicleParams& p, bool friction_limit,
                      Eigen::Matrix<double, 10, 10>* a, Eigen::Matrix<double, 10, 2>* b);

// ---------------------------------------------------------------------------
// Model-predictive tracking controller.
//
// Decision variables are the steering-rate and jerk sequences over the
// horizon.  The predictor is the lateral-error model frozen at the current
// speed, rolled out with forward Euler; the cost penalizes steering motion,
// tracking errors, corridor overruns, and speed error.  A projected-gradient
// method with backtracking line search solves the box-constrained problem;
// the zero sequence is always evaluated first so an already-perfect state
// yields exactly zero commands.

struct MpcConfig {
  int horizon = 20;
  double dt = 0.05;
  double w_steer_rate = 8.0;   // on per-step steering angle change
  double w_e_psi = 4.0;
  double w_e_y = 6.0;
  double w_shoulder = 60.0;    // quadratic penalty outside the corridor
  double corridor = 1.2;       // soft half-width on lateral error
  double w_speed = 0.5;
  double slack_bound = 0.6;    // predicted overrun beyond which we declare infeasible
  int max_iters = 200;
  bool extra_starts = true;    // also seed from constant-input corners
};

struct MpcCommand {
  double zeta_f = 0.0;
  double j_x = 0.0;
  double cost = 0.0;
  bool infeasible = false;
  int iterations = 0;
};

// Rollout cost of an input sequence z = (zeta_0, j_0, zeta_1, j_1, ...); the
// optimizer and any external cross-check share this exact function.
double mpcRolloutCost(const MpcConfig& cfg, const VehicleParams& p, const VehicleState& state,
                      const std::vector<double>& kappa_preview,
                      const std::vector<double>& u_ref_preview, const std::vector<double>& z);

class MpcController {
 public:
  MpcController(const MpcConfig& cfg, const VehicleParams& params);

  // kappa_preview / u_ref_preview give the reference curvature and speed at
  // each horizon step (length >= horizon; the last value is reused if short,
  // but they must not be empty).  Tracking errors are read from the state.
  MpcCommand step(const VehicleState& state, const std::vector<double>& kappa_preview,
                  const std::vector<double>& u_ref_preview);

  void reset();
  const MpcConfig& config() const { return cfg_; }

 private:
  MpcConfig cfg_;
  VehicleParams params_;
  std::vector<double> prev_z_;
  bool has_prev_ = false;
};

// ---------------------------------------------------------------------------
// Pure-pursuit baseline with the same actuator interface (steering rate and
// jerk) and the same longitudinal law.

struct PurePursuitConfig {
  double lookahead_gain = 0.8;
  double min_lookahead = 2.5;
  double max_lookahead = 6.0;
  double dt = 0.05;
  double kp_speed = 1.5;
};

struct PurePursuitCommand {
  double zeta_f = 0.0;
  double j_x = 0.0;
  double delta_target = 0.0;
  double lookahead = 0.0;
};

PurePursuitCommand purePursuitStep(const VehicleState& state,
                                   const std::vector<Waypoint>& waypoints, bool closed,
                                   double u_ref, const PurePursuitConfig& cfg,
                                   const VehicleParams& params);

// Jerk-limited longitudinal law shared by both controllers: a proportional
// acceleration request toward u_ref, rate-limited into a jerk command.
double longitudinalJerk(const VehicleState& state, double u_ref, double kp, double dt,
                        const VehicleParams& params);

// Speed governor shared by both controllers: scales the waypoint speed down
// with lateral error and caps it by the lateral-acceleration limit for the
// local curvature.
struct SpeedGovernorConfig {
  double a_lat_max = 4.0;
  double error_gain = 0.4;
  double min_factor = 0.3;
  double corridor = 1.2;
};

double governSpeed(double v_ref, double e_y, double kappa, const SpeedGovernorConfig& cfg);

}  // namespace racer
