#include "racer/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "racer/errors.hpp"

namespace racer {

std::array<double, 10> VehicleState::toArray() const {
  return {x, y, psi, U, V, r, delta_f, a_x, e_y, e_psi};
}

VehicleState VehicleState::fromArray(const std::array<double, 10>& a) {
  VehicleState s;
  s.x = a[0];
  s.y = a[1];
  s.psi = a[2];
  s.U = a[3];
  s.V = a[4];
  s.r = a[5];
  s.delta_f = a[6];
  s.a_x = a[7];
  s.e_y = a[8];
  s.e_psi = a[9];
  return s;
}

namespace {

struct AxleForces {
  double fyf = 0.0, fyr = 0.0;
  bool front_saturated = false, rear_saturated = false;
  double alpha_f = 0.0, alpha_r = 0.0;
  double u_den = 0.0;
  bool u_clamped = false;
};

AxleForces tireForces(const VehicleState& s, const VehicleParams& p, bool friction_limit) {
  AxleForces f;
  f.u_clamped = s.U < p.u_min;
  f.u_den = f.u_clamped ? p.u_min : s.U;
  f.alpha_f = (s.V + p.l_f * s.r) / f.u_den - s.delta_f;
  f.alpha_r = (s.V - p.l_r * s.r) / f.u_den;
  f.fyf = -p.c_f * f.alpha_f;
  f.fyr = -p.c_r * f.alpha_r;
  if (friction_limit) {
    const double l = p.wheelbase();
    const double fzf = p.mass * p.gravity * p.l_r / l;
    const double fzr = p.mass * p.gravity * p.l_f / l;
    const double fmax_f = p.mu * fzf;
    const double fmax_r = p.mu * fzr;
    if (std::abs(f.fyf) > fmax_f) {
      f.fyf = f.fyf > 0.0 ? fmax_f : -fmax_f;
      f.front_saturated = true;
    }
    if (std::abs(f.fyr) > fmax_r) {
      f.fyr = f.fyr > 0.0 ? fmax_r : -fmax_r;
      f.rear_saturated = true;
    }
  }
  return f;
}

}  // namespace

VehicleState stateDerivative(const VehicleState& s, const ControlInput& u, double kappa_ref,
                             const VehicleParams& p, bool friction_limit) {
  const AxleForces f = tireForces(s, p, friction_limit);
  const double cd = std::cos(s.delta_f);
  VehicleState d;
  d.x = s.U * std::cos(s.psi) - s.V * std::sin(s.psi);
  d.y = s.U * std::sin(s.psi) + s.V * std::cos(s.psi);
  d.psi = s.r;
  d.U = s.a_x;
  d.V = (f.fyf * cd + f.fyr) / p.mass - s.U * s.r;
  d.r = (p.l_f * f.fyf * cd - p.l_r * f.fyr) / p.inertia_z;
  d.delta_f = u.zeta_f;
  d.a_x = u.j_x;
  d.e_y = s.U * s.e_psi + s.V;
  d.e_psi = s.r - s.U * kappa_ref;
  return d;
}

VehicleState rk4Step(const VehicleState& s, const ControlInput& u, double kappa_ref, double dt,
                     const VehicleParams& p, bool friction_limit) {
  auto axpy = [](const std::array<double, 10>& base, const std::array<double, 10>& d,
                 double h) {
    std::array<double, 10> out;
    for (int i = 0; i < 10; ++i) out[i] = base[i] + h * d[i];
    return out;
  };
  const std::array<double, 10> x0 = s.toArray();
  const std::array<double, 10> k1 = stateDerivative(s, u, kappa_ref, p, friction_limit).toArray();
  const std::array<double, 10> k2 =
      stateDerivative(VehicleState::fromArray(axpy(x0, k1, dt / 2)), u, kappa_ref, p,
                      friction_limit)
          .toArray();
  const std::array<double, 10> k3 =
      stateDerivative(VehicleState::fromArray(axpy(x0, k2, dt / 2)), u, kappa_ref, p,
                      friction_limit)
          .toArray();
  const std::array<double, 10> k4 =
      stateDerivative(VehicleState::fromArray(axpy(x0, k3, dt)), u, kappa_ref, p, friction_limit)
          .toArray();
  std::array<double, 10> out;
  for (int i = 0; i < 10; ++i) {
    out[i] = x0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return VehicleState::fromArray(out);
}

VehicleState integrate(const VehicleState& s, const ControlInput& u, double kappa_ref, double dt,
                       int substeps, const VehicleParams& p, bool friction_limit) {
  if (substeps < 1) throw InvalidInput("integrate: substeps must be at least 1");
  VehicleState cur = s;
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) cur = rk4Step(cur, u, kappa_ref, h, p, friction_limit);
  return cur;
}

void clampActuators(VehicleState* s, const VehicleParams& p) {
  s->delta_f = std::clamp(s->delta_f, -p.delta_max, p.delta_max);
  s->a_x = std::clamp(s->a_x, -p.a_max, p.a_max);
}

void dynamicsJacobian(const VehicleState& s, const ControlInput& u, double kappa_ref,
                      const VehicleParams& p, bool friction_limit,
                      Eigen::Matrix<double, 10, 10>* a, Eigen::Matrix<double, 10, 2>* b) {
  (void)u;
  const AxleForces f = tireForces(s, p, friction_limit);
  const double cd = std::cos(s.delta_f);
  const double sd = std::sin(s.delta_f);
  const double cpsi = std::cos(s.psi), spsi = std::sin(s.psi);

  // Slip-angle partials; zero where the corresponding clamp is active.
  const double dden = f.u_clamped ? 0.0 : 1.0;
  const double daf_dV = 1.0 / f.u_den;
  const double daf_dr = p.l_f / f.u_den;
  const double daf_dU = dden * -(s.V + p.l_f * s.r) / (f.u_den * f.u_den);
  const double daf_dd = -1.0;
  const double dar_dV = 1.0 / f.u_den;
  const double dar_dr = -p.l_r / f.u_den;
  const double dar_dU = dden * -(s.V - p.l_r * s.r) / (f.u_den * f.u_den);

  const double kf = f.front_saturated ? 0.0 : -p.c_f;
  const double kr = f.rear_saturated ? 0.0 : -p.c_r;

  Eigen::Matrix<double, 10, 10>& A = *a;
  Eigen::Matrix<double, 10, 2>& B = *b;
  A.setZero();
  B.setZero();

  // Row order matches VehicleState::toArray:
  // 0 x, 1 y, 2 psi, 3 U, 4 V, 5 r, 6 delta_f, 7 a_x, 8 e_y, 9 e_psi.
  A(0, 2) = -s.U * spsi - s.V * cpsi;
  A(0, 3) = cpsi;
  A(0, 4) = -spsi;
  A(1, 2) = s.U * cpsi - s.V * spsi;
  A(1, 3) = spsi;
  A(1, 4) = cpsi;
  A(2, 5) = 1.0;
  A(3, 7) = 1.0;

  A(4, 3) = (cd * kf * daf_dU + kr * dar_dU) / p.mass - s.r;
  A(4, 4) = (cd * kf * daf_dV + kr * dar_dV) / p.mass;
  A(4, 5) = (cd * kf * daf_dr + kr * dar_dr) / p.mass - s.U;
  A(4, 6) = (cd * kf * daf_dd - f.fyf * sd) / p.mass;

  A(5, 3) = (p.l_f * cd * kf * daf_dU - p.l_r * kr * dar_dU) / p.inertia_z;
  A(5, 4) = (p.l_f * cd * kf * daf_dV - p.l_r * kr * dar_dV) / p.inertia_z;
  A(5, 5) = (p.l_f * cd * kf * daf_dr - p.l_r * kr * dar_dr) / p.inertia_z;
  A(5, 6) = (p.l_f * (cd * kf * daf_dd - f.fyf * sd)) / p.inertia_z;

  A(8, 3) = s.e_psi;
  A(8, 4) = 1.0;
  A(8, 9) = s.U;
  A(9, 3) = -kappa_ref;
  A(9, 5) = 1.0;

  B(6, 0) = 1.0;
  B(7, 1) = 1.0;
}

// ---------------------------------------------------------------------------
// MPC internals.

namespace {

struct RolloutResult {
  double cost = 0.0;
  double max_overrun = 0.0;
};

struct PredictorCoeffs {
  double a11, a12, b1;
  double a21, a22, b2;
  double u_bar;
};

PredictorCoeffs predictorCoeffs(const VehicleParams& p, double u_meas) {
  PredictorCoeffs c{};
  c.u_bar = std::max(u_meas, p.u_min);
  c.a11 = -(p.c_f + p.c_r) / (p.mass * c.u_bar);
  c.a12 = -c.u_bar - (p.c_f * p.l_f - p.c_r * p.l_r) / (p.mass * c.u_bar);
  c.b1 = p.c_f / p.mass;
  c.a21 = -(p.c_f * p.l_f - p.c_r * p.l_r) / (p.inertia_z * c.u_bar);
  c.a22 = -(p.c_f * p.l_f * p.l_f + p.c_r * p.l_r * p.l_r) / (p.inertia_z * c.u_bar);
  c.b2 = p.c_f * p.l_f / p.inertia_z;
  return c;
}

// Predictor state: V, r, e_y, e_psi, delta, U, a.
struct Pred {
  double v, r, ey, epsi, delta, u, a;
};

double previewAt(const std::vector<double>& preview, int k) {
  if (preview.empty()) throw InvalidInput("mpc: empty preview");
  return preview[std::min<std::size_t>(k, preview.size() - 1)];
}

RolloutResult rollout(const MpcConfig& cfg, const VehicleParams& p, const PredictorCoeffs& c,
                      const Pred& s0, const std::vector<double>& kappa,
                      const std::vector<double>& uref, const std::vector<double>& z,
                      std::vector<Pred>* trace, std::vector<std::uint8_t>* sat_delta,
                      std::vector<std::uint8_t>* sat_a) {
  RolloutResult res;
  Pred s = s0;
  if (trace) (*trace)[0] = s;
  const double dt = cfg.dt;
  for (int k = 0; k < cfg.horizon; ++k) {
    const double zeta = z[2 * k];
    const double jx = z[2 * k + 1];
    Pred n;
    n.v = s.v + dt * (c.a11 * s.v + c.a12 * s.r + c.b1 * s.delta);
    n.r = s.r + dt * (c.a21 * s.v + c.a22 * s.r + c.b2 * s.delta);
    n.ey = s.ey + dt * (c.u_bar * s.epsi + s.v);
    n.epsi = s.epsi + dt * (s.r - c.u_bar * previewAt(kappa, k));
    const double delta_raw = s.delta + dt * zeta;
    n.delta = std::clamp(delta_raw, -p.delta_max, p.delta_max);
    n.u = s.u + dt * s.a;
    const double a_raw = s.a + dt * jx;
    n.a = std::clamp(a_raw, -p.a_max, p.a_max);
    if (sat_delta) (*sat_delta)[k] = n.delta != delta_raw;
    if (sat_a) (*sat_a)[k] = n.a != a_raw;

    const double dd = n.delta - s.delta;
    const double over = std::max(0.0, std::abs(n.ey) - cfg.corridor);
    const double du = n.u - previewAt(uref, k);
    res.cost += cfg.w_steer_rate * dd * dd + cfg.w_e_psi * n.epsi * n.epsi +
                cfg.w_e_y * n.ey * n.ey + cfg.w_shoulder * over * over + cfg.w_speed * du * du;
    res.max_overrun = std::max(res.max_overrun, over);
    s = n;
    if (trace) (*trace)[k + 1] = s;
  }
  return res;
}

// Gradient of the rollout cost with respect to z, by reverse accumulation.
void rolloutGradient(const MpcConfig& cfg, const PredictorCoeffs& c,
                     const std::vector<Pred>& trace, const std::vector<std::uint8_t>& sat_delta,
                     const std::vector<std::uint8_t>& sat_a, const std::vector<double>& uref,
                     std::vector<double>* grad) {
  const double dt = cfg.dt;
  // Adjoint over (v, r, ey, epsi, delta, u, a).
  double lv = 0, lr = 0, ley = 0, lepsi = 0, ldelta = 0, lu = 0, la = 0;
  for (int k = cfg.horizon - 1; k >= 0; --k) {
    const Pred& n = trace[k + 1];
    const Pred& s = trace[k];
    // Stage-cost partials with respect to the post-step state.
    const double dd = n.delta - s.delta;
    ldelta += 2.0 * cfg.w_steer_rate * dd;
    lepsi += 2.0 * cfg.w_e_psi * n.epsi;
    ley += 2.0 * cfg.w_e_y * n.ey;
    const double over = std::abs(n.ey) - cfg.corridor;
    if (over > 0.0) ley += 2.0 * cfg.w_shoulder * over * (n.ey >= 0.0 ? 1.0 : -1.0);
    lu += 2.0 * cfg.w_speed * (n.u - previewAt(uref, k));

    // Input gradients through the (possibly saturated) integrator states.
    (*grad)[2 * k] = sat_delta[k] ? 0.0 : ldelta * dt;
    (*grad)[2 * k + 1] = sat_a[k] ? 0.0 : la * dt;

    // Pull the adjoint back through one forward-Euler step.
    const double pv = lv * (1.0 + dt * c.a11) + lr * dt * c.a21 + ley * dt;
    const double pr = lv * dt * c.a12 + lr * (1.0 + dt * c.a22) + lepsi * dt;
    const double pey = ley;
    const double pepsi = lepsi + ley * dt * c.u_bar;
    double pdelta = lv * dt * c.b1 + lr * dt * c.b2 + (sat_delta[k] ? 0.0 : ldelta);
    const double pu = lu;
    const double pa = lu * dt + (sat_a[k] ? 0.0 : la);
    // Direct stage-cost dependence on the pre-step steering angle.
    pdelta -= 2.0 * cfg.w_steer_rate * dd;
    lv = pv;
    lr = pr;
    ley = pey;
    lepsi = pepsi;
    ldelta = pdelta;
    lu = pu;
    la = pa;
  }
}

Pred predFromState(const VehicleState& s) {
  return {s.V, s.r, s.e_y, s.e_psi, s.delta_f, s.U, s.a_x};
}

void clampBox(std::vector<double>* z, const VehicleParams& p) {
  for (std::size_t i = 0; i < z->size(); i += 2) {
    (*z)[i] = std::clamp((*z)[i], -p.zeta_max, p.zeta_max);
    (*z)[i + 1] = std::clamp((*z)[i + 1], -p.jerk_max, p.jerk_max);
  }
}

}  // namespace

double mpcRolloutCost(const MpcConfig& cfg, const VehicleParams& p, const VehicleState& state,
                      const std::vector<double>& kappa_preview,
                      const std::vector<double>& u_ref_preview, const std::vector<double>& z) {
  if (static_cast<int>(z.size()) != 2 * cfg.horizon) {
    throw InvalidInput("mpcRolloutCost: input sequence length must be twice the horizon");
  }
  const PredictorCoeffs c = predictorCoeffs(p, state.U);
  return rollout(cfg, p, c, predFromState(state), kappa_preview, u_ref_preview, z, nullptr,
                 nullptr, nullptr)
      .cost;
}

MpcController::MpcController(const MpcConfig& cfg, const VehicleParams& params)
    : cfg_(cfg), params_(params) {
  if (cfg.horizon < 1 || cfg.dt <= 0.0) throw InvalidInput("MpcController: invalid horizon/dt");
}

void MpcController::reset() {
  prev_z_.clear();
  has_prev_ = false;
}

MpcCommand MpcController::step(const VehicleState& state,
                               const std::vector<double>& kappa_preview,
                               const std::vector<double>& u_ref_preview) {
  const int n = cfg_.horizon;
  const int dim = 2 * n;
  const PredictorCoeffs coeffs = predictorCoeffs(params_, state.U);
  const Pred s0 = predFromState(state);

  std::vector<Pred> trace(n + 1);
  std::vector<std::uint8_t> sat_delta(n), sat_a(n);
  std::vector<double> grad(dim);

  auto evalCost = [&](const std::vector<double>& z) {
    return rollout(cfg_, params_, coeffs, s0, kappa_preview, u_ref_preview, z, nullptr, nullptr,
                   nullptr)
        .cost;
  };

  int iterations = 0;
  auto descend = [&](std::vector<double>* z, int iters) {
    double cost = rollout(cfg_, params_, coeffs, s0, kappa_preview, u_ref_preview, *z, &trace,
                          &sat_delta, &sat_a)
                      .cost;
    double eta = 1.0;
    std::vector<double> cand(dim);
    for (int it = 0; it < iters; ++it) {
      ++iterations;
      rolloutGradient(cfg_, coeffs, trace, sat_delta, sat_a, u_ref_preview, &grad);
      double gn = 0.0;
      for (int i = 0; i < dim; ++i) gn += grad[i] * grad[i];
      if (gn < 1e-24) break;
      bool improved = false;
      while (eta > 1e-14) {
        for (int k = 0; k < n; ++k) {
          const double pz = params_.zeta_max * params_.zeta_max;
          const double pj = params_.jerk_max * params_.jerk_max;
          cand[2 * k] = (*z)[2 * k] - eta * pz * grad[2 * k];
          cand[2 * k + 1] = (*z)[2 * k + 1] - eta * pj * grad[2 * k + 1];
        }
        clampBox(&cand, params_);
        const double c2 = evalCost(cand);
        if (c2 < cost - 1e-15) {
          z->swap(cand);
          cost = rollout(cfg_, params_, coeffs, s0, kappa_preview, u_ref_preview, *z, &trace,
                         &sat_delta, &sat_a)
                     .cost;
          eta = std::min(eta * 1.5, 1e3);
          improved = true;
          break;
        }
        eta *= 0.5;
      }
      if (!improved) break;
    }
    return cost;
  };

  // Candidate starts: zero first (so a perfect state yields exactly zero
  // commands), then the shifted previous solution, then constant corners.
  std::vector<double> best_z(dim, 0.0);
  double best_cost = evalCost(best_z);

  std::vector<std::vector<double>> starts;
  if (has_prev_ && static_cast<int>(prev_z_.size()) == dim) {
    std::vector<double> shifted(dim, 0.0);
    for (int k = 0; k + 1 < n; ++k) {
      shifted[2 * k] = prev_z_[2 * (k + 1)];
      shifted[2 * k + 1] = prev_z_[2 * (k + 1) + 1];
    }
    starts.push_back(std::move(shifted));
  }
  starts.emplace_back(dim, 0.0);
  if (cfg_.extra_starts) {
    for (int sz = -1; sz <= 1; ++sz) {
      for (int sj = -1; sj <= 1; ++sj) {
        if (sz == 0 && sj == 0) continue;
        std::vector<double> z(dim);
        for (int k = 0; k < n; ++k) {
          z[2 * k] = sz * params_.zeta_max;
          z[2 * k + 1] = sj * params_.jerk_max;
        }
        starts.push_back(std::move(z));
      }
    }
  }
  for (auto& z : starts) {
    const double c = descend(&z, cfg_.max_iters);
    if (c < best_cost) {
      best_cost = c;
      best_z = z;
    }
  }

  const RolloutResult final_roll = rollout(cfg_, params_, coeffs, s0, kappa_preview,
                                           u_ref_preview, best_z, nullptr, nullptr, nullptr);
  MpcCommand cmd;
  cmd.cost = final_roll.cost;
  cmd.iterations = iterations;
  if (final_roll.max_overrun > cfg_.slack_bound) {
    // Predicted corridor violation beyond the slack bound: command a safe
    // stop (center the steering, bleed speed) and flag the caller.
    cmd.infeasible = true;
    cmd.zeta_f = std::clamp(-state.delta_f / cfg_.dt, -params_.zeta_max, params_.zeta_max);
    cmd.j_x = std::clamp((-params_.a_max - state.a_x) / cfg_.dt, -params_.jerk_max,
                         params_.jerk_max);
    reset();
    return cmd;
  }
  cmd.zeta_f = best_z[0];
  cmd.j_x = best_z[1];
  prev_z_ = best_z;
  has_prev_ = true;
  return cmd;
}

// ---------------------------------------------------------------------------
// Pure pursuit.

namespace {

// Point on the waypoint polyline at arc position s (wrapped when closed,
// clamped when open).
Vec2 pointAtArc(const std::vector<Waypoint>& wps, bool closed, double s) {
  const std::size_t n = wps.size();
  double total = wps.back().s;
  double wrap_len = 0.0;
  if (closed) {
    wrap_len = (wps.front().position - wps.back().position).norm();
    total += wrap_len;
  }
  if (closed) {
    s = std::fmod(s, total);
    if (s < 0.0) s += total;
  } else {
    s = std::clamp(s, 0.0, total);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (s <= wps[i + 1].s) {
      const double seg = wps[i + 1].s - wps[i].s;
      const double t = seg > 0.0 ? (s - wps[i].s) / seg : 0.0;
      return wps[i].position + (wps[i + 1].position - wps[i].position) * t;
    }
  }
  if (closed && wrap_len > 0.0) {
    const double t = std::clamp((s - wps.back().s) / wrap_len, 0.0, 1.0);
    return wps.back().position + (wps.front().position - wps.back().position) * t;
  }
  return wps.back().position;
}

}  // namespace

double longitudinalJerk(const VehicleState& state, double u_ref, double kp, double dt,
                        const VehicleParams& params) {
  const double a_des = std::clamp(kp * (u_ref - state.U), -params.a_max, params.a_max);
  return std::clamp((a_des - state.a_x) / dt, -params.jerk_max, params.jerk_max);
}

double governSpeed(double v_ref, double e_y, double kappa, const SpeedGovernorConfig& cfg) {
  const double factor =
      std::clamp(1.0 - cfg.error_gain * std::abs(e_y) / cfg.corridor, cfg.min_factor, 1.0);
  double v = v_ref * factor;
  const double ak = std::abs(kappa);
  if (ak > 1e-9) v = std::min(v, std::sqrt(cfg.a_lat_max / ak));
  return v;
}

PurePursuitCommand purePursuitStep(const VehicleState& state,
                                   const std::vector<Waypoint>& waypoints, bool closed,
                                   double u_ref, const PurePursuitConfig& cfg,
                                   const VehicleParams& params) {
  if (waypoints.size() < 2) {
    throw InsufficientData("purePursuitStep: need at least two waypoints");
  }
  PurePursuitCommand cmd;
  cmd.lookahead =
      std::clamp(cfg.lookahead_gain * state.U, cfg.min_lookahead, cfg.max_lookahead);

  const PathProjection proj = projectOntoWaypoints(waypoints, {state.x, state.y}, closed);
  const Vec2 goal = pointAtArc(waypoints, closed, proj.s + cmd.lookahead);

  const double dx = goal.x - state.x;
  const double dy = goal.y - state.y;
  const double cpsi = std::cos(state.psi), spsi = std::sin(state.psi);
  const double forward = cpsi * dx + spsi * dy;
  const double left = -spsi * dx + cpsi * dy;
  const double alpha = std::atan2(left, forward);

  const double delta =
      std::atan(2.0 * params.wheelbase() * std::sin(alpha) / cmd.lookahead);
  cmd.delta_target = std::clamp(delta, -params.delta_max, params.delta_max);
  cmd.zeta_f =
      std::clamp((cmd.delta_target - state.delta_f) / cfg.dt, -params.zeta_max, params.zeta_max);
  cmd.j_x = longitudinalJerk(state, u_ref, cfg.kp_speed, cfg.dt, params);
  return cmd;
}

}  // namespace racer
