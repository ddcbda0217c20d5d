// Copyright 2026 The dubins_smc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DUBINS_SMC__PLANT_SIM_HPP_
#define DUBINS_SMC__PLANT_SIM_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <vector>

#include "dubins_smc/common.hpp"
#include "dubins_smc/errors.hpp"
#include "dubins_smc/ref_path.hpp"
#include "dubins_smc/smc_controller.hpp"

namespace dubins_smc
{

/// Magic-formula lateral tire curve; the peak is mu * Fz.
struct TireParams
{
  double B{10.0};
  double C{1.9};
  double E{0.97};
  double mu{1.0};

  double lateral_force(double slip_angle, double fz) const
  {
    const double x = B * slip_angle;
    return mu * fz * std::sin(C * std::atan(x - E * (x - std::atan(x))));
  }

  double cornering_stiffness(double fz) const {return B * C * mu * fz;}
};

struct VehicleParams
{
  double lambda_veh{2.7};          // wheelbase [m]
  double delta_max{0.6};           // [rad]
  double mass{1500.0};             // [kg]
  double yaw_inertia{2500.0};      // [kg m^2]
  double front_weight_share{0.5};  // static load on the front axle
  double gravity{9.81};
  TireParams tire{};
  double actuator_cutoff_hz{5.0};  // each of the three first-order stages
  double max_substep{1e-3};        // kinetic integration step [s]
  double v_min{0.1};               // below: kinematic fallback for the lateral states [m/s]

  double cg_to_front() const {return (1.0 - front_weight_share) * lambda_veh;}
  double cg_to_rear() const {return front_weight_share * lambda_veh;}

  void validate() const
  {
    if (!(lambda_veh > 0.0) || !(mass > 0.0) || !(yaw_inertia > 0.0)) {
      throw InvalidSpec("vehicle geometry and inertia must be positive");
    }
    if (!(delta_max > 0.0 && delta_max < kPi / 2.0)) {
      throw InvalidSpec("delta_max must lie in (0, pi/2)");
    }
    if (!(front_weight_share > 0.0 && front_weight_share < 1.0)) {
      throw InvalidSpec("front weight share must lie in (0, 1)");
    }
    if (!(actuator_cutoff_hz > 0.0) || !(max_substep > 0.0)) {
      throw InvalidSpec("actuator cutoff and substep must be positive");
    }
  }
};

/// Rear-wheel pose with the applied steering angle.
struct KinematicState
{
  double x{0.0};
  double y{0.0};
  double psi{0.0};
  double delta_veh{0.0};
  double s{0.0};

  Pose2 pose() const {return {{x, y}, psi};}
};

struct KineticState : KinematicState
{
  double t{0.0};
  double v{0.0};           // speed of the centre of gravity
  double yaw_rate{0.0};
  double side_slip{0.0};   // at the centre of gravity
  std::array<double, 3> actuator{0.0, 0.0, 0.0};

  /// Applied steering rate and acceleration from the filter states.
  std::array<double, 2> steering_rates(double cutoff_hz) const
  {
    const double w = 2.0 * kPi * cutoff_hz;
    const double d2 = w * (actuator[1] - actuator[2]);
    const double d1 = w * (actuator[0] - actuator[1]);
    return {d2, w * (d1 - d2)};
  }
};

struct DisturbanceSpec
{
  double matched_kappa_d{0.0};   // [1/m] added to the outermost commanded curvature
  double noise_std_e{0.0};       // [m]
  double noise_std_psi{0.0};     // [rad]
  std::uint64_t seed{1};

  void validate() const
  {
    if (!(noise_std_e >= 0.0) || !(noise_std_psi >= 0.0)) {
      throw InvalidSpec("noise standard deviations must be non-negative");
    }
  }
};

/// Kinematic single track in the arc-length domain, rear wheel as reference point.
inline KinematicState step_kinematic(
  const KinematicState & state, double delta_cmd, double ds, const VehicleParams & veh)
{
  if (!(ds > 0.0)) {
    throw DomainViolation("ds must be positive");
  }
  if (!(std::abs(delta_cmd) <= veh.delta_max * (1.0 + 1e-12))) {
    throw DomainViolation("steering command exceeds delta_max");
  }
  const double k = std::tan(delta_cmd) / veh.lambda_veh;
  auto f = [k](const std::array<double, 3> & q) {
      return std::array<double, 3>{std::cos(q[2]), std::sin(q[2]), k};
    };
  const std::array<double, 3> q0{state.x, state.y, state.psi};
  auto add = [](std::array<double, 3> a, const std::array<double, 3> & b, double h) {
      for (int i = 0; i < 3; ++i) {
        a[i] += h * b[i];
      }
      return a;
    };
  const auto k1 = f(q0);
  const auto k2 = f(add(q0, k1, ds / 2));
  const auto k3 = f(add(q0, k2, ds / 2));
  const auto k4 = f(add(q0, k3, ds));
  KinematicState out = state;
  out.x += ds / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
  out.y += ds / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
  out.psi += ds / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
  out.delta_veh = delta_cmd;
  out.s += ds;
  return out;
}

namespace detail
{

// x, y, psi, beta, r, a1, a2, a3, s
using KineticVec = std::array<double, 9>;

inline KineticVec kinetic_rhs(
  const KineticVec & q, double delta_cmd, double v, const VehicleParams & veh)
{
  const double lf = veh.cg_to_front();
  const double lr = veh.cg_to_rear();
  const double w = 2.0 * kPi * veh.actuator_cutoff_hz;
  const double delta = q[7];
  double beta = q[3], r = q[4];
  KineticVec d{};
  double beta_dot = 0.0, r_dot = 0.0;
  if (v < veh.v_min) {
    // no-slip limit: lateral states follow the steering geometry
    beta = std::atan(lr * std::tan(delta) / veh.lambda_veh);
    r = v * std::cos(beta) * std::tan(delta) / veh.lambda_veh;
  } else {
    const double fz = veh.mass * veh.gravity;
    const double fzf = fz * veh.front_weight_share;
    const double fzr = fz - fzf;
    const double vx = v * std::cos(beta);
    const double vy = v * std::sin(beta);
    const double alpha_f = delta - std::atan2(vy + lf * r, vx);
    const double alpha_r = -std::atan2(vy - lr * r, vx);
    const double fyf = veh.tire.lateral_force(alpha_f, fzf);
    const double fyr = veh.tire.lateral_force(alpha_r, fzr);
    beta_dot = (fyf * std::cos(delta) + fyr) / (veh.mass * v) - r;
    r_dot = (lf * fyf * std::cos(delta) - lr * fyr) / veh.yaw_inertia;
  }
  // rear axle velocity in the body frame
  const double ux = v * std::cos(beta);
  const double uy = v * std::sin(beta) - lr * r;
  const double c = std::cos(q[2]), s = std::sin(q[2]);
  d[0] = c * ux - s * uy;
  d[1] = s * ux + c * uy;
  d[2] = r;
  d[3] = beta_dot;
  d[4] = r_dot;
  d[5] = w * (delta_cmd - q[5]);
  d[6] = w * (q[5] - q[6]);
  d[7] = w * (q[6] - q[7]);
  d[8] = std::hypot(ux, uy);
  return d;
}

}  // namespace detail

/// Speed of the centre of gravity as a function of time.
using SpeedProfile = std::function<double(double)>;

/**
 * @brief Kinetic single track with magic-formula tires and a third-order steering filter.
 *
 * Fixed-step RK4; dt is split into substeps no larger than max_substep and
 * small enough for the explicit tire dynamics at the current speed. An empty
 * speed profile keeps the speed constant.
 */
inline KineticState step_kinetic(
  const KineticState & state, double delta_cmd, double dt, const VehicleParams & veh,
  const SpeedProfile & speed = {})
{
  if (!(dt > 0.0)) {
    throw DomainViolation("dt must be positive");
  }
  auto speed_at = [&](double t) {return speed ? std::max(0.0, speed(t)) : state.v;};
  const double fz = veh.mass * veh.gravity;
  const double c_sum = veh.tire.cornering_stiffness(fz);
  const double v_ref = std::max(veh.v_min, std::max(speed_at(state.t), speed_at(state.t + dt)));
  const double lf = veh.cg_to_front(), lr = veh.cg_to_rear();
  // largest eigenvalue estimate of the linear lateral dynamics
  const double rate = c_sum / (veh.mass * v_ref) +
    0.5 * c_sum * (lf * lf + lr * lr) / (veh.yaw_inertia * v_ref) +
    2.0 * kPi * veh.actuator_cutoff_hz;
  const double h_max = std::min(veh.max_substep, 2.0 / rate);
  const int steps = static_cast<int>(std::ceil(dt / h_max - 1e-9));
  const double h = dt / steps;

  detail::KineticVec q{state.x, state.y, state.psi, state.side_slip, state.yaw_rate,
    state.actuator[0], state.actuator[1], state.actuator[2], state.s};
  double t = state.t;
  auto add = [](detail::KineticVec a, const detail::KineticVec & b, double k) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] += k * b[i];
      }
      return a;
    };
  for (int i = 0; i < steps; ++i) {
    const double v0 = speed_at(t), vm = speed_at(t + h / 2), v1 = speed_at(t + h);
    const auto k1 = detail::kinetic_rhs(q, delta_cmd, v0, veh);
    const auto k2 = detail::kinetic_rhs(add(q, k1, h / 2), delta_cmd, vm, veh);
    const auto k3 = detail::kinetic_rhs(add(q, k2, h / 2), delta_cmd, vm, veh);
    const auto k4 = detail::kinetic_rhs(add(q, k3, h), delta_cmd, v1, veh);
    for (std::size_t j = 0; j < q.size(); ++j) {
      q[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }
    t += h;
  }
  KineticState out = state;
  out.x = q[0];
  out.y = q[1];
  out.psi = q[2];
  out.t = t;
  out.v = speed_at(t);
  if (out.v < veh.v_min) {
    out.side_slip = std::atan(lr * std::tan(q[7]) / veh.lambda_veh);
    out.yaw_rate = out.v * std::cos(out.side_slip) * std::tan(q[7]) / veh.lambda_veh;
  } else {
    out.side_slip = q[3];
    out.yaw_rate = q[4];
  }
  out.actuator = {q[5], q[6], q[7]};
  out.delta_veh = q[7];
  out.s = q[8];
  return out;
}

/**
 * @brief Seeded measurement channel.
 *
 * Noise is applied to the observed rear pose: a lateral shift along the path
 * normal and a heading offset, so that the controller sees a consistent pose.
 */
class Observer
{
public:
  explicit Observer(const DisturbanceSpec & spec)
  : spec_(spec), rng_(spec.seed)
  {
    spec_.validate();
  }

  struct Sample
  {
    Pose2 pose;        // noisy rear pose
    WheelError error;  // its path error
  };

  Sample sample(const Pose2 & rear, const RefPath & path)
  {
    const PathProjection p = path.project(rear.position);
    const double ne = spec_.noise_std_e > 0.0 ? spec_.noise_std_e * normal_(rng_) : 0.0;
    const double npsi = spec_.noise_std_psi > 0.0 ? spec_.noise_std_psi * normal_(rng_) : 0.0;
    const Vec2 normal{-std::sin(p.theta), std::cos(p.theta)};
    Sample out;
    out.pose = {rear.position + normal * ne, rear.heading + npsi};
    out.error = WheelError::make(p.e + ne, rear.heading - p.theta + npsi);
    return out;
  }

private:
  DisturbanceSpec spec_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Rear-wheel path error with measurement noise drawn from the observer's stream.
inline WheelError observe(const KinematicState & state, const RefPath & path, Observer & observer)
{
  return observer.sample(state.pose(), path).error;
}

/// One row of a trajectory trace.
struct TraceRow
{
  double t{0.0}, s{0.0}, x{0.0}, y{0.0}, psi{0.0}, v{0.0};
  double delta_cmd{0.0}, delta_veh{0.0}, ddelta_dt{0.0}, dddelta_dt{0.0};
  double e{0.0}, e_f{0.0}, e_l{0.0}, beta{0.0};
};

inline constexpr const char * kTraceHeader =
  "t,s,x,y,psi,v,delta_cmd,delta_veh,ddelta_dt,dddelta_dt,e,e_f,e_l,beta";

inline void write_trace_csv(std::ostream & os, const std::vector<TraceRow> & rows)
{
  os << kTraceHeader << '\n';
  const auto old = os.precision(10);
  for (const TraceRow & r : rows) {
    os << r.t << ',' << r.s << ',' << r.x << ',' << r.y << ',' << r.psi << ',' << r.v << ',' <<
      r.delta_cmd << ',' << r.delta_veh << ',' << r.ddelta_dt << ',' << r.dddelta_dt << ',' <<
      r.e << ',' << r.e_f << ',' << r.e_l << ',' << r.beta << '\n';
  }
  os.precision(old);
}

}  // namespace dubins_smc

#endif  // DUBINS_SMC__PLANT_SIM_HPP_
