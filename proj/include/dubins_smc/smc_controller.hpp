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

#ifndef DUBINS_SMC__SMC_CONTROLLER_HPP_
#define DUBINS_SMC__SMC_CONTROLLER_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dubins_smc/common.hpp"
#include "dubins_smc/detail/taylor_jet.hpp"
#include "dubins_smc/errors.hpp"
#include "dubins_smc/ref_path.hpp"

namespace dubins_smc
{

/// Lateral offset [m] and heading error [rad] of one wheel w.r.t. the reference path.
struct WheelError
{
  double e{0.0};
  double psi{0.0};

  static WheelError make(double e, double psi) {return {e, wrap_angle(psi)};}
};

/**
 * @brief Tuning of the chained sliding-mode law.
 *
 * `lambdas` holds the wheelbases of the chain, innermost first: the (fictive)
 * front wheelbase lambda, then the lead wheelbase lambda_l, and so on. Its size
 * is the smoothness order n: n = 1 gives a continuous steering angle, n = 2 a
 * continuous steering rate. `kappa_bar` bounds the curvature of the outermost wheel.
 */
struct ControllerParams
{
  double kappa_bar{0.1};
  double k_rob{0.0};
  std::vector<double> lambdas{2.7};
  double sign_zero{0.0};

  std::size_t order() const {return lambdas.size();}

  void validate() const
  {
    if (!(kappa_bar > 0.0) || !std::isfinite(kappa_bar)) {
      throw InvalidSpec("kappa_bar must be positive");
    }
    if (!(k_rob >= 0.0 && k_rob < 1.0)) {
      throw InvalidSpec("k_rob must lie in [0, 1)");
    }
    if (lambdas.empty()) {
      throw InvalidSpec("at least one wheelbase is required");
    }
    for (double l : lambdas) {
      if (!(l > 0.0) || !std::isfinite(l)) {
        throw InvalidSpec("all wheelbases must be positive (forward driving)");
      }
    }
    if (kappa_bar * lambdas.back() > 1.0) {
      throw InvalidSpec("kappa_bar * lambda_n must not exceed 1 (empty invariant set)");
    }
  }
};

/// Sliding variable of the Dubins-optimal reaching law, robustified by k_rob.
inline double sliding_sigma(const WheelError & err, double kappa_bar, double k_rob)
{
  return -err.e - (1.0 - std::cos(err.psi)) / ((1.0 - k_rob) * kappa_bar) *
         sign_of(std::sin(err.psi));
}

inline double dubins_kappa(double sigma, double kappa_bar, double sign_zero = 0.0)
{
  return kappa_bar * sign_of(sigma, sign_zero);
}

/// Error of the wheel lambda ahead of `rear` on a straight path.
inline WheelError lift_front(const WheelError & rear, double delta, double lambda)
{
  return WheelError::make(rear.e + std::sin(rear.psi) * lambda, rear.psi + delta);
}

/// Half-width of the invariant steering set, asin(kappa_bar * lambda).
inline double invariant_bounds(double kappa_bar, double lambda)
{
  const double x = kappa_bar * lambda;
  if (x > 1.0 || x < 0.0 || !std::isfinite(x)) {
    throw InvalidSpec("kappa_bar * lambda must lie in [0, 1]");
  }
  return std::asin(x);
}

/**
 * @brief Controller state seen by the laws.
 *
 * `delta` is the steering angle of the first joint and `delta_derivs` its path
 * derivatives delta', ..., delta^(n-1). The fictive joint angles are a function
 * of these (see chain_fictive_angles()).
 */
struct ChainState
{
  WheelError rear;
  double delta{0.0};
  std::vector<double> delta_derivs;
};

namespace detail
{

inline void check_angle(double a, const char * what)
{
  if (!(std::abs(a) < kPi / 2.0)) {
    throw DomainViolation(std::string(what) + " outside (-pi/2, pi/2)");
  }
}

struct ChainExpansion
{
  std::vector<double> fictive;  // delta_1 .. delta_n
  double kappa_top{0.0};        // curvature of the outermost wheel
};

/**
 * Propagates the Taylor jet of delta through the joint relations
 *   kappa_{i} = (kappa_0 + sum_{j<=i} delta_j') * prod_{j<=i} cos delta_j,
 *   tan delta_{i+1} = lambda_{i+1} * kappa_i,
 * with kappa_0 = tan(delta_1) / lambda_1. `derivs` holds delta', ..., delta^(m)
 * and must have at least lambdas.size() entries for kappa_top to be valid.
 */
inline ChainExpansion expand_chain(
  double delta, const std::vector<double> & derivs, const std::vector<double> & lambdas,
  std::size_t depth)
{
  std::vector<double> d{delta};
  d.insert(d.end(), derivs.begin(), derivs.end());
  Jet joint = Jet::from_derivatives(d);
  check_angle(delta, "steering angle");

  ChainExpansion out;
  out.fictive.push_back(delta);
  Jet kappa0 = tan(joint) * (1.0 / lambdas[0]);
  Jet heading_rate = kappa0;  // d psi_i / ds
  Jet cos_prod = Jet::constant(1.0, joint.order());
  for (std::size_t i = 0; i < depth; ++i) {
    heading_rate = heading_rate + joint.derivative();
    cos_prod = cos_prod * cos(joint);
    const Jet kappa_i = heading_rate * cos_prod;
    if (i + 1 == depth) {
      out.kappa_top = kappa_i.value();
      break;
    }
    joint = atan(kappa_i * lambdas[i + 1]);
    check_angle(joint.value(), "fictive joint angle");
    out.fictive.push_back(joint.value());
  }
  return out;
}

}  // namespace detail

/// Joint angles delta_1..delta_n implied by delta and its first n-1 path derivatives.
inline std::vector<double> chain_fictive_angles(
  double delta, const std::vector<double> & delta_derivs, const std::vector<double> & lambdas)
{
  const std::size_t n = lambdas.size();
  if (delta_derivs.size() + 1 < n) {
    throw InvalidSpec("not enough steering derivatives for the chain order");
  }
  std::vector<double> d(delta_derivs.begin(), delta_derivs.begin() +
    static_cast<std::ptrdiff_t>(n - 1));
  d.push_back(0.0);  // the top derivative does not affect any joint angle
  return detail::expand_chain(delta, d, lambdas, n).fictive;
}

/**
 * @brief Top steering derivative delta^(n) realizing a commanded outermost curvature.
 *
 * The outermost curvature is affine in delta^(n), so two evaluations of the
 * chain expansion determine it exactly.
 */
inline double top_derivative_for_curvature(
  double delta, const std::vector<double> & delta_derivs, const std::vector<double> & lambdas,
  double kappa_top)
{
  const std::size_t n = lambdas.size();
  std::vector<double> d(delta_derivs.begin(), delta_derivs.begin() +
    static_cast<std::ptrdiff_t>(n - 1));
  d.push_back(0.0);
  const double k0 = detail::expand_chain(delta, d, lambdas, n).kappa_top;
  d.back() = 1.0;
  const double k1 = detail::expand_chain(delta, d, lambdas, n).kappa_top;
  return (kappa_top - k0) / (k1 - k0);
}

/// Inverse of chain_fictive_angles(): delta', ..., delta^(n-1) from the joint angles.
inline std::vector<double> derivatives_from_fictive(
  const std::vector<double> & fictive, const std::vector<double> & lambdas)
{
  const std::size_t n = lambdas.size();
  if (fictive.size() != n) {
    throw InvalidSpec("fictive angle count must equal the chain order");
  }
  std::vector<double> derivs;
  for (std::size_t k = 1; k < n; ++k) {
    // tan(delta_{k+1}) / lambda_{k+1} = kappa_k is affine in delta^(k)
    const double target = std::tan(fictive[k]) / lambdas[k];
    std::vector<double> d = derivs;
    d.push_back(0.0);
    const double k0 = detail::expand_chain(fictive[0], d, lambdas, k).kappa_top;
    d.back() = 1.0;
    const double k1 = detail::expand_chain(fictive[0], d, lambdas, k).kappa_top;
    derivs.push_back((target - k0) / (k1 - k0));
  }
  return derivs;
}

/**
 * @brief Path derivatives of every joint angle in trailer form.
 *
 * For i < n the joint rate follows from the curvature kappa_i = tan(delta_{i+1}) / lambda_{i+1}
 * that wheel i must have; the outermost joint is driven by `kappa_top`.
 */
inline std::vector<double> fictive_rates(
  const std::vector<double> & fictive, const std::vector<double> & lambdas, double kappa_top)
{
  const std::size_t n = lambdas.size();
  std::vector<double> rates(n, 0.0);
  const double kappa0 = std::tan(fictive[0]) / lambdas[0];
  double rate_sum = 0.0;
  double cos_prod = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    detail::check_angle(fictive[i], "joint angle");
    cos_prod *= std::cos(fictive[i]);
    const double kappa_i = i + 1 < n ? std::tan(fictive[i + 1]) / lambdas[i + 1] : kappa_top;
    rates[i] = kappa_i / cos_prod - kappa0 - rate_sum;
    rate_sum += rates[i];
  }
  return rates;
}

/// Errors of wheels 0..n on a straight path (closed-form lift).
inline std::vector<WheelError> lift_straight(
  const WheelError & rear, const std::vector<double> & fictive,
  const std::vector<double> & lambdas)
{
  std::vector<WheelError> out{rear};
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    out.push_back(lift_front(out.back(), fictive[i], lambdas[i]));
  }
  return out;
}

/// Global poses of wheels 0..n built from the rear pose and the joint angles.
inline std::vector<Pose2> chain_poses(
  const Pose2 & rear_pose, const std::vector<double> & fictive,
  const std::vector<double> & lambdas)
{
  std::vector<Pose2> poses{rear_pose};
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const Pose2 & p = poses.back();
    poses.push_back({p.position + heading_vector(p.heading) * lambdas[i], p.heading + fictive[i]});
  }
  return poses;
}

/**
 * @brief Per-wheel errors of the chain on an arbitrary reference path.
 *
 * Every wheel position is projected independently; its heading error is taken
 * relative to the path heading at its own closest point. On a straight path
 * this coincides with lift_straight().
 */
inline std::vector<WheelError> lift_chain(
  const ChainState & state, const std::vector<double> & lambdas, const RefPath & path,
  const Pose2 & rear_pose)
{
  const std::vector<double> fictive =
    chain_fictive_angles(state.delta, state.delta_derivs, lambdas);
  std::vector<WheelError> out;
  for (const Pose2 & p : chain_poses(rear_pose, fictive, lambdas)) {
    const PathProjection proj = path.project(p.position);
    out.push_back(WheelError::make(proj.e, p.heading - proj.theta));
  }
  return out;
}

/// delta' of the continuous-steering law for a given front-wheel curvature.
inline double c0_rate(double delta, double kappa_f, double lambda)
{
  detail::check_angle(delta, "steering angle");
  return kappa_f / std::cos(delta) - std::tan(delta) / lambda;
}

/// Continuous-steering law (n = 1) on a straight path.
inline double control_c0(const ChainState & state, const ControllerParams & params)
{
  if (params.order() != 1) {
    throw InvalidSpec("control_c0 needs a single wheelbase");
  }
  detail::check_angle(state.delta, "steering angle");
  const WheelError front = lift_front(state.rear, state.delta, params.lambdas[0]);
  const double kappa_f = dubins_kappa(
    sliding_sigma(front, params.kappa_bar, params.k_rob), params.kappa_bar, params.sign_zero);
  return c0_rate(state.delta, kappa_f, params.lambdas[0]);
}

/// Intermediate values of the continuous-rate law (n = 2).
struct C1Terms
{
  double sigma{0.0};
  double kappa_l{0.0};
  double delta_l{0.0};
  double ddelta_l{0.0};
  double dd_delta{0.0};
};

/// Closed-form lead-wheel relations for a given lead curvature.
inline C1Terms c1_terms(
  double delta, double ddelta, double kappa_l, double lambda, double lambda_l)
{
  detail::check_angle(delta, "steering angle");
  C1Terms t;
  t.kappa_l = kappa_l;
  const double cd = std::cos(delta);
  const double td = std::tan(delta);
  t.delta_l = std::atan((td / lambda + ddelta) * lambda_l * cd);
  detail::check_angle(t.delta_l, "lead steering angle");
  const double cl = std::cos(t.delta_l);
  t.ddelta_l = kappa_l / (cd * cl) - td / lambda - ddelta;
  t.dd_delta = t.ddelta_l / (cl * cl * cd * lambda_l) - ddelta / lambda + ddelta * ddelta * td;
  return t;
}

/// Continuous-rate law (n = 2) on a straight path; returns delta''.
inline C1Terms control_c1_terms(const ChainState & state, const ControllerParams & params)
{
  if (params.order() != 2) {
    throw InvalidSpec("control_c1 needs two wheelbases");
  }
  if (state.delta_derivs.empty()) {
    throw InvalidSpec("control_c1 needs delta'");
  }
  const double lambda = params.lambdas[0];
  const double lambda_l = params.lambdas[1];
  const double delta = state.delta;
  const double ddelta = state.delta_derivs[0];
  detail::check_angle(delta, "steering angle");
  const double delta_l = std::atan((std::tan(delta) / lambda + ddelta) * lambda_l *
      std::cos(delta));
  const WheelError lead = WheelError::make(
    state.rear.e + std::sin(state.rear.psi) * lambda +
    std::sin(state.rear.psi + delta) * lambda_l,
    state.rear.psi + delta + delta_l);
  const double sigma = sliding_sigma(lead, params.kappa_bar, params.k_rob);
  C1Terms t = c1_terms(delta, ddelta, dubins_kappa(sigma, params.kappa_bar, params.sign_zero),
      lambda, lambda_l);
  t.sigma = sigma;
  return t;
}

inline double control_c1(const ChainState & state, const ControllerParams & params)
{
  return control_c1_terms(state, params).dd_delta;
}

/// General n-th order law on a straight path; returns delta^(n).
inline double control_cn(const ChainState & state, const ControllerParams & params)
{
  const std::size_t n = params.order();
  if (n == 0) {
    throw InvalidSpec("control_cn needs n >= 1");
  }
  const std::vector<double> fictive =
    chain_fictive_angles(state.delta, state.delta_derivs, params.lambdas);
  const WheelError outer = lift_straight(state.rear, fictive, params.lambdas).back();
  const double kappa_n = dubins_kappa(
    sliding_sigma(outer, params.kappa_bar, params.k_rob), params.kappa_bar, params.sign_zero);
  return top_derivative_for_curvature(state.delta, state.delta_derivs, params.lambdas, kappa_n);
}

/**
 * @brief delta' from the flat-output description of the continuous-steering law.
 *
 * Inverts e''' = -e' e''^2 / (1 - e'^2) + cos(psi) / (lambda cos^2 delta) * delta'
 * written in the flat coordinates (e, e', e''), all derivatives w.r.t. the rear
 * wheel's path.
 */
inline double flatness_ddelta(double e, double e1, double e2, double e3, double lambda)
{
  (void)e;
  const double q = 1.0 - e1 * e1;
  if (!(q > 0.0)) {
    throw DomainViolation("|e'| must be below 1");
  }
  return (e3 + e1 * e2 * e2 / q) * lambda * std::sqrt(q) / ((lambda * e2) * (lambda * e2) + q);
}

/// Prescribed-convergence form of the sliding variable in (sigma_u, d sigma_u / ds_f).
inline double hosm_zeta(double sigma_u, double dsigma_u, double kappa_bar_f, double k_rob)
{
  if (!(std::abs(dsigma_u) <= 1.0)) {
    throw DomainViolation("|d sigma_u| must not exceed 1");
  }
  return -sigma_u - (1.0 - std::sqrt(1.0 - dsigma_u * dsigma_u)) /
         ((1.0 - k_rob) * kappa_bar_f) * sign_of(dsigma_u);
}

/// Real steering angle with its first two path derivatives.
struct VehicleSteering
{
  double angle{0.0};
  double d1{0.0};
  double d2{0.0};
};

/**
 * @brief Maps the fictive front steering angle onto the real axle.
 *
 * The fictive front wheel sits at lambda, the real one at lambda_veh. Both
 * give the same rear curvature when tan(delta_veh) / lambda_veh = tan(delta) / lambda.
 */
inline VehicleSteering vehicle_steering(
  double delta, double ddelta, double dd_delta, double lambda, double lambda_veh)
{
  const double r = lambda_veh / lambda;
  const double s = std::sin(delta);
  const double c = std::cos(delta);
  const double den = c * c + r * r * s * s;
  const double h1 = r / den;
  const double h2 = -r * (r * r - 1.0) * std::sin(2.0 * delta) / (den * den);
  return {std::atan(r * std::tan(delta)), h1 * ddelta, h2 * ddelta * ddelta + h1 * dd_delta};
}

/// Inverse of the angle part of vehicle_steering.
inline double fictive_from_vehicle(double delta_veh, double lambda, double lambda_veh)
{
  return std::atan(lambda / lambda_veh * std::tan(delta_veh));
}

/**
 * @brief Stateful chained controller.
 *
 * Holds the joint angles delta_1..delta_n and integrates them in trailer form
 * with explicit Euler. The sliding variable is evaluated at the outermost wheel,
 * projected onto the reference path.
 */
class ChainController
{
public:
  struct Decision
  {
    double sigma{0.0};
    double kappa{0.0};                // commanded curvature of the outermost wheel
    std::vector<WheelError> wheels;   // rear, front, lead, ...
  };

  explicit ChainController(ControllerParams params)
  : params_(std::move(params))
  {
    params_.validate();
    reset(0.0);
  }

  const ControllerParams & params() const {return params_;}
  std::size_t order() const {return params_.order();}

  /// Starts from a steering angle with all its derivatives zero.
  void reset(double delta0)
  {
    fictive_ = chain_fictive_angles(
      delta0, std::vector<double>(order() > 0 ? order() - 1 : 0, 0.0), params_.lambdas);
  }

  void set_fictive(std::vector<double> fictive)
  {
    if (fictive.size() != order()) {
      throw InvalidSpec("fictive angle count must equal the chain order");
    }
    fictive_ = std::move(fictive);
  }

  const std::vector<double> & fictive() const {return fictive_;}
  double delta() const {return fictive_.front();}

  /// Replaces the first joint angle by a measured one while keeping its derivatives.
  void reanchor(double delta_measured)
  {
    std::vector<double> d = derivatives_from_fictive(fictive_, params_.lambdas);
    fictive_ = chain_fictive_angles(delta_measured, d, params_.lambdas);
  }

  ChainState state(const WheelError & rear) const
  {
    return {rear, fictive_.front(), derivatives_from_fictive(fictive_, params_.lambdas)};
  }

  /// Evaluates the switching law on a path for the given rear pose.
  Decision decide(const Pose2 & rear_pose, const RefPath & path) const
  {
    Decision d;
    for (const Pose2 & p : chain_poses(rear_pose, fictive_, params_.lambdas)) {
      const PathProjection proj = path.project(p.position);
      d.wheels.push_back(WheelError::make(proj.e, p.heading - proj.theta));
    }
    return finish(std::move(d));
  }

  /// Evaluates the switching law from the rear error on a straight path.
  Decision decide_straight(const WheelError & rear) const
  {
    Decision d;
    d.wheels = lift_straight(rear, fictive_, params_.lambdas);
    return finish(std::move(d));
  }

  /// delta', ..., delta^(n) for a commanded outermost curvature.
  std::vector<double> steering_derivatives(double kappa) const
  {
    std::vector<double> d = derivatives_from_fictive(fictive_, params_.lambdas);
    d.push_back(top_derivative_for_curvature(fictive_.front(), d, params_.lambdas, kappa));
    return d;
  }

  /// Euler-integrates the joint angles over ds with the outermost curvature held.
  void advance(double kappa, double ds, double max_substep = 0.0)
  {
    if (!(ds >= 0.0)) {
      throw InvalidSpec("path increment must be non-negative");
    }
    std::size_t steps = 1;
    if (max_substep > 0.0 && ds > max_substep) {
      steps = static_cast<std::size_t>(std::ceil(ds / max_substep));
    }
    const double h = ds / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      const std::vector<double> rates = fictive_rates(fictive_, params_.lambdas, kappa);
      for (std::size_t i = 0; i < fictive_.size(); ++i) {
        fictive_[i] += h * rates[i];
      }
    }
  }

private:
  Decision finish(Decision d) const
  {
    d.sigma = sliding_sigma(d.wheels.back(), params_.kappa_bar, params_.k_rob);
    d.kappa = dubins_kappa(d.sigma, params_.kappa_bar, params_.sign_zero);
    return d;
  }

  ControllerParams params_;
  std::vector<double> fictive_;
};

}  // namespace dubins_smc

#endif  // DUBINS_SMC__SMC_CONTROLLER_HPP_
