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

#ifndef DUBINS_SMC__PARAM_TUNER_HPP_
#define DUBINS_SMC__PARAM_TUNER_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "dubins_smc/common.hpp"
#include "dubins_smc/errors.hpp"
#include "dubins_smc/smc_controller.hpp"

namespace dubins_smc
{

/// Steering actuator limits of the real vehicle.
struct ActuatorLimits
{
  double delta_max{0.6};        // [rad]
  double ddelta_dt_max{2.6};    // [rad/s]
  double dddelta_dt_max{20.0};  // [rad/s^2]

  void validate() const
  {
    if (!(delta_max > 0.0 && delta_max < kPi / 2.0)) {
      throw InvalidSpec("delta_max must lie in (0, pi/2)");
    }
    if (!(ddelta_dt_max > 0.0) || !(dddelta_dt_max > 0.0)) {
      throw InvalidSpec("actuator limits must be positive");
    }
  }
};

enum class FormulaVariant
{
  kDerived,
  kAsPrinted,
};

/// Exclusive upper bound on the lead curvature so that the steering set stays within delta_max.
inline double kappa_l_max(
  double delta_max, double lambda, double lambda_l,
  FormulaVariant variant = FormulaVariant::kDerived)
{
  if (!(lambda > 0.0)) {
    throw InvalidSpec("lambda must be positive");
  }
  const double s = std::sin(delta_max);
  const double den = lambda * lambda + lambda_l * lambda_l * s * s;
  return variant == FormulaVariant::kDerived ? s / std::sqrt(den) : s / den;
}

/// Smallest k_rob that still dominates a matched curvature disturbance.
inline double k_rob_min(double kappa_d, double kappa_l_bar)
{
  if (!(kappa_l_bar > 0.0)) {
    throw InvalidSpec("kappa_l_bar must be positive");
  }
  const double k = std::abs(kappa_d) / kappa_l_bar;
  if (k >= 1.0) {
    throw InvalidSpec("disturbance is not below the curvature bound");
  }
  return k;
}

/// Fictive wheelbase that puts the lead wheel on the real front wheel's circle.
inline double lambda_from_cornering(double lambda_veh, double lambda_l)
{
  if (!(lambda_l >= 0.0) || !(lambda_l < lambda_veh)) {
    throw InvalidSpec("lead wheelbase must lie in [0, lambda_veh)");
  }
  return std::sqrt(lambda_veh * lambda_veh - lambda_l * lambda_l);
}

/// Largest real-steering derivatives over the invariant sets.
struct RateAccel
{
  double max_rate{0.0};    // max |delta'| [rad/m]
  double max_accel{0.0};   // max |delta''| [rad/m^2]
};

namespace detail
{

struct MapGeometry
{
  double kappa_l_bar, lambda_l, lambda;
  double lambda_veh;   // <= 0: report the fictive angle itself
  double bound, bound_l;
};

inline MapGeometry map_geometry(double kappa_l_bar, double lambda_l, double lambda, double lambda_veh)
{
  if (!(kappa_l_bar >= 0.0) || !(lambda_l >= 0.0) || !(lambda > 0.0)) {
    throw InvalidSpec("rate_accel_map needs kappa_l_bar >= 0, lambda_l >= 0, lambda > 0");
  }
  if (kappa_l_bar * lambda_l > 1.0) {
    throw InvalidSpec("kappa_l_bar * lambda_l must not exceed 1");
  }
  const double x = kappa_l_bar * lambda_l;
  const double kappa_f_bar = x < 1.0 ? kappa_l_bar / std::sqrt(1.0 - x * x) :
    std::numeric_limits<double>::infinity();
  if (!(kappa_f_bar * lambda < 1.0) && kappa_l_bar > 0.0) {
    throw InvalidSpec("front invariant set reaches pi/2");
  }
  return {kappa_l_bar, lambda_l, lambda, lambda_veh, std::asin(kappa_f_bar * lambda), std::asin(x)};
}

/// |delta'| and |delta''| at one point of Delta x Delta_l, worst over the sign of kappa_l.
inline std::pair<double, double> map_point(const MapGeometry & g, double delta, double delta_l)
{
  double rate = 0.0, accel = 0.0;
  for (double sgn : {-1.0, 1.0}) {
    double d1 = 0.0, d2 = std::numeric_limits<double>::infinity();
    if (g.lambda_l > 0.0) {
      d1 = std::tan(delta_l) / (g.lambda_l * std::cos(delta)) - std::tan(delta) / g.lambda;
      d2 = c1_terms(delta, d1, sgn * g.kappa_l_bar, g.lambda, g.lambda_l).dd_delta;
    } else {
      // no lead wheel: kappa_f switches directly and delta'' is unbounded
      d1 = c0_rate(delta, sgn * g.kappa_l_bar, g.lambda);
      if (g.kappa_l_bar == 0.0) {
        d2 = 0.0;
      }
    }
    double r = d1, a = d2;
    if (g.lambda_veh > 0.0) {
      const VehicleSteering v = vehicle_steering(delta, d1, d2, g.lambda, g.lambda_veh);
      r = v.d1;
      a = v.d2;
    }
    rate = std::max(rate, std::abs(r));
    accel = std::max(accel, std::abs(a));
  }
  return {rate, accel};
}

}  // namespace detail

/**
 * @brief Maxima of |delta'| and |delta''| over Delta x Delta_l and kappa_l = +-kappa_l_bar.
 *
 * A uniform grid of (resolution + 1)^2 points is followed by a few rounds of
 * local zoom around the best cells. With lambda_veh > 0 the maxima refer to the
 * real steering angle on the axle at lambda_veh instead of the fictive one.
 */
inline RateAccel rate_accel_map(
  double kappa_l_bar, double lambda_l, double lambda, int grid_resolution = 40,
  double lambda_veh = 0.0)
{
  if (grid_resolution < 2) {
    throw InvalidSpec("grid resolution must be at least 2");
  }
  const detail::MapGeometry g = detail::map_geometry(kappa_l_bar, lambda_l, lambda, lambda_veh);
  RateAccel out;
  if (kappa_l_bar == 0.0) {
    return out;
  }
  const int n = grid_resolution;
  const double b = g.bound;
  const double bl = g.bound_l;
  struct Cand
  {
    double value, x, y;
  };
  std::vector<Cand> rates, accels;
  rates.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  accels.reserve(rates.capacity());
  for (int i = 0; i <= n; ++i) {
    const double x = -b + 2.0 * b * i / n;
    for (int j = 0; j <= n; ++j) {
      const double y = -bl + 2.0 * bl * j / n;
      const auto [r, a] = detail::map_point(g, x, y);
      rates.push_back({r, x, y});
      accels.push_back({a, x, y});
    }
  }
  auto refine = [&](std::vector<Cand> & cands, bool want_rate) {
      const std::size_t keep = std::min<std::size_t>(4, cands.size());
      std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep),
        cands.end(), [](const Cand & p, const Cand & q) {return p.value > q.value;});
      double best = cands.front().value;
      for (std::size_t c = 0; c < keep; ++c) {
        Cand cur = cands[c];
        double hx = 2.0 * b / n, hy = 2.0 * bl / n;
        for (int level = 0; level < 10; ++level) {
          Cand level_best = cur;
          for (int i = -2; i <= 2; ++i) {
            for (int j = -2; j <= 2; ++j) {
              const double x = std::clamp(cur.x + hx * i / 2.0, -b, b);
              const double y = std::clamp(cur.y + hy * j / 2.0, -bl, bl);
              const auto [r, a] = detail::map_point(g, x, y);
              const double v = want_rate ? r : a;
              if (v > level_best.value) {
                level_best = {v, x, y};
              }
            }
          }
          cur = level_best;
          hx *= 0.5;
          hy *= 0.5;
        }
        best = std::max(best, cur.value);
      }
      return best;
    };
  out.max_rate = refine(rates, true);
  out.max_accel = refine(accels, false);
  return out;
}

/// Static map over (lambda_l, kappa_l_bar) with lambda from the cornering constraint.
struct StaticMap
{
  std::vector<double> lambda_l;
  std::vector<double> kappa_l_bar;
  std::vector<std::vector<RateAccel>> values;   // [lambda_l index][kappa index]
};

inline StaticMap build_static_map(
  const std::vector<double> & lambda_l, const std::vector<double> & kappa_l_bar,
  double lambda_veh, int grid_resolution = 40)
{
  StaticMap m{lambda_l, kappa_l_bar, {}};
  for (double ll : lambda_l) {
    const double lambda = lambda_from_cornering(lambda_veh, ll);
    std::vector<RateAccel> row;
    for (double k : kappa_l_bar) {
      row.push_back(rate_accel_map(k, ll, lambda, grid_resolution, lambda_veh));
    }
    m.values.push_back(std::move(row));
  }
  return m;
}

/// Output of the velocity scheduler.
struct ScheduleEntry
{
  double v{0.0};
  double kappa_l_bar{0.0};
  double lambda_l{0.0};
  double lambda{0.0};
  int region{0};                // 1..4
  bool clamped{false};          // lambda_l hit lambda_veh * (1 - 1e-3)
  double max_rate{0.0};         // predicted max |d delta / dt| [rad/s]
  double max_accel{0.0};        // predicted max |d^2 delta / dt^2| [rad/s^2]

  ControllerParams params(double k_rob = 0.0) const
  {
    return {kappa_l_bar, k_rob, {lambda, lambda_l}, 0.0};
  }
};

struct ScheduleOptions
{
  double lambda_l_min_ratio{0.05};
  int grid_resolution{24};
  double rel_tol{1e-4};
};

namespace detail
{

class Scheduler
{
public:
  Scheduler(double v, const ActuatorLimits & lim, double lambda_veh, const ScheduleOptions & opt)
  : v_(v), lim_(lim), lambda_veh_(lambda_veh), opt_(opt)
  {
    lambda_min_ = opt.lambda_l_min_ratio * lambda_veh;
    lambda_cap_ = lambda_veh * (1.0 - 1e-3);
  }

  RateAccel eval(double kappa, double ll) const
  {
    return rate_accel_map(
      kappa, ll, lambda_from_cornering(lambda_veh_, ll), opt_.grid_resolution, lambda_veh_);
  }

  double rate(const RateAccel & m) const {return m.max_rate * v_;}
  double accel(const RateAccel & m) const {return m.max_accel * v_ * v_;}

  /// lambda_l minimizing max |delta''| at this curvature bound.
  double lambda_star(double kappa) const
  {
    const int n = 24;
    double best_l = lambda_min_, best = std::numeric_limits<double>::infinity();
    std::vector<double> grid(n + 1);
    for (int i = 0; i <= n; ++i) {
      grid[i] = lambda_min_ + (lambda_cap_ - lambda_min_) * i / n;
      const double a = eval(kappa, grid[i]).max_accel;
      if (a < best) {
        best = a;
        best_l = grid[i];
      }
    }
    // golden section in the bracketing cells
    const double h = (lambda_cap_ - lambda_min_) / n;
    double lo = std::max(lambda_min_, best_l - h), hi = std::min(lambda_cap_, best_l + h);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = eval(kappa, c).max_accel, fd = eval(kappa, d).max_accel;
    while (hi - lo > opt_.rel_tol * lambda_veh_) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - gr * (hi - lo);
        fc = eval(kappa, c).max_accel;
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + gr * (hi - lo);
        fd = eval(kappa, d).max_accel;
      }
    }
    const double mid = 0.5 * (lo + hi);
    return eval(kappa, mid).max_accel <= best ? mid : best_l;
  }

  /// Smallest lambda_l in [lambda_min, lambda_star] meeting the acceleration limit.
  std::optional<double> lambda_for_accel(double kappa, double l_star) const
  {
    if (accel(eval(kappa, lambda_min_)) <= lim_.dddelta_dt_max) {
      return lambda_min_;
    }
    if (accel(eval(kappa, l_star)) > lim_.dddelta_dt_max) {
      return std::nullopt;
    }
    double lo = lambda_min_, hi = l_star;
    while (hi - lo > opt_.rel_tol * lambda_veh_) {
      const double mid = 0.5 * (lo + hi);
      if (accel(eval(kappa, mid)) <= lim_.dddelta_dt_max) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }

  struct Choice
  {
    double kappa, lambda_l, l_star;
  };

  std::optional<Choice> feasible(double kappa) const
  {
    const double l_star = lambda_star(kappa);
    const auto ll = lambda_for_accel(kappa, l_star);
    if (!ll) {
      return std::nullopt;
    }
    if (rate(eval(kappa, *ll)) > lim_.ddelta_dt_max || kappa * *ll > 1.0) {
      return std::nullopt;
    }
    return Choice{kappa, *ll, l_star};
  }

  ScheduleEntry run() const
  {
    const double k_max = std::sin(lim_.delta_max) / lambda_veh_;
    std::optional<Choice> best = feasible(k_max);
    bool at_bound = best.has_value();
    if (!best) {
      double lo = 0.0, hi = k_max;
      while (hi - lo > opt_.rel_tol * k_max) {
        const double mid = 0.5 * (lo + hi);
        if (auto c = feasible(mid)) {
          lo = mid;
          best = c;
        } else {
          hi = mid;
        }
      }
      if (!best) {
        throw Infeasible("no admissible controller parameters at v = " + std::to_string(v_));
      }
    }
    ScheduleEntry e;
    e.v = v_;
    e.kappa_l_bar = best->kappa;
    e.lambda_l = best->lambda_l;
    bool rate_binds = true;
    if (!at_bound) {
      // with only the acceleration limit active the minimizer of max |delta''| is used
      rate_binds = rate(eval(best->kappa, best->lambda_l)) >= lim_.ddelta_dt_max * (1.0 - 1e-2);
      if (!rate_binds) {
        e.lambda_l = best->l_star;
      }
    }
    e.lambda = lambda_from_cornering(lambda_veh_, e.lambda_l);
    e.clamped = e.lambda_l >= lambda_cap_ * (1.0 - 1e-9);
    const RateAccel m = eval(e.kappa_l_bar, e.lambda_l);
    e.max_rate = rate(m);
    e.max_accel = accel(m);
    const double tol = 2.0 * opt_.rel_tol * lambda_veh_;
    if (at_bound) {
      e.region = e.lambda_l <= lambda_min_ ? 1 : 2;
    } else {
      e.region = rate_binds && e.lambda_l < best->l_star - tol ? 3 : 4;
    }
    return e;
  }

private:
  double v_;
  ActuatorLimits lim_;
  double lambda_veh_;
  ScheduleOptions opt_;
  double lambda_min_{0.0};
  double lambda_cap_{0.0};
};

}  // namespace detail

/**
 * @brief Velocity-dependent choice of (kappa_l_bar, lambda_l, lambda).
 *
 * Rate limit first, then acceleration limit, then largest curvature bound,
 * then smallest lead wheelbase. The curvature bound is found by bisection;
 * for each candidate the lead wheelbase is the smallest one meeting the
 * acceleration limit below the minimizer of max |delta''|.
 */
inline ScheduleEntry schedule(
  double v, const ActuatorLimits & limits, double lambda_veh, const ScheduleOptions & opt = {})
{
  if (!(v > 0.0)) {
    throw InvalidSpec("velocity must be positive");
  }
  if (!(lambda_veh > 0.0)) {
    throw InvalidSpec("lambda_veh must be positive");
  }
  limits.validate();
  return detail::Scheduler(v, limits, lambda_veh, opt).run();
}

inline void write_schedule_csv(std::ostream & os, const std::vector<ScheduleEntry> & rows)
{
  os << "v,kappa_l_bar,lambda_l,lambda,region,clamped,max_ddelta_dt,max_dddelta_dt\n";
  for (const ScheduleEntry & r : rows) {
    os << r.v << ',' << r.kappa_l_bar << ',' << r.lambda_l << ',' << r.lambda << ',' <<
      r.region << ',' << (r.clamped ? 1 : 0) << ',' << r.max_rate << ',' << r.max_accel << '\n';
  }
}

}  // namespace dubins_smc

#endif  // DUBINS_SMC__PARAM_TUNER_HPP_
