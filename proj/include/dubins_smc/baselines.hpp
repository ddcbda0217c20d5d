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

#ifndef DUBINS_SMC__BASELINES_HPP_
#define DUBINS_SMC__BASELINES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dubins_smc/common.hpp"
#include "dubins_smc/errors.hpp"
#include "dubins_smc/plant_sim.hpp"
#include "dubins_smc/smc_controller.hpp"

namespace dubins_smc
{

/// Terminal box around the straight reference path: |e|, |psi|, |delta| below the bounds.
struct ReachTolerance
{
  double e{0.005};
  double psi{0.01};
  double delta{0.02};

  bool contains(double e_, double psi_, double delta_) const
  {
    return std::abs(e_) <= e && std::abs(psi_) <= psi && std::abs(delta_) <= delta;
  }
};

/// State of the reaching benchmark on a straight path (x along the path, e = y).
struct ReachState
{
  double s{0.0};
  double x{0.0};
  double e{0.0};
  double psi{0.0};
  double delta{0.0};
};

namespace detail
{

/// Steering angle after a ramp of slope u over length t, saturated at +-bar.
inline double ramp_delta(double delta0, double u, double t, double bar)
{
  return std::clamp(delta0 + u * t, -bar, bar);
}

/// Heading change over a saturated ramp, integrating tan(delta) / lambda exactly.
inline double ramp_heading_gain(double delta0, double u, double t, double bar, double lambda)
{
  if (t <= 0.0) {
    return 0.0;
  }
  double ramp_t = t;
  if (u != 0.0) {
    const double target = u > 0.0 ? bar : -bar;
    ramp_t = std::min(t, std::max(0.0, (target - delta0) / u));
  }
  double gain = 0.0;
  if (u == 0.0) {
    gain = std::tan(delta0) * t;
  } else {
    const double d1 = delta0 + u * ramp_t;
    gain = (std::log(std::cos(delta0)) - std::log(std::cos(d1))) / u;
    // saturated hold
    gain += std::tan(ramp_delta(delta0, u, t, bar)) * (t - ramp_t);
  }
  return gain / lambda;
}

/// Advances (x, e, psi, delta) by t with delta' = u held; Simpson in substeps of at most ds.
template<class Visit>
ReachState advance_ramp(
  ReachState st, double u, double t, double bar, double lambda, double ds, Visit && visit)
{
  if (t <= 0.0) {
    return st;
  }
  const int n = std::max(1, static_cast<int>(std::ceil(t / ds - 1e-9)));
  const double h = t / n;
  const double psi0 = st.psi, delta0 = st.delta;
  auto psi_at = [&](double tau) {return psi0 + ramp_heading_gain(delta0, u, tau, bar, lambda);};
  double tau = 0.0;
  double psi_a = psi0;
  for (int i = 0; i < n; ++i) {
    const double psi_m = psi_at(tau + 0.5 * h);
    const double psi_b = psi_at(tau + h);
    st.x += h / 6.0 * (std::cos(psi_a) + 4.0 * std::cos(psi_m) + std::cos(psi_b));
    st.e += h / 6.0 * (std::sin(psi_a) + 4.0 * std::sin(psi_m) + std::sin(psi_b));
    tau += h;
    st.psi = psi_b;
    st.delta = ramp_delta(delta0, u, tau, bar);
    st.s += h;
    psi_a = psi_b;
    if (!visit(st, u)) {
      break;
    }
  }
  return st;
}

}  // namespace detail

/**
 * @brief Parameters of the constrained third-order sliding mode baseline.
 *
 * The output e has relative degree three w.r.t. delta'. The heading bound psi_bar
 * keeps the input gain g = cos(psi) (1 + tan^2 delta) / lambda bounded away from 0.
 */
struct HosmParams
{
  double psi_bar{0.5};          // [rad]
  double ddelta_bar{2.0};       // [rad/m]
  double delta_bar{0.5};        // [rad]
  double boundary_layer{0.02};  // [rad] on psi
  double sign_zero{0.0};

  double G(double lambda) const {return std::cos(psi_bar) / lambda;}
  double F(double lambda) const
  {
    const double k = std::tan(delta_bar) / lambda;
    return std::sin(psi_bar) * k * k;
  }
  double alpha(double lambda) const {return G(lambda) * ddelta_bar - F(lambda);}

  void validate(double lambda) const
  {
    if (!(psi_bar > 0.0 && psi_bar < kPi / 2.0)) {
      throw InvalidSpec("psi_bar must lie in (0, pi/2)");
    }
    if (!(ddelta_bar > 0.0) || !(delta_bar > 0.0 && delta_bar < kPi / 2.0)) {
      throw InvalidSpec("steering bounds must be positive");
    }
    if (!(lambda > 0.0)) {
      throw InvalidSpec("lambda must be positive");
    }
    if (!(alpha(lambda) > 0.0)) {
      throw InvalidSpec("G * ddelta_bar - F must be positive");
    }
    if (!(boundary_layer >= 0.0)) {
      throw InvalidSpec("boundary layer must be non-negative");
    }
  }
};

/// Normal-form coordinates (e, e', e'') of the kinematic model.
inline std::array<double, 3> hosm_sigma(const WheelError & err, double delta, double lambda)
{
  return {err.e, std::sin(err.psi), std::cos(err.psi) * std::tan(delta) / lambda};
}

/**
 * @brief Time-optimal switching function of the triple integrator with |u| <= alpha.
 *
 * s > 0 calls for u = -alpha. On the last arc the inner sign vanishes and
 * sign(sigma_3) is used instead.
 */
inline double hosm_surface(double s1, double s2, double s3, double alpha)
{
  const double q = s2 + s3 * std::abs(s3) / (2.0 * alpha);
  double S = sign_of(q);
  if (S == 0.0) {
    S = sign_of(s3);
  }
  const double inner = std::max(0.0, S * s2 + s3 * s3 / (2.0 * alpha));
  return s1 + s3 * s3 * s3 / (3.0 * alpha * alpha) +
         S * (s2 * s3 / alpha + inner * std::sqrt(inner) / std::sqrt(alpha));
}

/**
 * @brief Constrained HOSM steering-rate law.
 *
 * Away from the heading constraint delta' = -ddelta_bar * sign(s(sigma)). When the
 * predicted stopping heading (under the guaranteed deceleration alpha) reaches
 * psi_bar - boundary_layer while the heading still moves outward, the law brakes
 * with -ddelta_bar * sign(sigma_3). The output is held at 0 when delta sits on its
 * bound and the command would push further out.
 */
inline double hosm_control(
  const WheelError & err, double delta, const HosmParams & params, double lambda)
{
  if (!(std::abs(err.psi) < kPi / 2.0)) {
    throw DomainViolation("HOSM baseline needs |psi| < pi/2");
  }
  if (!(std::abs(delta) <= params.delta_bar * (1.0 + 1e-12))) {
    throw DomainViolation("steering angle exceeds delta_bar");
  }
  const double alpha = params.alpha(lambda);
  const auto [s1, s2, s3] = hosm_sigma(err, delta, lambda);
  double u = 0.0;
  const double stop = s2 + s3 * std::abs(s3) / (2.0 * alpha);
  const double limit = std::sin(std::max(0.0, params.psi_bar - params.boundary_layer));
  if (std::abs(stop) >= limit && s2 * s3 > 0.0) {
    u = -params.ddelta_bar * sign_of(s3, params.sign_zero);
  } else {
    u = -params.ddelta_bar * sign_of(hosm_surface(s1, s2, s3, alpha), params.sign_zero);
  }
  if ((delta >= params.delta_bar && u > 0.0) || (delta <= -params.delta_bar && u < 0.0)) {
    u = 0.0;
  }
  return u;
}

/// Closed-loop HOSM reaching run on a straight path.
struct ReachRun
{
  double distance{std::numeric_limits<double>::infinity()};
  bool reached{false};
  double max_abs_psi{0.0};
  std::vector<ReachState> trajectory;
};

inline ReachRun simulate_hosm_reach(
  const ReachState & start, const HosmParams & params, double lambda, const ReachTolerance & tol,
  double ds = 1e-3, double budget = 30.0, bool record = false)
{
  params.validate(lambda);
  ReachRun run;
  ReachState st = start;
  if (record) {
    run.trajectory.push_back(st);
  }
  run.max_abs_psi = std::abs(st.psi);
  if (tol.contains(st.e, st.psi, st.delta)) {
    run.distance = 0.0;
    run.reached = true;
    return run;
  }
  while (st.s < budget) {
    const double u = hosm_control(WheelError::make(st.e, st.psi), st.delta, params, lambda);
    st = detail::advance_ramp(st, u, ds, params.delta_bar, lambda, ds,
        [](const ReachState &, double) {return true;});
    run.max_abs_psi = std::max(run.max_abs_psi, std::abs(st.psi));
    if (record) {
      run.trajectory.push_back(st);
    }
    if (tol.contains(st.e, st.psi, st.delta)) {
      run.distance = st.s - start.s;
      run.reached = true;
      break;
    }
  }
  return run;
}

/// Minimum-length reaching problem on a straight path.
struct OptimalReachSpec
{
  WheelError initial{};
  double delta0{0.0};
  double delta_bar{0.5};
  double ddelta_bar{2.0};
  ReachTolerance tol{};
  int max_switches{4};
  double ds{1e-3};
  double length_budget{30.0};
  int scan_points{60};       // first-arc scan
  int straight_points{24};   // straight-length scan

  void validate() const
  {
    if (!(delta_bar > 0.0 && delta_bar < kPi / 2.0) || !(ddelta_bar > 0.0)) {
      throw InvalidSpec("steering bounds must be positive");
    }
    if (!(tol.e > 0.0 && tol.psi > 0.0 && tol.delta > 0.0)) {
      throw InvalidSpec("terminal tolerance must be positive");
    }
    if (max_switches < 2) {
      throw InvalidSpec("at least two switches are needed");
    }
    if (scan_points < 2 || straight_points < 2) {
      throw InvalidSpec("search grids need at least two points");
    }
    if (std::abs(delta0) > delta_bar || !(ds > 0.0) || !(length_budget > 0.0)) {
      throw InvalidSpec("invalid reach specification");
    }
  }
};

/// One piece of a delta' profile.
struct ArcPiece
{
  double u{0.0};       // [rad/m]
  double length{0.0};  // [m]
};

struct ReachResult
{
  double distance{0.0};                 // first entry into the terminal box
  double profile_length{0.0};
  std::vector<double> switch_s;         // arc lengths where delta' changes
  std::array<double, 3> terminal{};     // (e, psi, delta) at the end of the profile
  std::vector<ArcPiece> profile;
  std::vector<ReachState> trajectory;
};

/// Simulates a delta' profile; returns the first entry distance into the tolerance box.
inline ReachResult simulate_profile(
  const OptimalReachSpec & spec, double lambda, const std::vector<ArcPiece> & profile,
  bool record)
{
  ReachResult r;
  r.profile = profile;
  ReachState st{0.0, 0.0, spec.initial.e, spec.initial.psi, spec.delta0};
  double entry = spec.tol.contains(st.e, st.psi, st.delta) ? 0.0 :
    std::numeric_limits<double>::infinity();
  if (record) {
    r.trajectory.push_back(st);
  }
  double prev_u = std::numeric_limits<double>::quiet_NaN();
  for (const ArcPiece & p : profile) {
    if (p.length <= 0.0) {
      continue;
    }
    if (!std::isnan(prev_u) && p.u != prev_u) {
      r.switch_s.push_back(st.s);
    }
    prev_u = p.u;
    st = detail::advance_ramp(st, p.u, p.length, spec.delta_bar, lambda, spec.ds,
        [&](const ReachState & q, double) {
          if (!std::isfinite(entry) && spec.tol.contains(q.e, q.psi, q.delta)) {
            entry = q.s;
          }
          if (record) {
            r.trajectory.push_back(q);
          }
          return true;
        });
  }
  r.profile_length = st.s;
  r.terminal = {st.e, st.psi, st.delta};
  r.distance = entry;
  return r;
}

namespace detail
{

/// Analytic (psi, delta) at the end of a profile, without the lateral error.
inline std::pair<double, double> profile_heading(
  double psi, double delta, const std::vector<ArcPiece> & prof, double bar, double lambda)
{
  for (const ArcPiece & p : prof) {
    if (p.length <= 0.0) {
      continue;
    }
    psi += ramp_heading_gain(delta, p.u, p.length, bar, lambda);
    delta = ramp_delta(delta, p.u, p.length, bar);
  }
  return {psi, delta};
}

class ReachSolver
{
public:
  ReachSolver(const OptimalReachSpec & spec, double lambda)
  : spec_(spec), lambda_(lambda), rate_(spec.ddelta_bar), bar_(spec.delta_bar) {}

  /// Pattern u = sg * (-, +, [0, +], -); sg = +1 first steers right.
  std::optional<std::vector<ArcPiece>> build(double sg, double a, double d, bool with_straight) const
  {
    const double u1 = -sg * rate_;
    std::vector<ArcPiece> prof{{u1, a}};
    const double delta_a = ramp_delta(spec_.delta0, u1, a, bar_);
    if (with_straight) {
      // return delta to 0, hold straight, then the final turn
      if (delta_a * sg > 0.0) {
        return std::nullopt;
      }
      prof.push_back({-u1, std::abs(delta_a) / rate_});
      prof.push_back({0.0, d});
    }
    const auto [psi_pre, delta_pre] = profile_heading(spec_.initial.psi, spec_.delta0, prof, bar_,
        lambda_);
    // smallest b that brings delta to the far side of 0
    const double b_min = std::max(0.0, -sg * delta_pre / rate_);
    auto final_psi = [&](double b) {
        std::vector<ArcPiece> tail{{-u1, b}};
        const double db = ramp_delta(delta_pre, -u1, b, bar_);
        tail.push_back({u1, std::abs(db) / rate_});
        return profile_heading(psi_pre, delta_pre, tail, bar_, lambda_).first;
      };
    // psi must end at 0; the tail turns psi in direction -sg... +sg for b >= b_min
    const double f_lo = final_psi(b_min) * sg;
    if (f_lo > 0.0) {
      return std::nullopt;
    }
    double hi = std::max(1e-3, 2.0 * b_min);
    int guard = 0;
    while (final_psi(hi) * sg < 0.0) {
      hi *= 2.0;
      if (++guard > 40 || hi > spec_.length_budget) {
        return std::nullopt;
      }
    }
    double lo = b_min;
    for (int i = 0; i < 80 && hi - lo > 1e-13; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (final_psi(mid) * sg < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double b = 0.5 * (lo + hi);
    prof.push_back({-u1, b});
    const double db = ramp_delta(delta_pre, -u1, b, bar_);
    prof.push_back({u1, std::abs(db) / rate_});
    return prof;
  }

  double final_e(const std::vector<ArcPiece> & prof) const
  {
    ReachState st{0.0, 0.0, spec_.initial.e, spec_.initial.psi, spec_.delta0};
    for (const ArcPiece & p : prof) {
      st = advance_ramp(st, p.u, p.length, bar_, lambda_, coarse_ds(),
          [](const ReachState &, double) {return true;});
    }
    return st.e;
  }

  /// Best profile for a fixed straight length, over roots of e_final(a) = 0.
  std::optional<ReachResult> solve_fixed(double sg, double d, bool with_straight) const
  {
    const int n_scan = spec_.scan_points;
    // with a straight, the first arc at most turns the heading to the normal of the path
    const double turn = (kPi / 2.0 + std::abs(spec_.initial.psi)) * lambda_ / std::tan(bar_);
    const double a_max = with_straight ? std::min(spec_.length_budget, 2.0 * bar_ / rate_ + turn) :
      spec_.length_budget / 4.0;
    std::optional<ReachResult> best;
    double prev_a = 0.0;
    std::optional<double> prev_e;
    for (int i = 0; i <= n_scan; ++i) {
      const double a = a_max * i / n_scan;
      const auto prof = build(sg, a, d, with_straight);
      if (!prof) {
        prev_e.reset();
        continue;
      }
      const double e = final_e(*prof);
      if (prev_e && (*prev_e) * e <= 0.0) {
        if (auto r = refine_root(sg, d, with_straight, prev_a, a, *prev_e)) {
          if (!best || r->distance < best->distance) {
            best = r;
          }
        }
      }
      prev_a = a;
      prev_e = e;
    }
    return best;
  }

  std::optional<ReachResult> refine_root(
    double sg, double d, bool with_straight, double lo, double hi, double e_lo) const
  {
    for (int i = 0; i < 60 && hi - lo > 1e-12; ++i) {
      const double mid = 0.5 * (lo + hi);
      const auto prof = build(sg, mid, d, with_straight);
      if (!prof) {
        return std::nullopt;
      }
      const double e = final_e(*prof);
      if (e * e_lo > 0.0) {
        lo = mid;
        e_lo = e;
      } else {
        hi = mid;
      }
    }
    const auto prof = build(sg, 0.5 * (lo + hi), d, with_straight);
    if (!prof) {
      return std::nullopt;
    }
    ReachResult r = simulate_profile(spec_, lambda_, *prof, false);
    if (!std::isfinite(r.distance)) {
      return std::nullopt;
    }
    return r;
  }

  std::optional<ReachResult> solve() const
  {
    std::optional<ReachResult> best;
    auto keep = [&](const std::optional<ReachResult> & r) {
        if (r && (!best || r->distance < best->distance)) {
          best = r;
        }
      };
    for (double sg : {-1.0, 1.0}) {
      keep(solve_fixed(sg, 0.0, false));
      if (spec_.max_switches >= 4) {
        // coarse scan over the straight length, then golden section around the best
        const int n = spec_.straight_points;
        const double d_max = std::min(spec_.length_budget, 4.0 * std::abs(spec_.initial.e) + 2.0);
        std::vector<double> vals(n + 1, std::numeric_limits<double>::infinity());
        int arg = -1;
        for (int i = 0; i <= n; ++i) {
          const auto r = solve_fixed(sg, d_max * i / n, true);
          if (r) {
            vals[i] = r->distance;
            keep(r);
            if (arg < 0 || vals[i] < vals[arg]) {
              arg = i;
            }
          }
        }
        if (arg >= 0) {
          double lo = d_max * std::max(0, arg - 1) / n, hi = d_max * std::min(n, arg + 1) / n;
          const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
          for (int it = 0; it < 30 && hi - lo > 1e-6; ++it) {
            const double c = hi - gr * (hi - lo), e = lo + gr * (hi - lo);
            const auto rc = solve_fixed(sg, c, true);
            const auto re = solve_fixed(sg, e, true);
            keep(rc);
            keep(re);
            const double fc = rc ? rc->distance : std::numeric_limits<double>::infinity();
            const double fe = re ? re->distance : std::numeric_limits<double>::infinity();
            if (fc < fe) {
              hi = e;
            } else {
              lo = c;
            }
          }
        }
      }
    }
    return best;
  }

private:
  double coarse_ds() const {return std::max(spec_.ds, 2e-3);}

  OptimalReachSpec spec_;
  double lambda_, rate_, bar_;
};

/// Pattern search on the piece lengths, minimizing the first entry into the terminal box.
inline std::vector<ArcPiece> polish_profile(
  const OptimalReachSpec & spec, double lambda, std::vector<ArcPiece> prof)
{
  auto cost = [&](const std::vector<ArcPiece> & p) {
      return simulate_profile(spec, lambda, p, false).distance;
    };
  double f = cost(prof);
  for (double h = 0.02; h > 1e-6; h *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      // single lengths, then switch points between neighbours
      for (std::size_t i = 0; i < prof.size(); ++i) {
        for (double step : {h, -h}) {
          std::vector<ArcPiece> trial = prof;
          trial[i].length = std::max(0.0, trial[i].length + step);
          const double ft = cost(trial);
          if (ft < f - 1e-12) {
            prof = std::move(trial);
            f = ft;
            improved = true;
          }
        }
      }
      for (std::size_t i = 0; i + 1 < prof.size(); ++i) {
        for (double step : {h, -h}) {
          if (prof[i].length + step < 0.0 || prof[i + 1].length - step < 0.0) {
            continue;
          }
          std::vector<ArcPiece> trial = prof;
          trial[i].length += step;
          trial[i + 1].length -= step;
          const double ft = cost(trial);
          if (ft < f - 1e-12) {
            prof = std::move(trial);
            f = ft;
            improved = true;
          }
        }
      }
    }
  }
  return prof;
}

}  // namespace detail

/**
 * @brief Minimum-length bang-off-bang steering profile to the straight reference path.
 *
 * delta' takes values in {-ddelta_bar, 0, +ddelta_bar}; holds at +-delta_bar come
 * from saturation. Two switches give the (-, +, -) family, four add a straight
 * hold at delta = 0 inside the middle arc. Both initial turn directions are tried.
 * For a fixed first-arc and straight length the middle arc follows from psi = 0
 * at the end by bisection; the first arc from e = 0 by scan and bisection; the
 * straight length by scan and golden section. The returned distance is the first
 * entry into the terminal box along the best profile.
 */
inline ReachResult optimal_reach(const OptimalReachSpec & spec, double lambda_veh)
{
  spec.validate();
  if (!(lambda_veh > 0.0)) {
    throw InvalidSpec("lambda must be positive");
  }
  if (spec.tol.contains(spec.initial.e, spec.initial.psi, spec.delta0)) {
    ReachResult r;
    r.terminal = {spec.initial.e, spec.initial.psi, spec.delta0};
    r.trajectory.push_back({0.0, 0.0, spec.initial.e, spec.initial.psi, spec.delta0});
    return r;
  }
  const auto best = detail::ReachSolver(spec, lambda_veh).solve();
  if (!best || best->distance > spec.length_budget) {
    throw NoSolution("no admissible steering profile reaches the path within the budget");
  }
  return simulate_profile(spec, lambda_veh, detail::polish_profile(spec, lambda_veh, best->profile),
           true);
}

namespace detail
{

/// Shortest path with |curvature| <= kappa from (e, psi) onto the line with aligned heading.
inline double curvature_bounded_to_line(double e, double psi, double kappa, int samples = 80)
{
  if (e == 0.0 && psi == 0.0) {
    return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (double c1 : {kappa, -kappa}) {
    for (double c2 : {kappa, -kappa}) {
      for (int i = -samples; i <= samples; ++i) {
        const double phi = i * (kPi / 2.0) / samples;
        const double a = (phi - psi) / c1;
        const double c = -phi / c2;
        if (a < 0.0 || c < 0.0) {
          continue;
        }
        // arc, straight at heading phi, arc
        const double rest = e + (std::cos(psi) - std::cos(phi)) / c1 + (std::cos(phi) - 1.0) / c2;
        const double sp = std::sin(phi);
        double b = 0.0;
        if (std::abs(sp) < 1e-12) {
          if (std::abs(rest) > 1e-9) {
            continue;
          }
        } else {
          b = -rest / sp;
        }
        if (b >= 0.0) {
          best = std::min(best, a + b + c);
        }
      }
    }
  }
  return best;
}

/// Bilinear table of curvature_bounded_to_line over |e| <= e_range, |psi| <= pi/2.
class LineDistanceTable
{
public:
  LineDistanceTable(double kappa, double e_range, double step)
  : e0_(-e_range), p0_(-kPi / 2.0), h_(step),
    ne_(static_cast<int>(std::ceil(2.0 * e_range / step)) + 2),
    np_(static_cast<int>(std::ceil(kPi / step)) + 2),
    v_(static_cast<std::size_t>(ne_) * np_)
  {
    for (int i = 0; i < ne_; ++i) {
      for (int j = 0; j < np_; ++j) {
        const double d = curvature_bounded_to_line(e0_ + i * h_, p0_ + j * h_, kappa);
        v_[static_cast<std::size_t>(i) * np_ + j] = std::isfinite(d) ? d : 1e3;
      }
    }
  }

  double operator()(double e, double psi) const
  {
    const double fe = (e - e0_) / h_, fp = (psi - p0_) / h_;
    const int i = std::clamp(static_cast<int>(fe), 0, ne_ - 2);
    const int j = std::clamp(static_cast<int>(fp), 0, np_ - 2);
    const double a = std::clamp(fe - i, 0.0, 1.0), b = std::clamp(fp - j, 0.0, 1.0);
    auto at = [&](int r, int c) {return v_[static_cast<std::size_t>(r) * np_ + c];};
    return (1 - a) * (1 - b) * at(i, j) + a * (1 - b) * at(i + 1, j) + (1 - a) * b * at(i, j + 1) +
           a * b * at(i + 1, j + 1);
  }

private:
  double e0_, p0_, h_;
  int ne_, np_;
  std::vector<double> v_;
};

}  // namespace detail

struct DpOptions
{
  double ds{0.01};          // layer length
  int levels{3};            // odd number of evenly spaced rates in [-ddelta_bar, ddelta_bar]
  double substep{0.002};    // terminal-box checks inside a layer
  double cell_e{0.006};
  double cell_psi{0.006};
  double cell_delta{0.012};
  double e_range{2.0};      // |e| beyond this is pruned
  int revisit_layers{2};    // a cell first reached this many layers ago prunes later arrivals
  double table_step{0.02};
  bool refine{true};        // pattern search on the piece lengths of the grid solution
  std::size_t max_nodes{60000000};
};

struct DpResult
{
  double grid_distance{0.0};  // best layered-search distance
  double distance{0.0};       // after refinement (equals grid_distance without it)
  std::vector<ArcPiece> profile;
};

/**
 * @brief Dynamic-programming oracle for the reaching distance.
 *
 * Breadth-first forward reachability with delta' held constant over layers of
 * length ds. Within a layer one state per (e, psi, delta) cell survives: the one
 * with the smallest estimated remaining length, i.e. the fastest unwind of delta
 * followed by the shortest curvature-bounded path onto the aligned line. A cell
 * first reached at least revisit_layers layers earlier prunes later arrivals.
 * The first arc length (resolved to substep) inside the terminal box is the grid
 * distance. Its control sequence is then merged into pieces whose lengths are
 * refined by pattern search. Every reported length belongs to an admissible
 * trajectory.
 */
inline DpResult dp_reach_oracle(const OptimalReachSpec & spec, double lambda, const DpOptions & opt = {})
{
  spec.validate();
  if (opt.levels < 3 || opt.levels % 2 == 0 || !(opt.ds > 0.0) || !(opt.substep > 0.0)) {
    throw InvalidSpec("DP options need an odd level count >= 3 and positive steps");
  }
  if (spec.tol.contains(spec.initial.e, spec.initial.psi, spec.delta0)) {
    return {};
  }
  std::vector<double> rates;
  for (int i = 0; i < opt.levels; ++i) {
    rates.push_back(spec.ddelta_bar * (2.0 * i / (opt.levels - 1) - 1.0));
  }
  auto key = [&](const ReachState & q) {
      const auto ie = static_cast<std::uint64_t>(std::llround(q.e / opt.cell_e) + (1 << 21));
      const auto ip = static_cast<std::uint64_t>(std::llround(q.psi / opt.cell_psi) + (1 << 20));
      const auto id = static_cast<std::uint64_t>(std::llround(q.delta / opt.cell_delta) + (1 << 20));
      return (ie << 42) | (ip << 21) | id;
    };
  const auto no_visit = [](const ReachState &, double) {return true;};
  const detail::LineDistanceTable table(std::tan(spec.delta_bar) / lambda, opt.e_range, opt.table_step);
  auto shrink = [](double x, double t) {return x > t ? x - t : (x < -t ? x + t : 0.0);};
  auto remaining = [&](const ReachState & q) {
      const double t = std::abs(q.delta) / spec.ddelta_bar;
      const double u = q.delta > 0.0 ? -spec.ddelta_bar : spec.ddelta_bar;
      const ReachState p = detail::advance_ramp(q, u, t, spec.delta_bar, lambda,
          std::max(0.25 * t, 1e-6), no_visit);
      return t + table(shrink(p.e, spec.tol.e), shrink(p.psi, spec.tol.psi));
    };

  struct Candidate
  {
    std::uint64_t cell;
    double score;
    std::uint32_t parent;
    std::uint8_t rate;
    ReachState q;
  };
  // back pointers of every layer's survivors
  std::vector<std::vector<std::pair<std::uint32_t, std::uint8_t>>> links;
  std::unordered_map<std::uint64_t, int> first_layer;
  std::vector<ReachState> layer{{0.0, 0.0, spec.initial.e, spec.initial.psi, spec.delta0}};
  first_layer.emplace(key(layer.front()), 0);
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_parent = 0;
  std::uint8_t best_rate = 0;
  std::vector<Candidate> next;
  for (int k = 1; k * opt.ds <= spec.length_budget + opt.ds && !layer.empty(); ++k) {
    next.clear();
    for (std::uint32_t j = 0; j < layer.size(); ++j) {
      for (std::uint8_t r = 0; r < rates.size(); ++r) {
        const ReachState n = detail::advance_ramp(layer[j], rates[r], opt.ds, spec.delta_bar,
            lambda, opt.substep, [&](const ReachState & q, double) {
              if (spec.tol.contains(q.e, q.psi, q.delta)) {
                if (q.s < best) {
                  best = q.s;
                  best_parent = j;
                  best_rate = r;
                }
                return false;
              }
              return true;
            });
        if (n.s < layer[j].s + opt.ds - 1e-12 || std::abs(n.e) > opt.e_range ||
          std::abs(n.psi) >= kPi / 2.0)
        {
          continue;
        }
        const std::uint64_t c = key(n);
        const auto [it, fresh] = first_layer.emplace(c, k);
        if (fresh || k - it->second < opt.revisit_layers) {
          next.push_back({c, remaining(n), j, r, n});
        }
      }
    }
    if (std::isfinite(best)) {
      break;
    }
    std::sort(next.begin(), next.end(), [](const Candidate & a, const Candidate & b) {
        return a.cell < b.cell || (a.cell == b.cell && a.score < b.score);
      });
    layer.clear();
    links.emplace_back();
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (i == 0 || next[i].cell != next[i - 1].cell) {
        layer.push_back(next[i].q);
        links.back().emplace_back(next[i].parent, next[i].rate);
      }
    }
    if (first_layer.size() > opt.max_nodes) {
      throw NoSolution("DP oracle exceeded its node budget");
    }
  }
  if (!std::isfinite(best)) {
    throw NoSolution("DP oracle found no path within the budget");
  }

  // rebuild the rate sequence, newest first
  std::vector<std::uint8_t> seq{best_rate};
  std::uint32_t idx = best_parent;
  for (std::size_t l = links.size(); l-- > 0; ) {
    seq.push_back(links[l][idx].second);
    idx = links[l][idx].first;
  }
  std::reverse(seq.begin(), seq.end());
  DpResult out;
  out.grid_distance = best;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const double len = i + 1 < seq.size() ? opt.ds : best - opt.ds * static_cast<double>(i);
    if (!out.profile.empty() && out.profile.back().u == rates[seq[i]]) {
      out.profile.back().length += len;
    } else {
      out.profile.push_back({rates[seq[i]], len});
    }
  }
  out.distance = best;
  if (opt.refine) {
    out.profile = detail::polish_profile(spec, lambda, std::move(out.profile));
    out.distance = std::min(best, simulate_profile(spec, lambda, out.profile, false).distance);
  }
  return out;
}

/// Trace rows (unit speed, t = s) for a reaching trajectory.
inline std::vector<TraceRow> reach_trace(const std::vector<ReachState> & traj, double lambda)
{
  std::vector<TraceRow> rows;
  rows.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const ReachState & q = traj[i];
    TraceRow r;
    r.t = q.s;
    r.s = q.s;
    r.x = q.x;
    r.y = q.e;
    r.psi = q.psi;
    r.v = 1.0;
    r.delta_cmd = q.delta;
    r.delta_veh = q.delta;
    if (i + 1 < traj.size() && traj[i + 1].s > q.s) {
      r.ddelta_dt = (traj[i + 1].delta - q.delta) / (traj[i + 1].s - q.s);
    }
    r.e = q.e;
    r.e_f = q.e + lambda * std::sin(q.psi);
    r.e_l = r.e_f;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dubins_smc

#endif  // DUBINS_SMC__BASELINES_HPP_
