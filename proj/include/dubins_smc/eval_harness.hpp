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

#ifndef DUBINS_SMC__EVAL_HARNESS_HPP_
#define DUBINS_SMC__EVAL_HARNESS_HPP_

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dubins_smc/baselines.hpp"
#include "dubins_smc/common.hpp"
#include "dubins_smc/errors.hpp"
#include "dubins_smc/param_tuner.hpp"
#include "dubins_smc/plant_sim.hpp"
#include "dubins_smc/ref_path.hpp"
#include "dubins_smc/smc_controller.hpp"

namespace dubins_smc
{

enum class PlantKind { Kinematic, Kinetic };

enum class ControllerKind { C0, C1, Cn, Hosm, Optimal, Scheduled };

/// Speed of the vehicle: constant v0, or linear in time from v0 to v1 over ramp_time.
struct SpeedSpec
{
  double v0{5.0};
  double v1{5.0};
  double ramp_time{0.0};  // [s]

  double at(double t) const
  {
    if (!(ramp_time > 0.0) || t <= 0.0) {
      return v0;
    }
    return t >= ramp_time ? v1 : v0 + (v1 - v0) * t / ramp_time;
  }
  double accel(double t) const
  {
    return ramp_time > 0.0 && t >= 0.0 && t < ramp_time ? (v1 - v0) / ramp_time : 0.0;
  }
};

struct ControllerSpec
{
  ControllerKind kind{ControllerKind::C1};
  double rate_hz{50.0};
  ControllerParams params{};   // C0 / C1 / Cn
  HosmParams hosm{};           // HOSM; its steering bounds also drive the optimal profile

  // gain scheduling over speed
  ActuatorLimits limits{};
  double k_rob{0.5};
  double kappa_scale{1.0};
  double lambda_l_scale{1.0};
  double lambda_l_cap{0.95};   // relative to lambda_veh
  double schedule_step{0.5};   // [m/s]
  std::vector<ScheduleEntry> schedule;  // filled on demand when empty
};

/// A closed-loop experiment.
struct Scenario
{
  std::string name{"scenario"};
  std::vector<ArcSpec> path{{0.0, 100.0}};
  Pose2 path_start{};
  double corridor{RefPath::kDefaultCorridor};

  PlantKind plant{PlantKind::Kinematic};
  VehicleParams vehicle{};
  SpeedSpec speed{};

  // rear axle relative to the path start
  double e0{0.0};
  double psi0{0.0};
  double delta0{0.0};  // real steering angle

  ControllerSpec controller{};
  DisturbanceSpec disturbance{};

  double duration{20.0};                                        // [s]
  double length_budget{std::numeric_limits<double>::infinity()};  // [m] of rear travel
  double plant_rate_hz{1000.0};
  double abort_e{20.0};  // [m]
  int record_every{1};   // plant steps per trace row

  void validate() const
  {
    if (!(controller.rate_hz > 0.0) || !(plant_rate_hz > 0.0)) {
      throw InvalidSpec("rates must be positive");
    }
    if (controller.rate_hz > plant_rate_hz * (1.0 + 1e-12)) {
      throw InvalidSpec("controller rate must not exceed the plant rate");
    }
    if (!(duration > 0.0) || !(length_budget > 0.0)) {
      throw InvalidSpec("budget must be positive");
    }
    if (!(abort_e > 0.0) || record_every < 1) {
      throw InvalidSpec("invalid abort bound or recording interval");
    }
    if (!(speed.v0 >= 0.0 && speed.v1 >= 0.0)) {
      throw InvalidSpec("speeds must be non-negative");
    }
    if (controller.kind == ControllerKind::Scheduled &&
      (!(controller.kappa_scale > 0.0) || !(controller.lambda_l_scale > 0.0) ||
      !(controller.lambda_l_cap > 0.0 && controller.lambda_l_cap < 1.0) ||
      !(controller.schedule_step > 0.0)))
    {
      throw InvalidSpec("invalid scheduling options");
    }
    vehicle.validate();
    disturbance.validate();
  }
};

struct Trajectory
{
  std::string name;
  std::vector<TraceRow> rows;
  bool diverged{false};
  std::size_t saturated_steps{0};  // plant steps with the command clipped to delta_max
};

// ---------------------------------------------------------------------------
// scheduling

/// Schedule entries over [v_lo, v_hi] (inclusive) computed in parallel.
inline std::vector<ScheduleEntry> build_schedule_table(
  double v_lo, double v_hi, double step, const ActuatorLimits & limits, double lambda_veh,
  const ScheduleOptions & opt = {})
{
  if (!(v_lo > 0.0) || !(v_hi >= v_lo) || !(step > 0.0)) {
    throw InvalidSpec("invalid velocity grid");
  }
  std::vector<double> vs;
  for (double v = v_lo; v < v_hi - 1e-9; v += step) {
    vs.push_back(v);
  }
  vs.push_back(v_hi);
  std::vector<std::future<ScheduleEntry>> jobs;
  for (double v : vs) {
    jobs.push_back(std::async(std::launch::async, [=, &limits, &opt] {
        return schedule(v, limits, lambda_veh, opt);
      }));
  }
  std::vector<ScheduleEntry> out;
  for (auto & j : jobs) {
    out.push_back(j.get());
  }
  return out;
}

/// Controller parameters at speed v from a schedule table, with the variation scales applied.
inline ControllerParams scheduled_params(const ControllerSpec & spec, double v, double lambda_veh)
{
  const auto & tab = spec.schedule;
  if (tab.empty()) {
    throw InvalidSpec("empty schedule table");
  }
  double kappa = tab.front().kappa_l_bar, ll = tab.front().lambda_l;
  if (v >= tab.back().v) {
    kappa = tab.back().kappa_l_bar;
    ll = tab.back().lambda_l;
  } else if (v > tab.front().v) {
    std::size_t i = 1;
    while (tab[i].v < v) {
      ++i;
    }
    const double w = (v - tab[i - 1].v) / (tab[i].v - tab[i - 1].v);
    kappa = (1.0 - w) * tab[i - 1].kappa_l_bar + w * tab[i].kappa_l_bar;
    ll = (1.0 - w) * tab[i - 1].lambda_l + w * tab[i].lambda_l;
  }
  // a variation of lambda_l leaves the fictive wheelbase at its scheduled value
  const double lambda = lambda_from_cornering(lambda_veh, std::min(ll, spec.lambda_l_cap * lambda_veh));
  ll *= spec.lambda_l_scale;
  kappa = std::min(kappa * spec.kappa_scale, 1.0 / ll);
  return {kappa, spec.k_rob, {lambda, ll}, 0.0};
}

// ---------------------------------------------------------------------------
// controllers

namespace detail
{

/// Real steering command with its path derivatives, plus the outermost wheel error.
struct DriverOutput
{
  VehicleSteering steer;
  double e_lead{0.0};
};

class Driver
{
public:
  virtual ~Driver() = default;
  // ds: rear travel since the previous sample
  virtual DriverOutput sample(
    const Pose2 & measured_rear, const WheelError & measured_err, double ds, double v) = 0;
  // error of the outermost controlled wheel for the true rear pose
  virtual double lead_error(const Pose2 & rear) const = 0;
};

class ChainDriver : public Driver
{
public:
  ChainDriver(const Scenario & sc, const RefPath & path)
  : spec_(sc.controller), path_(path), lambda_veh_(sc.vehicle.lambda_veh),
    kappa_d_(sc.disturbance.matched_kappa_d),
    ctl_(initial_params(sc))
  {
    ctl_.reset(fictive_from_vehicle(sc.delta0, ctl_.params().lambdas.front(), lambda_veh_));
  }

  DriverOutput sample(const Pose2 & rear, const WheelError &, double ds, double v) override
  {
    if (ds > 0.0) {
      ctl_.advance(kappa_, ds, 0.01);
    }
    if (spec_.kind == ControllerKind::Scheduled) {
      retune(scheduled_params(spec_, v, lambda_veh_));
    }
    const auto d = ctl_.decide(rear, path_);
    kappa_ = d.kappa + kappa_d_;
    const std::vector<double> der = ctl_.steering_derivatives(kappa_);
    const double dd = der.size() > 1 ? der[1] : 0.0;
    return {vehicle_steering(ctl_.delta(), der[0], dd, ctl_.params().lambdas.front(), lambda_veh_),
      d.wheels.back().e};
  }

  double lead_error(const Pose2 & rear) const override
  {
    const auto poses = chain_poses(rear, ctl_.fictive(), ctl_.params().lambdas);
    return path_.project(poses.back().position).e;
  }

private:
  static ControllerParams initial_params(const Scenario & sc)
  {
    if (sc.controller.kind == ControllerKind::Scheduled) {
      return scheduled_params(sc.controller, sc.speed.at(0.0), sc.vehicle.lambda_veh);
    }
    ControllerParams p = sc.controller.params;
    if (sc.controller.kind == ControllerKind::C0 && p.order() != 1) {
      throw InvalidSpec("C0 controller needs exactly one wheelbase");
    }
    if (sc.controller.kind == ControllerKind::C1 && p.order() != 2) {
      throw InvalidSpec("C1 controller needs exactly two wheelbases");
    }
    return p;
  }

  // keeps delta and its path derivatives across a parameter change
  void retune(const ControllerParams & p)
  {
    const auto & old = ctl_.params();
    if (p.kappa_bar == old.kappa_bar && p.lambdas == old.lambdas && p.k_rob == old.k_rob) {
      return;
    }
    const std::vector<double> d = derivatives_from_fictive(ctl_.fictive(), old.lambdas);
    const double delta = ctl_.delta();
    ctl_ = ChainController(p);
    ctl_.set_fictive(chain_fictive_angles(delta, d, p.lambdas));
  }

  ControllerSpec spec_;
  const RefPath & path_;
  double lambda_veh_;
  double kappa_d_;
  ChainController ctl_;
  double kappa_{0.0};
};

class HosmDriver : public Driver
{
public:
  HosmDriver(const Scenario & sc, const RefPath & path)
  : params_(sc.controller.hosm), path_(path), lambda_(sc.vehicle.lambda_veh), delta_(sc.delta0)
  {
    params_.validate(lambda_);
  }

  DriverOutput sample(const Pose2 &, const WheelError & err, double ds, double) override
  {
    delta_ = std::clamp(delta_ + u_ * ds, -params_.delta_bar, params_.delta_bar);
    u_ = hosm_control(err, delta_, params_, lambda_);
    return {{delta_, u_, 0.0}, err.e + lambda_ * std::sin(err.psi)};
  }

  double lead_error(const Pose2 & rear) const override
  {
    return path_.project(rear.position + heading_vector(rear.heading) * lambda_).e;
  }

private:
  HosmParams params_;
  const RefPath & path_;
  double lambda_;
  double delta_;
  double u_{0.0};
};

/// Open-loop playback of the shortest reaching profile computed from the initial error.
class OptimalDriver : public Driver
{
public:
  OptimalDriver(const Scenario & sc, const RefPath & path)
  : path_(path), lambda_(sc.vehicle.lambda_veh), delta_(sc.delta0),
    bar_(sc.controller.hosm.delta_bar)
  {
    OptimalReachSpec spec;
    spec.initial = WheelError::make(sc.e0, sc.psi0);
    spec.delta0 = sc.delta0;
    spec.delta_bar = sc.controller.hosm.delta_bar;
    spec.ddelta_bar = sc.controller.hosm.ddelta_bar;
    profile_ = optimal_reach(spec, lambda_).profile;
  }

  DriverOutput sample(const Pose2 &, const WheelError & err, double ds, double) override
  {
    // the profile relies on saturation at the steering bound
    delta_ = std::clamp(delta_ + u_ * ds, -bar_, bar_);
    s_ += ds;
    u_ = 0.0;
    double acc = 0.0;
    bool done = true;
    for (const ArcPiece & p : profile_) {
      if (s_ < acc + p.length) {
        u_ = p.u;
        done = false;
        break;
      }
      acc += p.length;
    }
    if (done) {
      delta_ = 0.0;  // profile done: drive straight
    }
    return {{delta_, u_, 0.0}, err.e + lambda_ * std::sin(err.psi)};
  }

  double lead_error(const Pose2 & rear) const override
  {
    return path_.project(rear.position + heading_vector(rear.heading) * lambda_).e;
  }

private:
  const RefPath & path_;
  double lambda_;
  double delta_;
  double bar_;
  double s_{0.0};
  double u_{0.0};
  std::vector<ArcPiece> profile_;
};

inline std::unique_ptr<Driver> make_driver(const Scenario & sc, const RefPath & path)
{
  switch (sc.controller.kind) {
    case ControllerKind::Hosm:
      return std::make_unique<HosmDriver>(sc, path);
    case ControllerKind::Optimal:
      return std::make_unique<OptimalDriver>(sc, path);
    default:
      return std::make_unique<ChainDriver>(sc, path);
  }
}

}  // namespace detail

/// Fills an empty schedule table for the scenario's speed range.
inline void prepare_schedule(Scenario & sc)
{
  auto & c = sc.controller;
  if (c.kind != ControllerKind::Scheduled || !c.schedule.empty()) {
    return;
  }
  const double lo = std::max(0.5, std::min(sc.speed.v0, sc.speed.v1));
  const double hi = std::max(lo, std::max(sc.speed.v0, sc.speed.v1));
  c.schedule = build_schedule_table(lo, hi, c.schedule_step, c.limits, sc.vehicle.lambda_veh);
}

/**
 * @brief Simulates a scenario.
 *
 * The controller is sampled every 1 / rate_hz seconds on the measured (noisy)
 * rear pose; its steering command is held in between. The plant advances with
 * the fixed step 1 / plant_rate_hz. The run stops at the duration, the length
 * budget, the end of the path or when |e| exceeds abort_e (marked diverged).
 */
inline Trajectory run_closed_loop(Scenario sc)
{
  sc.validate();
  prepare_schedule(sc);
  const RefPath path = build_arc_sequence(sc.path, sc.path_start, sc.corridor);
  Observer observer(sc.disturbance);
  auto driver = detail::make_driver(sc, path);
  const VehicleParams & veh = sc.vehicle;

  KineticState st;
  {
    const Vec2 p = path.reconstruct(0.0, sc.e0);
    st.x = p.x;
    st.y = p.y;
    st.psi = path.heading_at(0.0) + sc.psi0;
    st.delta_veh = sc.delta0;
    st.actuator = {sc.delta0, sc.delta0, sc.delta0};
    st.v = sc.speed.at(0.0);
  }
  const SpeedProfile speed = [&sc](double t) {return sc.speed.at(t);};

  Trajectory traj;
  traj.name = sc.name;
  const double dt = 1.0 / sc.plant_rate_hz;
  const double tc = 1.0 / sc.controller.rate_hz;
  const auto steps = static_cast<long long>(std::floor(sc.duration * sc.plant_rate_hz + 1e-9));
  traj.rows.reserve(static_cast<std::size_t>(steps / sc.record_every + 2));

  long long samples = 0;
  double s_at_sample = st.s;
  detail::DriverOutput out;
  double cmd = 0.0;
  auto record = [&](double e, double e_f) {
      TraceRow r;
      r.t = st.t;
      r.s = st.s;
      r.x = st.x;
      r.y = st.y;
      r.psi = st.psi;
      r.v = st.v;
      r.delta_cmd = cmd;
      r.delta_veh = st.delta_veh;
      if (sc.plant == PlantKind::Kinetic) {
        const auto rates = st.steering_rates(veh.actuator_cutoff_hz);
        r.ddelta_dt = rates[0];
        r.dddelta_dt = rates[1];
        r.beta = st.side_slip;
      } else {
        r.ddelta_dt = out.steer.d1 * st.v;
        r.dddelta_dt = out.steer.d2 * st.v * st.v + out.steer.d1 * sc.speed.accel(st.t);
      }
      r.e = e;
      r.e_f = e_f;
      r.e_l = driver->lead_error(st.pose());
      traj.rows.push_back(r);
    };

  for (long long k = 0; ; ++k) {
    const Pose2 rear = st.pose();
    double e = 0.0, e_f = 0.0;
    try {
      e = path.project(rear.position).e;
      e_f = path.project(rear.position + heading_vector(rear.heading) * veh.lambda_veh).e;
    } catch (const CorridorExceeded &) {
      traj.diverged = true;
      break;
    }
    if (st.t >= samples * tc - 1e-9 * tc) {
      const Observer::Sample m = observer.sample(rear, path);
      out = driver->sample(m.pose, m.error, st.s - s_at_sample, st.v);
      s_at_sample = st.s;
      ++samples;
    }
    cmd = out.steer.angle;
    const double applied = std::clamp(cmd, -veh.delta_max, veh.delta_max);
    if (sc.plant == PlantKind::Kinematic) {
      st.delta_veh = applied;  // no actuator dynamics
    }
    if (k % sc.record_every == 0) {
      record(e, e_f);
    }
    if (std::abs(e) > sc.abort_e) {
      traj.diverged = true;
      break;
    }
    if (k >= steps || st.s >= sc.length_budget ||
      path.project(rear.position).s_star >= path.total_length() - 1e-9)
    {
      break;
    }
    if (applied != cmd) {
      ++traj.saturated_steps;
    }
    if (sc.plant == PlantKind::Kinetic) {
      st = step_kinetic(st, applied, dt, veh, speed);
    } else {
      const double v0 = sc.speed.at(st.t), v1 = sc.speed.at(st.t + dt);
      const double ds = 0.5 * (v0 + v1) * dt;
      const double t = st.t;
      if (ds > 0.0) {
        static_cast<KinematicState &>(st) = step_kinematic(st, applied, ds, veh);
      }
      st.t = t + dt;
      st.v = v1;
    }
  }
  return traj;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsRecord
{
  double t_r{0.0};
  double max_e_l_post{0.0};
  double std_ddelta_dt{0.0};
  double std_dddelta_dt{0.0};
  double reach_distance{0.0};
  double max_e{0.0};
  double max_e_f{0.0};
  bool reached{true};
};

/**
 * @brief Performance indicators of a trace.
 *
 * t_r is the time of the first sample after the last one with |e_l| >= eps.
 * All other indicators are taken over the samples with t > t_r. Without such a
 * time the record is marked not reached; t_r and reach_distance then hold the
 * end of the trace and the maxima cover the whole trace.
 */
inline MetricsRecord compute_metrics(const std::vector<TraceRow> & rows, double eps_reach = 0.05)
{
  if (rows.empty()) {
    throw InvalidSpec("empty trace");
  }
  if (!(eps_reach > 0.0)) {
    throw InvalidSpec("reaching band must be positive");
  }
  MetricsRecord m;
  std::size_t first = 0;
  for (std::size_t i = rows.size(); i-- > 0; ) {
    if (!(std::abs(rows[i].e_l) < eps_reach)) {
      first = i + 1;
      break;
    }
  }
  std::size_t from = first + 1;
  if (first >= rows.size()) {
    m.reached = false;
    m.t_r = rows.back().t;
    m.reach_distance = rows.back().s;
    from = 0;
  } else {
    m.t_r = rows[first].t;
    m.reach_distance = rows[first].s;
  }
  double n = 0, s1 = 0, q1 = 0, s2 = 0, q2 = 0;
  for (std::size_t i = from; i < rows.size(); ++i) {
    const TraceRow & r = rows[i];
    if (m.reached && !(r.t > m.t_r)) {
      continue;
    }
    m.max_e = std::max(m.max_e, std::abs(r.e));
    m.max_e_f = std::max(m.max_e_f, std::abs(r.e_f));
    if (!m.reached) {
      continue;
    }
    m.max_e_l_post = std::max(m.max_e_l_post, std::abs(r.e_l));
    n += 1;
    s1 += r.ddelta_dt;
    q1 += r.ddelta_dt * r.ddelta_dt;
    s2 += r.dddelta_dt;
    q2 += r.dddelta_dt * r.dddelta_dt;
  }
  if (n > 0) {
    m.std_ddelta_dt = std::sqrt(std::max(0.0, q1 / n - (s1 / n) * (s1 / n)));
    m.std_dddelta_dt = std::sqrt(std::max(0.0, q2 / n - (s2 / n) * (s2 / n)));
  }
  return m;
}

inline MetricsRecord compute_metrics(const Trajectory & traj, double eps_reach = 0.05)
{
  MetricsRecord m = compute_metrics(traj.rows, eps_reach);
  if (traj.diverged) {
    m.reached = false;
  }
  return m;
}

inline constexpr const char * kMetricsHeader =
  "name,reached,t_r,reach_distance,max_e_l_post,std_ddelta_dt,std_dddelta_dt,max_e,max_e_f";

inline void write_metrics_csv(
  std::ostream & os, const std::vector<std::string> & names, const std::vector<MetricsRecord> & recs)
{
  os << kMetricsHeader << '\n';
  const auto old = os.precision(10);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const MetricsRecord & m = recs[i];
    os << (i < names.size() ? names[i] : std::to_string(i)) << ',' << (m.reached ? 1 : 0) << ',' <<
      m.t_r << ',' << m.reach_distance << ',' << m.max_e_l_post << ',' << m.std_ddelta_dt << ',' <<
      m.std_dddelta_dt << ',' << m.max_e << ',' << m.max_e_f << '\n';
  }
  os.precision(old);
}

// ---------------------------------------------------------------------------
// comparison

inline constexpr std::array<const char *, 4> kRadarIndicators{
  "t_r", "max_e_l_post", "std_ddelta_dt", "std_dddelta_dt"};

/// Indicators of each record divided by those of the first one.
struct Comparison
{
  std::vector<std::string> names;
  std::vector<std::array<double, 4>> ratios;
};

inline std::array<double, 4> radar_values(const MetricsRecord & m)
{
  return {m.t_r, m.max_e_l_post, m.std_ddelta_dt, m.std_dddelta_dt};
}

inline Comparison radar_compare(
  const std::vector<MetricsRecord> & recs, std::vector<std::string> names = {})
{
  if (recs.size() < 2) {
    throw InvalidSpec("at least two records are needed");
  }
  names.resize(recs.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) {
      names[i] = i == 0 ? "baseline" : "setting_" + std::to_string(i);
    }
  }
  Comparison c{names, {}};
  const auto base = radar_values(recs.front());
  for (const MetricsRecord & m : recs) {
    const auto v = radar_values(m);
    std::array<double, 4> r{};
    for (std::size_t k = 0; k < 4; ++k) {
      if (base[k] == v[k]) {
        r[k] = 1.0;
      } else {
        r[k] = base[k] != 0.0 ? v[k] / base[k] : std::numeric_limits<double>::infinity();
      }
    }
    c.ratios.push_back(r);
  }
  return c;
}

inline void write_comparison_csv(std::ostream & os, const Comparison & c)
{
  os << "name";
  for (const char * k : kRadarIndicators) {
    os << ',' << k;
  }
  os << '\n';
  const auto old = os.precision(8);
  for (std::size_t i = 0; i < c.names.size(); ++i) {
    os << c.names[i];
    for (double r : c.ratios[i]) {
      os << ',' << r;
    }
    os << '\n';
  }
  os.precision(old);
}

// ---------------------------------------------------------------------------
// batch

struct RunResult
{
  Trajectory trajectory;
  MetricsRecord metrics;
  std::string error;  // non-empty when the run threw
};

/// Runs independent scenarios on a pool of worker threads; results keep the input order.
inline std::vector<RunResult> run_batch(
  const std::vector<Scenario> & scenarios, double eps_reach = 0.05, unsigned threads = 0)
{
  std::vector<RunResult> out(scenarios.size());
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, scenarios.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
      for (std::size_t i = next++; i < scenarios.size(); i = next++) {
        try {
          out[i].trajectory = run_closed_loop(scenarios[i]);
          out[i].metrics = compute_metrics(out[i].trajectory, eps_reach);
        } catch (const std::exception & ex) {
          out[i].error = ex.what();
          out[i].metrics.reached = false;
        }
      }
    };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) {
    pool.emplace_back(work);
  }
  work();
  for (auto & t : pool) {
    t.join();
  }
  return out;
}

// ---------------------------------------------------------------------------
// preset scenarios

/// Arc-sequence course driven while accelerating from 2.8 to 12.5 m/s, starting 1 m off the path.
inline Scenario winding_road_scenario()
{
  Scenario sc;
  sc.name = "winding_road";
  sc.path = {{1.0 / 25.0, 35.0}, {-1.0 / 30.0, 45.0}, {1.0 / 60.0, 70.0}, {-1.0 / 80.0, 80.0},
    {1.0 / 120.0, 80.0}, {0.0, 60.0}};
  sc.plant = PlantKind::Kinetic;
  sc.vehicle.actuator_cutoff_hz = 15.0;  // 5 Hz stages limit-cycle above ~9 m/s
  sc.speed = {2.8, 12.5, 45.0};
  sc.duration = 45.0;
  sc.e0 = 1.0;
  sc.controller.kind = ControllerKind::Scheduled;
  sc.controller.rate_hz = 50.0;
  sc.controller.k_rob = 0.5;
  sc.disturbance.noise_std_e = 0.005;
  sc.disturbance.noise_std_psi = 0.001;
  sc.disturbance.seed = 2026;
  sc.record_every = 10;
  prepare_schedule(sc);
  return sc;
}

/// Baseline plus the three one-parameter variations (kappa_l -50 %, lambda_l +300 %, k_rob -33 %).
inline std::vector<Scenario> parameter_variations(const Scenario & base)
{
  std::vector<Scenario> out(4, base);
  out[0].name = base.name + "_baseline";
  out[1].name = base.name + "_kappa_l_-50";
  out[1].controller.kappa_scale *= 0.5;
  out[2].name = base.name + "_lambda_l_+300";
  out[2].controller.lambda_l_scale *= 4.0;
  out[3].name = base.name + "_k_rob_-33";
  out[3].controller.k_rob *= 2.0 / 3.0;
  return out;
}

// ---------------------------------------------------------------------------
// reaching benchmark

struct ReachBenchmarkOptions
{
  double lambda{1.0};
  double e0{-0.5};
  double delta_bar{0.5};
  double ddelta_bar{2.0};
  double delta0{0.0};
  ReachTolerance tol{};
  std::vector<double> psi0{0.0, 0.2 * kPi, -0.2 * kPi};
  double ds{1e-3};
  double budget{30.0};
  bool with_dp{false};
};

struct ReachBenchmarkRow
{
  double psi0{0.0};
  double optimal{0.0};
  double c0{0.0};
  double hosm{0.0};
  double dp{std::numeric_limits<double>::quiet_NaN()};
};

/// Largest outermost curvature of the C0 law whose invariant set respects both steering bounds.
inline double c0_kappa_bar(double lambda, double delta_bar, double ddelta_bar)
{
  double lo = 0.0, hi = std::min(1.0, std::sin(delta_bar)) / lambda;
  auto ok = [&](double k) {
      const double d = std::asin(std::min(1.0, k * lambda));
      return d <= delta_bar && 2.0 * k / std::cos(d) <= ddelta_bar;
    };
  if (ok(hi)) {
    return hi;
  }
  for (int i = 0; i < 100; ++i) {
    const double m = 0.5 * (lo + hi);
    (ok(m) ? lo : hi) = m;
  }
  return lo;
}

/// Distance the C0 law needs until (e, psi, delta) first enters the tolerance box.
inline double c0_reach_distance(
  const WheelError & initial, double delta0, double lambda, double kappa_bar,
  const ReachTolerance & tol, double ds = 1e-3, double budget = 30.0)
{
  ChainController c({kappa_bar, 0.0, {lambda}, 0.0});
  c.reset(delta0);
  ReachState st{0.0, 0.0, initial.e, initial.psi, delta0};
  const auto visit = [](const ReachState &, double) {return true;};
  while (st.s < budget) {
    if (tol.contains(st.e, st.psi, st.delta)) {
      return st.s;
    }
    const auto d = c.decide_straight(WheelError::make(st.e, st.psi));
    const double u = c.steering_derivatives(d.kappa)[0];
    st = detail::advance_ramp(st, u, ds, 0.5 * kPi - 1e-6, lambda, ds, visit);
    c.set_fictive({st.delta});
  }
  return std::numeric_limits<double>::infinity();
}

/// HOSM heading bound minimizing the reaching distance at psi(0) = 0, from a grid.
inline HosmParams tune_hosm(const ReachBenchmarkOptions & o)
{
  HosmParams best;
  best.delta_bar = o.delta_bar;
  best.ddelta_bar = o.ddelta_bar;
  double best_d = std::numeric_limits<double>::infinity();
  for (double pb = 0.05; pb < 1.5; pb += 0.05) {
    HosmParams p = best;
    p.psi_bar = pb;
    if (!(p.alpha(o.lambda) > 0.0)) {
      continue;
    }
    const auto run = simulate_hosm_reach({0.0, 0.0, o.e0, 0.0, o.delta0}, p, o.lambda, o.tol, o.ds,
        o.budget);
    if (run.reached && run.distance < best_d) {
      best_d = run.distance;
      best = p;
    }
  }
  if (!std::isfinite(best_d)) {
    throw NoSolution("no HOSM heading bound reaches the path");
  }
  return best;
}

inline std::vector<ReachBenchmarkRow> benchmark_reach(const ReachBenchmarkOptions & o = {})
{
  const HosmParams hosm = tune_hosm(o);
  const double kb = c0_kappa_bar(o.lambda, o.delta_bar, o.ddelta_bar);
  std::vector<std::future<ReachBenchmarkRow>> jobs;
  for (double p0 : o.psi0) {
    jobs.push_back(std::async(std::launch::async, [=, &o, &hosm] {
        ReachBenchmarkRow r;
        r.psi0 = p0;
        OptimalReachSpec spec;
        spec.initial = WheelError::make(o.e0, p0);
        spec.delta0 = o.delta0;
        spec.delta_bar = o.delta_bar;
        spec.ddelta_bar = o.ddelta_bar;
        spec.tol = o.tol;
        spec.length_budget = o.budget;
        r.optimal = optimal_reach(spec, o.lambda).distance;
        r.c0 = c0_reach_distance(spec.initial, o.delta0, o.lambda, kb, o.tol, o.ds, o.budget);
        r.hosm = simulate_hosm_reach({0.0, 0.0, o.e0, p0, o.delta0}, hosm, o.lambda, o.tol, o.ds,
            o.budget).distance;
        if (o.with_dp) {
          r.dp = dp_reach_oracle(spec, o.lambda).distance;
        }
        return r;
      }));
  }
  std::vector<ReachBenchmarkRow> out;
  for (auto & j : jobs) {
    out.push_back(j.get());
  }
  return out;
}

inline void write_benchmark_csv(std::ostream & os, const std::vector<ReachBenchmarkRow> & rows)
{
  os << "psi0,optimal,c0,hosm,dp\n";
  const auto old = os.precision(8);
  for (const auto & r : rows) {
    os << r.psi0 << ',' << r.optimal << ',' << r.c0 << ',' << r.hosm << ',' << r.dp << '\n';
  }
  os.precision(old);
}

// ---------------------------------------------------------------------------
// scenario files

namespace detail
{

inline ControllerKind controller_kind(const std::string & s)
{
  if (s == "C0") {return ControllerKind::C0;}
  if (s == "C1") {return ControllerKind::C1;}
  if (s == "Cn") {return ControllerKind::Cn;}
  if (s == "HOSM") {return ControllerKind::Hosm;}
  if (s == "optimal") {return ControllerKind::Optimal;}
  if (s == "scheduled") {return ControllerKind::Scheduled;}
  throw InvalidSpec("unknown controller kind: " + s);
}

template<class T>
void read_opt(const nlohmann::json & j, const char * key, T & out)
{
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

}  // namespace detail

inline VehicleParams vehicle_from_json(const nlohmann::json & j, VehicleParams v = {})
{
  detail::read_opt(j, "lambda_veh", v.lambda_veh);
  detail::read_opt(j, "delta_max", v.delta_max);
  detail::read_opt(j, "mass", v.mass);
  detail::read_opt(j, "yaw_inertia", v.yaw_inertia);
  detail::read_opt(j, "front_weight_share", v.front_weight_share);
  detail::read_opt(j, "actuator_cutoff_hz", v.actuator_cutoff_hz);
  if (j.contains("tire")) {
    const auto & t = j.at("tire");
    detail::read_opt(t, "B", v.tire.B);
    detail::read_opt(t, "C", v.tire.C);
    detail::read_opt(t, "E", v.tire.E);
    detail::read_opt(t, "mu", v.tire.mu);
  }
  v.validate();
  return v;
}

inline ActuatorLimits limits_from_json(const nlohmann::json & j, ActuatorLimits l = {})
{
  detail::read_opt(j, "delta_max", l.delta_max);
  detail::read_opt(j, "ddelta_dt_max", l.ddelta_dt_max);
  detail::read_opt(j, "dddelta_dt_max", l.dddelta_dt_max);
  l.validate();
  return l;
}

/// Scenario from a JSON object; absent keys keep their defaults.
inline Scenario scenario_from_json(const nlohmann::json & j)
{
  Scenario sc;
  if (j.value("preset", std::string{}) == "winding_road") {
    sc = winding_road_scenario();
  }
  try {
    detail::read_opt(j, "name", sc.name);
    if (j.contains("path")) {
      sc.path.clear();
      for (const auto & a : j.at("path")) {
        sc.path.push_back({a.at("curvature").get<double>(), a.at("length").get<double>()});
      }
    }
    if (j.contains("path_start")) {
      const auto & p = j.at("path_start");
      sc.path_start = {{p.value("x", 0.0), p.value("y", 0.0)}, p.value("heading", 0.0)};
    }
    detail::read_opt(j, "corridor", sc.corridor);
    if (j.contains("plant")) {
      const std::string k = j.at("plant").get<std::string>();
      if (k != "kinematic" && k != "kinetic") {
        throw InvalidSpec("plant must be kinematic or kinetic");
      }
      sc.plant = k == "kinetic" ? PlantKind::Kinetic : PlantKind::Kinematic;
    }
    if (j.contains("vehicle")) {
      sc.vehicle = vehicle_from_json(j.at("vehicle"), sc.vehicle);
    }
    if (j.contains("speed")) {
      const auto & s = j.at("speed");
      if (s.is_number()) {
        sc.speed = {s.get<double>(), s.get<double>(), 0.0};
      } else {
        detail::read_opt(s, "v0", sc.speed.v0);
        sc.speed.v1 = s.value("v1", sc.speed.v0);
        detail::read_opt(s, "ramp_time", sc.speed.ramp_time);
      }
    }
    if (j.contains("initial")) {
      const auto & i = j.at("initial");
      detail::read_opt(i, "e", sc.e0);
      detail::read_opt(i, "psi", sc.psi0);
      detail::read_opt(i, "delta", sc.delta0);
    }
    if (j.contains("controller")) {
      const auto & c = j.at("controller");
      auto & cs = sc.controller;
      if (c.contains("kind")) {
        cs.kind = detail::controller_kind(c.at("kind").get<std::string>());
        if (cs.kind != ControllerKind::Scheduled) {
          cs.schedule.clear();
        }
      }
      detail::read_opt(c, "rate_hz", cs.rate_hz);
      detail::read_opt(c, "kappa_bar", cs.params.kappa_bar);
      detail::read_opt(c, "k_rob", cs.params.k_rob);
      detail::read_opt(c, "k_rob", cs.k_rob);
      detail::read_opt(c, "lambdas", cs.params.lambdas);
      detail::read_opt(c, "sign_zero", cs.params.sign_zero);
      detail::read_opt(c, "psi_bar", cs.hosm.psi_bar);
      detail::read_opt(c, "delta_bar", cs.hosm.delta_bar);
      detail::read_opt(c, "ddelta_bar", cs.hosm.ddelta_bar);
      detail::read_opt(c, "boundary_layer", cs.hosm.boundary_layer);
      detail::read_opt(c, "kappa_scale", cs.kappa_scale);
      detail::read_opt(c, "lambda_l_scale", cs.lambda_l_scale);
      detail::read_opt(c, "schedule_step", cs.schedule_step);
      if (c.contains("limits")) {
        cs.limits = limits_from_json(c.at("limits"), cs.limits);
        cs.schedule.clear();
      }
    }
    if (j.contains("disturbance")) {
      const auto & d = j.at("disturbance");
      detail::read_opt(d, "matched_kappa_d", sc.disturbance.matched_kappa_d);
      detail::read_opt(d, "noise_std_e", sc.disturbance.noise_std_e);
      detail::read_opt(d, "noise_std_psi", sc.disturbance.noise_std_psi);
      detail::read_opt(d, "seed", sc.disturbance.seed);
    }
    detail::read_opt(j, "duration", sc.duration);
    detail::read_opt(j, "length_budget", sc.length_budget);
    detail::read_opt(j, "plant_rate_hz", sc.plant_rate_hz);
    detail::read_opt(j, "abort_e", sc.abort_e);
    detail::read_opt(j, "record_every", sc.record_every);
  } catch (const nlohmann::json::exception & ex) {
    throw InvalidSpec(std::string("scenario file: ") + ex.what());
  }
  if (sc.controller.kind == ControllerKind::Scheduled) {
    // speed range may have changed
    if (!sc.controller.schedule.empty() &&
      (sc.controller.schedule.front().v > std::min(sc.speed.v0, sc.speed.v1) + 1e-9 ||
      sc.controller.schedule.back().v < std::max(sc.speed.v0, sc.speed.v1) - 1e-9))
    {
      sc.controller.schedule.clear();
    }
  }
  sc.validate();
  return sc;
}

inline nlohmann::json read_json_file(const std::string & file)
{
  std::ifstream in(file);
  if (!in) {
    throw InvalidSpec("cannot open " + file);
  }
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception & ex) {
    throw InvalidSpec(file + ": " + ex.what());
  }
}

inline Scenario load_scenario(const std::string & file)
{
  return scenario_from_json(read_json_file(file));
}

// ---------------------------------------------------------------------------
// plots

struct PlotSeries
{
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Stacked line-plot panels as a standalone SVG document.
struct PlotPanel
{
  std::string title;
  std::vector<PlotSeries> series;
  bool equal_axes{false};
};

inline void write_svg(std::ostream & os, const std::vector<PlotPanel> & panels)
{
  static constexpr std::array<const char *, 6> colors{
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const double w = 720, h = 260, m = 45;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" <<
    h * static_cast<double>(panels.size()) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const PlotPanel & pan = panels[p];
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto & s : pan.series) {
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
          x0 = std::min(x0, s.x[i]);
          x1 = std::max(x1, s.x[i]);
          y0 = std::min(y0, s.y[i]);
          y1 = std::max(y1, s.y[i]);
        }
      }
    }
    if (!(x1 > x0)) {
      x0 -= 1.0;
      x1 += 1.0;
    }
    if (!(y1 > y0)) {
      y0 -= 1.0;
      y1 += 1.0;
    }
    const double pw = w - 2 * m, ph = h - 2 * m, top = h * static_cast<double>(p) + m;
    double sx = pw / (x1 - x0), sy = ph / (y1 - y0);
    if (pan.equal_axes) {
      sx = sy = std::min(sx, sy);
    }
    os << "<g>\n<rect x=\"" << m << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph <<
      "\" fill=\"none\" stroke=\"#999\"/>\n";
    os << "<text x=\"" << m << "\" y=\"" << top - 8 << "\">" << pan.title << "</text>\n";
    os << "<text x=\"" << m << "\" y=\"" << top + ph + 15 << "\">" << x0 << "</text>\n";
    os << "<text x=\"" << m + pw << "\" y=\"" << top + ph + 15 << "\" text-anchor=\"end\">" << x1 <<
      "</text>\n";
    os << "<text x=\"" << m - 4 << "\" y=\"" << top + ph << "\" text-anchor=\"end\">" << y0 <<
      "</text>\n";
    os << "<text x=\"" << m - 4 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\">" << y1 <<
      "</text>\n";
    for (std::size_t k = 0; k < pan.series.size(); ++k) {
      const auto & s = pan.series[k];
      const char * col = colors[k % colors.size()];
      os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1\" points=\"";
      const std::size_t n = std::min(s.x.size(), s.y.size());
      const std::size_t stride = std::max<std::size_t>(1, n / 4000);
      for (std::size_t i = 0; i < n; i += stride) {
        os << m + (s.x[i] - x0) * sx << ',' << top + ph - (s.y[i] - y0) * sy << ' ';
      }
      os << "\"/>\n";
      os << "<text x=\"" << w - m << "\" y=\"" << top + 12 + 13 * static_cast<double>(k) <<
        "\" text-anchor=\"end\" fill=\"" << col << "\">" << s.label << "</text>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
}

/// Path, errors and steering of a closed-loop run.
inline void write_trajectory_svg(std::ostream & os, const Scenario & sc, const Trajectory & traj)
{
  const RefPath path = build_arc_sequence(sc.path, sc.path_start, sc.corridor);
  PlotSeries ref{"reference", {}, {}}, drv{"rear axle", {}, {}};
  for (double s = 0.0; s <= path.total_length(); s += 0.5) {
    const Vec2 p = path.point_at(s);
    ref.x.push_back(p.x);
    ref.y.push_back(p.y);
  }
  PlotSeries e{"e", {}, {}}, ef{"e_f", {}, {}}, el{"e_l", {}, {}};
  PlotSeries dc{"delta_cmd", {}, {}}, dv{"delta_veh", {}, {}};
  for (const TraceRow & r : traj.rows) {
    drv.x.push_back(r.x);
    drv.y.push_back(r.y);
    for (auto * s : {&e, &ef, &el, &dc, &dv}) {
      s->x.push_back(r.t);
    }
    e.y.push_back(r.e);
    ef.y.push_back(r.e_f);
    el.y.push_back(r.e_l);
    dc.y.push_back(r.delta_cmd);
    dv.y.push_back(r.delta_veh);
  }
  write_svg(os, {{"path [m]", {ref, drv}, true}, {"lateral errors [m] over t [s]", {e, ef, el}, false},
      {"steering [rad] over t [s]", {dc, dv}, false}});
}

/// Normalized indicators of each setting, one series per setting.
inline void write_comparison_svg(std::ostream & os, const Comparison & c)
{
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < c.names.size(); ++i) {
    PlotSeries s{c.names[i], {}, {}};
    for (std::size_t k = 0; k < 4; ++k) {
      s.x.push_back(static_cast<double>(k));
      s.y.push_back(std::isfinite(c.ratios[i][k]) ? c.ratios[i][k] : 0.0);
    }
    series.push_back(std::move(s));
  }
  write_svg(os, {{"ratio to baseline: t_r, max_e_l_post, std_ddelta_dt, std_dddelta_dt", series,
      false}});
}

}  // namespace dubins_smc

#endif  // DUBINS_SMC__EVAL_HARNESS_HPP_
