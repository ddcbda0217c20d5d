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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dubins_smc/eval_harness.hpp"

namespace fs = std::filesystem;
using namespace dubins_smc;  // NOLINT

namespace
{

std::ofstream open_out(const fs::path & p)
{
  if (p.has_parent_path()) {
    fs::create_directories(p.parent_path());
  }
  std::ofstream os(p);
  if (!os) {
    throw std::runtime_error("cannot write " + p.string());
  }
  return os;
}

Scenario scenario_or_preset(const std::string & file)
{
  return file.empty() ? winding_road_scenario() : load_scenario(file);
}

void write_runs(
  const fs::path & dir, const std::vector<Scenario> & scs, const std::vector<RunResult> & res,
  bool svg)
{
  std::vector<std::string> names;
  std::vector<MetricsRecord> recs;
  for (std::size_t i = 0; i < res.size(); ++i) {
    names.push_back(scs[i].name);
    recs.push_back(res[i].metrics);
    if (!res[i].error.empty()) {
      std::cerr << scs[i].name << ": " << res[i].error << '\n';
      continue;
    }
    auto os = open_out(dir / (scs[i].name + "_trace.csv"));
    write_trace_csv(os, res[i].trajectory.rows);
    if (svg) {
      auto ps = open_out(dir / (scs[i].name + ".svg"));
      write_trajectory_svg(ps, scs[i], res[i].trajectory);
    }
    if (res[i].trajectory.diverged) {
      std::cerr << scs[i].name << ": diverged\n";
    }
  }
  auto ms = open_out(dir / "metrics.csv");
  write_metrics_csv(ms, names, recs);
  write_metrics_csv(std::cout, names, recs);
}

bool set_param(Scenario & sc, const std::string & name, double v)
{
  auto & c = sc.controller;
  if (name == "kappa_scale") {
    c.kappa_scale = v;
  } else if (name == "lambda_l_scale") {
    c.lambda_l_scale = v;
  } else if (name == "k_rob") {
    c.k_rob = v;
    c.params.k_rob = v;
  } else if (name == "kappa_bar") {
    c.params.kappa_bar = v;
  } else if (name == "rate_hz") {
    c.rate_hz = v;
  } else if (name == "noise_std_e") {
    sc.disturbance.noise_std_e = v;
  } else if (name == "noise_std_psi") {
    sc.disturbance.noise_std_psi = v;
  } else if (name == "matched_kappa_d") {
    sc.disturbance.matched_kappa_d = v;
  } else if (name == "e0") {
    sc.e0 = v;
  } else if (name == "psi0") {
    sc.psi0 = v;
  } else {
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Chained sliding-mode path tracking: simulation, tuning and benchmarks"};
  app.require_subcommand(1);

  std::string scenario_file, out_dir = "out";
  bool svg = false;
  double eps = 0.05;
  auto * sim = app.add_subcommand("simulate", "run one scenario file");
  sim->add_option("scenario", scenario_file, "scenario JSON file")->required()->check(
    CLI::ExistingFile);
  sim->add_option("-o,--out-dir", out_dir, "output directory");
  sim->add_flag("--svg", svg, "also write an SVG plot");
  sim->add_option("--eps", eps, "reaching band [m]");

  std::string vehicle_file, limits_file, tune_out;
  double v_min = 1.0, v_max = 20.0, v_step = 1.0;
  auto * tune = app.add_subcommand("tune", "velocity schedule of the controller parameters");
  tune->add_option("--vehicle", vehicle_file, "vehicle JSON file")->required()->check(
    CLI::ExistingFile);
  tune->add_option("--limits", limits_file, "actuator limits JSON file")->required()->check(
    CLI::ExistingFile);
  tune->add_option("--v-min", v_min, "lowest speed [m/s]");
  tune->add_option("--v-max", v_max, "highest speed [m/s]");
  tune->add_option("--v-step", v_step, "speed step [m/s]");
  tune->add_option("-o,--out", tune_out, "CSV file (default: stdout)");

  ReachBenchmarkOptions bo;
  std::string bench_out;
  auto * bench = app.add_subcommand("benchmark-reach",
      "reaching distance of optimal, C0 and HOSM on a straight path");
  bench->add_option("--lambda", bo.lambda, "wheelbase [m]");
  bench->add_option("--e0", bo.e0, "initial lateral error [m]");
  bench->add_option("--delta-bar", bo.delta_bar, "steering bound [rad]");
  bench->add_option("--ddelta-bar", bo.ddelta_bar, "steering rate bound [rad/m]");
  bench->add_option("--psi0", bo.psi0, "initial heading errors [rad]");
  bench->add_flag("--dp", bo.with_dp, "also run the grid oracle (slow)");
  bench->add_option("-o,--out", bench_out, "CSV file (default: stdout)");

  std::string cmp_scenario;
  auto * cmp = app.add_subcommand("compare-params",
      "baseline and the three one-parameter variations");
  cmp->add_option("--scenario", cmp_scenario, "scenario JSON file (default: winding_road preset)")->check(
    CLI::ExistingFile);
  cmp->add_option("-o,--out-dir", out_dir, "output directory");
  cmp->add_flag("--svg", svg, "also write SVG plots");
  cmp->add_option("--eps", eps, "reaching band [m]");

  std::string sweep_scenario, sweep_param;
  std::vector<double> sweep_values;
  auto * sweep = app.add_subcommand("sweep", "grid over one scenario parameter");
  sweep->add_option("--scenario", sweep_scenario, "scenario JSON file (default: winding_road preset)")->check(
    CLI::ExistingFile);
  sweep->add_option("--param", sweep_param,
    "kappa_scale|lambda_l_scale|k_rob|kappa_bar|rate_hz|noise_std_e|noise_std_psi|"
    "matched_kappa_d|e0|psi0")->required();
  sweep->add_option("--values", sweep_values, "values")->required()->delimiter(',');
  sweep->add_option("-o,--out-dir", out_dir, "output directory");
  sweep->add_flag("--svg", svg, "also write SVG plots");
  sweep->add_option("--eps", eps, "reaching band [m]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const Scenario sc = load_scenario(scenario_file);
      const std::vector<Scenario> scs{sc};
      write_runs(out_dir, scs, run_batch(scs, eps, 1), svg);
    } else if (tune->parsed()) {
      const VehicleParams veh = vehicle_from_json(read_json_file(vehicle_file));
      const ActuatorLimits lim = limits_from_json(read_json_file(limits_file));
      const auto rows = build_schedule_table(v_min, v_max, v_step, lim, veh.lambda_veh);
      if (tune_out.empty()) {
        write_schedule_csv(std::cout, rows);
      } else {
        auto os = open_out(tune_out);
        write_schedule_csv(os, rows);
      }
    } else if (bench->parsed()) {
      const auto rows = benchmark_reach(bo);
      if (bench_out.empty()) {
        write_benchmark_csv(std::cout, rows);
      } else {
        auto os = open_out(bench_out);
        write_benchmark_csv(os, rows);
      }
    } else if (cmp->parsed()) {
      const auto scs = parameter_variations(scenario_or_preset(cmp_scenario));
      const auto res = run_batch(scs, eps);
      write_runs(out_dir, scs, res, svg);
      std::vector<MetricsRecord> recs;
      std::vector<std::string> names;
      for (std::size_t i = 0; i < res.size(); ++i) {
        recs.push_back(res[i].metrics);
        names.push_back(scs[i].name);
      }
      const Comparison c = radar_compare(recs, names);
      auto os = open_out(fs::path(out_dir) / "comparison.csv");
      write_comparison_csv(os, c);
      write_comparison_csv(std::cout, c);
      if (svg) {
        auto ps = open_out(fs::path(out_dir) / "comparison.svg");
        write_comparison_svg(ps, c);
      }
    } else if (sweep->parsed()) {
      const Scenario base = scenario_or_preset(sweep_scenario);
      std::vector<Scenario> scs;
      for (double v : sweep_values) {
        Scenario sc = base;
        if (!set_param(sc, sweep_param, v)) {
          std::cerr << "unknown parameter: " << sweep_param << '\n';
          return 2;
        }
        char tag[32];
        std::snprintf(tag, sizeof(tag), "%g", v);
        sc.name = base.name + "_" + sweep_param + "_" + tag;
        scs.push_back(sc);
      }
      write_runs(out_dir, scs, run_batch(scs, eps), svg);
    }
  } catch (const std::exception & ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
