#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stosqp/bench/pps.hpp"
#include "stosqp/driver.hpp"
#include "stosqp/sampling.hpp"

namespace stosqp::bench {

/// Settings of a multi-strategy, multi-seed production/pricing/shipment experiment.
struct PpsExperiment {
  std::vector<std::string> strategies{"fixed:10", "fixed:100", "fixed:1000", "poly:1.25:1000", "adaptive"};
  int seeds = 5;
  std::uint64_t seed_base = 1;
  long long budget = 50000;
  long long epoch = 500;
  double eta = 1.0;
  int cap = 1000;
  double alpha0 = 15.0;
  double eta_alpha = 1.5;
  double rho = 10.0;
  Vector x0 = Vector::Constant(2, 1.5);
  double activity_tol = 1e-6;
  int jobs = 1;     // runs in flight
  int workers = 1;  // oracle threads per run
  std::string out_dir;  // empty: no files
};

struct PpsRun {
  std::string strategy;
  std::uint64_t seed = 0;
  IterationTrace trace;
  double final_objective = 0.0;  // exact expected objective at the final iterate
};

SolverConfig pps_solver_config(const PpsExperiment& experiment, const SamplingStrategy& strategy, std::uint64_t seed);

/// Runs every (strategy, seed) pair. Stationarity uses the exact expected
/// gradient. With out_dir set, writes {label}_seed{S}_trace.csv / _epochs.csv
/// per run and summary.csv.
std::vector<PpsRun> run_pps_experiment(const PpsExperiment& experiment, const PpsInstance& instance);

void write_summary(const std::string& path, const std::vector<PpsRun>& runs);

/// Mean over runs of `strategy` of the epoch-row stationarity, one value per epoch.
std::vector<double> mean_epoch_curve(const std::vector<PpsRun>& runs, const std::string& strategy,
                                     long long epoch_size);

}  // namespace stosqp::bench
