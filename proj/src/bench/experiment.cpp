#include "stosqp/bench/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "stosqp/diagnostics.hpp"

namespace stosqp::bench {

SolverConfig pps_solver_config(const PpsExperiment& experiment, const SamplingStrategy& strategy, std::uint64_t seed) {
  SolverConfig config;
  config.alpha0 = experiment.alpha0;
  config.eta_alpha = experiment.eta_alpha;
  config.strategy = strategy;
  config.budget = experiment.budget;
  config.master_seed = seed;
  config.x0 = experiment.x0;
  config.workers = experiment.workers;
  config.epoch_size = experiment.epoch;
  config.measure = MeasureMode::EpochEnds;
  return config;
}

std::vector<PpsRun> run_pps_experiment(const PpsExperiment& experiment, const PpsInstance& instance) {
  if (experiment.seeds < 1) throw std::invalid_argument("bench-pps: seeds must be positive");
  if (experiment.jobs < 1) throw std::invalid_argument("bench-pps: jobs must be positive");
  std::vector<SamplingStrategy> strategies;
  for (const auto& text : experiment.strategies) {
    strategies.push_back(SamplingStrategy::parse(text, experiment.eta, experiment.cap));
  }

  const ConstrainedStochasticProblem problem = make_pps_problem(instance, experiment.rho);
  const ExpectedOracle expected = *problem.expected;
  const StationarityProbe probe = make_stationarity_probe(
      problem, [expected](const Vector& x) { return expected(x).subgradient; }, experiment.activity_tol);

  std::vector<PpsRun> runs;
  for (const auto& strategy : strategies) {
    for (int s = 0; s < experiment.seeds; ++s) {
      PpsRun run;
      run.strategy = strategy.label();
      run.seed = experiment.seed_base + static_cast<std::uint64_t>(s);
      runs.push_back(std::move(run));
    }
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(runs.size());
  auto work = [&]() {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        const auto& strategy = strategies[i / static_cast<std::size_t>(experiment.seeds)];
        SolverConfig config = pps_solver_config(experiment, strategy, runs[i].seed);
        config.probe = probe;
        runs[i].trace = run_full_step(problem, config);
        runs[i].final_objective = expected(runs[i].trace.final_x).value;
        if (!experiment.out_dir.empty()) {
          write_trace_files(runs[i].trace, experiment.epoch, experiment.out_dir,
                            runs[i].strategy + "_seed" + std::to_string(runs[i].seed));
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int threads = std::min<int>(experiment.jobs, static_cast<int>(runs.size()));
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (!experiment.out_dir.empty()) {
    write_summary((std::filesystem::path(experiment.out_dir) / "summary.csv").string(), runs);
  }
  return runs;
}

void write_summary(const std::string& path, const std::vector<PpsRun>& runs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "strategy,seed,final_stationarity,final_objective,oracle_calls,iterations\n";
  char buf[128];
  for (const auto& run : runs) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", run.trace.final_stationarity, run.final_objective);
    out << run.strategy << ',' << run.seed << ',' << buf << ',' << run.trace.oracle_calls << ','
        << run.trace.records.size() << '\n';
  }
}

std::vector<double> mean_epoch_curve(const std::vector<PpsRun>& runs, const std::string& strategy,
                                     long long epoch_size) {
  std::vector<double> sum;
  std::vector<int> count;
  for (const auto& run : runs) {
    if (run.strategy != strategy) continue;
    const TraceTable table = export_trace(run.trace, epoch_size);
    if (sum.size() < table.epochs.size()) {
      sum.resize(table.epochs.size(), 0.0);
      count.resize(table.epochs.size(), 0);
    }
    for (std::size_t e = 0; e < table.epochs.size(); ++e) {
      sum[e] += table.epochs[e].stationarity;
      ++count[e];
    }
  }
  for (std::size_t e = 0; e < sum.size(); ++e) sum[e] /= count[e];
  return sum;
}

}  // namespace stosqp::bench
