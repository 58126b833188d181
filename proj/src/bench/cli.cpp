#include "stosqp/bench/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

#include "stosqp/bench/config.hpp"
#include "stosqp/bench/experiment.hpp"
#include "stosqp/bench/pps.hpp"
#include "stosqp/bench/selftest.hpp"

namespace stosqp::bench {

namespace {

std::string quoted(const std::string& text) {
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

int bench_pps(const PpsExperiment& experiment, std::ostream& out) {
  const auto runs = run_pps_experiment(experiment, build_pps_instance());
  std::map<std::string, std::pair<double, int>> means;
  for (const auto& run : runs) {
    auto& [sum, count] = means[run.strategy];
    sum += run.trace.final_stationarity;
    ++count;
  }
  for (const auto& text : experiment.strategies) {
    const std::string label = SamplingStrategy::parse(text, experiment.eta, experiment.cap).label();
    const auto& [sum, count] = means[label];
    out << label << " mean_final_stationarity=" << std::setprecision(6) << sum / count << '\n';
  }
  out << "wrote " << runs.size() << " runs to " << experiment.out_dir << '\n';
  return 0;
}

int curve(int points, const std::string& path, std::ostream& out) {
  const PpsReference reference(build_pps_instance());
  const auto data = pps_curve(reference, points);
  const PpsInstance& instance = reference.instance();
  std::ofstream file;
  if (!path.empty()) {
    file.open(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  }
  std::ostream& sink = path.empty() ? out : file;
  sink << "p,value,subgradient,exact_value,exact_subgradient\n" << std::setprecision(17);
  const PpsScenario center = mean_scenario(instance);
  for (const auto& point : data) {
    const SecondStage exact = solve_second_stage(instance, point.price, center);
    sink << point.price << ',' << point.value << ',' << (point.subgradient + 0.0) << ',' << exact.value << ','
         << (exact.dvalue_dp + 0.0) << '\n';
  }
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic SQP solver and benchmark driver", "stosqp"};
  app.require_subcommand(1);

  PpsExperiment experiment;
  experiment.out_dir = "out";
  std::vector<std::string> strategies;
  auto* bench = app.add_subcommand("bench-pps", "Run the production/pricing/shipment benchmark");
  bench->add_option("--strategy", strategies, "fixed:N | poly:EXP:CAP | adaptive (repeatable or comma separated)")
      ->delimiter(',');
  bench->add_option("--seeds", experiment.seeds, "Seeds per strategy")->check(CLI::PositiveNumber);
  bench->add_option("--budget", experiment.budget, "Oracle-call budget per run")->check(CLI::Range(2LL, 1LL << 40));
  bench->add_option("--epoch", experiment.epoch, "Oracle calls per epoch")->check(CLI::PositiveNumber);
  bench->add_option("--seed-base", experiment.seed_base, "First master seed");
  bench->add_option("--out", experiment.out_dir, "Output directory");
  bench->add_option("--eta", experiment.eta, "Adaptive variance-test constant")->check(CLI::PositiveNumber);
  bench->add_option("--alpha0", experiment.alpha0, "Initial curvature")->check(CLI::PositiveNumber);
  bench->add_option("--cap", experiment.cap, "Sample-size cap for adaptive")->check(CLI::Range(2, 1 << 30));
  bench->add_option("--jobs", experiment.jobs, "Runs in flight")->check(CLI::PositiveNumber);
  bench->add_option("--workers", experiment.workers, "Oracle threads per run")->check(CLI::PositiveNumber);

  std::string config_path;
  std::string run_out = "out";
  auto* run = app.add_subcommand("run", "Run one solve from a JSON config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--out", run_out, "Output directory");

  int points = 200;
  std::string curve_out;
  auto* curve_cmd = app.add_subcommand("curve", "Batch-mean second-stage value and derivative over price");
  curve_cmd->add_option("--points", points, "Price grid size")->check(CLI::Range(2, 1 << 20));
  curve_cmd->add_option("--out", curve_out, "CSV file (stdout if omitted)");

  auto* selftest = app.add_subcommand("selftest", "Run the invariant checks");

  std::vector<std::string> argv_store{"stosqp"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: kind=usage message=" << quoted(e.what()) << '\n';
    return 2;
  }

  try {
    if (*bench) {
      if (!strategies.empty()) experiment.strategies = strategies;
      for (const auto& s : experiment.strategies) {
        try {
          SamplingStrategy::parse(s, experiment.eta, experiment.cap);
        } catch (const std::invalid_argument& e) {
          err << "error: kind=usage path=--strategy message=" << quoted(e.what()) << '\n';
          return 2;
        }
      }
      return bench_pps(experiment, out);
    }
    if (*run) {
      const RunConfig cfg = load_run_config(config_path);
      const RunOutcome outcome = execute_run(cfg, run_out);
      out << "status=" << to_string(outcome.trace.stop) << " iterations=" << outcome.trace.records.size()
          << " oracle_calls=" << outcome.trace.oracle_calls << " final_stationarity=" << std::setprecision(6)
          << outcome.trace.final_stationarity << '\n';
      for (const auto& f : outcome.files) out << "wrote " << f << '\n';
      return 0;
    }
    if (*curve_cmd) return curve(points, curve_out, out);
    if (*selftest) return run_selftest(out) == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    err << "error: kind=config path=" << e.path() << " message=" << quoted(e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: kind=runtime message=" << quoted(e.what()) << '\n';
    return 1;
  }
  return 0;
}

}  // namespace stosqp::bench
