#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stosqp/driver.hpp"

namespace stosqp::bench {

/// Malformed run configuration; `path` names the offending field ("$.x0[1]").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ProblemKind { Pps, AbsEquality, QuadraticConstraint, Crossing };

/// JSON run file. Field names mirror SolverConfig plus a problem selector
/// and a strategy descriptor; unknown fields are rejected.
struct RunConfig {
  ProblemKind problem = ProblemKind::Pps;
  std::string strategy = "adaptive";
  double eta = 1.0;
  int cap = 1000;
  double alpha0 = 15.0;
  double eta_alpha = 1.5;
  double eta_beta = 0.5;
  double gamma = 1.0;
  double theta0 = 1.0;
  double nu = 1.0;
  double mu = 0.0;
  long long budget = 50000;
  int max_iterations = 100000;
  std::uint64_t seed = 1;
  double qp_tol = 1e-8;
  std::optional<std::vector<double>> x0;
  std::string alpha_rule = "constant";
  double alpha_growth = 1.1;
  int workers = 1;
  long long epoch = 500;
  std::string run_id = "run";
  double noise_width = 0.2;
  std::optional<double> rho;
  double activity_tol = 1e-6;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

struct RunOutcome {
  IterationTrace trace;
  std::vector<std::string> files;
};

/// Builds the selected problem, runs the matching algorithm and writes the
/// trace files to out_dir.
RunOutcome execute_run(const RunConfig& config, const std::string& out_dir);

}  // namespace stosqp::bench
