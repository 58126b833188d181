#include "stosqp/bench/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "stosqp/bench/pps.hpp"
#include "stosqp/bench/synthetic.hpp"
#include "stosqp/diagnostics.hpp"

namespace stosqp::bench {

using nlohmann::json;

ConfigError::ConfigError(std::string path, const std::string& message)
    : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

namespace {

template <typename T>
void read(const json& doc, const char* key, T& target) {
  if (!doc.contains(key)) return;
  const json& v = doc.at(key);
  const std::string path = std::string("$.") + key;
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
  } else {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(path, "expected a nonnegative integer");
    }
  }
  target = v.get<T>();
}

ProblemKind parse_problem(const std::string& name) {
  if (name == "pps") return ProblemKind::Pps;
  if (name == "abs_equality") return ProblemKind::AbsEquality;
  if (name == "quadratic_constraint") return ProblemKind::QuadraticConstraint;
  if (name == "crossing") return ProblemKind::Crossing;
  throw ConfigError("$.problem", "unknown problem '" + name + "'");
}

// "config: alpha0 must ..." -> "$.alpha0"
std::string field_path(const std::string& message) {
  static const std::string prefix = "config: ";
  if (message.rfind(prefix, 0) != 0) return "$";
  std::string field = message.substr(prefix.size(), message.find(' ', prefix.size()) - prefix.size());
  return field == "a" ? "$" : "$." + field;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("$", "expected an object");

  static const std::set<std::string> known{
      "problem",     "strategy", "eta",     "cap",        "alpha0",         "eta_alpha", "eta_beta",
      "gamma",       "theta0",   "nu",      "mu",         "budget",         "max_iterations",
      "seed",        "qp_tol",   "x0",      "alpha_rule", "alpha_growth",   "workers",   "epoch",
      "run_id",      "noise_width", "rho",  "activity_tol"};
  for (const auto& item : doc.items()) {
    if (!known.count(item.key())) throw ConfigError("$." + item.key(), "unknown field");
  }

  RunConfig cfg;
  std::string problem = "pps";
  read(doc, "problem", problem);
  cfg.problem = parse_problem(problem);
  read(doc, "strategy", cfg.strategy);
  read(doc, "eta", cfg.eta);
  read(doc, "cap", cfg.cap);
  read(doc, "alpha0", cfg.alpha0);
  read(doc, "eta_alpha", cfg.eta_alpha);
  read(doc, "eta_beta", cfg.eta_beta);
  read(doc, "gamma", cfg.gamma);
  read(doc, "theta0", cfg.theta0);
  read(doc, "nu", cfg.nu);
  read(doc, "mu", cfg.mu);
  read(doc, "budget", cfg.budget);
  read(doc, "max_iterations", cfg.max_iterations);
  read(doc, "seed", cfg.seed);
  read(doc, "qp_tol", cfg.qp_tol);
  read(doc, "alpha_rule", cfg.alpha_rule);
  read(doc, "alpha_growth", cfg.alpha_growth);
  read(doc, "workers", cfg.workers);
  read(doc, "epoch", cfg.epoch);
  read(doc, "run_id", cfg.run_id);
  read(doc, "noise_width", cfg.noise_width);
  read(doc, "activity_tol", cfg.activity_tol);
  if (doc.contains("rho")) {
    double rho = 0.0;
    read(doc, "rho", rho);
    cfg.rho = rho;
  }
  if (doc.contains("x0")) {
    const json& v = doc.at("x0");
    if (!v.is_array()) throw ConfigError("$.x0", "expected an array of numbers");
    std::vector<double> x0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError("$.x0[" + std::to_string(i) + "]", "expected a number");
      x0.push_back(v[i].get<double>());
    }
    cfg.x0 = x0;
  }
  if (cfg.alpha_rule != "constant" && cfg.alpha_rule != "geometric") {
    throw ConfigError("$.alpha_rule", "expected 'constant' or 'geometric'");
  }
  try {
    SamplingStrategy::parse(cfg.strategy, cfg.eta, cfg.cap);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("$.strategy", e.what());
  }
  if (cfg.run_id.empty() || cfg.run_id.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("$.run_id", "must be a nonempty file name stem");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("$", "cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

RunOutcome execute_run(const RunConfig& cfg, const std::string& out_dir) {
  ConstrainedStochasticProblem problem;
  Vector x0;
  switch (cfg.problem) {
    case ProblemKind::Pps: {
      const PpsInstance instance = build_pps_instance();
      problem = make_pps_problem(instance, cfg.rho.value_or(10.0));
      x0 = Vector::Constant(2, 1.5);
      break;
    }
    case ProblemKind::AbsEquality:
      problem = make_abs_equality_problem(cfg.noise_width, cfg.rho.value_or(1.0));
      x0 = Vector::Constant(2, 0.5);
      break;
    case ProblemKind::QuadraticConstraint:
      problem = make_quadratic_constraint_problem(crossing_pieces_spec(Vector::Constant(2, 8.0)), cfg.noise_width);
      if (cfg.rho) problem.rho_estimate = *cfg.rho;
      x0 = Vector::Constant(2, 1.5);
      break;
    case ProblemKind::Crossing:
      problem = build_synthetic_uc2(crossing_pieces_spec(Vector::Constant(2, 1.0)), cfg.noise_width,
                                    BoxPolyhedron::box(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)));
      if (cfg.rho) problem.rho_estimate = *cfg.rho;
      x0 = Vector::Constant(2, 0.5);
      break;
  }
  const ReferenceGradient reference = [expected = *problem.expected](const Vector& x) {
    return expected(x).subgradient;
  };
  if (cfg.x0) {
    if (static_cast<int>(cfg.x0->size()) != problem.dimension) {
      throw ConfigError("$.x0", "expected " + std::to_string(problem.dimension) + " entries");
    }
    x0 = Eigen::Map<const Vector>(cfg.x0->data(), problem.dimension);
  }

  SolverConfig solver;
  solver.alpha0 = cfg.alpha0;
  solver.eta_alpha = cfg.eta_alpha;
  solver.eta_beta = cfg.eta_beta;
  solver.gamma = cfg.gamma;
  solver.theta0 = cfg.theta0;
  solver.nu = [nu = cfg.nu](int) { return nu; };
  solver.mu = [mu = cfg.mu](int) { return mu; };
  solver.strategy = SamplingStrategy::parse(cfg.strategy, cfg.eta, cfg.cap);
  solver.budget = cfg.budget;
  solver.max_iterations = cfg.max_iterations;
  solver.master_seed = cfg.seed;
  solver.qp_tol = cfg.qp_tol;
  solver.x0 = x0;
  solver.alpha_rule = cfg.alpha_rule == "geometric" ? AlphaRule::Geometric : AlphaRule::Constant;
  solver.alpha_growth = cfg.alpha_growth;
  solver.workers = cfg.workers;
  solver.epoch_size = cfg.epoch;
  solver.probe = make_stationarity_probe(problem, reference, cfg.activity_tol);
  solver.measure = MeasureMode::EpochEnds;
  try {
    solver.validate(problem);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field_path(e.what()), e.what());
  }

  RunOutcome outcome;
  outcome.trace = run_solver(problem, solver);
  outcome.files = write_trace_files(outcome.trace, cfg.epoch, out_dir, cfg.run_id);
  return outcome;
}

}  // namespace stosqp::bench
