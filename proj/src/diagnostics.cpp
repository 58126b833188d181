#include "stosqp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace stosqp {

double StationarityReport::recompute() const {
  if (jacobian.cols() == 0) return gradient.norm();
  return (gradient - jacobian * multipliers).norm();
}

StationarityReport stationarity_error(const Vector& g, const Vector& constraints_value,
                                      const Matrix& constraints_jacobian, double activity_tol) {
  const Index n = g.size();
  const Index m = constraints_value.size();
  if (constraints_jacobian.rows() != n || constraints_jacobian.cols() != m) {
    throw std::invalid_argument("stationarity_error: jacobian must be n x m");
  }
  if (!(activity_tol > 0.0)) throw std::invalid_argument("stationarity_error: activity_tol must be positive");

  StationarityReport report;
  report.activity_tol = activity_tol;
  report.gradient = g;
  report.jacobian = constraints_jacobian;
  report.multipliers = Vector::Zero(m);
  report.active_mask.assign(static_cast<std::size_t>(m), false);

  std::vector<Index> active;
  for (Index j = 0; j < m; ++j) {
    const double c = constraints_value(j);
    if (std::abs(c) <= activity_tol * (1.0 + std::abs(c))) {
      report.active_mask[static_cast<std::size_t>(j)] = true;
      active.push_back(j);
    }
  }

  const double gnorm = g.norm();
  if (active.empty() || gnorm == 0.0) {
    report.residual = gnorm;
    return report;
  }

  // The projection u of g onto the polar cone {u : A'u <= 0} solves
  // min -g'u + |u|^2/2 over that cone, and u = g - A lambda at its KKT point
  // with lambda the cone-row multipliers.
  const Index p = static_cast<Index>(active.size());
  QpProblem qp;
  qp.gradient = -g;
  qp.curvature = 1.0;
  qp.eq_jacobian.resize(n, 0);
  qp.eq_residual.resize(0);
  const double radius = 10.0 * (gnorm + 1.0);
  qp.set.lower = Vector::Constant(n, -radius);
  qp.set.upper = Vector::Constant(n, radius);
  qp.set.ineq_matrix.resize(p, n);
  for (Index r = 0; r < p; ++r) qp.set.ineq_matrix.row(r) = constraints_jacobian.col(active[r]).transpose();
  qp.set.ineq_rhs = Vector::Zero(p);

  QpOptions options;
  options.tol = 1e-12 * std::max(1.0, gnorm);
  QpSolution sol = solve_qp(qp, options);
  if (sol.status == QpStatus::NumericalFailure) {
    options.tol = 1e-9 * std::max(1.0, gnorm);
    sol = solve_qp(qp, options);
  }
  if (sol.status != QpStatus::Optimal) {
    throw std::runtime_error("stationarity_error: projection subproblem failed");
  }
  const Vector lambda = sol.inequality_multipliers();
  for (Index r = 0; r < p; ++r) report.multipliers(active[r]) = std::max(0.0, lambda(r));
  report.residual = report.recompute();
  return report;
}

ConstraintValue set_constraints(const BoxPolyhedron& set, const Vector& x) {
  const Index n = set.dimension();
  const Index p = set.num_inequalities();
  if (x.size() != n) throw std::invalid_argument("set_constraints: dimension mismatch");
  ConstraintValue out;
  out.value.resize(2 * n + p);
  out.jacobian = Matrix::Zero(n, 2 * n + p);
  for (Index i = 0; i < n; ++i) {
    out.value(i) = x(i) - set.lower(i);
    out.jacobian(i, i) = 1.0;
    out.value(n + i) = set.upper(i) - x(i);
    out.jacobian(i, n + i) = -1.0;
  }
  for (Index r = 0; r < p; ++r) {
    out.value(2 * n + r) = set.ineq_rhs(r) - set.ineq_matrix.row(r).dot(x);
    out.jacobian.col(2 * n + r) = -set.ineq_matrix.row(r).transpose();
  }
  return out;
}

ConstraintValue kkt_constraints(const ConstrainedStochasticProblem& problem, const Vector& x) {
  ConstraintValue box = set_constraints(problem.set, x);
  if (!problem.eq_constraints) return box;
  const ConstraintValue eq = (*problem.eq_constraints)(x);
  const Index n = x.size();
  const Index s = box.value.size();
  const Index m = eq.value.size();
  ConstraintValue out;
  out.value.resize(s + 2 * m);
  out.jacobian.resize(n, s + 2 * m);
  out.value.head(s) = box.value;
  out.jacobian.leftCols(s) = box.jacobian;
  for (Index i = 0; i < m; ++i) {
    out.value(s + 2 * i) = eq.value(i);
    out.jacobian.col(s + 2 * i) = eq.jacobian.col(i);
    out.value(s + 2 * i + 1) = -eq.value(i);
    out.jacobian.col(s + 2 * i + 1) = -eq.jacobian.col(i);
  }
  return out;
}

StationarityProbe make_stationarity_probe(const ConstrainedStochasticProblem& problem, ReferenceGradient reference,
                                          double activity_tol) {
  if (!reference) throw std::invalid_argument("make_stationarity_probe: missing reference gradient");
  return [problem, reference = std::move(reference), activity_tol](const Vector& x) {
    const ConstraintValue c = kkt_constraints(problem, x);
    return stationarity_error(reference(x), c.value, c.jacobian, activity_tol).residual;
  };
}

long long epoch_index(long long calls, long long epoch_size) {
  if (epoch_size < 1) throw std::invalid_argument("epoch_index: epoch_size must be positive");
  return calls <= 0 ? 0 : (calls - 1) / epoch_size;
}

namespace {

TraceRow make_row(const IterationRecord& rec, long long epoch) {
  TraceRow row;
  row.k = rec.k;
  row.epoch = epoch;
  row.oracle_calls = rec.oracle_calls;
  row.step_norm = rec.step_norm;
  row.pred_decrease = rec.pred_decrease;
  row.zeta = rec.zeta;
  row.beta = rec.beta;
  row.alpha = rec.alpha;
  row.theta = rec.theta;
  row.sample_size = rec.sample_size;
  row.stationarity = rec.stationarity;
  row.merit = rec.merit;
  row.objective_estimate = rec.objective_estimate;
  row.x = rec.x;
  return row;
}

void put(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

}  // namespace

TraceTable export_trace(const IterationTrace& trace, long long epoch_size) {
  if (epoch_size < 1) throw std::invalid_argument("export_trace: epoch_size must be positive");
  TraceTable table;
  table.iterations.reserve(trace.records.size());
  for (const auto& rec : trace.records) table.iterations.push_back(make_row(rec, epoch_index(rec.oracle_calls, epoch_size)));
  if (trace.records.empty()) return table;

  // A run stopped by the budget covers every epoch up to the budget; epochs
  // after its last iteration carry that iteration.
  const long long total =
      trace.stop == StopReason::Budget ? std::max(trace.budget, trace.oracle_calls) : trace.records.back().oracle_calls;
  const long long epochs = (total + epoch_size - 1) / epoch_size;
  std::size_t cursor = 0;  // first record past the current epoch end
  for (long long e = 0; e < epochs; ++e) {
    const long long end = (e + 1) * epoch_size;
    while (cursor < trace.records.size() && trace.records[cursor].oracle_calls <= end) ++cursor;
    const IterationRecord& rec = trace.records[cursor == 0 ? 0 : cursor - 1];
    table.epochs.push_back(make_row(rec, e));
  }
  return table;
}

std::string trace_header(int dimension) {
  std::string header = "k,epoch,oracle_calls,step_norm,pred_decrease,zeta,beta,alpha,theta,N,stationarity,merit,objective_estimate";
  for (int i = 0; i < dimension; ++i) header += ",x" + std::to_string(i);
  return header;
}

void write_trace_rows(std::ostream& out, const std::vector<TraceRow>& rows, int dimension) {
  out << trace_header(dimension) << '\n';
  for (const auto& row : rows) {
    out << row.k << ',' << row.epoch << ',' << row.oracle_calls << ',';
    put(out, row.step_norm);
    out << ',';
    put(out, row.pred_decrease);
    out << ',';
    put(out, row.zeta);
    out << ',';
    put(out, row.beta);
    out << ',';
    put(out, row.alpha);
    out << ',';
    put(out, row.theta);
    out << ',' << row.sample_size << ',';
    put(out, row.stationarity);
    out << ',';
    put(out, row.merit);
    out << ',';
    put(out, row.objective_estimate);
    for (Index i = 0; i < row.x.size(); ++i) {
      out << ',';
      put(out, row.x(i));
    }
    out << '\n';
  }
}

std::vector<std::string> write_trace_files(const IterationTrace& trace, long long epoch_size, const std::string& dir,
                                           const std::string& run_id) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const TraceTable table = export_trace(trace, epoch_size);
  const std::string trace_path = (fs::path(dir) / (run_id + "_trace.csv")).string();
  const std::string epoch_path = (fs::path(dir) / (run_id + "_epochs.csv")).string();
  for (const auto& [path, rows] : {std::pair{trace_path, &table.iterations}, std::pair{epoch_path, &table.epochs}}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_trace_rows(out, *rows, trace.dimension);
    if (!out) throw std::runtime_error("failed writing " + path);
  }
  return {trace_path, epoch_path};
}

}  // namespace stosqp
