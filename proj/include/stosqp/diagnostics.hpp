#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "stosqp/driver.hpp"
#include "stosqp/model.hpp"
#include "stosqp/qp.hpp"
#include "stosqp/types.hpp"

namespace stosqp {

/// Nonnegative least-squares stationarity measure min_{lambda >= 0} |g - J lambda|
/// with lambda forced to zero on inactive rows. Constraints are in c_j(x) >= 0
/// form and J holds their gradients as columns.
struct StationarityReport {
  double residual = 0.0;
  Vector multipliers;
  std::vector<bool> active_mask;
  double activity_tol = 1e-6;
  Vector gradient;
  Matrix jacobian;

  /// |gradient - jacobian * multipliers|
  double recompute() const;
};

StationarityReport stationarity_error(const Vector& g, const Vector& constraints_value,
                                      const Matrix& constraints_jacobian, double activity_tol = 1e-6);

/// Values and gradients (as columns) of C written as c_j(x) >= 0:
/// x_i - l_i, u_i - x_i for each coordinate, then b - a'x for each row.
ConstraintValue set_constraints(const BoxPolyhedron& set, const Vector& x);

/// set_constraints plus each equality c_i(x) = 0 as the pair c_i >= 0, -c_i >= 0.
ConstraintValue kkt_constraints(const ConstrainedStochasticProblem& problem, const Vector& x);

using ReferenceGradient = std::function<Vector(const Vector& x)>;

/// Stationarity error of `problem` at x using `reference` in place of the
/// true subgradient.
StationarityProbe make_stationarity_probe(const ConstrainedStochasticProblem& problem, ReferenceGradient reference,
                                          double activity_tol = 1e-6);

/// Index of the epoch holding cumulative call count `calls`: floor((calls - 1) / epoch_size).
long long epoch_index(long long calls, long long epoch_size);

struct TraceRow {
  int k = 0;
  long long epoch = 0;
  long long oracle_calls = 0;
  double step_norm = 0.0;
  double pred_decrease = 0.0;
  double zeta = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  double theta = 0.0;
  int sample_size = 0;
  double stationarity = 0.0;
  double merit = 0.0;
  double objective_estimate = 0.0;
  Vector x;
};

struct TraceTable {
  std::vector<TraceRow> iterations;
  std::vector<TraceRow> epochs;
};

/// Per-iteration rows and one row per epoch 0 .. ceil(calls / epoch_size) - 1,
/// where calls is the budget for a run stopped by it. An epoch row carries
/// the latest iteration whose cumulative count falls at or before the end of
/// that epoch (the first iteration if none does).
TraceTable export_trace(const IterationTrace& trace, long long epoch_size = 500);

std::string trace_header(int dimension);

void write_trace_rows(std::ostream& out, const std::vector<TraceRow>& rows, int dimension);

/// Writes {dir}/{run_id}_trace.csv (iteration rows) and
/// {dir}/{run_id}_epochs.csv (epoch rows). Returns the two paths.
std::vector<std::string> write_trace_files(const IterationTrace& trace, long long epoch_size, const std::string& dir,
                                           const std::string& run_id);

}  // namespace stosqp
