#pragma once

// Thermodynamic-limit sweeps of ln|S_L^N|^2 and extraction of the decay
// exponent, plus the stage-by-stage decomposition of the double sum that
// carries the ln L growth.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "aoc/overlap_engine.hpp"

namespace aoc::asymptotics {

/// delta_alpha(sqrt E)^2 / pi^2.
double zeta(double energy, double alpha);
/// delta^2 / pi^2 for delta <= pi/2, (pi - delta)^2 / pi^2 otherwise.
double gamma(double energy, double alpha);

/// Particle-number schedule L -> N_L: floor(sqrt(E) L / pi) + offset.
struct Schedule {
  int offset = 0;

  int particles(double energy, double length) const;
  std::string to_string() const;
  /// "default" or "offset:k"; throws PreconditionError otherwise.
  static Schedule parse(const std::string& text);
};

struct SweepOptions {
  engine::Method method = engine::Method::kDirect;
  int truncation_multiplier = 0;  // K = multiplier * N; 0: product K from a 0.01 tail bound, trace max(8N, N+2000)
  int trace_terms = 0;            // 0: adaptive
};

struct SweepRecord {
  double length = 0.0;
  int n_occupied = 0;
  double log_overlap_sq = 0.0;
  double ratio = 0.0;        // log_overlap_sq / ln L
  double local_slope = 0.0;  // NaN for the first record
  engine::Method method = engine::Method::kDirect;
  double tail_bound = 0.0;
  double alpha = 0.0;
  double energy = 0.0;
};

/// Lengths must be strictly increasing, > 1, and give N >= 2. Entries are
/// computed concurrently; records come back ordered by L. Engine failures
/// are rethrown with the offending length in the message.
std::vector<SweepRecord> sweep(double energy, double alpha, std::span<const double> lengths,
                               const SweepOptions& options = {}, const Schedule& schedule = {});

/// Fills ratio and local_slope from length and log_overlap_sq.
void fill_slopes(std::vector<SweepRecord>& records);

struct ExponentReport {
  double zeta = 0.0;
  double gamma = 0.0;
  double fitted_slope_ls = 0.0;
  double fitted_intercept_ls = 0.0;
  double fitted_slope_diff = 0.0;
  std::vector<double> residuals;  // log_overlap_sq - (intercept + slope ln L)
};

/// Needs >= 3 records sharing (E, alpha); PreconditionError otherwise.
ExponentReport fit_exponent(std::span<const SweepRecord> records);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
};
/// Least-squares line y = intercept + slope x; needs >= 2 distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct AppendixDecomposition {
  double length = 0.0;
  int n_occupied = 0;
  int first_row = 1;  // 2 when alpha < 0
  double stage_exact = 0.0;
  double stage_linearized = 0.0;
  double stage_lambda = 0.0;
  double stage_kernel = 0.0;
  double stage_integral = 0.0;
  double stage_final = 0.0;
  double j1_term = 0.0;        // bound-state row of the product, 0 when alpha >= 0
  double bare_integral = 0.0;  // int int dy dx / (y - x)^2 over the same region
  int linearized_truncation = 0;
};

/// Column depth of the linearized and lambda stages, 64 N.
int appendix_truncation(int n_occupied);

/// Needs N >= 3. Throws NumericalError when a quadrature misses its tolerance.
AppendixDecomposition appendix_decomposition(double energy, double alpha, double length);

/// Nested adaptive quadrature of int_{x0}^{x1} dx int_{y0}^{y1} dy h(x, y) / (y - x)^2
/// for x1 < y0, in the variables u = -1/(y - x) and s = ln(y0 - x).
/// Throws NumericalError when the requested relative tolerance is missed.
double near_diagonal_integral(const std::function<double(double, double)>& h, double x0, double x1,
                              double y0, double y1, double rel_tol = 1e-8);

}  // namespace aoc::asymptotics
