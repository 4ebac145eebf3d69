#pragma once

// Small numerical toolkit shared by every module: log-space determinants,
// compensated log-product accumulation, safeguarded root finding and a
// deterministic parallel loop.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aoc/errors.hpp"

namespace aoc {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// log|det M| together with the sign of det M.
struct LogDet {
  double log_abs = 0.0;
  int sign = 1;
  bool full_pivoting = false;  // true when the growth-factor fallback fired
  double growth = 1.0;         // max|U| / max|M| of the partial-pivot factorisation
};

/// LU with partial pivoting, evaluated in log-magnitude + sign form. Falls back
/// to full pivoting when the growth factor exceeds `growth_limit`.
/// An empty matrix has determinant 1. Throws NumericalError when the matrix is
/// singular to working precision.
LogDet log_determinant(const Eigen::MatrixXd& m, double growth_limit = 1e8);

/// Accumulates sum_i log(1 + x_i) with log1p and Neumaier compensation, so
/// that millions of factors 1 + O(1/k^2) do not drift.
class LogOnePlusSum {
 public:
  void add(double x);
  void add_log(double log_value);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Pairwise (cascade) summation with a fixed reduction tree.
double pairwise_sum(std::span<const double> values);

/// Safeguarded root finder for a monotone bracketed function: bisection until
/// the bracket has shrunk by 1e-3, then Newton steps, falling back to
/// bisection whenever a step leaves the bracket or fails to reduce |f|.
/// Converged when a step or the bracket is below `xtol`.
/// Throws NumericalError on a missing sign change or after `max_iter` steps.
template <class F, class DF>
double bracketed_newton(F&& f, DF&& df, double lo, double hi, double xtol,
                        int max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw NumericalError("bracketed_newton: no sign change on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  }
  const bool increasing = flo < 0.0;
  const double initial_width = hi - lo;
  int iter = 0;
  auto shrink = [&](double x, double fx) {
    if ((fx < 0.0) == increasing) {
      lo = x;
    } else {
      hi = x;
    }
  };
  while (hi - lo > 1e-3 * initial_width) {
    if (++iter > max_iter) throw NumericalError("bracketed_newton: bisection did not converge");
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    shrink(mid, fm);
  }
  double x = 0.5 * (lo + hi);
  double fx = f(x);
  while (true) {
    if (fx == 0.0) return x;
    if (++iter > max_iter) throw NumericalError("bracketed_newton: Newton did not converge");
    shrink(x, fx);
    const double d = df(x);
    double next = x - fx / d;
    bool bisect = !(d != 0.0) || !std::isfinite(next) || next <= lo || next >= hi;
    if (bisect) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    const double fnext = f(next);
    if (!bisect && std::abs(fnext) > 0.5 * std::abs(fx) && step > xtol) {
      // Newton stalled; take a bisection step instead.
      shrink(next, fnext);
      x = 0.5 * (lo + hi);
      fx = f(x);
      continue;
    }
    x = next;
    fx = fnext;
    if (step <= xtol || hi - lo <= xtol) return x;
  }
}

/// Worker threads used by parallel_for: AOC_THREADS if set, else hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n). Each index must write only its own output
/// slot; results are then independent of scheduling. Nested calls run serially.
/// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace aoc
