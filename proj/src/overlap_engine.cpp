#include "aoc/overlap_engine.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "aoc/errors.hpp"
#include "aoc/numeric.hpp"
#include "aoc/rank1_lab.hpp"

namespace aoc::engine {

using delta::DeltaModel;
using delta::ModeSpectrum;

namespace {

constexpr double kTraceTailTarget = 1e-10;

OverlapResult base_result(const DeltaModel& model, Method method, int n, int k) {
  OverlapResult r;
  r.method = method;
  r.n_occupied = n;
  r.truncation = k;
  r.alpha = model.alpha();
  r.length = model.length();
  r.energy = model.energy();
  return r;
}

void check_spectrum(const DeltaModel& model, const ModeSpectrum& s, int depth) {
  if (s.alpha != model.alpha() || s.length != model.length()) {
    throw PreconditionError("spectrum was solved for a different model");
  }
  if (s.n_max < depth) {
    throw PreconditionError("spectrum depth " + std::to_string(s.n_max) + " below required " +
                            std::to_string(depth));
  }
}

void check_log_overlap(double value) {
  if (!std::isfinite(value)) throw NumericalError("ln|S|^2 is not finite");
  if (value > 1e-9) throw InvariantError("ln|S|^2 = " + std::to_string(value) + " exceeds 0");
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kDirect: return "direct";
    case Method::kProduct: return "product";
    case Method::kTraceSeries: return "trace_series";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view text) {
  if (text == "direct") return Method::kDirect;
  if (text == "product") return Method::kProduct;
  if (text == "trace" || text == "trace_series") return Method::kTraceSeries;
  return std::nullopt;
}

OverlapResult overlap_direct(const DeltaModel& model, const ModeSpectrum& spectrum, int n) {
  if (n < 1) throw PreconditionError("overlap_direct: N must be >= 1");
  check_spectrum(model, spectrum, n);
  OverlapResult r = base_result(model, Method::kDirect, n, n);
  const Eigen::MatrixXd gram = delta::overlap_block(spectrum, n, 1, n);
  r.log_overlap_sq = 2.0 * log_determinant(gram).log_abs;
  check_log_overlap(r.log_overlap_sq);
  return r;
}

OverlapResult overlap_direct(const DeltaModel& model, int n) {
  if (n < 1) throw PreconditionError("overlap_direct: N must be >= 1");
  return overlap_direct(model, delta::solve_spectrum(model.alpha(), model.length(), n), n);
}

double product_factor(const ModeSpectrum& s, int j, int k) {
  const double num = s.mu_minus_lambda(k, k) * -s.mu_minus_lambda(j, j);
  const double den = s.lambda_minus_lambda(k, j) * s.mu_minus_mu(k, j);
  if (den == 0.0) throw PreconditionError("product_factor: coincident eigenvalues");
  return num / den;
}

double product_tail_bound(double length, std::optional<double> kappa, int n, int k) {
  if (k <= n) throw PreconditionError("product_tail_bound: K must exceed N");
  if (n == 0) return 0.0;
  // Rows without the bound state: |x_jk| <= 2/(k-j)^2 and sum_{m>M} 1/m^2 < 1/M.
  const double x_max = 2.0 / ((k + 1.0 - n) * (k + 1.0 - n));
  const int first = kappa ? 2 : 1;
  std::vector<double> rows;
  for (int j = first; j <= n; ++j) rows.push_back(2.0 / (k - j));
  double bound = pairwise_sum(rows) / (1.0 - x_max);
  if (kappa) {
    // Bound-state row: |x_1k| <= 2 (pi^2 + kappa^2 L^2) / (pi^2 (k-1)^3).
    const double c = (kPi * kPi + (*kappa * length) * (*kappa * length)) / (kPi * kPi);
    const double x1_max = 2.0 * c / std::pow(k, 3.0);
    if (!(x1_max < 1.0)) return std::numeric_limits<double>::infinity();
    bound += c / ((k - 1.0) * (k - 1.0)) / (1.0 - x1_max);
  }
  return bound;
}

int truncation_for_tail(double alpha, double length, int n, double target) {
  if (!(target > 0.0)) throw PreconditionError("truncation_for_tail: target must be positive");
  std::optional<double> kappa;
  if (alpha < 0.0) kappa = delta::solve_bound_state(alpha, length);
  int hi = std::max(2 * n, n + 2);
  while (product_tail_bound(length, kappa, n, hi) > target) {
    if (hi > (1 << 28)) throw NumericalError("truncation_for_tail: target unreachable");
    hi *= 2;
  }
  int lo = n + 1;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (product_tail_bound(length, kappa, n, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

OverlapResult overlap_product(const DeltaModel& model, const ModeSpectrum& s, int n, int k) {
  if (n < 0) throw PreconditionError("overlap_product: N must be >= 0");
  if (k <= n) throw PreconditionError("overlap_product: truncation K must exceed N");
  check_spectrum(model, s, k);
  OverlapResult r = base_result(model, Method::kProduct, n, k);
  if (n == 0) return r;
  std::vector<double> rows(static_cast<std::size_t>(n), 0.0);
  parallel_for(rows.size(), [&](std::size_t i) {
    const int j = static_cast<int>(i) + 1;
    LogOnePlusSum acc;
    for (int col = n + 1; col <= k; ++col) {
      const double x = product_factor(s, j, col);
      if (!(x > -1.0)) throw InvariantError("overlap_product: non-positive factor");
      acc.add(x);
    }
    rows[i] = acc.value();
  });
  r.log_overlap_sq = pairwise_sum(rows);
  r.tail_bound = product_tail_bound(model.length(), s.kappa, n, k);
  check_log_overlap(r.log_overlap_sq);
  return r;
}

OverlapResult overlap_product(const DeltaModel& model, int n, int k) {
  if (k <= n) throw PreconditionError("overlap_product: truncation K must exceed N");
  return overlap_product(model, delta::solve_spectrum(model.alpha(), model.length(), k), n, k);
}

double column_tail_bound(int n, int k) {
  if (k <= n + 1) throw PreconditionError("column_tail_bound: K must exceed N + 1");
  // <phi_j, psi_k>^2 <= 4 j^2 / (pi^2 (k-1-j)^2 (k-1+j)^2 (1 - 1/(2 pi (k-1)))).
  std::vector<double> rows;
  const double norm_factor = 1.0 - 1.0 / (2.0 * kPi * k);
  for (int j = 1; j <= n; ++j) {
    const double jj = j;
    rows.push_back(4.0 * jj * jj /
                   (kPi * kPi * (k + jj) * (k + jj) * (k - jj - 1.0) * norm_factor));
  }
  return pairwise_sum(rows);
}

int default_trace_truncation(int n) { return std::max(8 * n, n + 2000); }

OverlapResult overlap_trace_series(const DeltaModel& model, int n, int k, int n_max) {
  if (n < 1) throw PreconditionError("overlap_trace_series: N must be >= 1");
  if (k <= n + 1) throw PreconditionError("overlap_trace_series: truncation K must exceed N + 1");
  if (n_max < 0) throw PreconditionError("overlap_trace_series: n_max must be >= 0");
  const ModeSpectrum s = delta::solve_spectrum(model.alpha(), model.length(), k);
  OverlapResult r = base_result(model, Method::kTraceSeries, n, k);
  const Eigen::MatrixXd block = delta::overlap_block(s, n, n + 1, k);

  int terms = n_max;
  if (terms == 0) {
    // Pick the number of terms from the geometric tail estimate.
    const Eigen::MatrixXd m = block * block.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    const double top = solver.eigenvalues().maxCoeff();
    if (!(top < 1.0)) throw NumericalError("trace series diverges: top singular value >= 1");
    const double trace_m = m.trace();
    terms = 1;
    while (terms < kMaxTraceTerms &&
           trace_m * std::pow(top, terms) / ((terms + 1.0) * (1.0 - top)) > kTraceTailTarget) {
      ++terms;
    }
  }
  const rank1::TraceSeries series = rank1::trace_log_series(block, terms);
  const double sigma_sq = series.top_singular_value * series.top_singular_value;
  const double tau = column_tail_bound(n, k) / (1.0 - sigma_sq);
  const double truncation_error =
      tau < 1.0 ? tau / (1.0 - tau) : std::numeric_limits<double>::infinity();
  r.log_overlap_sq = series.log_overlap;
  r.tail_bound = series.tail_bound + truncation_error;
  r.terms = terms;
  r.top_singular_value = series.top_singular_value;
  check_log_overlap(r.log_overlap_sq);
  return r;
}

}  // namespace aoc::engine
