#pragma once

// Three independent evaluations of ln|S_L^N|^2, the squared overlap of the
// N-fermion ground states of the free and the point-perturbed s-wave
// operators:
//
//   direct        N x N determinant of closed-form eigenfunction overlaps
//   product       eigenvalue double product, truncated at depth K
//   trace_series  -sum_n tr((B B^T)^n) / n over the occupied x unoccupied block
//
// Each result carries an additive error budget (`tail_bound`).

#include <optional>
#include <string>
#include <string_view>

#include "aoc/delta_model.hpp"

namespace aoc::engine {

enum class Method { kDirect, kProduct, kTraceSeries };

std::string_view to_string(Method method);
/// Accepts "direct", "product", "trace" and "trace_series".
std::optional<Method> parse_method(std::string_view text);

struct OverlapResult {
  double log_overlap_sq = 0.0;
  Method method = Method::kDirect;
  int n_occupied = 0;
  int truncation = 0;       // K; equals N for the direct route
  double tail_bound = 0.0;  // additive bound on |computed - exact|, 0 for direct
  int terms = 0;            // trace-series terms, 0 otherwise
  double top_singular_value = 0.0;  // trace series only
  double alpha = 0.0;
  double length = 0.0;
  double energy = 0.0;
};

OverlapResult overlap_direct(const delta::DeltaModel& model, int n_occupied);
OverlapResult overlap_direct(const delta::DeltaModel& model, const delta::ModeSpectrum& spectrum,
                             int n_occupied);

/// Requires K > N. The tail bound covers the omitted k > K factors.
OverlapResult overlap_product(const delta::DeltaModel& model, int n_occupied, int truncation);
OverlapResult overlap_product(const delta::DeltaModel& model, const delta::ModeSpectrum& spectrum,
                              int n_occupied, int truncation);

/// n_max = 0 picks the smallest number of terms whose geometric tail is
/// below 1e-10 (at most kMaxTraceTerms). The tail bound covers both the
/// omitted terms and the k > K columns missing from the block.
/// Throws NumericalError when the top singular value of the block is >= 1.
OverlapResult overlap_trace_series(const delta::DeltaModel& model, int n_occupied, int truncation,
                                   int n_max = 0);

inline constexpr int kMaxTraceTerms = 5000;

/// x_jk with factor_jk = 1 + x_jk = |mu_k - lambda_j||lambda_k - mu_j| / (|lambda_k - lambda_j||mu_k - mu_j|).
double product_factor(const delta::ModeSpectrum& spectrum, int j, int k);

/// Bound on |sum_{j<=N} sum_{k>K} ln(1 + x_jk)|.
double product_tail_bound(double length, std::optional<double> kappa, int n_occupied,
                          int truncation);

/// Smallest K > N (found by doubling and bisection) whose product tail bound is <= target.
int truncation_for_tail(double alpha, double length, int n_occupied, double target);

/// Bound on sum_{j<=N} sum_{k>K} <phi_j, psi_k>^2, independent of L.
double column_tail_bound(int n_occupied, int truncation);

/// Default trace-series truncation max(8N, N + 2000).
int default_trace_truncation(int n_occupied);

}  // namespace aoc::engine
