#include "aoc/spectrum_pair.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aoc/errors.hpp"
#include "aoc/numeric.hpp"

namespace aoc {

namespace {

// Chain b_1, a_1, b_2, a_2, ... mapped to increasing order.
double chain_value(const std::vector<double>& a, const std::vector<double>& b, std::size_t pos,
                   Orientation o) {
  const double v = (pos % 2 == 0) ? b[pos / 2] : a[pos / 2];
  return o == Orientation::kIncreasing ? v : -v;
}

}  // namespace

SpectrumPair::SpectrumPair(std::vector<double> unperturbed, std::vector<double> perturbed,
                           Orientation orientation)
    : unperturbed_(std::move(unperturbed)),
      perturbed_(std::move(perturbed)),
      orientation_(orientation) {
  if (unperturbed_.size() != perturbed_.size()) {
    throw PreconditionError("SpectrumPair: sequences must have equal length");
  }
  const std::size_t chain = 2 * unperturbed_.size();
  for (std::size_t pos = 0; pos < chain; ++pos) {
    const double v = chain_value(unperturbed_, perturbed_, pos, orientation_);
    if (!std::isfinite(v)) throw PreconditionError("SpectrumPair: non-finite eigenvalue");
    if (pos + 1 < chain && !(v < chain_value(unperturbed_, perturbed_, pos + 1, orientation_))) {
      throw PreconditionError("SpectrumPair: sequences do not strictly interlace at position " +
                              std::to_string(pos + 1));
    }
  }
}

double SpectrumPair::min_interlacing_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  const std::size_t chain = 2 * size();
  for (std::size_t pos = 0; pos + 1 < chain; ++pos) {
    gap = std::min(gap, chain_value(unperturbed_, perturbed_, pos + 1, orientation_) -
                            chain_value(unperturbed_, perturbed_, pos, orientation_));
  }
  return gap;
}

double log_product_overlap(const SpectrumPair& spectra, std::size_t n_occupied) {
  const std::size_t n = spectra.size();
  if (n_occupied > n) throw PreconditionError("log_product_overlap: N exceeds sequence length");
  const auto& a = spectra.unperturbed();
  const auto& b = spectra.perturbed();
  std::vector<double> rows(n_occupied, 0.0);
  parallel_for(n_occupied, [&](std::size_t j) {
    LogOnePlusSum acc;
    const double shift_j = a[j] - b[j];
    for (std::size_t k = n_occupied; k < n; ++k) {
      const double den = (a[k] - a[j]) * (b[k] - b[j]);
      if (den == 0.0) throw PreconditionError("log_product_overlap: coincident eigenvalues");
      const double x = (b[k] - a[k]) * shift_j / den;
      if (!(x > -1.0)) throw InvariantError("log_product_overlap: non-positive factor");
      acc.add(x);
    }
    rows[j] = acc.value();
  });
  return pairwise_sum(rows);
}

}  // namespace aoc
