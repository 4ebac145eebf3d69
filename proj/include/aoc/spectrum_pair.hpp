#pragma once

#include <cstddef>
#include <vector>

namespace aoc {

/// Ordering convention of a SpectrumPair.
///  - Decreasing: eigenvalues of compact operators A, B = A + |phi><phi|,
///    beta_1 > alpha_1 > beta_2 > alpha_2 > ...
///  - Increasing: eigenvalues of Schroedinger operators h_L, h_{alpha,L},
///    mu_1 < lambda_1 < mu_2 < lambda_2 < ...
/// In both cases the perturbed sequence leads the chain.
enum class Orientation { kDecreasing, kIncreasing };

/// Two strictly interlacing eigenvalue sequences of equal length.
class SpectrumPair {
 public:
  /// Throws PreconditionError unless the sequences strictly interlace.
  SpectrumPair(std::vector<double> unperturbed, std::vector<double> perturbed,
               Orientation orientation);

  const std::vector<double>& unperturbed() const { return unperturbed_; }
  const std::vector<double>& perturbed() const { return perturbed_; }
  Orientation orientation() const { return orientation_; }
  std::size_t size() const { return unperturbed_.size(); }

  /// Smallest distance between neighbours of the interlaced chain.
  double min_interlacing_gap() const;

 private:
  std::vector<double> unperturbed_;
  std::vector<double> perturbed_;
  Orientation orientation_;
};

/// ln of the eigenvalue double product
///   prod_{j<=N} prod_{N<k<=size} |b_k - a_j||a_k - b_j| / (|a_k - a_j||b_k - b_j|)
/// with a = unperturbed and b = perturbed. Each factor is written as 1 + x_jk,
///   x_jk = (b_k - a_k)(a_j - b_j) / ((a_k - a_j)(b_k - b_j)),
/// and accumulated through log1p. N = 0 gives 0.
double log_product_overlap(const SpectrumPair& spectra, std::size_t n_occupied);

}  // namespace aoc
