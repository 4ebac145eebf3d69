#pragma once

// Finite-dimensional laboratory for rank-one perturbations B = A + |phi><phi|.
//
// Every identity that links eigenvector overlaps of A and B to their
// eigenvalues alone is checked here against brute-force dense linear algebra:
// the double-product formula for |det <phi_j, psi_k>|^2, the Cauchy
// determinant, the resolvent products and their residues, and the
// trace-series expansion of ln|det|^2.
//
// Orientation follows the compact-operator convention: eigenvalues are sorted
// in decreasing order, beta_1 > alpha_1 > beta_2 > ...; "occupied" means the
// N largest eigenvalues.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "aoc/spectrum_pair.hpp"

namespace aoc::rank1 {

struct PerturbedPair {
  int dimension = 0;
  Eigen::MatrixXd base;          // A, symmetric positive definite
  Eigen::VectorXd perturbation;  // phi
  std::uint64_t seed = 0;

  Eigen::MatrixXd perturbed() const { return base + perturbation * perturbation.transpose(); }
};

inline constexpr int kMinDimension = 2;
inline constexpr int kMaxDimension = 64;

/// Seeded random pair: A = Q D Q^T with Q from the QR factorisation of a
/// Gaussian matrix and D log-uniform in [0.1, 10]; phi Gaussian. Candidates
/// with spectral gap <= 1e-6 rho(A), an eigen-component of phi below
/// 1e-6 |phi|, or an interlacing gap <= 1e-10 rho(B) are rejected and redrawn.
/// Throws PreconditionError outside [2, 64], NumericalError if no candidate
/// survives the bounded retries.
PerturbedPair generate_pair(int dimension, std::uint64_t seed);

/// Wraps an explicit (A, phi) after checking the PerturbedPair invariants.
PerturbedPair make_pair(Eigen::MatrixXd base, Eigen::VectorXd perturbation,
                        std::uint64_t seed = 0);

/// Eigen-decompositions of A and B with eigenvalues in decreasing order and
/// eigenvectors in matching columns.
struct Diagonalization {
  Eigen::VectorXd alphas;
  Eigen::MatrixXd phis;  // columns: eigenvectors of A
  Eigen::VectorXd betas;
  Eigen::MatrixXd psis;  // columns: eigenvectors of B

  // The same eigenpairs before rounding to double; B is formed in long double.
  using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  VectorXld alphas_ext;
  MatrixXld phis_ext;
  VectorXld betas_ext;
  MatrixXld psis_ext;

  SpectrumPair spectra() const;
};

Diagonalization diagonalize(const PerturbedPair& pair);

/// ln |det(<phi_j, psi_k>)_{j,k<=N}|^2 from eigenvectors.
double log_gram_overlap(const Diagonalization& d, int n_occupied);
double log_gram_overlap(const PerturbedPair& pair, int n_occupied);
double gram_overlap(const PerturbedPair& pair, int n_occupied);

/// The same quantity from eigenvalues only (exact in finite dimension).
double product_overlap(const SpectrumPair& spectra, int n_occupied);

/// ln |det(1/(beta_k - alpha_j))_{j,k<=N}|^2 through the closed Cauchy product.
double log_cauchy_determinant(std::span<const double> alphas, std::span<const double> betas,
                              int n);
double cauchy_determinant(std::span<const double> alphas, std::span<const double> betas, int n);

struct ResolventProductFit {
  double a = 0.0;  // <phi,(A-z)^-1 phi> + 1 = a prod (beta_k - z)/(alpha_k - z)
  double b = 0.0;  // <phi,(B-z)^-1 phi> - 1 = b prod (alpha_k - z)/(beta_k - z)
  std::vector<double> sample_points;
  std::vector<double> residuals;           // |LHS_A - a G(z)| / |LHS_A|
  std::vector<double> residuals_b;         // |LHS_B - b F(z)| / |LHS_B|
  std::vector<double> product_defects;     // |F(z) G(z) - 1|
  std::vector<double> resolvent_defects;   // |(<phi,R_B phi> - 1)(<phi,R_A phi> + 1) + 1|
};

/// 20 points log-spaced in [-100, -0.5].
std::vector<double> default_resolvent_samples();

/// Resolvent quadratic forms come from linear solves, products from the
/// eigenvalues; a and b are medians of the per-point ratios.
/// Throws PreconditionError if some z is not strictly below both spectra.
ResolventProductFit resolvent_product_fit(const PerturbedPair& pair,
                                          std::span<const double> sample_z);

/// Both sides of |<phi_j,phi><psi_k,phi>|^2 = |beta_j - alpha_j||alpha_k - beta_k|
///   * prod_{l!=j} |beta_l - alpha_j|/|alpha_l - alpha_j|
///   * prod_{l!=k} |alpha_l - beta_k|/|beta_l - beta_k|   (1-based j, k).
struct ResidueWeights {
  double from_eigenvectors = 0.0;
  double from_eigenvalues = 0.0;
};
ResidueWeights residue_weights(const PerturbedPair& pair, int j, int k);
ResidueWeights residue_weights(const PerturbedPair& pair, const Diagonalization& d, int j, int k);

/// Result of -sum_{n<=n_max} tr((B B^T)^n)/n for an occupied-by-unoccupied
/// overlap block B.
struct TraceSeries {
  double log_overlap = 0.0;
  double tail_bound = 0.0;          // bound on the omitted terms n > n_max
  double top_singular_value = 0.0;  // of B
  int terms = 0;
  std::vector<double> partial_sums;
};

/// Shared by the matrix lab and the delta model. Throws NumericalError when the
/// top singular value of `block` is >= 1 (the series diverges).
TraceSeries trace_log_series(const Eigen::MatrixXd& block, int n_max);

TraceSeries trace_series_log_overlap(const PerturbedPair& pair, int n_occupied, int n_max);

}  // namespace aoc::rank1
