#pragma once

// s-wave (l = 0) channel of the free and point-interaction Laplacians on (0, L)
// with a Dirichlet wall at L.
//
//   unperturbed:  f(0) = 0                      lambda_n = (n pi / L)^2
//   perturbed:    -4 pi alpha f(0) + f'(0) = 0  mu_n from sqrt(mu_n) L + delta(sqrt(mu_n)) = n pi
//
// Units: hbar = 2m = 1, so energies are squared wave numbers and alpha is an
// inverse length. For alpha < 0 the perturbed operator has one negative
// eigenvalue mu_1 = -kappa^2 with kappa coth(kappa L) = 4 pi |alpha|.
//
// Every positive perturbed mode is stored through its phase shift
// t_n = delta(sqrt(mu_n)), so that sqrt(mu_n) = (n pi - t_n) / L and all
// eigenvalue differences can be formed without cancellation.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "aoc/spectrum_pair.hpp"

namespace aoc::delta {

/// Coupling alpha, box length L and Fermi energy E.
class DeltaModel {
 public:
  /// Throws PreconditionError for L <= 0, E <= 0 or non-finite input and
  /// RegimeError when alpha < 0 and 4 pi |alpha| L <= 1 + 1e-6.
  static DeltaModel create(double alpha, double length, double energy);

  double alpha() const { return alpha_; }
  double length() const { return length_; }
  double energy() const { return energy_; }
  bool has_bound_state() const { return alpha_ < 0.0; }

 private:
  DeltaModel(double alpha, double length, double energy)
      : alpha_(alpha), length_(length), energy_(energy) {}
  double alpha_;
  double length_;
  double energy_;
};

/// Throws RegimeError when alpha < 0 and the box is too small to hold the
/// bound state (4 pi |alpha| L <= 1 + 1e-6), PreconditionError for L <= 0.
void check_regime(double alpha, double length);

/// (n pi / L)^2.
double lambda_n(int n, double length);

/// Scattering phase shift: arctan(k / (4 pi alpha)) for alpha >= 0,
/// pi - arctan(k / (4 pi |alpha|)) for alpha < 0, and pi/2 at alpha = 0.
/// Throws PreconditionError for k <= 0.
double phase_shift(double k, double alpha);

/// d delta / dk (zero at alpha = 0).
double phase_shift_derivative(double k, double alpha);

/// Solved spectrum up to depth n_max (1-based mode index n).
struct ModeSpectrum {
  double alpha = 0.0;
  double length = 0.0;
  int n_max = 0;
  std::optional<double> kappa;  // bound-state decay rate, alpha < 0 only
  std::vector<double> shifts;   // t_n = delta(sqrt(mu_n)); NaN for the bound state
  std::vector<double> thetas;   // Pruefer phase of sin(sqrt(mu_n) x + theta_n); NaN for the bound state
  std::vector<double> norms;    // |sin(sqrt(mu_n) x + theta_n)|_L2, or sinh(kappa L)/|sinh(kappa(L - x))|_L2 for the bound state

  bool is_bound(int n) const { return kappa.has_value() && n == 1; }
  double lambda(int n) const { return lambda_n(n, length); }
  /// sqrt(mu_n) for a positive mode.
  double wave_number(int n) const;
  double mu(int n) const;
  double shift(int n) const { return shifts.at(static_cast<std::size_t>(n - 1)); }
  double theta(int n) const { return thetas.at(static_cast<std::size_t>(n - 1)); }
  /// |sqrt(mu_n) L + delta(sqrt(mu_n)) - n pi| for positive modes,
  /// |kappa coth(kappa L) - 4 pi |alpha|| for the bound state.
  double residual(int n) const;

  double lambda_minus_lambda(int k, int j) const;
  double mu_minus_mu(int k, int j) const;
  double mu_minus_lambda(int k, int j) const;

  SpectrumPair spectra() const;
};

/// Roots of the quantisation condition for n = 1 .. n_max.
ModeSpectrum solve_spectrum(double alpha, double length, int n_max);

/// Phase shift t_n of the n-th positive mode by safeguarded Newton on
/// t = delta((n pi - t) / L). Requires n >= 2 when alpha < 0.
double solve_shift(int n, double alpha, double length);

/// mu_n >= 0 for a positive mode (n >= 2 when alpha < 0).
double solve_mu(int n, double alpha, double length);

/// kappa > 0 with kappa coth(kappa L) = 4 pi |alpha|; RegimeError outside the regime.
double solve_bound_state(double alpha, double length);

struct ModeValues {
  double phi = 0.0;  // sqrt(2/L) sin(n pi x / L)
  double psi = 0.0;  // normalised perturbed eigenfunction
};

/// Throws PreconditionError for x outside [0, L] or n outside [1, n_max].
ModeValues eigenfunctions(const ModeSpectrum& spectrum, int n, double x);
double perturbed_derivative(const ModeSpectrum& spectrum, int n, double x);

/// <phi_j, psi_k> in closed form (Green's identity; boundary terms at L vanish).
/// Throws InvariantError if sqrt(lambda_j) == sqrt(mu_k).
double overlap_entry(const ModeSpectrum& spectrum, int j, int k);

/// Entries <phi_j, psi_k> for j = 1..rows and k = first_col..last_col (inclusive).
Eigen::MatrixXd overlap_block(const ModeSpectrum& spectrum, int rows, int first_col, int last_col);

/// floor(sqrt(E) L / pi); RegimeError when it is zero.
int particle_number_l0(double energy, double length);

/// Default truncation depth max(4N, N + 2000).
int default_truncation(int n_occupied);

/// |delta(sqrt(mu_n)) - delta(sqrt(lambda_n)) + delta'(sqrt(lambda_n)) delta(sqrt(lambda_n)) / L| * L
/// for a positive mode n.
double phase_expansion_check(const ModeSpectrum& spectrum, int n);

}  // namespace aoc::delta
