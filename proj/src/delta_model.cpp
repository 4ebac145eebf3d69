#include "aoc/delta_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "aoc/errors.hpp"
#include "aoc/numeric.hpp"

namespace aoc::delta {

namespace {

constexpr double kRegimeMargin = 1e-6;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double coupling_scale(double alpha) { return 4.0 * kPi * std::abs(alpha); }

// sinh(u)^2 / (sinh(2u) - 2u), evaluated without overflow or cancellation.
double bound_ratio_core(double u) {
  if (u < 0.5) {
    // sinh(2u) - 2u = sum_{m>=1} (2u)^{2m+1} / (2m+1)!
    const double w = 2.0 * u;
    double term = w * w * w / 6.0;
    double series = 0.0;
    for (int m = 1; m < 40 && term > 1e-18 * series; ++m) {
      series += term;
      term *= w * w / ((2.0 * m + 2.0) * (2.0 * m + 3.0));
    }
    const double s = std::sinh(u);
    return s * s / series;
  }
  const double e2 = std::exp(-2.0 * u);
  const double num = 0.25 * std::expm1(-2.0 * u) * std::expm1(-2.0 * u);
  const double den = -0.5 * std::expm1(-4.0 * u) - 2.0 * u * e2;
  return num / den;
}

void check_mode(const ModeSpectrum& s, int n) {
  if (n < 1 || n > s.n_max) {
    throw PreconditionError("mode index " + std::to_string(n) + " outside [1, " +
                            std::to_string(s.n_max) + "]");
  }
}

void check_position(const ModeSpectrum& s, double x) {
  if (!(x >= 0.0 && x <= s.length)) {
    throw PreconditionError("position x = " + std::to_string(x) + " outside [0, L]");
  }
}

// Integer m with sqrt(mu_n) L + theta_n = m pi.
int node_count(const ModeSpectrum& s, int n) { return s.alpha < 0.0 ? n - 1 : n; }

double parity(int m) { return (m % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

DeltaModel DeltaModel::create(double alpha, double length, double energy) {
  if (!std::isfinite(alpha)) throw PreconditionError("alpha must be finite");
  if (!(energy > 0.0) || !std::isfinite(energy)) throw PreconditionError("energy must be positive");
  check_regime(alpha, length);
  return DeltaModel(alpha, length, energy);
}

void check_regime(double alpha, double length) {
  if (!(length > 0.0) || !std::isfinite(length)) throw PreconditionError("length must be positive");
  if (alpha < 0.0 && !(coupling_scale(alpha) * length > 1.0 + kRegimeMargin)) {
    throw RegimeError("bound-state regime requires 4 pi |alpha| L > 1 (got " +
                      std::to_string(coupling_scale(alpha) * length) + ")");
  }
}

double lambda_n(int n, double length) {
  const double p = n * kPi / length;
  return p * p;
}

double phase_shift(double k, double alpha) {
  if (!(k > 0.0)) throw PreconditionError("phase_shift: k must be positive");
  if (alpha == 0.0) return 0.5 * kPi;
  const double c = coupling_scale(alpha);
  return alpha > 0.0 ? std::atan(k / c) : kPi - std::atan(k / c);
}

double phase_shift_derivative(double k, double alpha) {
  if (alpha == 0.0) return 0.0;
  const double c = coupling_scale(alpha);
  const double d = c / (c * c + k * k);
  return alpha > 0.0 ? d : -d;
}

double solve_shift(int n, double alpha, double length) {
  check_regime(alpha, length);
  if (n < 1 || (alpha < 0.0 && n < 2)) {
    throw PreconditionError("solve_shift: mode " + std::to_string(n) + " is not a positive mode");
  }
  if (alpha == 0.0) return 0.5 * kPi;
  const double n_pi = n * kPi;
  auto f = [&](double t) { return t - phase_shift((n_pi - t) / length, alpha); };
  auto df = [&](double t) { return 1.0 + phase_shift_derivative((n_pi - t) / length, alpha) / length; };
  const double xtol = 4.0 * std::numeric_limits<double>::epsilon();
  if (alpha > 0.0) return bracketed_newton(f, df, 0.0, 0.5 * kPi, xtol);
  // t = pi would put sqrt(mu) at (n - 1) pi / L, which is positive for n >= 2.
  return bracketed_newton(f, df, 0.5 * kPi, kPi, xtol);
}

double solve_mu(int n, double alpha, double length) {
  const double q = (n * kPi - solve_shift(n, alpha, length)) / length;
  return q * q;
}

double solve_bound_state(double alpha, double length) {
  if (!(alpha < 0.0)) throw RegimeError("bound state requires alpha < 0");
  check_regime(alpha, length);
  const double c = coupling_scale(alpha);
  auto g = [&](double kappa) {
    if (kappa == 0.0) return 1.0 / length - c;
    return kappa / std::tanh(kappa * length) - c;
  };
  auto dg = [&](double kappa) {
    const double u = kappa * length;
    if (u < 1e-8) return 2.0 * u / 3.0;
    const double s = u > 350.0 ? 0.0 : u / (std::sinh(u) * std::sinh(u));
    return 1.0 / std::tanh(u) - s;
  };
  return bracketed_newton(g, dg, 0.0, c, 4.0 * std::numeric_limits<double>::epsilon() * c);
}

double ModeSpectrum::wave_number(int n) const {
  if (is_bound(n)) throw PreconditionError("wave_number: bound state has no real wave number");
  return (n * kPi - shift(n)) / length;
}

double ModeSpectrum::mu(int n) const {
  if (is_bound(n)) return -(*kappa) * (*kappa);
  const double q = wave_number(n);
  return q * q;
}

double ModeSpectrum::residual(int n) const {
  if (is_bound(n)) {
    return std::abs(*kappa / std::tanh(*kappa * length) - coupling_scale(alpha));
  }
  const double q = wave_number(n);
  return std::abs(q * length + phase_shift(q, alpha) - n * kPi);
}

double ModeSpectrum::lambda_minus_lambda(int k, int j) const {
  return kPi * kPi * static_cast<double>(k - j) * static_cast<double>(k + j) / (length * length);
}

double ModeSpectrum::mu_minus_mu(int k, int j) const {
  const bool bk = is_bound(k);
  const bool bj = is_bound(j);
  if (bk && bj) return 0.0;
  if (bj) return mu(k) + (*kappa) * (*kappa);
  if (bk) return -(*kappa) * (*kappa) - mu(j);
  const double tk = shift(k);
  const double tj = shift(j);
  return ((k - j) * kPi - tk + tj) * ((k + j) * kPi - tk - tj) / (length * length);
}

double ModeSpectrum::mu_minus_lambda(int k, int j) const {
  if (is_bound(k)) return -(*kappa) * (*kappa) - lambda(j);
  const double tk = shift(k);
  return ((k - j) * kPi - tk) * ((k + j) * kPi - tk) / (length * length);
}

SpectrumPair ModeSpectrum::spectra() const {
  std::vector<double> lambdas(static_cast<std::size_t>(n_max));
  std::vector<double> mus(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    lambdas[n - 1] = lambda(n);
    mus[n - 1] = mu(n);
  }
  return SpectrumPair(std::move(lambdas), std::move(mus), Orientation::kIncreasing);
}

ModeSpectrum solve_spectrum(double alpha, double length, int n_max) {
  check_regime(alpha, length);
  if (n_max < 1) throw PreconditionError("solve_spectrum: n_max must be >= 1");
  ModeSpectrum s;
  s.alpha = alpha;
  s.length = length;
  s.n_max = n_max;
  s.shifts.assign(static_cast<std::size_t>(n_max), kNaN);
  s.thetas.assign(static_cast<std::size_t>(n_max), kNaN);
  s.norms.assign(static_cast<std::size_t>(n_max), kNaN);
  int first_positive = 1;
  if (alpha < 0.0) {
    const double kappa = solve_bound_state(alpha, length);
    s.kappa = kappa;
    s.norms[0] = std::sqrt(4.0 * kappa * bound_ratio_core(kappa * length));
    first_positive = 2;
  }
  parallel_for(static_cast<std::size_t>(n_max - first_positive + 1), [&](std::size_t i) {
    const int n = first_positive + static_cast<int>(i);
    const double t = solve_shift(n, alpha, length);
    const double q = (n * kPi - t) / length;
    // Pruefer phase: theta = arctan(q / (4 pi alpha)), i.e. t - pi on the attractive branch.
    const double theta = alpha < 0.0 ? t - kPi : t;
    s.shifts[n - 1] = t;
    s.thetas[n - 1] = theta;
    s.norms[n - 1] = std::sqrt(0.5 * length + std::sin(2.0 * theta) / (4.0 * q));
  });
  return s;
}

ModeValues eigenfunctions(const ModeSpectrum& s, int n, double x) {
  check_mode(s, n);
  check_position(s, x);
  const double length = s.length;
  const double amplitude = std::sqrt(2.0 / length);
  ModeValues v;
  if (x <= 0.5 * length) {
    v.phi = amplitude * std::sin(n * kPi * (x / length));
  } else {
    v.phi = amplitude * parity(n + 1) * std::sin(n * kPi * ((length - x) / length));
  }
  if (s.is_bound(n)) {
    const double kappa = *s.kappa;
    const double u = kappa * length;
    // r * sinh(kappa (L - x)) / sinh(kappa L)
    v.psi = s.norms[0] * std::exp(-kappa * x) * std::expm1(-2.0 * kappa * (length - x)) /
            std::expm1(-2.0 * u);
    return v;
  }
  const double q = s.wave_number(n);
  const double norm = s.norms[n - 1];
  if (x <= 0.5 * length) {
    v.psi = std::sin(q * x + s.theta(n)) / norm;
  } else {
    v.psi = parity(node_count(s, n) + 1) * std::sin(q * (length - x)) / norm;
  }
  return v;
}

double perturbed_derivative(const ModeSpectrum& s, int n, double x) {
  check_mode(s, n);
  check_position(s, x);
  const double length = s.length;
  if (s.is_bound(n)) {
    const double kappa = *s.kappa;
    const double u = kappa * length;
    const double e = std::exp(-2.0 * kappa * (length - x));
    return -kappa * s.norms[0] * std::exp(-kappa * x) * (1.0 + e) / (-std::expm1(-2.0 * u));
  }
  const double q = s.wave_number(n);
  const double norm = s.norms[n - 1];
  if (x <= 0.5 * length) return q * std::cos(q * x + s.theta(n)) / norm;
  return q * parity(node_count(s, n)) * std::cos(q * (length - x)) / norm;
}

double overlap_entry(const ModeSpectrum& s, int j, int k) {
  check_mode(s, j);
  check_mode(s, k);
  const double length = s.length;
  const double p = j * kPi / length;
  const double amplitude = std::sqrt(2.0 / length);
  if (s.is_bound(k)) {
    const double kappa = *s.kappa;
    return amplitude * p * s.norms[0] / (p * p + kappa * kappa);
  }
  const double t = s.shift(k);
  const double p_minus_q = ((j - k) * kPi + t) / length;
  if (p_minus_q == 0.0) {
    throw InvariantError("overlap_entry: sqrt(lambda_j) == sqrt(mu_k) for j = " + std::to_string(j) +
                         ", k = " + std::to_string(k));
  }
  const double p_plus_q = ((j + k) * kPi - t) / length;
  return amplitude * p * std::sin(s.theta(k)) / (p_minus_q * p_plus_q * s.norms[k - 1]);
}

Eigen::MatrixXd overlap_block(const ModeSpectrum& s, int rows, int first_col, int last_col) {
  if (rows < 0 || rows > s.n_max || first_col < 1 || last_col > s.n_max ||
      last_col < first_col - 1) {
    throw PreconditionError("overlap_block: index range outside the solved spectrum");
  }
  const int cols = last_col - first_col + 1;
  Eigen::MatrixXd m(rows, cols);
  parallel_for(static_cast<std::size_t>(rows), [&](std::size_t r) {
    const int j = static_cast<int>(r) + 1;
    for (int c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = overlap_entry(s, j, first_col + c);
  });
  return m;
}

int particle_number_l0(double energy, double length) {
  if (!(energy > 0.0) || !(length > 0.0)) {
    throw PreconditionError("particle_number_l0: E and L must be positive");
  }
  const double x = std::sqrt(energy) * length / kPi;
  double n = std::floor(x);
  // x = 100 - 1 ulp for E = 1, L = 100 pi; snap values within rounding of an integer.
  if (std::nearbyint(x) - x > 0.0 && std::nearbyint(x) - x <= 1e-12 * x) n = std::nearbyint(x);
  if (n < 1.0) {
    throw RegimeError("particle_number_l0: no particle below the Fermi level (sqrt(E) L / pi = " +
                      std::to_string(x) + ")");
  }
  if (n > static_cast<double>(std::numeric_limits<int>::max() / 8)) {
    throw PreconditionError("particle_number_l0: particle number too large");
  }
  return static_cast<int>(n);
}

int default_truncation(int n_occupied) { return std::max(4 * n_occupied, n_occupied + 2000); }

double phase_expansion_check(const ModeSpectrum& s, int n) {
  check_mode(s, n);
  if (s.is_bound(n)) throw PreconditionError("phase_expansion_check: requires mu_n >= 0");
  const double k_lambda = n * kPi / s.length;
  const double d_lambda = phase_shift(k_lambda, s.alpha);
  const double d_mu = phase_shift(s.wave_number(n), s.alpha);
  const double slope = phase_shift_derivative(k_lambda, s.alpha);
  return std::abs(d_mu - d_lambda + slope * d_lambda / s.length) * s.length;
}

}  // namespace aoc::delta
