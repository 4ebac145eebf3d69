#include "aoc/rank1_lab.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "aoc/errors.hpp"
#include "aoc/numeric.hpp"

namespace aoc::rank1 {

namespace {

constexpr int kMaxGenerationAttempts = 64;
constexpr double kMinSpectralGap = 1e-6;     // relative to spectral radius of A
constexpr double kMinComponent = 1e-6;       // relative to |phi|
constexpr double kMinInterlacingGap = 1e-10; // relative to spectral radius of B

void check_dimension(int dimension) {
  if (dimension < kMinDimension || dimension > kMaxDimension) {
    throw PreconditionError("rank1: dimension must lie in [2, 64], got " + std::to_string(dimension));
  }
}

void check_occupation(int n, int dimension) {
  if (n < 0 || n > dimension) {
    throw PreconditionError("rank1: N must lie in [0, dimension], got " + std::to_string(n));
  }
}

using VectorXld = Diagonalization::VectorXld;
using MatrixXld = Diagonalization::MatrixXld;

// Eigenpairs in decreasing order, in extended precision.
void sorted_eigen(const MatrixXld& m, VectorXld& values, MatrixXld& vectors) {
  Eigen::SelfAdjointEigenSolver<MatrixXld> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalError("rank1: eigendecomposition failed");
  values = solver.eigenvalues().reverse();
  vectors = solver.eigenvectors().rowwise().reverse();
}

void sorted_eigen(const Eigen::MatrixXd& m, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  VectorXld v;
  MatrixXld u;
  sorted_eigen(m.cast<long double>(), v, u);
  values = v.cast<double>();
  vectors = u.cast<double>();
}

// Empty string when (A, phi) satisfies every PerturbedPair invariant.
std::string invariant_violation(const Eigen::MatrixXd& a, const Eigen::VectorXd& phi) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || phi.size() != n) return "shape mismatch";
  const double scale = a.cwiseAbs().maxCoeff();
  if (!((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale)) return "A not symmetric";
  Eigen::VectorXd alphas;
  Eigen::MatrixXd phis;
  sorted_eigen(a, alphas, phis);
  const double radius = alphas(0);
  if (!(alphas(n - 1) > 0.0)) return "A not positive definite";
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (!(alphas(i) - alphas(i + 1) > kMinSpectralGap * radius)) return "spectral gap of A too small";
  }
  const double norm = phi.norm();
  if (!(norm > 0.0)) return "phi vanishes";
  const Eigen::VectorXd components = phis.transpose() * phi;
  if (!(components.cwiseAbs().minCoeff() >= kMinComponent * norm)) return "phi not cyclic";
  Eigen::VectorXd betas;
  Eigen::MatrixXd psis;
  sorted_eigen(a + phi * phi.transpose(), betas, psis);
  const double gap_floor = kMinInterlacingGap * betas(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(betas(i) - alphas(i) > gap_floor)) return "interlacing margin too small";
    if (i + 1 < n && !(alphas(i) - betas(i + 1) > gap_floor)) return "interlacing margin too small";
  }
  return {};
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double upper = v[mid];
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

PerturbedPair generate_pair(int dimension, std::uint64_t seed) {
  check_dimension(dimension);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> log_uniform(std::log(0.1), std::log(10.0));
  const Eigen::Index n = dimension;
  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
      for (Eigen::Index r = 0; r < n; ++r) g(r, c) = gauss(rng);
    }
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = std::exp(log_uniform(rng));
    Eigen::MatrixXd a = q * d.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose()).eval();
    Eigen::VectorXd phi(n);
    for (Eigen::Index i = 0; i < n; ++i) phi(i) = gauss(rng);
    phi /= std::sqrt(static_cast<double>(n));
    if (invariant_violation(a, phi).empty()) {
      return PerturbedPair{dimension, std::move(a), std::move(phi), seed};
    }
  }
  throw NumericalError("generate_pair: no admissible pair after " +
                       std::to_string(kMaxGenerationAttempts) + " attempts (dimension " +
                       std::to_string(dimension) + ", seed " + std::to_string(seed) + ")");
}

PerturbedPair make_pair(Eigen::MatrixXd base, Eigen::VectorXd perturbation, std::uint64_t seed) {
  check_dimension(static_cast<int>(base.rows()));
  if (const std::string why = invariant_violation(base, perturbation); !why.empty()) {
    throw PreconditionError("make_pair: " + why);
  }
  const int dimension = static_cast<int>(base.rows());
  return PerturbedPair{dimension, std::move(base), std::move(perturbation), seed};
}

SpectrumPair Diagonalization::spectra() const {
  return SpectrumPair(std::vector<double>(alphas.begin(), alphas.end()),
                      std::vector<double>(betas.begin(), betas.end()), Orientation::kDecreasing);
}

Diagonalization diagonalize(const PerturbedPair& pair) {
  Diagonalization d;
  const VectorXld phi = pair.perturbation.cast<long double>();
  const MatrixXld a = pair.base.cast<long double>();
  sorted_eigen(a, d.alphas_ext, d.phis_ext);
  sorted_eigen(a + phi * phi.transpose(), d.betas_ext, d.psis_ext);
  d.alphas = d.alphas_ext.cast<double>();
  d.phis = d.phis_ext.cast<double>();
  d.betas = d.betas_ext.cast<double>();
  d.psis = d.psis_ext.cast<double>();
  return d;
}

double log_gram_overlap(const Diagonalization& d, int n_occupied) {
  check_occupation(n_occupied, static_cast<int>(d.alphas.size()));
  if (n_occupied == 0) return 0.0;
  const Eigen::MatrixXd gram =
      d.phis.leftCols(n_occupied).transpose() * d.psis.leftCols(n_occupied);
  return 2.0 * log_determinant(gram).log_abs;
}

double log_gram_overlap(const PerturbedPair& pair, int n_occupied) {
  check_occupation(n_occupied, pair.dimension);
  return log_gram_overlap(diagonalize(pair), n_occupied);
}

double gram_overlap(const PerturbedPair& pair, int n_occupied) {
  return std::exp(log_gram_overlap(pair, n_occupied));
}

double product_overlap(const SpectrumPair& spectra, int n_occupied) {
  check_occupation(n_occupied, static_cast<int>(spectra.size()));
  return std::exp(log_product_overlap(spectra, static_cast<std::size_t>(n_occupied)));
}

double log_cauchy_determinant(std::span<const double> alphas, std::span<const double> betas,
                              int n) {
  if (n < 0 || static_cast<std::size_t>(n) > alphas.size() ||
      static_cast<std::size_t>(n) > betas.size()) {
    throw PreconditionError("cauchy_determinant: N out of range");
  }
  double log_num = 0.0;
  double log_den = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const double cross = std::abs(betas[k] - alphas[j]);
      if (cross == 0.0) throw PreconditionError("cauchy_determinant: beta_k equals alpha_j");
      log_den += 2.0 * std::log(cross);
      if (j == k) continue;
      const double bb = std::abs(betas[k] - betas[j]);
      const double aa = std::abs(alphas[j] - alphas[k]);
      if (bb == 0.0 || aa == 0.0) throw PreconditionError("cauchy_determinant: repeated entries");
      log_num += std::log(bb) + std::log(aa);
    }
  }
  return log_num - log_den;
}

double cauchy_determinant(std::span<const double> alphas, std::span<const double> betas, int n) {
  return std::exp(log_cauchy_determinant(alphas, betas, n));
}

std::vector<double> default_resolvent_samples() {
  constexpr int kCount = 20;
  std::vector<double> z(kCount);
  const double lo = std::log(0.5);
  const double hi = std::log(100.0);
  for (int i = 0; i < kCount; ++i) z[i] = -std::exp(lo + (hi - lo) * i / (kCount - 1));
  return z;
}

ResolventProductFit resolvent_product_fit(const PerturbedPair& pair,
                                          std::span<const double> sample_z) {
  const Diagonalization d = diagonalize(pair);
  const double bottom = std::min(d.alphas.minCoeff(), d.betas.minCoeff());
  const Eigen::MatrixXd b_matrix = pair.perturbed();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(pair.dimension, pair.dimension);
  const Eigen::VectorXd& phi = pair.perturbation;

  ResolventProductFit fit;
  fit.sample_points.assign(sample_z.begin(), sample_z.end());
  std::vector<double> lhs_a, lhs_b, g_values, f_values;
  for (double z : sample_z) {
    if (!(z < bottom)) {
      throw PreconditionError("resolvent_product_fit: z = " + std::to_string(z) +
                              " is not below both spectra");
    }
    const Eigen::LDLT<Eigen::MatrixXd> ra(pair.base - z * identity);
    const Eigen::LDLT<Eigen::MatrixXd> rb(b_matrix - z * identity);
    const double form_a = phi.dot(ra.solve(phi));
    const double form_b = phi.dot(rb.solve(phi));
    double log_g = 0.0;
    double log_f = 0.0;
    for (int k = 0; k < pair.dimension; ++k) {
      log_g += std::log((d.betas(k) - z) / (d.alphas(k) - z));
      log_f += std::log((d.alphas(k) - z) / (d.betas(k) - z));
    }
    const double g = std::exp(log_g);
    const double f = std::exp(log_f);
    lhs_a.push_back(form_a + 1.0);
    lhs_b.push_back(form_b - 1.0);
    g_values.push_back(g);
    f_values.push_back(f);
    fit.product_defects.push_back(std::abs(f * g - 1.0));
    fit.resolvent_defects.push_back(std::abs((form_b - 1.0) * (form_a + 1.0) + 1.0));
  }
  std::vector<double> ratio_a, ratio_b;
  for (std::size_t i = 0; i < lhs_a.size(); ++i) {
    ratio_a.push_back(lhs_a[i] / g_values[i]);
    ratio_b.push_back(lhs_b[i] / f_values[i]);
  }
  if (!ratio_a.empty()) {
    fit.a = median(ratio_a);
    fit.b = median(ratio_b);
  }
  for (std::size_t i = 0; i < lhs_a.size(); ++i) {
    fit.residuals.push_back(std::abs(lhs_a[i] - fit.a * g_values[i]) / std::abs(lhs_a[i]));
    fit.residuals_b.push_back(std::abs(lhs_b[i] - fit.b * f_values[i]) / std::abs(lhs_b[i]));
  }
  return fit;
}

ResidueWeights residue_weights(const PerturbedPair& pair, const Diagonalization& d, int j, int k) {
  const int n = pair.dimension;
  if (j < 1 || j > n || k < 1 || k > n) throw PreconditionError("residue_weights: index out of range");
  const int jj = j - 1;
  const int kk = k - 1;
  const VectorXld phi = pair.perturbation.cast<long double>();
  const long double cj = d.phis_ext.col(jj).dot(phi);
  const long double ck = d.psis_ext.col(kk).dot(phi);
  ResidueWeights w;
  w.from_eigenvectors = static_cast<double>(cj * cj * ck * ck);
  const auto& al = d.alphas_ext;
  const auto& be = d.betas_ext;
  long double log_rhs = std::log(std::abs(be(jj) - al(jj))) + std::log(std::abs(al(kk) - be(kk)));
  for (int l = 0; l < n; ++l) {
    if (l != jj) log_rhs += std::log(std::abs(be(l) - al(jj))) - std::log(std::abs(al(l) - al(jj)));
    if (l != kk) log_rhs += std::log(std::abs(al(l) - be(kk))) - std::log(std::abs(be(l) - be(kk)));
  }
  w.from_eigenvalues = static_cast<double>(std::exp(log_rhs));
  return w;
}

ResidueWeights residue_weights(const PerturbedPair& pair, int j, int k) {
  return residue_weights(pair, diagonalize(pair), j, k);
}

TraceSeries trace_log_series(const Eigen::MatrixXd& block, int n_max) {
  if (n_max < 1) throw PreconditionError("trace series: n_max must be >= 1");
  TraceSeries out;
  out.terms = n_max;
  if (block.rows() == 0) return out;
  const Eigen::MatrixXd m = block * block.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("trace series: eigensolver failed");
  const double top = std::max(0.0, solver.eigenvalues().maxCoeff());
  out.top_singular_value = std::sqrt(top);
  if (!(top < 1.0)) {
    throw NumericalError("trace series diverges: top singular value " +
                         std::to_string(out.top_singular_value) + " >= 1");
  }
  const double trace_m = m.trace();
  Eigen::MatrixXd power = m;
  double sum = 0.0;
  out.partial_sums.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    sum -= power.trace() / n;
    out.partial_sums.push_back(sum);
    if (n < n_max) power = (power * m).eval();
  }
  out.log_overlap = sum;
  out.tail_bound = trace_m * std::pow(top, n_max) / ((n_max + 1.0) * (1.0 - top));
  return out;
}

TraceSeries trace_series_log_overlap(const PerturbedPair& pair, int n_occupied, int n_max) {
  check_occupation(n_occupied, pair.dimension);
  const Diagonalization d = diagonalize(pair);
  const int unoccupied = pair.dimension - n_occupied;
  const Eigen::MatrixXd block =
      d.phis.leftCols(n_occupied).transpose() * d.psis.rightCols(unoccupied);
  return trace_log_series(block, n_max);
}

}  // namespace aoc::rank1
