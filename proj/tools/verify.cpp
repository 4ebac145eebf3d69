#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aoc/rank1_lab.hpp"

namespace aoc::cli {

namespace {

struct Tracker {
  PropertyCheck check;
  Tracker(std::string name, double tolerance) {
    check.name = std::move(name);
    check.tolerance = tolerance;
  }
  void add(double residual) {
    ++check.cases;
    if (!std::isfinite(residual)) residual = std::numeric_limits<double>::infinity();
    check.max_residual = std::max(check.max_residual, residual);
    if (!(residual <= check.tolerance)) check.pass = false;
  }
};

}  // namespace

std::vector<PropertyCheck> verify_rank1(std::uint64_t seed0, int seeds, int max_dimension) {
  Tracker product("product_vs_gram", 1e-9);
  Tracker interlacing("interlacing_margin_deficit", 0.0);
  Tracker ab("resolvent_ab", 1e-8);
  Tracker fg("resolvent_fg", 1e-10);
  Tracker eq("resolvent_product_identity", 1e-9);
  Tracker fit("resolvent_fit_residual", 1e-9);
  Tracker residue("residue_weights", 1e-9);
  Tracker trace("trace_series_excess_over_tail", 1e-9);
  Tracker rotation("orthogonal_invariance", 1e-10);

  const std::vector<double> z = rank1::default_resolvent_samples();
  for (int dim = rank1::kMinDimension; dim <= max_dimension; ++dim) {
    for (int i = 0; i < seeds; ++i) {
      const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(i);
      const rank1::PerturbedPair pair = rank1::generate_pair(dim, seed);
      const rank1::Diagonalization d = rank1::diagonalize(pair);
      const SpectrumPair spectra = d.spectra();

      // positive deficit means the interlacing margin 1e-10 rho(B) is not met
      interlacing.add(1e-10 - spectra.min_interlacing_gap() / d.betas(0));

      for (int n = 1; n < dim; ++n) {
        const double lg = rank1::log_gram_overlap(d, n);
        const double lp = log_product_overlap(spectra, static_cast<std::size_t>(n));
        product.add(std::abs(lp - lg) / std::max(1.0, std::abs(lg)));
      }

      const rank1::ResolventProductFit f = rank1::resolvent_product_fit(pair, z);
      ab.add(std::abs(f.a * f.b + 1.0));
      for (double v : f.product_defects) fg.add(v);
      for (double v : f.resolvent_defects) eq.add(v);
      for (double v : f.residuals) fit.add(v);
      for (double v : f.residuals_b) fit.add(v);

      for (int j = 1; j <= dim; ++j) {
        for (int k = 1; k <= dim; ++k) {
          const rank1::ResidueWeights w = rank1::residue_weights(pair, d, j, k);
          residue.add(std::abs(w.from_eigenvectors - w.from_eigenvalues) / w.from_eigenvectors);
        }
      }

      const int n_half = std::max(1, dim / 2);
      const rank1::TraceSeries t = rank1::trace_series_log_overlap(pair, n_half, 400);
      trace.add(std::abs(t.log_overlap - rank1::log_gram_overlap(d, n_half)) - t.tail_bound);

      const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(
                                    rank1::generate_pair(dim, seed + 7919).base)
                                    .householderQ();
      const Eigen::MatrixXd conj = q * pair.base * q.transpose();
      const rank1::PerturbedPair rotated =
          rank1::make_pair(0.5 * (conj + conj.transpose()), q * pair.perturbation, seed);
      rotation.add(std::abs(rank1::gram_overlap(rotated, n_half) - rank1::gram_overlap(pair, n_half)));
    }
  }
  return {product.check, interlacing.check, ab.check,      fg.check,      eq.check,
          fit.check,     residue.check,     trace.check,   rotation.check};
}

}  // namespace aoc::cli
