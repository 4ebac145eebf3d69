#include "aoc/asymptotics.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "aoc/delta_model.hpp"
#include "aoc/errors.hpp"
#include "aoc/numeric.hpp"

namespace aoc::asymptotics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kSweepProductTail = 0.01;

// Phase shift extended to k = 0 by continuity.
double shift_at(double k, double alpha) {
  if (k > 0.0) return delta::phase_shift(k, alpha);
  if (alpha > 0.0) return 0.0;
  return alpha < 0.0 ? kPi : 0.5 * kPi;
}

double fermi_shift(double energy, double alpha) {
  if (!(energy > 0.0) || !std::isfinite(energy)) {
    throw PreconditionError("energy must be positive, got " + std::to_string(energy));
  }
  return delta::phase_shift(std::sqrt(energy), alpha);
}

std::string length_tag(double length) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "L=%.17g: ", length);
  return buf;
}

// Rethrows the active exception with the length prepended, keeping its type.
[[noreturn]] void rethrow_tagged(double length) {
  const std::string tag = length_tag(length);
  try {
    throw;
  } catch (const RegimeError& e) {
    throw RegimeError(tag + e.what());
  } catch (const PreconditionError& e) {
    throw PreconditionError(tag + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(tag + e.what());
  } catch (const InvariantError& e) {
    throw InvariantError(tag + e.what());
  }
}

}  // namespace

double zeta(double energy, double alpha) {
  const double d = fermi_shift(energy, alpha);
  return d * d / (kPi * kPi);
}

double gamma(double energy, double alpha) {
  const double d = fermi_shift(energy, alpha);
  const double folded = d <= 0.5 * kPi ? d : kPi - d;
  return folded * folded / (kPi * kPi);
}

int Schedule::particles(double energy, double length) const {
  return delta::particle_number_l0(energy, length) + offset;
}

std::string Schedule::to_string() const {
  return offset == 0 ? "default" : "offset:" + std::to_string(offset);
}

Schedule Schedule::parse(const std::string& text) {
  if (text == "default") return {};
  const std::string prefix = "offset:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string rest = text.substr(prefix.size());
    std::size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (!rest.empty() && used == rest.size()) return Schedule{k};
  }
  throw PreconditionError("schedule must be 'default' or 'offset:<int>', got '" + text + "'");
}

void fill_slopes(std::vector<SweepRecord>& records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    SweepRecord& r = records[i];
    r.ratio = r.log_overlap_sq / std::log(r.length);
    if (i == 0) {
      r.local_slope = kNaN;
    } else {
      const SweepRecord& p = records[i - 1];
      r.local_slope =
          (r.log_overlap_sq - p.log_overlap_sq) / (std::log(r.length) - std::log(p.length));
    }
  }
}

std::vector<SweepRecord> sweep(double energy, double alpha, std::span<const double> lengths,
                               const SweepOptions& options, const Schedule& schedule) {
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(lengths[i] > 1.0) || !std::isfinite(lengths[i])) {
      throw PreconditionError("sweep: lengths must be finite and > 1");
    }
    if (i > 0 && !(lengths[i] > lengths[i - 1])) {
      throw PreconditionError("sweep: lengths must be strictly increasing");
    }
  }
  if (options.truncation_multiplier < 0 || options.trace_terms < 0) {
    throw PreconditionError("sweep: truncation multiplier and trace terms must be >= 0");
  }
  std::vector<SweepRecord> records(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    try {
      delta::DeltaModel::create(alpha, lengths[i], energy);
      if (schedule.particles(energy, lengths[i]) < 2) {
        throw PreconditionError("schedule gives fewer than 2 particles");
      }
    } catch (...) {
      rethrow_tagged(lengths[i]);
    }
  }

  parallel_for(lengths.size(), [&](std::size_t i) {
    const double length = lengths[i];
    try {
      const auto model = delta::DeltaModel::create(alpha, length, energy);
      const int n = schedule.particles(energy, length);
      engine::OverlapResult result;
      switch (options.method) {
        case engine::Method::kDirect:
          result = engine::overlap_direct(model, n);
          break;
        case engine::Method::kProduct: {
          const int k = options.truncation_multiplier > 0
                            ? options.truncation_multiplier * n
                            : engine::truncation_for_tail(alpha, length, n, kSweepProductTail);
          result = engine::overlap_product(model, n, std::max(k, n + 1));
          break;
        }
        case engine::Method::kTraceSeries: {
          const int k = options.truncation_multiplier > 0
                            ? options.truncation_multiplier * n
                            : engine::default_trace_truncation(n);
          result = engine::overlap_trace_series(model, n, std::max(k, n + 2), options.trace_terms);
          break;
        }
      }
      SweepRecord& r = records[i];
      r.length = length;
      r.n_occupied = n;
      r.log_overlap_sq = result.log_overlap_sq;
      r.method = options.method;
      r.tail_bound = result.tail_bound;
      r.alpha = alpha;
      r.energy = energy;
    } catch (...) {
      rethrow_tagged(length);
    }
  });
  fill_slopes(records);
  return records;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw PreconditionError("fit_line: need >= 2 points of matching size");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    fit.residuals.push_back(y[i] - (fit.intercept + fit.slope * x[i]));
  }
  return fit;
}

ExponentReport fit_exponent(std::span<const SweepRecord> records) {
  if (records.size() < 3) throw PreconditionError("fit_exponent: need >= 3 records");
  for (const SweepRecord& r : records) {
    if (r.alpha != records[0].alpha || r.energy != records[0].energy) {
      throw PreconditionError("fit_exponent: records mix different (E, alpha)");
    }
  }
  std::vector<double> x;
  std::vector<double> y;
  for (const SweepRecord& r : records) {
    x.push_back(std::log(r.length));
    y.push_back(r.log_overlap_sq);
  }
  const LineFit fit = fit_line(x, y);
  ExponentReport report;
  report.zeta = zeta(records[0].energy, records[0].alpha);
  report.gamma = gamma(records[0].energy, records[0].alpha);
  report.fitted_slope_ls = fit.slope;
  report.fitted_intercept_ls = fit.intercept;
  const std::size_t m = records.size();
  report.fitted_slope_diff = (y[m - 1] - y[m - 2]) / (x[m - 1] - x[m - 2]);
  report.residuals = fit.residuals;
  return report;
}

double near_diagonal_integral(const std::function<double(double, double)>& h, double x0,
                              double x1, double y0, double y1, double rel_tol) {
  if (!(x0 < x1) || !(x1 < y0) || !(y0 < y1)) {
    throw PreconditionError("near_diagonal_integral: need x0 < x1 < y0 < y1");
  }
  using boost::math::quadrature::gauss_kronrod;
  constexpr unsigned kDepth = 20;
  const double inner_tol = 0.01 * rel_tol;
  bool inner_failed = false;

  // int_{y0}^{y1} h(x, y) / (y - x)^2 dy with u = -1/(y - x).
  auto inner = [&](double x) {
    const double ua = -1.0 / (y0 - x);
    const double ub = -1.0 / (y1 - x);
    double err = 0.0;
    double l1 = 0.0;
    const double v = gauss_kronrod<double, 61>::integrate(
        [&](double u) { return h(x, x - 1.0 / u); }, ua, ub, kDepth, inner_tol, &err, &l1);
    if (err > inner_tol * l1 && err > 1e-15) inner_failed = true;
    return v;
  };
  // x = y0 - e^s, dx = -e^s ds.
  const double sa = std::log(y0 - x1);
  const double sb = std::log(y0 - x0);
  double err = 0.0;
  double l1 = 0.0;
  const double value = gauss_kronrod<double, 61>::integrate(
      [&](double s) {
        const double e = std::exp(s);
        return inner(y0 - e) * e;
      },
      sa, sb, kDepth, rel_tol, &err, &l1);
  if (inner_failed || !std::isfinite(value) || err > rel_tol * l1) {
    throw NumericalError("near_diagonal_integral: quadrature did not reach tolerance");
  }
  return value;
}

int appendix_truncation(int n) { return 64 * n; }

AppendixDecomposition appendix_decomposition(double energy, double alpha, double length) {
  const auto model = delta::DeltaModel::create(alpha, length, energy);
  const int n = delta::particle_number_l0(energy, length);
  if (n < 3) throw PreconditionError("appendix_decomposition: need N >= 3");
  const int k_max = appendix_truncation(n);
  const delta::ModeSpectrum s = delta::solve_spectrum(alpha, length, k_max);

  AppendixDecomposition d;
  d.length = length;
  d.n_occupied = n;
  d.first_row = model.has_bound_state() ? 2 : 1;
  d.linearized_truncation = k_max;
  d.stage_exact = engine::overlap_direct(model, s, n).log_overlap_sq;
  d.stage_final = -zeta(energy, alpha) * std::log(length);

  const int j0 = d.first_row;
  const std::size_t rows = static_cast<std::size_t>(n - j0 + 1);
  std::vector<double> g(static_cast<std::size_t>(k_max) + 1, 0.0);
  std::vector<double> dl(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (int k = j0; k <= k_max; ++k) {
    g[k] = -s.shift(k) / kPi;
    dl[k] = -delta::phase_shift(k * kPi / length, alpha) / kPi;
  }

  // -sum (2j c_j + c_j^2)(2k c_k + c_k^2) / (((k + c_k)^2 - (j + c_j)^2)(k^2 - j^2)).
  auto linear_stage = [&](const std::vector<double>& c) {
    std::vector<double> row_sums(rows, 0.0);
    parallel_for(rows, [&](std::size_t i) {
      const int j = j0 + static_cast<int>(i);
      const double cj = c[j];
      const double aj = 2.0 * j * cj + cj * cj;
      long double acc = 0.0L;
      for (int k = k_max; k > n; --k) {
        const double ck = c[k];
        const double ak = 2.0 * k * ck + ck * ck;
        const double shifted = (k - j + ck - cj) * (k + j + ck + cj);
        acc += aj * ak / (shifted * (static_cast<double>(k - j) * (k + j)));
      }
      row_sums[i] = -static_cast<double>(acc);
    });
    return pairwise_sum(row_sums);
  };
  d.stage_linearized = linear_stage(g);
  d.stage_lambda = linear_stage(dl);

  std::vector<double> kernel_rows(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const int j = j0 + static_cast<int>(i);
    long double acc = 0.0L;
    for (int k = 2 * n; k > n; --k) {
      const double diff = static_cast<double>(k - j) * (k + j);
      acc += 4.0 * j * k * dl[j] * dl[k] / (diff * diff);
    }
    kernel_rows[i] = -static_cast<double>(acc);
  }
  d.stage_kernel = pairwise_sum(kernel_rows);

  const double x0 = (j0 - 1) / length;
  const double x1 = n / length;
  const double y0 = (n + 1) / length;
  const double y1 = 2.0 * n / length;
  const double integral = near_diagonal_integral(
      [&](double x, double y) {
        const double sum = x + y;
        return 4.0 * x * y * shift_at(x * kPi, alpha) * shift_at(y * kPi, alpha) / (sum * sum);
      },
      x0, x1, y0, y1);
  d.stage_integral = -integral / (kPi * kPi);
  d.bare_integral = near_diagonal_integral([](double, double) { return 1.0; }, 0.0, x1, y0, y1);

  if (model.has_bound_state()) {
    LogOnePlusSum acc;
    for (int k = k_max; k > n; --k) acc.add(engine::product_factor(s, 1, k));
    d.j1_term = acc.value();
  }
  return d;
}

}  // namespace aoc::asymptotics
