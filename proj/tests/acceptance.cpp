// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "aoc/asymptotics.hpp"
#include "aoc/numeric.hpp"
#include "aoc/rank1_lab.hpp"
#include "oracles.hpp"

using namespace aoc;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- 1 -------------------------------------------------------------------

Verdict rank1_oracle_suite() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  long long cases = 0;
  for (int dim = 2; dim <= 12; ++dim) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto pair = rank1::generate_pair(dim, seed);
      const auto d = rank1::diagonalize(pair);
      const SpectrumPair s = d.spectra();
      for (int n = 1; n < dim; ++n) {
        const double lg = rank1::log_gram_overlap(d, n);
        const double lp = log_product_overlap(s, static_cast<std::size_t>(n));
        worst = std::max(worst, std::abs(lp - lg) / std::max(1.0, std::abs(lg)));
        ++cases;
      }
    }
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = worst <= 1e-9 && secs < 10.0;
  v.detail = "max rel |ln product - ln gram| = " + fmt("%.2e", worst) + " (tol 1e-9) over " +
             std::to_string(cases) + " cases, " + fmt("%.2f", secs) + " s (limit 10 s)";
  return v;
}

// ---- 2 -------------------------------------------------------------------

Verdict resolvent_identities() {
  const auto t0 = Clock::now();
  double ab = 0.0, fg = 0.0, eq4 = 0.0, residue = 0.0;
  const auto z = rank1::default_resolvent_samples();
  for (int dim = 2; dim <= 12; ++dim) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto pair = rank1::generate_pair(dim, seed);
      const auto d = rank1::diagonalize(pair);
      const auto fit = rank1::resolvent_product_fit(pair, z);
      ab = std::max(ab, std::abs(fit.a * fit.b + 1.0));
      for (double v : fit.product_defects) fg = std::max(fg, v);
      for (double v : fit.resolvent_defects) eq4 = std::max(eq4, v);
      for (int j = 1; j <= dim; ++j) {
        for (int k = 1; k <= dim; ++k) {
          const auto w = rank1::residue_weights(pair, d, j, k);
          residue = std::max(residue,
                             std::abs(w.from_eigenvectors - w.from_eigenvalues) / w.from_eigenvectors);
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = ab <= 1e-8 && fg <= 1e-10 && eq4 <= 1e-9 && residue <= 1e-9 && secs < 10.0;
  v.detail = "|ab+1| " + fmt("%.2e", ab) + " (1e-8), |FG-1| " + fmt("%.2e", fg) +
             " (1e-10), product identity " + fmt("%.2e", eq4) + " (1e-9), residue weights " +
             fmt("%.2e", residue) + " (1e-9), " + fmt("%.2f", secs) + " s (limit 10 s)";
  return v;
}

// ---- 3 -------------------------------------------------------------------

const std::vector<double> kGridAlphas{0.02, -0.02, 0.2, -0.2, 2.0, 0.0};
const std::vector<double> kGridLengths{50.0, 200.0, 800.0};

Verdict spectrum_correctness() {
  const auto t0 = Clock::now();
  double worst_residual = 0.0;  // residual / (n pi)
  double worst_closed = 0.0;
  bool interlaced = true;
  for (double a : kGridAlphas) {
    for (double length : kGridLengths) {
      const auto s = delta::solve_spectrum(a, length, 5000);
      for (int n = 1; n <= 5000; ++n) {
        worst_residual = std::max(worst_residual, s.residual(n) / (n * kPi));
        if (!(s.mu(n) < s.lambda(n)) || (n > 1 && !(s.mu(n) > s.lambda(n - 1)))) interlaced = false;
        if (a == 0.0) {
          const double expected = (n - 0.5) * kPi / length;
          worst_closed = std::max(worst_closed, std::abs(s.wave_number(n) - expected) / expected);
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = worst_residual < 1e-13 && interlaced && worst_closed <= 1e-13 && secs < 5.0;
  v.detail = "max residual/(n pi) " + fmt("%.2e", worst_residual) + " (1e-13), interlacing " +
             (interlaced ? "holds" : "VIOLATED") + ", alpha=0 closed form rel " +
             fmt("%.2e", worst_closed) + " (1e-13), " + fmt("%.2f", secs) + " s (limit 5 s)";
  return v;
}

// ---- 4 -------------------------------------------------------------------

Verdict closed_form_overlaps() {
  double worst_entry = 0.0;
  double worst_minor = 0.0;
  long long entries = 0;
  for (double a : kGridAlphas) {
    for (double length : kGridLengths) {
      const auto s = delta::solve_spectrum(a, length, 400);
      std::vector<int> idx;
      for (int i = 0; i < 20; ++i) idx.push_back(1 + 21 * i);  // includes k = 1 (bound column for a < 0)
      for (int j : idx) {
        for (int k : idx) {
          worst_entry =
              std::max(worst_entry, std::abs(delta::overlap_entry(s, j, k) - oracle::overlap(s, j, k)));
          ++entries;
        }
      }
      auto m = [&](int j, int k) { return s.mu_minus_lambda(k, j) * delta::overlap_entry(s, j, k); };
      for (std::size_t x = 0; x + 1 < idx.size(); ++x) {
        for (std::size_t y = 0; y + 1 < idx.size(); ++y) {
          const int j1 = idx[x], j2 = idx[x + 1], k1 = idx[y], k2 = idx[y + 1];
          const double p = m(j1, k1) * m(j2, k2);
          const double q = m(j1, k2) * m(j2, k1);
          worst_minor = std::max(worst_minor, std::abs(p - q) / (std::abs(p) + std::abs(q)));
        }
      }
    }
  }
  Verdict v;
  v.pass = worst_entry <= 1e-9 && worst_minor <= 1e-9;
  v.detail = "max |closed form - quadrature| " + fmt("%.2e", worst_entry) + " (1e-9) over " +
             std::to_string(entries) + " entries incl. bound column, rank-one minors rel " +
             fmt("%.2e", worst_minor) + " (1e-9)";
  return v;
}

// ---- 5 -------------------------------------------------------------------

Verdict three_method_agreement() {
  const auto t0 = Clock::now();
  double worst_product_excess = -1e300;
  double worst_trace_excess = -1e300;
  int configs = 0;
  for (double e : {0.5, 1.0, 4.0}) {
    for (double a : {0.02, -0.02, 0.2, -0.2, 2.0}) {
      for (double length : {25.0, 50.0, 100.0}) {
        const auto model = delta::DeltaModel::create(a, length, e);
        const int n = delta::particle_number_l0(e, length);
        const double d = engine::overlap_direct(model, n).log_overlap_sq;
        const auto p = engine::overlap_product(model, n, delta::default_truncation(n));
        const auto t = engine::overlap_trace_series(model, n, engine::default_trace_truncation(n));
        worst_product_excess =
            std::max(worst_product_excess, std::abs(d - p.log_overlap_sq) - p.tail_bound);
        worst_trace_excess = std::max(worst_trace_excess, std::abs(d - t.log_overlap_sq) - t.tail_bound);
        ++configs;
      }
    }
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = worst_product_excess <= 1e-6 && worst_trace_excess <= 1e-4 && secs < 120.0;
  v.detail = "max(|direct-product| - tail) " + fmt("%.2e", worst_product_excess) +
             " (1e-6), max(|direct-trace| - tail) " + fmt("%.2e", worst_trace_excess) + " (1e-4), " +
             std::to_string(configs) + " configs, " + fmt("%.1f", secs) + " s (limit 120 s)";
  return v;
}

// ---- 6, 7 ----------------------------------------------------------------

const std::vector<double> kLadder{100, 200, 400, 800, 1600, 3200};

struct SlopeStudy {
  double zeta = 0.0;
  double slope_diff = 0.0;
  std::vector<double> errors;  // |local slope + zeta| per ladder step
};

SlopeStudy slope_study(double alpha) {
  const auto records = asymptotics::sweep(1.0, alpha, kLadder);
  SlopeStudy s;
  s.zeta = asymptotics::zeta(1.0, alpha);
  s.slope_diff = asymptotics::fit_exponent(records).fitted_slope_diff;
  for (std::size_t i = 1; i < records.size(); ++i) {
    s.errors.push_back(std::abs(records[i].local_slope + s.zeta));
  }
  return s;
}

Verdict exponent_reproduction() {
  const auto t0 = Clock::now();
  Verdict v;
  for (double a : {0.0, 0.02}) {
    const SlopeStudy s = slope_study(a);
    const bool within = std::abs(s.slope_diff + s.zeta) <= 0.15 * s.zeta;
    const std::size_t m = s.errors.size();
    const bool monotone = s.errors[m - 2] <= s.errors[m - 3] && s.errors[m - 1] <= s.errors[m - 2];
    v.pass = v.pass && within && monotone;
    v.detail += "alpha=" + fmt("%g", a) + ": slope " + fmt("%.5f", s.slope_diff) + " vs -zeta " +
                fmt("%.5f", -s.zeta) + " (" + (within ? "within" : "OUTSIDE") +
                " 15%), last three |errors| " + fmt("%.1e", s.errors[m - 3]) + ", " +
                fmt("%.1e", s.errors[m - 2]) + ", " + fmt("%.1e", s.errors[m - 1]) + " (" +
                (monotone ? "non-increasing" : "NOT non-increasing") + "); ";
  }
  const double secs = seconds_since(t0);
  v.pass = v.pass && secs < 600.0;
  v.detail += fmt("%.1f", secs) + " s (limit 600 s)";
  return v;
}

Verdict attractive_strictness() {
  const double z = asymptotics::zeta(1.0, -0.02);
  const double g = asymptotics::gamma(1.0, -0.02);
  const SlopeStudy s = slope_study(-0.02);
  const bool values = std::abs(z - 0.3345) < 5e-4 && std::abs(g - 0.1777) < 5e-4 && z > g;
  const bool tracks = std::abs(s.slope_diff + z) <= 0.15 * z;
  const bool not_gamma = std::abs(s.slope_diff + z) < std::abs(s.slope_diff + g) && s.slope_diff < -g;
  Verdict v;
  v.pass = values && tracks && not_gamma;
  v.detail = "zeta " + fmt("%.4f", z) + " > gamma " + fmt("%.4f", g) + ", slope " +
             fmt("%.5f", s.slope_diff) + " (" + (tracks ? "within" : "OUTSIDE") +
             " 15% of -zeta; " + (not_gamma ? "steeper than -gamma" : "NOT steeper than -gamma") + ")";
  return v;
}

// ---- 8 -------------------------------------------------------------------

Verdict appendix_structure() {
  Verdict v;
  const std::vector<double> lengths{100.0, 400.0, 1600.0};
  double band_lo = 1e300, band_hi = -1e300;
  for (double a : {0.02, -0.02}) {
    std::vector<double> x;
    std::vector<std::vector<double>> diffs(5);
    std::vector<double> exact;
    for (double length : lengths) {
      const auto d = asymptotics::appendix_decomposition(1.0, a, length);
      const double st[6] = {d.stage_exact,  d.stage_linearized, d.stage_lambda,
                            d.stage_kernel, d.stage_integral,   d.stage_final};
      for (int i = 0; i < 5; ++i) diffs[i].push_back(st[i] - st[i + 1]);
      exact.push_back(d.stage_exact);
      x.push_back(std::log(length));
      band_lo = std::min(band_lo, d.bare_integral - std::log(length));
      band_hi = std::max(band_hi, d.bare_integral - std::log(length));
    }
    double worst = 0.0;
    for (const auto& diff : diffs) worst = std::max(worst, std::abs(asymptotics::fit_line(x, diff).slope));
    const double z = asymptotics::zeta(1.0, a);
    const double slope = asymptotics::fit_line(x, exact).slope;
    const bool ok = worst < 0.05 && std::abs(slope + z) <= 0.15 * z;
    v.pass = v.pass && ok;
    v.detail += "alpha=" + fmt("%g", a) + ": max |stage-diff slope| " + fmt("%.4f", worst) +
                " (0.05), exact slope " + fmt("%.4f", slope) + " vs -zeta " + fmt("%.4f", -z) + "; ";
  }
  const bool band = band_hi - band_lo < 3.0 && std::abs(band_lo) < 3.0 && std::abs(band_hi) < 3.0;
  v.pass = v.pass && band;
  v.detail += "bare integral - ln L in [" + fmt("%.4f", band_lo) + ", " + fmt("%.4f", band_hi) +
              "] (band < 3)";
  return v;
}

// ---- 9 -------------------------------------------------------------------

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun cli(const std::string& args) {
  CliRun r;
  FILE* pipe = popen((std::string(AOC_CLI_PATH) + " " + args + " 2>/dev/null").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict cli_contract() {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  const std::filesystem::path golden(AOC_GOLDEN_DIR);
  expect(cli("spectrum --alpha -0.2 --length 10 --modes 6").out == slurp(golden / "spectrum.csv"),
         "spectrum golden");
  expect(cli("overlap --alpha 0.02 --energy 1 --length 50 --method all").out ==
             slurp(golden / "overlap.csv"),
         "overlap golden");
  expect(cli("sweep --alpha 0 --energy 1 --lengths 100:800:2").out == slurp(golden / "sweep.csv"),
         "sweep golden");
  expect(cli("appendix --alpha -0.02 --energy 1 --lengths 100,200").out ==
             slurp(golden / "appendix.csv"),
         "appendix golden");
  const CliRun sweep = cli("sweep --alpha 0.02 --energy 1 --lengths 50,100,200");
  expect(sweep.out.rfind("L,N,log_overlap_sq,ratio,local_slope\n", 0) == 0, "sweep header");

  const CliRun js = cli("sweep --alpha 0.02 --energy 1 --lengths 100:400:2 --format json");
  try {
    const json doc = json::parse(js.out);
    expect(doc.dump(2) + "\n" == js.out && json::parse(doc.dump()) == doc, "json round trip");
  } catch (const std::exception&) {
    expect(false, "json parse");
  }

  expect(cli("overlap --alpha 0.02 --energy 1 --length 50").code == 0, "exit 0");
  expect(cli("overlap --alpha -0.001 --length 10 --energy 1").code == 2, "exit 2 regime");
  expect(cli("overlap --alpha 0.02 --length 10").code == 2, "exit 2 missing flag");
  expect(cli("overlap --alpha 0.02 --energy 1 --length 50 --out /nonexistent/x.csv").code == 3,
         "exit 3 io");
  expect(cli("overlap --alpha 0.02 --energy 1 --length 50 --out /tmp").code == 3,
         "exit 3 output is a directory");

  const auto dir = std::filesystem::temp_directory_path() /
                   ("aoc_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string args = "sweep --alpha -0.02 --energy 1 --lengths 50:400:2 --format json";
  cli(args + " --out " + (dir / "a.json").string());
  cli(args + " --out " + (dir / "b.json").string());
  const std::string a = slurp(dir / "a.json");
  expect(!a.empty() && a == slurp(dir / "b.json"), "byte determinism");
  std::filesystem::remove_all(dir);

  Verdict v;
  v.pass = failures.empty();
  v.detail = failures.empty() ? "goldens, headers, JSON round trip, exit codes 0/2/3, determinism"
                              : "failed:";
  for (const auto& f : failures) v.detail += " " + f + ";";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"rank-1 oracle suite", rank1_oracle_suite},
      {"resolvent identities", resolvent_identities},
      {"delta-spectrum correctness", spectrum_correctness},
      {"closed-form overlaps", closed_form_overlaps},
      {"three-method agreement", three_method_agreement},
      {"exponent reproduction", exponent_reproduction},
      {"attractive-case strictness", attractive_strictness},
      {"appendix structure", appendix_structure},
      {"CLI contract", cli_contract},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    if (!v.pass) ++failed;
    std::printf("[%s] %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
