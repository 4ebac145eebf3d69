#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "aoc/delta_model.hpp"
#include "aoc/errors.hpp"
#include "aoc/overlap_engine.hpp"
#include "aoc/rank1_lab.hpp"
#include "verify.hpp"

namespace aoc::cli {

using nlohmann::json;

namespace {

constexpr const char* kFooter =
    "Units: hbar = 2m = 1. Energies are squared wave numbers, alpha is an inverse length.\n"
    "AOC_THREADS=<n> overrides the worker-thread count.\n"
    "Exit codes: 0 ok, 1 verify found a failing property, 2 invalid input, 3 numerical or I/O failure.";

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size() || !std::isfinite(v)) {
    throw PreconditionError(what + ": '" + text + "' is not a finite number");
  }
  return v;
}

std::string fmt_int(long long v) { return std::to_string(v); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void require_finite(double v, const char* flag) {
  if (!std::isfinite(v)) throw PreconditionError(std::string(flag) + " must be finite");
}

void require_positive(double v, const char* flag) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw PreconditionError(std::string(flag) + " must be positive, got " + format_number(v));
  }
}

void validate(const RunConfig& c) {
  require_finite(c.alpha, "--alpha");
  switch (c.subcommand) {
    case Subcommand::kSpectrum:
      require_positive(c.lengths.at(0), "--length");
      delta::check_regime(c.alpha, c.lengths[0]);
      if (c.modes < 1 || c.modes > 10000000) throw PreconditionError("--modes must lie in [1, 1e7]");
      break;
    case Subcommand::kOverlap: {
      require_positive(c.energy, "--energy");
      require_positive(c.lengths.at(0), "--length");
      delta::DeltaModel::create(c.alpha, c.lengths[0], c.energy);
      if (c.particles) {
        if (*c.particles < 1) throw PreconditionError("--particles must be >= 1");
      } else {
        delta::particle_number_l0(c.energy, c.lengths[0]);
      }
      break;
    }
    case Subcommand::kSweep:
    case Subcommand::kAppendix: {
      require_positive(c.energy, "--energy");
      if (c.lengths.empty()) throw PreconditionError("--lengths must not be empty");
      for (std::size_t i = 0; i < c.lengths.size(); ++i) {
        if (!(c.lengths[i] > 1.0)) throw PreconditionError("--lengths entries must exceed 1");
        if (i > 0 && !(c.lengths[i] > c.lengths[i - 1])) {
          throw PreconditionError("--lengths must be strictly increasing");
        }
        delta::DeltaModel::create(c.alpha, c.lengths[i], c.energy);
        const int min_n = c.subcommand == Subcommand::kSweep ? 2 : 3;
        const int n = c.subcommand == Subcommand::kSweep
                          ? c.schedule.particles(c.energy, c.lengths[i])
                          : delta::particle_number_l0(c.energy, c.lengths[i]);
        if (n < min_n) {
          throw PreconditionError("--lengths: L=" + format_number(c.lengths[i]) + " gives N=" +
                                  std::to_string(n) + ", need N >= " + std::to_string(min_n));
        }
      }
      break;
    }
    case Subcommand::kVerify:
      if (c.seeds < 1) throw PreconditionError("--seeds must be >= 1");
      if (c.max_dimension < rank1::kMinDimension || c.max_dimension > rank1::kMaxDimension) {
        throw PreconditionError("--max-dim must lie in [2, 64]");
      }
      break;
  }
  if (c.truncation < 0 || c.truncation == 1) {
    throw PreconditionError("--truncation must be 0 (default) or >= 2");
  }
  if (c.terms < 0) throw PreconditionError("--terms must be >= 0");
}

int product_depth(const RunConfig& c, int n) {
  return c.truncation > 0 ? std::max(c.truncation * n, n + 1) : delta::default_truncation(n);
}

int trace_depth(const RunConfig& c, int n) {
  return c.truncation > 0 ? std::max(c.truncation * n, n + 2) : engine::default_trace_truncation(n);
}

json overlap_json(const engine::OverlapResult& r) {
  return json{{"method", engine::to_string(r.method)},
              {"N", r.n_occupied},
              {"K", r.truncation},
              {"log_overlap_sq", r.log_overlap_sq},
              {"tail_bound", r.tail_bound},
              {"terms", r.terms},
              {"top_singular_value", r.top_singular_value},
              {"alpha", r.alpha},
              {"length", r.length},
              {"energy", r.energy}};
}

Output compute_spectrum(const RunConfig& c) {
  Output o;
  const delta::ModeSpectrum s = delta::solve_spectrum(c.alpha, c.lengths[0], c.modes);
  o.table.header = {"n", "lambda_n", "mu_n", "theta_n", "residual"};
  json records = json::array();
  for (int n = 1; n <= s.n_max; ++n) {
    const double theta = s.is_bound(n) ? std::nan("") : s.theta(n);
    o.table.rows.push_back({fmt_int(n), format_number(s.lambda(n)), format_number(s.mu(n)),
                            format_number(theta), format_number(s.residual(n))});
    records.push_back({{"n", n},
                       {"lambda_n", s.lambda(n)},
                       {"mu_n", s.mu(n)},
                       {"theta_n", number_or_null(theta)},
                       {"residual", s.residual(n)}});
  }
  o.document["records"] = records;
  o.document["report"] = s.kappa ? json{{"kappa", *s.kappa}} : json(nullptr);
  return o;
}

Output compute_overlap(const RunConfig& c) {
  Output o;
  const auto model = delta::DeltaModel::create(c.alpha, c.lengths[0], c.energy);
  const int n = c.particles ? *c.particles : delta::particle_number_l0(c.energy, c.lengths[0]);
  std::vector<engine::OverlapResult> results;
  const bool all = c.method == "all";
  if (all || c.method == "direct") results.push_back(engine::overlap_direct(model, n));
  if (all || c.method == "product") {
    results.push_back(engine::overlap_product(model, n, product_depth(c, n)));
  }
  if (all || c.method == "trace") {
    results.push_back(engine::overlap_trace_series(model, n, trace_depth(c, n), c.terms));
  }
  o.table.header = {"method", "N", "K", "log_overlap_sq", "tail_bound", "terms"};
  json records = json::array();
  for (const auto& r : results) {
    o.table.rows.push_back({std::string(engine::to_string(r.method)), fmt_int(r.n_occupied),
                            fmt_int(r.truncation), format_number(r.log_overlap_sq),
                            format_number(r.tail_bound), fmt_int(r.terms)});
    records.push_back(overlap_json(r));
  }
  o.document["records"] = records;
  o.document["report"] = {{"zeta", asymptotics::zeta(c.energy, c.alpha)},
                          {"gamma", asymptotics::gamma(c.energy, c.alpha)}};
  return o;
}

json report_json(const asymptotics::ExponentReport& r) {
  return json{{"zeta", r.zeta},
              {"gamma", r.gamma},
              {"fitted_slope_ls", r.fitted_slope_ls},
              {"fitted_intercept_ls", r.fitted_intercept_ls},
              {"fitted_slope_diff", r.fitted_slope_diff},
              {"residuals", r.residuals}};
}

Output compute_sweep(const RunConfig& c) {
  Output o;
  asymptotics::SweepOptions options;
  options.method = *engine::parse_method(c.method);
  options.truncation_multiplier = c.truncation;
  options.trace_terms = c.terms;
  const auto records = asymptotics::sweep(c.energy, c.alpha, c.lengths, options, c.schedule);
  o.table.header = {"L", "N", "log_overlap_sq", "ratio", "local_slope"};
  json rows = json::array();
  for (const auto& r : records) {
    o.table.rows.push_back({format_number(r.length), fmt_int(r.n_occupied),
                            format_number(r.log_overlap_sq), format_number(r.ratio),
                            format_number(r.local_slope)});
    rows.push_back({{"L", r.length},
                    {"N", r.n_occupied},
                    {"log_overlap_sq", r.log_overlap_sq},
                    {"ratio", r.ratio},
                    {"local_slope", number_or_null(r.local_slope)},
                    {"method", engine::to_string(r.method)},
                    {"tail_bound", r.tail_bound}});
  }
  o.document["records"] = rows;
  if (records.size() >= 3) {
    const json report = report_json(asymptotics::fit_exponent(records));
    o.document["report"] = report;
    o.table.footer.push_back("report " + report.dump());
  } else {
    o.document["report"] = nullptr;
  }
  return o;
}

Output compute_appendix(const RunConfig& c) {
  Output o;
  o.table.header = {"L",           "N",           "stage_exact",   "stage_linearized",
                    "stage_lambda", "stage_kernel", "stage_integral", "stage_final",
                    "j1_term",     "bare_integral"};
  json rows = json::array();
  for (double length : c.lengths) {
    const auto d = asymptotics::appendix_decomposition(c.energy, c.alpha, length);
    o.table.rows.push_back({format_number(d.length), fmt_int(d.n_occupied),
                            format_number(d.stage_exact), format_number(d.stage_linearized),
                            format_number(d.stage_lambda), format_number(d.stage_kernel),
                            format_number(d.stage_integral), format_number(d.stage_final),
                            format_number(d.j1_term), format_number(d.bare_integral)});
    rows.push_back({{"L", d.length},
                    {"N", d.n_occupied},
                    {"first_row", d.first_row},
                    {"stage_exact", d.stage_exact},
                    {"stage_linearized", d.stage_linearized},
                    {"stage_lambda", d.stage_lambda},
                    {"stage_kernel", d.stage_kernel},
                    {"stage_integral", d.stage_integral},
                    {"stage_final", d.stage_final},
                    {"j1_term", d.j1_term},
                    {"bare_integral", d.bare_integral},
                    {"linearized_truncation", d.linearized_truncation}});
  }
  o.document["records"] = rows;
  o.document["report"] = {{"zeta", asymptotics::zeta(c.energy, c.alpha)}};
  return o;
}

Output compute_verify(const RunConfig& c) {
  Output o;
  const auto checks = verify_rank1(c.seed, c.seeds, c.max_dimension);
  o.table.header = {"property", "pass", "max_residual", "tolerance", "cases"};
  json rows = json::array();
  bool all_pass = true;
  for (const auto& p : checks) {
    all_pass = all_pass && p.pass;
    o.table.rows.push_back({p.name, p.pass ? "true" : "false", format_number(p.max_residual),
                            format_number(p.tolerance), fmt_int(p.cases)});
    rows.push_back({{"property", p.name},
                    {"pass", p.pass},
                    {"max_residual", p.max_residual},
                    {"tolerance", p.tolerance},
                    {"cases", p.cases}});
  }
  o.document["records"] = rows;
  o.document["report"] = {{"pass", all_pass},
                          {"seeds", {c.seed, c.seed + static_cast<std::uint64_t>(c.seeds) - 1}},
                          {"dimensions", {rank1::kMinDimension, c.max_dimension}}};
  o.exit_code = all_pass ? kExitOk : kExitVerifyFailed;
  return o;
}

void add_common_output(CLI::App* sub, RunConfig& c, std::string& format) {
  sub->add_option("--out", c.out, "Output file, '-' for stdout")->capture_default_str();
  sub->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

}  // namespace

std::string to_string(Subcommand s) {
  switch (s) {
    case Subcommand::kSpectrum: return "spectrum";
    case Subcommand::kOverlap: return "overlap";
    case Subcommand::kSweep: return "sweep";
    case Subcommand::kAppendix: return "appendix";
    case Subcommand::kVerify: return "verify";
  }
  return "unknown";
}

std::string format_number(double value) {
  if (std::isnan(value)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<double> parse_lengths(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3 || text.back() == ':') {
      throw PreconditionError("--lengths: ladder must be start:stop:factor, got '" + text + "'");
    }
    const double start = parse_real(parts[0], "--lengths start");
    const double stop = parse_real(parts[1], "--lengths stop");
    const double factor = parse_real(parts[2], "--lengths factor");
    if (!(start > 0.0) || !(stop >= start) || !(factor > 1.0)) {
      throw PreconditionError("--lengths: need 0 < start <= stop and factor > 1");
    }
    for (int i = 0;; ++i) {
      const double v = start * std::pow(factor, i);
      if (v > stop * (1.0 + 1e-12)) break;
      out.push_back(v);
      if (out.size() > 10000) throw PreconditionError("--lengths: ladder longer than 10000");
    }
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item, "--lengths entry"));
  if (out.empty() || text.back() == ',') {
    throw PreconditionError("--lengths: empty entry in '" + text + "'");
  }
  return out;
}

std::string to_csv(const Table& table) {
  std::string s;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    s += '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  for (const auto& f : table.footer) s += "# " + f + "\n";
  return s;
}

json config_to_json(const RunConfig& c) {
  json j{{"subcommand", to_string(c.subcommand)},
         {"format", c.format == Format::kCsv ? "csv" : "json"}};
  switch (c.subcommand) {
    case Subcommand::kSpectrum:
      j["alpha"] = c.alpha;
      j["length"] = c.lengths.at(0);
      j["modes"] = c.modes;
      break;
    case Subcommand::kOverlap:
      j["alpha"] = c.alpha;
      j["energy"] = c.energy;
      j["length"] = c.lengths.at(0);
      j["particles"] = c.particles ? json(*c.particles) : json(nullptr);
      j["method"] = c.method;
      j["truncation"] = c.truncation;
      j["terms"] = c.terms;
      break;
    case Subcommand::kSweep:
      j["alpha"] = c.alpha;
      j["energy"] = c.energy;
      j["lengths"] = c.lengths;
      j["schedule"] = c.schedule.to_string();
      j["method"] = c.method;
      j["truncation"] = c.truncation;
      j["terms"] = c.terms;
      break;
    case Subcommand::kAppendix:
      j["alpha"] = c.alpha;
      j["energy"] = c.energy;
      j["lengths"] = c.lengths;
      break;
    case Subcommand::kVerify:
      j["seed"] = c.seed;
      j["seeds"] = c.seeds;
      j["max_dimension"] = c.max_dimension;
      break;
  }
  return j;
}

ParseOutcome parse_and_validate(int argc, const char* const* argv) {
  CLI::App app{"Ground-state overlap of a free and a point-perturbed Fermi gas in a ball of radius L"};
  app.footer(kFooter);
  app.require_subcommand(1);

  RunConfig c;
  std::string format = "csv";
  std::string lengths_text;
  std::string schedule_text = "default";
  double length = 0.0;
  int particles = 0;

  auto* spectrum = app.add_subcommand(
      "spectrum", "s-wave eigenvalues lambda_n = (n pi/L)^2 and mu_n of the perturbed operator");
  spectrum->add_option("--alpha", c.alpha, "Coupling alpha of the point interaction")->required();
  spectrum->add_option("--length", length, "Box length L (Dirichlet wall at L)")->required();
  spectrum->add_option("--modes", c.modes, "Number of modes n = 1..modes")->capture_default_str();
  add_common_output(spectrum, c, format);

  auto* overlap = app.add_subcommand("overlap", "ln|S|^2 for one (alpha, E, L)");
  overlap->add_option("--alpha", c.alpha, "Coupling alpha of the point interaction")->required();
  overlap->add_option("--energy", c.energy, "Fermi energy E > 0")->required();
  overlap->add_option("--length", length, "Box length L")->required();
  auto* particles_opt = overlap->add_option(
      "--particles", particles, "Particle number N (default floor(sqrt(E) L / pi))");
  overlap->add_option("--method", c.method, "Evaluation route")
      ->check(CLI::IsMember({"direct", "product", "trace", "all"}))
      ->capture_default_str();
  overlap->add_option("--truncation", c.truncation,
                      "Column depth K = truncation * N for product/trace (0: default)")
      ->capture_default_str();
  overlap->add_option("--terms", c.terms, "Trace-series terms (0: adaptive)")->capture_default_str();
  add_common_output(overlap, c, format);

  auto* sweep = app.add_subcommand("sweep", "ln|S|^2 along a ladder of lengths and the fitted exponent");
  sweep->add_option("--alpha", c.alpha, "Coupling alpha of the point interaction")->required();
  sweep->add_option("--energy", c.energy, "Fermi energy E > 0")->required();
  sweep->add_option("--lengths", lengths_text, "start:stop:factor or comma list of L")->required();
  sweep->add_option("--schedule", schedule_text,
                    "Particle schedule: default (N = floor(sqrt(E) L / pi)) or offset:k")
      ->capture_default_str();
  sweep->add_option("--method", c.method, "Evaluation route")
      ->check(CLI::IsMember({"direct", "product", "trace"}))
      ->capture_default_str();
  sweep->add_option("--truncation", c.truncation,
                    "Column depth K = truncation * N (0: product from a 0.01 tail bound, trace max(8N, N+2000))")
      ->capture_default_str();
  sweep->add_option("--terms", c.terms, "Trace-series terms (0: adaptive)")->capture_default_str();
  add_common_output(sweep, c, format);

  auto* appendix = app.add_subcommand(
      "appendix", "Stage-by-stage reduction of ln|S|^2 down to -zeta ln L, per length");
  appendix->add_option("--alpha", c.alpha, "Coupling alpha of the point interaction")->required();
  appendix->add_option("--energy", c.energy, "Fermi energy E > 0")->required();
  appendix->add_option("--lengths", lengths_text, "start:stop:factor or comma list of L")->required();
  add_common_output(appendix, c, format);

  auto* verify = app.add_subcommand("verify", "Finite-dimensional rank-one identities over a seed grid");
  verify->add_option("--seed", c.seed, "First seed")->capture_default_str();
  verify->add_option("--seeds", c.seeds, "Number of seeds per dimension")->capture_default_str();
  verify->add_option("--max-dim", c.max_dimension, "Largest dimension (from 2)")->capture_default_str();
  add_common_output(verify, c, format);

  ParseOutcome outcome;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = app.exit(e, out, err);
    outcome.exit_code = code == 0 ? kExitOk : kExitUsage;
    outcome.message = out.str() + err.str();
    return outcome;
  }

  try {
    if (*spectrum) c.subcommand = Subcommand::kSpectrum;
    if (*overlap) c.subcommand = Subcommand::kOverlap;
    if (*sweep) c.subcommand = Subcommand::kSweep;
    if (*appendix) c.subcommand = Subcommand::kAppendix;
    if (*verify) c.subcommand = Subcommand::kVerify;
    c.format = format == "json" ? Format::kJson : Format::kCsv;
    if (*spectrum || *overlap) c.lengths = {length};
    if (*sweep || *appendix) c.lengths = parse_lengths(lengths_text);
    if (*particles_opt) c.particles = particles;
    c.schedule = asymptotics::Schedule::parse(schedule_text);
    validate(c);
  } catch (const std::invalid_argument& e) {
    outcome.exit_code = kExitUsage;
    outcome.message = std::string("error: ") + e.what() + "\n";
    return outcome;
  }
  outcome.config = c;
  return outcome;
}

Output compute(const RunConfig& c) {
  Output o;
  switch (c.subcommand) {
    case Subcommand::kSpectrum: o = compute_spectrum(c); break;
    case Subcommand::kOverlap: o = compute_overlap(c); break;
    case Subcommand::kSweep: o = compute_sweep(c); break;
    case Subcommand::kAppendix: o = compute_appendix(c); break;
    case Subcommand::kVerify: o = compute_verify(c); break;
  }
  json doc{{"config", config_to_json(c)}};
  doc["records"] = o.document["records"];
  doc["report"] = o.document["report"];
  o.document = std::move(doc);
  return o;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const ParseOutcome parsed = parse_and_validate(argc, argv);
  if (!parsed.config) {
    (parsed.exit_code == kExitOk ? out : err) << parsed.message;
    return parsed.exit_code;
  }
  const RunConfig& c = *parsed.config;
  Output o;
  try {
    o = compute(c);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  const std::string text = c.format == Format::kJson ? o.document.dump(2) + "\n" : to_csv(o.table);
  if (c.out == "-") {
    out << text;
    out.flush();
  } else {
    std::ofstream file(c.out, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot open '" << c.out << "' for writing\n";
      return kExitNumerical;
    }
    file << text;
    file.close();
    if (!file) {
      err << "error: failed writing '" << c.out << "'\n";
      return kExitNumerical;
    }
  }
  return o.exit_code;
}

}  // namespace aoc::cli
