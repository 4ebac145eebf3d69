#pragma once

// Command-line front end: argument parsing, validation, dispatch and output
// assembly for the spectrum / overlap / sweep / appendix / verify subcommands.
//
// Exit codes: 0 success, 1 verify found a failing property, 2 invalid flags
// or parameters outside the model's regime, 3 numerical failure or I/O error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aoc/asymptotics.hpp"

namespace aoc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

enum class Subcommand { kSpectrum, kOverlap, kSweep, kAppendix, kVerify };
enum class Format { kCsv, kJson };

std::string to_string(Subcommand s);

struct RunConfig {
  Subcommand subcommand = Subcommand::kOverlap;
  double alpha = 0.0;
  double energy = 0.0;
  std::vector<double> lengths;  // a single entry for spectrum and overlap
  int modes = 20;
  std::optional<int> particles;
  asymptotics::Schedule schedule;
  std::string method = "direct";  // direct | product | trace | all
  int truncation = 0;             // multiplier on N; 0 selects the engine default
  int terms = 0;                  // trace-series terms; 0 selects adaptively
  std::string out = "-";
  Format format = Format::kCsv;
  std::uint64_t seed = 0;
  int seeds = 50;
  int max_dimension = 12;
};

struct ParseOutcome {
  std::optional<RunConfig> config;  // set when computation should proceed
  int exit_code = kExitOk;
  std::string message;  // help text or diagnostic
};

ParseOutcome parse_and_validate(int argc, const char* const* argv);

/// "start:stop:factor" geometric ladder or comma-separated list; throws
/// PreconditionError on malformed input.
std::vector<double> parse_lengths(const std::string& text);

/// %.17g; empty for NaN.
std::string format_number(double value);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footer;  // emitted as "# " lines
};

std::string to_csv(const Table& table);

struct Output {
  Table table;
  nlohmann::json document;  // {"config", "records", "report"}
  int exit_code = kExitOk;
};

/// Runs the configured computation; library exceptions propagate.
Output compute(const RunConfig& config);

nlohmann::json config_to_json(const RunConfig& config);

/// Full pipeline with exit-code mapping. Output goes to config.out or `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aoc::cli
