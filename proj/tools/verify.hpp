#pragma once

// Finite-dimensional property checks behind `aoc verify`.

#include <cstdint>
#include <string>
#include <vector>

namespace aoc::cli {

struct PropertyCheck {
  std::string name;
  bool pass = true;
  double max_residual = 0.0;
  double tolerance = 0.0;
  long long cases = 0;
};

/// Seeds seed0 .. seed0 + seeds - 1 for every dimension 2 .. max_dimension.
std::vector<PropertyCheck> verify_rank1(std::uint64_t seed0, int seeds, int max_dimension);

}  // namespace aoc::cli
