// Shared helpers for the test binaries.
#pragma once

#include <random>
#include <string>

#ifndef HEDP_DATA_DIR
#error "HEDP_DATA_DIR must point at the shipped fixtures"
#endif

namespace hedp::test {

inline std::string data_path(const std::string& name) { return std::string(HEDP_DATA_DIR) + "/" + name; }

/// Fixed seed so property failures reproduce.
inline std::mt19937& rng() {
  static std::mt19937 gen(20240611);
  return gen;
}

inline int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

inline bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng()); }

}  // namespace hedp::test
