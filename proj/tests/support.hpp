#pragma once

// Shared fixtures for the test binaries.

#include <cstdint>
#include <filesystem>
#include <random>

#include "voimpc/io.hpp"

namespace voimpc::testing {

inline NodeModel default_model(OcvCurve curve = OcvCurve::li_ion_default()) {
  return NodeModel{VoiParams{}, EnergyProfile{}, HarvestModel{},
                   BatteryModel(2.75, 0.015, 3.6, std::move(curve))};
}

inline std::filesystem::path data_path(const char* name) {
  return std::filesystem::path(VOIMPC_TEST_DATA) / name;
}

inline std::filesystem::path repo_path(const char* name) {
  return std::filesystem::path(VOIMPC_REPO_ROOT) / name;
}

// Small seeded generator for hand-rolled property tests.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace voimpc::testing
