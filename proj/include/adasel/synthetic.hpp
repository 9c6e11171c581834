#pragma once

// Seeded synthetic traces used by the tests, the acceptance suite and the
// bundled data/synthetic files.

#include <cstdint>

#include "adasel/trace_store.hpp"

namespace adasel::synthetic {

/// Two models with complementary coverage. "fast" meets the goal when
/// x0 < 0.5; "slow" meets it for 0.5 <= x0 < 0.95 and for x0 < 0.25; nothing
/// meets it above 0.95. x1 is a near copy of x0, the rest is noise. Count
/// token 0 is frequent on the fast side, token 1 on the slow side.
struct ComplementaryConfig {
  std::size_t n_inputs = 300;
  std::size_t noise_features = 3;
  std::uint32_t vocab_size = 6;
  double fast_latency_ms = 5.0;
  double slow_latency_ms = 20.0;
  std::uint64_t seed = 7;
};
Dataset complementary(const ComplementaryConfig& config);

/// Regular grids on the unit square: model "b" meets the goal inside a disk
/// centred at (0.5, 0.5), model "a" outside it. Training points sit at cell
/// centres of a train_side grid (ids g*), test points on a test_side grid
/// shifted by test_offset cells (ids t*). No randomness.
struct DiskLayout {
  std::size_t train_side = 30;
  std::size_t test_side = 17;
  double test_offset = 0.3;
  double disk_radius = 0.3;
};
Dataset planted_disk(const DiskLayout& layout);

/// Unstructured boolean-goal trace: each model meets the goal with its own
/// random rate, latencies are random, dense features are uniform noise plus
/// a weak hint of the first meeting model.
Dataset random_trace(std::size_t n_inputs, std::size_t n_models, std::size_t dense_width,
                     std::uint64_t seed);

}  // namespace adasel::synthetic
