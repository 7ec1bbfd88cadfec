#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "rjbma/data_model.hpp"

namespace rjbma {

struct SimConfig {
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  double noise_sd = 0.5;
  std::array<double, 5> bernoulli_probs{0.35, 0.5, 0.65, 0.2, 0.35};
  double trt_prob = 0.5;
};

void validate(const SimConfig& cfg);

// Y = 2 Z_1 + 2 X_1 + 2 Z_1 trt + cos(2 pi X_1) trt + eps.
//
// Stream layout (one mt19937_64 seeded with cfg.seed, drawn column by column):
// X_1 for every row, then Z_1, ..., Z_5, then trt, then eps. Output columns are
// Y, trt, X_1, Z_1, ..., Z_5.
Table simulate(const SimConfig& cfg);

}  // namespace rjbma
