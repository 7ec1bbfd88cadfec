#include "rjbma/simulator.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rjbma/errors.hpp"
#include "rjbma/rng.hpp"

namespace rjbma {

void validate(const SimConfig& cfg) {
  if (cfg.n < 1) throw ValidationError("simulation needs n >= 1");
  if (!(cfg.noise_sd >= 0.0)) throw ValidationError("noise_sd must be >= 0");
  for (double p : cfg.bernoulli_probs)
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("Bernoulli probabilities must lie in (0, 1)");
  if (!(cfg.trt_prob > 0.0 && cfg.trt_prob < 1.0))
    throw ValidationError("trt_prob must lie in (0, 1)");
}

Table simulate(const SimConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const std::size_t n = cfg.n;
  auto bernoulli = [&](double p) {
    std::vector<double> col(n);
    for (auto& v : col) v = uniform01(rng) < p ? 1.0 : 0.0;
    return col;
  };

  std::vector<double> x(n);
  for (auto& v : x) v = uniform01(rng);
  std::vector<std::vector<double>> z;
  for (double p : cfg.bernoulli_probs) z.push_back(bernoulli(p));
  const std::vector<double> trt = bernoulli(cfg.trt_prob);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = cfg.noise_sd > 0.0 ? normal(rng, 0.0, cfg.noise_sd) : 0.0;
    y[i] = 2.0 * z[0][i] + 2.0 * x[i] + 2.0 * z[0][i] * trt[i] +
           std::cos(2.0 * std::numbers::pi * x[i]) * trt[i] + eps;
  }

  Table t;
  t.add("Y", std::move(y));
  t.add("trt", trt);
  t.add("X_1", std::move(x));
  for (std::size_t j = 0; j < z.size(); ++j) t.add("Z_" + std::to_string(j + 1), std::move(z[j]));
  return t;
}

}  // namespace rjbma
