#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "rjbma/bspline.hpp"
#include "rjbma/sampler.hpp"
#include "rjbma/simulator.hpp"

namespace {

using namespace rjbma;

const CandidateSpec kSpec{
    {"X_1"}, {"Z_1", "Z_2", "Z_3", "Z_4", "Z_5"}, {"X_1", "Z_1", "Z_2", "Z_3", "Z_4", "Z_5"}};

Dataset bench_data(std::size_t n) {
  SimConfig cfg;
  cfg.n = n;
  cfg.seed = 7;
  return validate_dataset(simulate(cfg), "Y", "trt", kSpec);
}

void BM_BasisMatrix(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  KnotConfig knots;
  for (int k = 1; k <= st.range(1); ++k) knots.interior.push_back(k / (st.range(1) + 1.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  for (auto _ : st) benchmark::DoNotOptimize(basis_matrix(x, knots));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_BasisMatrix)->Args({1000, 0})->Args({1000, 5})->Args({10000, 9});

// One full sampler iteration: knot update per included spline, term update,
// coefficient sweep and the sigma step.
void BM_ChainSweep(benchmark::State& st) {
  const Dataset data = bench_data(static_cast<std::size_t>(st.range(0)));
  const TermCatalog catalog(kSpec, "trt");
  const PriorParams priors;
  ChainKernel kernel(data, catalog, priors, McmcSpecs{}.sigma_v, initialize_state(data, catalog, priors, false));
  Rng rng(11);
  for (auto _ : st) {
    for (std::size_t t = 0; t < catalog.size(); ++t)
      if (catalog[t].kind == TermKind::spline) kernel.update_knots(t, rng);
    kernel.update_terms(rng);
    kernel.update_coefficients(rng);
    kernel.update_sigma(rng);
  }
}
BENCHMARK(BM_ChainSweep)->Arg(1000)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
