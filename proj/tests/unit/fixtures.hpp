#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "rjbma/sampler.hpp"
#include "rjbma/simulator.hpp"

namespace rjbma::testing {

inline CandidateSpec benchmark_spec() {
  return {{"X_1"}, {"Z_1", "Z_2", "Z_3", "Z_4", "Z_5"}, {"X_1", "Z_1", "Z_2", "Z_3", "Z_4", "Z_5"}};
}

inline Dataset benchmark_data(std::size_t n, std::uint64_t seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  return validate_dataset(simulate(cfg), "Y", "trt", benchmark_spec());
}

// Short two-chain fit shared by the posterior, archive and plot tests.
inline const FitResult& toy_fit() {
  static const FitResult fit = [] {
    McmcSpecs mcmc;
    mcmc.iter = 600;
    mcmc.warmup = 300;
    mcmc.chains = 2;
    return run_rjmcmc(benchmark_data(300, 11), benchmark_spec(), mcmc, PriorParams{}, 5);
  }();
  return fit;
}

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("rjbma_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace rjbma::testing
