#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rjbma/sampler.hpp"

namespace rjbma {

inline constexpr int kArchiveVersion = 1;

// Directory layout:
//   metadata.json          version, specs, priors, candidates, seeds, wall time
//   data.csv               training columns in original units
//   chain_<k>.jsonl        one record per stored draw (k is 1-based)
//   chain_<k>_scalars.csv  chain, iteration, intercept, exposure, sigma, inclusion flags
//   acceptance.json        attempted / accepted counts per move kind and chain
// The directory is created if needed; existing archive files are overwritten.
void save_fit(const FitResult& fit, const std::filesystem::path& dir);

// Throws IoError for missing files, version mismatch or corrupted records.
FitResult load_fit(const std::filesystem::path& dir);

// Names of the per-chain files save_fit writes for `chains` chains.
std::vector<std::string> chain_file_names(int chains);

// Fixed-schema scalar table of one chain (the content of chain_<k>_scalars.csv).
std::string scalar_csv(const FitResult& fit, std::size_t chain);

}  // namespace rjbma
