#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rjbma {

struct FitResult;

// Draws of one scalar quantity, one row per chain.
struct ChainMatrix {
  std::vector<std::vector<double>> values;

  std::size_t chains() const { return values.size(); }
  std::size_t draws() const { return values.empty() ? 0 : values.front().size(); }
};

// Throws ValidationError unless the matrix is non-empty, rectangular and finite.
void validate(const ChainMatrix& cm);

// Split-chain potential scale reduction. Each chain is halved (the middle draw
// of an odd-length chain is dropped). Empty when the within-chain variance is 0.
std::optional<double> split_rhat(const ChainMatrix& cm);

// Multi-chain effective sample size from chain-averaged autocorrelations,
// truncated by Geyer's initial positive (monotone) sequence. Empty when the
// draws have zero variance.
std::optional<double> ess(const ChainMatrix& cm);

// Split R-hat for the intercept, exposure effect, sigma and the exposure
// effect at every training row ("gamma[i]", 1-based).
std::map<std::string, std::optional<double>> rhats(const FitResult& fit);

}  // namespace rjbma
