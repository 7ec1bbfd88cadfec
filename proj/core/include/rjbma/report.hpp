#pragma once

#include <string>

#include "rjbma/posterior.hpp"
#include "rjbma/sampler.hpp"

namespace rjbma {

// "Y ~ fbs(X_1) + Z_1 + ... + trt + \n    fbs(X_1):trt + Z_1:trt + ..."
std::string model_formula(const FitResult& fit);

// Model information, sampler arguments and parameter tables. `data_label`
// fills the "Data:" line.
std::string summary_text(const FitResult& fit, const std::string& data_label);

std::string subspace_text(const SubspaceReport& report);

// row (1-based), alpha-quantile of the exposure effect, in_subspace (0/1).
std::string subspace_flags_csv(const SubspaceReport& report);

// R-hat / ESS for the intercept, exposure effect and sigma, a summary of the
// per-row exposure-effect R-hats (every row when `all_rows`), and acceptance rates.
std::string diagnose_text(const FitResult& fit, bool all_rows = false);

}  // namespace rjbma
