#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include "rjbma/data_model.hpp"

namespace rjbma {

// `key = value` lines; '#' starts a comment. Keys: iter, warmup, thin, chains,
// sigma_v, bma, lambda_1, lambda_2, a_0, b_0, degree, k_max, w, sigma_B.
// Absent keys keep their defaults; warmup defaults to iter / 2. Numeric values
// may be written as sqrt(x). Unknown or repeated keys are errors.
std::pair<McmcSpecs, PriorParams> parse_config_text(const std::string& text);
std::pair<McmcSpecs, PriorParams> parse_config(const std::filesystem::path& path);

// Inverse of parse_config_text for the given values.
std::string format_config(const McmcSpecs& mcmc, const PriorParams& priors);

}  // namespace rjbma
