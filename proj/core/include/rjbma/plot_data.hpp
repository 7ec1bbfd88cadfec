#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rjbma/sampler.hpp"

namespace rjbma {

enum class SampleType { estimand, fitted, predictive };
enum class PlotType { hist, trace, cred };
enum class EffectType { outcome, exposure_effect };

SampleType sample_type_from_string(std::string_view s);
PlotType plot_type_from_string(std::string_view s);
EffectType effect_type_from_string(std::string_view s);

struct PlotDataRequest {
  SampleType sample_type = SampleType::fitted;
  PlotType plot_type = PlotType::cred;
  EffectType effect_type = EffectType::exposure_effect;
  // estimand: parameter names ("intercept", the exposure, "sigma", binary
  // variables). Otherwise continuous variables to scan (cred) or to place at
  // their 0.25 / 0.75 quantiles (hist, trace).
  std::vector<std::string> variables;
  std::vector<std::string> facet_by;     // binary variables, evaluated at 0 and 1
  std::map<std::string, double> fixed;   // covariate values in original units
  double pip_cutoff = 0.1;
  double level = 0.95;
  double grid_resolution = 0.01;  // step on the rescaled [0, 1] axis
  std::uint64_t seed = 1;         // predictive noise
};

// Throws ValidationError for combinations outside the supported table:
// estimand pairs with hist / trace, fitted and predictive with all three.
void validate(const PlotDataRequest& req);

using PlotCell = std::variant<double, std::string>;

struct PlotData {
  std::vector<std::string> columns;
  std::vector<std::vector<PlotCell>> rows;
  std::vector<std::string> notes;  // auto-selection and defaulting messages

  std::size_t column_index(const std::string& name) const;
  double number(std::size_t row, const std::string& column) const;
};

// Layouts:
//   estimand hist          one column of pooled draws per parameter
//   estimand trace         chain, iteration, one column per parameter
//   fitted/predictive cred variable, x, facets..., mean, lower, upper
//   fitted/predictive hist pattern columns..., value
//   fitted/predictive trace chain, iteration, pattern columns..., value
// Empty `variables` / `facet_by` are filled from terms with pip > pip_cutoff
// (predictive terms for exposure effects, prognostic ones for outcomes).
PlotData plot_data(const FitResult& fit, const PlotDataRequest& req);

std::string format_plot_csv(const PlotData& data);
void emit_plot_data(const FitResult& fit, const PlotDataRequest& req,
                    const std::filesystem::path& out_path, std::vector<std::string>* notes = nullptr);

}  // namespace rjbma
