#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rjbma/data_model.hpp"
#include "rjbma/diagnostics.hpp"
#include "rjbma/rng.hpp"
#include "rjbma/sampler.hpp"

namespace rjbma {

// Quantile by linear interpolation between order statistics (R's type 7).
// `sorted` must be non-empty and ascending; p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> values, double p);

// Every stored draw of every chain, chain by chain.
std::vector<const ModelState*> pooled_draws(const FitResult& fit);

// Scalar names: "intercept", the exposure name, "sigma" and every binary term
// ("Z_1", "Z_1:trt"). Excluded draws of a term contribute 0.
bool is_scalar_name(const FitResult& fit, const std::string& name);
std::vector<double> scalar_draws(const FitResult& fit, const std::string& name);
ChainMatrix scalar_chains(const FitResult& fit, const std::string& name);

// Fraction of pooled draws that include the candidate term.
double pip(const FitResult& fit, const std::string& term);

// Model-averaged posterior means of the intercept, exposure effect and binary terms.
std::map<std::string, double> coef(const FitResult& fit);

// Equal-tailed interval at `level` from the pooled model-averaged sample.
std::pair<double, double> credint(std::span<const double> draws, double level);
std::pair<double, double> credint(const FitResult& fit, const std::string& name, double level);

// draws x rows matrices over new covariates (see prepare_newdata).
Eigen::MatrixXd fitted_draws(const FitResult& fit, const Covariates& x);
Eigen::MatrixXd predict_draws(const FitResult& fit, const Covariates& x, Rng& rng);
Eigen::MatrixXd fitted_trt_eff(const FitResult& fit, const Covariates& x);
// Exposure effect on a new outcome pair: the blip plus the difference of two
// independent residuals, N(0, 2 sigma^2).
Eigen::MatrixXd predict_trt_eff(const FitResult& fit, const Covariates& x, Rng& rng);

Eigen::MatrixXd fitted_draws(const FitResult& fit, const Table& newdata);
Eigen::MatrixXd fitted_trt_eff(const FitResult& fit, const Table& newdata);

struct SubspaceInterval {
  double lower;  // original units
  double upper;
};

struct SubspaceStratum {
  std::vector<std::pair<std::string, int>> levels;  // selected binary predictive variables
  std::string variable;                             // continuous variable, empty if none
  std::vector<double> grid;                         // original units
  std::vector<double> grid_quantiles;
  std::vector<SubspaceInterval> intervals;
  bool positive = false;  // stratum without a continuous variable: quantile > 0
};

struct SubspaceReport {
  double alpha = 0.05;
  std::vector<double> quantiles;  // per training row
  std::vector<bool> in_subspace;
  std::vector<SubspaceStratum> strata;
};

// Individuals and covariate regions whose alpha-quantile of the exposure
// effect exceeds 0. Strata are the level combinations of binary predictive
// variables with pip > pip_cutoff; each continuous predictive variable with
// pip > pip_cutoff is scanned on a grid of step `grid_resolution` (rescaled
// axis) while other continuous variables sit at their training medians and
// unselected binaries at 0.
SubspaceReport effective_subspace(const FitResult& fit, double alpha, double grid_resolution = 0.01,
                                  double pip_cutoff = 0.1);

// "Z_1 = 0: X_1 in [0, 0.23] or [0.77, 1], Z_1 = 1: X_1 in [0, 1]"
std::string describe(const SubspaceReport& report);

struct SummaryRow {
  std::string name;
  double estimate = 0.0;
  double est_error = 0.0;
  double lower95 = 0.0;
  double upper95 = 0.0;
  std::optional<double> eff_sample;
  std::optional<double> rhat;
  double pip = 0.0;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;  // intercept, exposure, then binary terms by pip
  SummaryRow sigma;
  std::vector<std::pair<std::string, double>> spline_pips;
};

// ESS and R-hat are only computed for rows with pip >= diagnostics_pip.
SummaryTable summary_table(const FitResult& fit, double diagnostics_pip = 0.99);

}  // namespace rjbma
