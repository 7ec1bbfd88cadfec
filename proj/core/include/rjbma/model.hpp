#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rjbma/bspline.hpp"
#include "rjbma/data_model.hpp"
#include "rjbma/rng.hpp"

namespace rjbma {

enum class TermKind { spline, binary };
enum class TermRole { prognostic, predictive };

struct TermInfo {
  std::string name;      // "X_1" or "X_1:trt"
  std::string variable;  // "X_1"
  TermKind kind;
  TermRole role;
  std::size_t column;                // into Covariates::continuous or ::binary
  std::optional<std::size_t> parent; // prognostic counterpart of a predictive term
  std::optional<std::size_t> child;  // predictive counterpart of a prognostic term
};

// Every candidate term, in the fixed order: prognostic splines, prognostic
// binaries, predictive splines, predictive binaries.
class TermCatalog {
 public:
  TermCatalog() = default;
  TermCatalog(const CandidateSpec& spec, std::string exposure_name);

  const std::vector<TermInfo>& terms() const { return terms_; }
  const TermInfo& operator[](std::size_t t) const { return terms_[t]; }
  std::size_t size() const { return terms_.size(); }
  const std::string& exposure_name() const { return exposure_name_; }

  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t index(const std::string& name) const;  // throws ValidationError

  // log of the number of heredity-respecting term sets with `count` terms.
  double log_models_of_size(std::size_t count) const { return log_model_counts_.at(count); }

 private:
  std::vector<TermInfo> terms_;
  std::string exposure_name_;
  std::vector<double> log_model_counts_;
};

// Coefficients of an included term. Binary terms carry one coefficient and no
// knots. Spline terms carry knots.basis_dim() coefficients, the first of which
// is pinned at 0 so the spline vanishes at the lower end of the observed range.
struct TermValue {
  KnotConfig knots;
  std::vector<double> coefficients;

  friend bool operator==(const TermValue&, const TermValue&) = default;
};

struct ModelState {
  double intercept = 0.0;
  double exposure_effect = 0.0;
  double sigma_eps = 1.0;
  std::vector<std::optional<TermValue>> terms;  // one slot per catalog term

  bool included(std::size_t t) const { return terms[t].has_value(); }
  std::size_t included_count() const;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

// Throws InvariantError on any broken ModelState invariant.
void validate(const ModelState& state, const TermCatalog& catalog, const PriorParams& priors);

// Contribution of one included term to every row, before multiplying by the
// exposure for predictive terms.
Eigen::VectorXd term_values(const TermValue& value, const TermInfo& info,
                            const Covariates& x);

Eigen::VectorXd linear_predictor(const ModelState& state, const TermCatalog& catalog,
                                 const Covariates& x);

// Exposure effect phi + sum h2(x~) + beta2' z~ at one row / every row.
double blip(const ModelState& state, const TermCatalog& catalog, const Covariates& x,
            std::size_t row);
Eigen::VectorXd blip(const ModelState& state, const TermCatalog& catalog, const Covariates& x);

double log_likelihood(const ModelState& state, const TermCatalog& catalog, const Dataset& data);

// Gaussian log-likelihood from the residual sum of squares.
double gaussian_log_likelihood(double ssr, std::size_t n, double sigma);

double log_normal_density(double x, double mean, double sd);

// log InvGamma(x | shape, rate) density.
double log_inverse_gamma_density(double x, double shape, double rate);

// log of Poisson(lambda) restricted and renormalised to {0, ..., k_upper}.
double truncated_poisson_log_pmf(int k, double lambda, int k_upper);

// Structural part of the prior: term count and which terms.
double log_model_prior(std::size_t included_terms, const TermCatalog& catalog,
                       const PriorParams& priors);

// Prior contribution of one included term's knots and coefficients.
double log_term_prior(const TermValue& value, const TermInfo& info, const PriorParams& priors);

double log_prior(const ModelState& state, const TermCatalog& catalog, const PriorParams& priors);

// Draws sigma^2 ~ InvGamma(a0 + n/2, b0 + ssr/2) and returns its square root.
double draw_sigma(double ssr, std::size_t n, double a_0, double b_0, Rng& rng);

double gibbs_update_sigma(const ModelState& state, const TermCatalog& catalog,
                          const Dataset& data, double a_0, double b_0, Rng& rng);

}  // namespace rjbma
