#include "rjbma/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rjbma/errors.hpp"

namespace rjbma {

namespace {

std::string interaction_name(const std::string& var, const std::string& exposure) {
  return var + ":" + exposure;
}

}  // namespace

TermCatalog::TermCatalog(const CandidateSpec& spec, std::string exposure_name)
    : exposure_name_(std::move(exposure_name)) {
  auto column_of = [](const std::vector<std::string>& names, const std::string& v) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), v) - names.begin());
  };
  for (std::size_t j = 0; j < spec.spline_vars.size(); ++j)
    terms_.push_back({spec.spline_vars[j], spec.spline_vars[j], TermKind::spline,
                      TermRole::prognostic, j, std::nullopt, std::nullopt});
  for (std::size_t j = 0; j < spec.binary_vars.size(); ++j)
    terms_.push_back({spec.binary_vars[j], spec.binary_vars[j], TermKind::binary,
                      TermRole::prognostic, j, std::nullopt, std::nullopt});
  for (TermKind kind : {TermKind::spline, TermKind::binary}) {
    const auto& pool = kind == TermKind::spline ? spec.spline_vars : spec.binary_vars;
    for (const auto& v : spec.interaction_vars) {
      std::size_t col = column_of(pool, v);
      if (col == pool.size()) continue;
      std::size_t parent = *find(v);
      terms_.push_back({interaction_name(v, exposure_name_), v, kind, TermRole::predictive, col,
                        parent, std::nullopt});
      terms_[parent].child = terms_.size() - 1;
    }
  }

  // Count heredity-respecting subsets by size: a variable with a predictive
  // candidate contributes (1 + x + x^2), one without contributes (1 + x).
  std::vector<double> counts{1.0};
  for (const auto& t : terms_) {
    if (t.role != TermRole::prognostic) continue;
    const std::size_t degree = t.child ? 2 : 1;
    std::vector<double> next(counts.size() + degree, 0.0);
    for (std::size_t i = 0; i < counts.size(); ++i)
      for (std::size_t d = 0; d <= degree; ++d) next[i + d] += counts[i];
    counts = std::move(next);
  }
  log_model_counts_.resize(counts.size());
  std::transform(counts.begin(), counts.end(), log_model_counts_.begin(),
                 [](double c) { return std::log(c); });
}

std::optional<std::size_t> TermCatalog::find(const std::string& name) const {
  for (std::size_t t = 0; t < terms_.size(); ++t)
    if (terms_[t].name == name) return t;
  return std::nullopt;
}

std::size_t TermCatalog::index(const std::string& name) const {
  if (auto t = find(name)) return *t;
  throw ValidationError("unknown term '" + name + "'");
}

std::size_t ModelState::included_count() const {
  return static_cast<std::size_t>(
      std::count_if(terms.begin(), terms.end(), [](const auto& t) { return t.has_value(); }));
}

void validate(const ModelState& state, const TermCatalog& catalog, const PriorParams& priors) {
  auto fail = [](const std::string& what) { throw InvariantError("invalid model state: " + what); };
  if (state.terms.size() != catalog.size()) fail("term slot count does not match catalog");
  if (!(state.sigma_eps > 0.0) || !std::isfinite(state.sigma_eps)) fail("sigma_eps must be > 0");
  if (!std::isfinite(state.intercept) || !std::isfinite(state.exposure_effect))
    fail("non-finite intercept or exposure effect");
  for (std::size_t t = 0; t < catalog.size(); ++t) {
    const auto& info = catalog[t];
    const auto& slot = state.terms[t];
    if (!slot) continue;
    if (info.parent && !state.included(*info.parent))
      fail("predictive term '" + info.name + "' included without its prognostic term");
    for (double c : slot->coefficients)
      if (!std::isfinite(c)) fail("non-finite coefficient in '" + info.name + "'");
    if (info.kind == TermKind::binary) {
      if (slot->coefficients.size() != 1 || !slot->knots.interior.empty())
        fail("binary term '" + info.name + "' must hold exactly one coefficient");
      continue;
    }
    if (slot->knots.degree != priors.degree) fail("degree mismatch in '" + info.name + "'");
    try {
      validate(slot->knots, priors.k_max);
    } catch (const ValidationError& e) {
      fail("'" + info.name + "': " + e.what());
    }
    if (slot->coefficients.size() != slot->knots.basis_dim())
      fail("coefficient count of '" + info.name + "' does not match its basis");
    if (slot->coefficients.front() != 0.0) fail("anchor coefficient of '" + info.name + "' is not 0");
  }
}

Eigen::VectorXd term_values(const TermValue& value, const TermInfo& info, const Covariates& x) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  if (info.kind == TermKind::binary) {
    if (info.column >= x.binary.size())
      throw ValidationError("covariates lack binary variable '" + info.variable + "'");
    const Eigen::Map<const Eigen::VectorXd> z(x.binary[info.column].data(), n);
    return value.coefficients[0] * z;
  }
  if (info.column >= x.continuous.size())
    throw ValidationError("covariates lack continuous variable '" + info.variable + "'");
  const Eigen::Map<const Eigen::VectorXd> c(value.coefficients.data(),
                                            static_cast<Eigen::Index>(value.coefficients.size()));
  return centred_basis_matrix(x.continuous[info.column], value.knots) * c;
}

Eigen::VectorXd linear_predictor(const ModelState& state, const TermCatalog& catalog,
                                 const Covariates& x) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  if (state.terms.size() != catalog.size())
    throw ValidationError("model state does not match the term catalog");
  const Eigen::Map<const Eigen::VectorXd> exposure(x.exposure.data(), n);
  Eigen::VectorXd prognostic = Eigen::VectorXd::Constant(n, state.intercept);
  Eigen::VectorXd effect = Eigen::VectorXd::Constant(n, state.exposure_effect);
  for (std::size_t t = 0; t < catalog.size(); ++t) {
    if (!state.terms[t]) continue;
    const auto& info = catalog[t];
    (info.role == TermRole::prognostic ? prognostic : effect) += term_values(*state.terms[t], info, x);
  }
  return prognostic + effect.cwiseProduct(exposure);
}

Eigen::VectorXd blip(const ModelState& state, const TermCatalog& catalog, const Covariates& x) {
  Eigen::VectorXd effect =
      Eigen::VectorXd::Constant(static_cast<Eigen::Index>(x.rows()), state.exposure_effect);
  for (std::size_t t = 0; t < catalog.size(); ++t) {
    if (state.terms[t] && catalog[t].role == TermRole::predictive)
      effect += term_values(*state.terms[t], catalog[t], x);
  }
  return effect;
}

double blip(const ModelState& state, const TermCatalog& catalog, const Covariates& x,
            std::size_t row) {
  if (row >= x.rows()) throw ValidationError("row index out of range");
  double effect = state.exposure_effect;
  for (std::size_t t = 0; t < catalog.size(); ++t) {
    if (!state.terms[t] || catalog[t].role != TermRole::predictive) continue;
    const auto& info = catalog[t];
    const auto& value = *state.terms[t];
    if (info.kind == TermKind::binary) {
      if (info.column >= x.binary.size())
        throw ValidationError("missing predictive covariate '" + info.variable + "'");
      effect += value.coefficients[0] * x.binary[info.column][row];
    } else {
      if (info.column >= x.continuous.size())
        throw ValidationError("missing predictive covariate '" + info.variable + "'");
      const double u = x.continuous[info.column][row];
      const Eigen::Map<const Eigen::VectorXd> c(value.coefficients.data(),
                                                static_cast<Eigen::Index>(value.coefficients.size()));
      effect += (centred_basis_matrix(std::span<const double>(&u, 1), value.knots) * c)(0);
    }
  }
  return effect;
}

double gaussian_log_likelihood(double ssr, std::size_t n, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("sigma_eps must be positive");
  const double nn = static_cast<double>(n);
  return -0.5 * nn * std::log(2.0 * std::numbers::pi) - nn * std::log(sigma) -
         0.5 * ssr / (sigma * sigma);
}

double log_likelihood(const ModelState& state, const TermCatalog& catalog, const Dataset& data) {
  const Eigen::Map<const Eigen::VectorXd> y(data.outcome.data(),
                                            static_cast<Eigen::Index>(data.n()));
  const double ssr = (y - linear_predictor(state, catalog, data.covariates)).squaredNorm();
  return gaussian_log_likelihood(ssr, data.n(), state.sigma_eps);
}

double log_normal_density(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sd) - 0.5 * z * z;
}

double log_inverse_gamma_density(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double truncated_poisson_log_pmf(int k, double lambda, int k_upper) {
  if (k < 0 || k > k_upper) {
    std::ostringstream msg;
    msg << "count " << k << " outside truncated Poisson support {0, ..., " << k_upper << "}";
    throw ValidationError(msg.str());
  }
  const double log_lambda = std::log(lambda);
  auto log_mass = [&](int j) { return j * log_lambda - std::lgamma(j + 1.0); };
  double peak = log_mass(0);
  for (int j = 1; j <= k_upper; ++j) peak = std::max(peak, log_mass(j));
  double total = 0.0;
  for (int j = 0; j <= k_upper; ++j) total += std::exp(log_mass(j) - peak);
  return log_mass(k) - peak - std::log(total);
}

double log_model_prior(std::size_t included_terms, const TermCatalog& catalog,
                       const PriorParams& priors) {
  return truncated_poisson_log_pmf(static_cast<int>(included_terms), priors.lambda_1,
                                   static_cast<int>(catalog.size())) -
         catalog.log_models_of_size(included_terms);
}

double log_term_prior(const TermValue& value, const TermInfo& info, const PriorParams& priors) {
  if (info.kind == TermKind::binary)
    return log_normal_density(value.coefficients[0], 0.0, priors.sigma_B);
  const int k = static_cast<int>(value.knots.size());
  if (k > priors.k_max)
    throw InvariantError("term '" + info.name + "' has more than k_max knots");
  // Knot locations are ordered uniforms: density k! on the simplex.
  double lp = truncated_poisson_log_pmf(k, priors.lambda_2, priors.k_max) + std::lgamma(k + 1.0);
  for (std::size_t j = 1; j < value.coefficients.size(); ++j)
    lp += log_normal_density(value.coefficients[j], 0.0, priors.sigma_B);
  return lp;
}

double log_prior(const ModelState& state, const TermCatalog& catalog, const PriorParams& priors) {
  if (state.terms.size() != catalog.size())
    throw InvariantError("model state does not match the term catalog");
  double lp = log_model_prior(state.included_count(), catalog, priors);
  for (std::size_t t = 0; t < catalog.size(); ++t)
    if (state.terms[t]) lp += log_term_prior(*state.terms[t], catalog[t], priors);
  lp += log_normal_density(state.intercept, 0.0, priors.sigma_B);
  lp += log_normal_density(state.exposure_effect, 0.0, priors.sigma_B);
  const double variance = state.sigma_eps * state.sigma_eps;
  lp += log_inverse_gamma_density(variance, priors.a_0, priors.b_0);
  return lp;
}

double draw_sigma(double ssr, std::size_t n, double a_0, double b_0, Rng& rng) {
  const double shape = a_0 + 0.5 * static_cast<double>(n);
  const double rate = b_0 + 0.5 * ssr;
  const double precision = std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
  return std::sqrt(1.0 / precision);
}

double gibbs_update_sigma(const ModelState& state, const TermCatalog& catalog,
                          const Dataset& data, double a_0, double b_0, Rng& rng) {
  const Eigen::Map<const Eigen::VectorXd> y(data.outcome.data(),
                                            static_cast<Eigen::Index>(data.n()));
  const double ssr = (y - linear_predictor(state, catalog, data.covariates)).squaredNorm();
  return draw_sigma(ssr, data.n(), a_0, b_0, rng);
}

}  // namespace rjbma
