#include <cmath>
#include <numbers>

#include <boost/math/distributions/inverse_gamma.hpp>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "rjbma/errors.hpp"
#include "rjbma/model.hpp"

namespace rjbma {
namespace {

TEST(Catalog, OrderNamesAndHeredityLinks) {
  const TermCatalog cat(testing::benchmark_spec(), "trt");
  ASSERT_EQ(cat.size(), 12u);
  EXPECT_EQ(cat[0].name, "X_1");
  EXPECT_EQ(cat[1].name, "Z_1");
  EXPECT_EQ(cat[6].name, "X_1:trt");
  EXPECT_EQ(cat[7].name, "Z_1:trt");
  EXPECT_EQ(cat[11].name, "Z_5:trt");
  EXPECT_EQ(cat[6].parent, 0u);
  EXPECT_EQ(cat[0].child, 6u);
  EXPECT_EQ(cat.index("Z_3:trt"), 9u);
  EXPECT_THROW(cat.index("nope"), ValidationError);
}

TEST(Catalog, CountsHeredityRespectingModels) {
  // Six variables, each with an interaction candidate: (1 + x + x^2)^6.
  const TermCatalog cat(testing::benchmark_spec(), "trt");
  EXPECT_NEAR(std::exp(cat.log_models_of_size(0)), 1.0, 1e-9);
  EXPECT_NEAR(std::exp(cat.log_models_of_size(1)), 6.0, 1e-9);
  EXPECT_NEAR(std::exp(cat.log_models_of_size(2)), 21.0, 1e-9);
  EXPECT_NEAR(std::exp(cat.log_models_of_size(12)), 1.0, 1e-9);
  double total = 0.0;
  for (std::size_t k = 0; k <= 12; ++k) total += std::exp(cat.log_models_of_size(k));
  EXPECT_NEAR(total, std::pow(3.0, 6), 1e-6);
}

TEST(Densities, Normal) {
  EXPECT_NEAR(log_normal_density(1.0, 0.5, 2.0),
              -0.5 * std::log(2 * std::numbers::pi * 4.0) - 0.25 / 8.0, 1e-14);
}

TEST(Densities, InverseGamma) {
  boost::math::inverse_gamma_distribution<double> ig(2.5, 1.5);
  for (double x : {0.1, 0.7, 3.0})
    EXPECT_NEAR(log_inverse_gamma_density(x, 2.5, 1.5), std::log(boost::math::pdf(ig, x)), 1e-12);
}

TEST(Densities, GaussianLogLikelihood) {
  EXPECT_NEAR(gaussian_log_likelihood(3.0, 4, 0.5),
              -2.0 * std::log(2 * std::numbers::pi * 0.25) - 3.0 / 0.5, 1e-12);
}

TEST(Densities, TruncatedPoisson) {
  double z = 0.0;
  for (int j = 0; j <= 9; ++j) z += 1.0 / std::tgamma(j + 1.0);
  EXPECT_NEAR(std::exp(truncated_poisson_log_pmf(0, 1.0, 9)), 1.0 / z, 1e-14);
  EXPECT_NEAR(std::exp(truncated_poisson_log_pmf(3, 1.0, 9)), 1.0 / 6.0 / z, 1e-14);
  double total = 0.0;
  for (int k = 0; k <= 12; ++k) total += std::exp(truncated_poisson_log_pmf(k, 0.1, 12));
  EXPECT_NEAR(total, 1.0, 1e-13);
  EXPECT_THROW(truncated_poisson_log_pmf(13, 0.1, 12), ValidationError);
  EXPECT_THROW(truncated_poisson_log_pmf(-1, 0.1, 12), ValidationError);
}

TEST(Prior, ModelSizeMarginalIsTruncatedPoisson) {
  const TermCatalog cat(testing::benchmark_spec(), "trt");
  const PriorParams p;
  for (std::size_t k = 0; k <= 12; ++k) {
    const double marginal =
        std::exp(log_model_prior(k, cat, p) + cat.log_models_of_size(k));
    EXPECT_NEAR(marginal, std::exp(truncated_poisson_log_pmf(static_cast<int>(k), 0.1, 12)), 1e-12);
  }
}

TEST(Prior, TermPriorPieces) {
  const PriorParams p;
  const TermCatalog cat(testing::benchmark_spec(), "trt");
  TermValue binary{{}, {0.7}};
  EXPECT_NEAR(log_term_prior(binary, cat[1], p), log_normal_density(0.7, 0.0, p.sigma_B), 1e-14);
  TermValue spline;
  spline.knots.interior = {0.3, 0.6};
  spline.coefficients = {0.0, 0.1, -0.2, 0.3, 0.4, 0.5};
  double expected = truncated_poisson_log_pmf(2, 1.0, 9) + std::log(2.0);
  for (std::size_t j = 1; j < spline.coefficients.size(); ++j)
    expected += log_normal_density(spline.coefficients[j], 0.0, p.sigma_B);
  EXPECT_NEAR(log_term_prior(spline, cat[0], p), expected, 1e-12);
}

TEST(Model, LinearPredictorAndBlip) {
  const Dataset d = testing::benchmark_data(50, 3);
  const TermCatalog cat(testing::benchmark_spec(), "trt");
  ModelState s;
  s.intercept = 0.5;
  s.exposure_effect = -1.0;
  s.sigma_eps = 1.0;
  s.terms.assign(cat.size(), std::nullopt);
  s.terms[1] = TermValue{{}, {2.0}};   // Z_1
  s.terms[7] = TermValue{{}, {1.5}};   // Z_1:trt
  TermValue spline;
  spline.coefficients = {0.0, 1.0, 0.0, 0.0};
  s.terms[0] = spline;  // X_1
  validate(s, cat, PriorParams{});

  const Eigen::VectorXd eta = linear_predictor(s, cat, d.covariates);
  const Eigen::VectorXd gamma = blip(s, cat, d.covariates);
  const KnotConfig k0;
  const double integral = basis_integrals(k0)[1];
  for (std::size_t i = 0; i < d.n(); ++i) {
    const double x = d.covariates.continuous[0][i];
    const double z = d.covariates.binary[0][i];
    const double a = d.covariates.exposure[i];
    const double h = 3 * x * (1 - x) * (1 - x) - integral;
    const double g = -1.0 + 1.5 * z;
    EXPECT_NEAR(eta(static_cast<Eigen::Index>(i)), 0.5 + 2.0 * z + h + a * g, 1e-12);
    EXPECT_NEAR(gamma(static_cast<Eigen::Index>(i)), g, 1e-12);
    EXPECT_NEAR(blip(s, cat, d.covariates, i), g, 1e-12);
  }
}

TEST(Model, StateValidationCatchesBrokenInvariants) {
  const TermCatalog cat(testing::benchmark_spec(), "trt");
  const PriorParams p;
  ModelState s;
  s.terms.assign(cat.size(), std::nullopt);
  s.terms[7] = TermValue{{}, {1.0}};  // Z_1:trt without Z_1
  EXPECT_THROW(validate(s, cat, p), InvariantError);
  s.terms[7].reset();
  TermValue spline;
  spline.coefficients = {0.5, 1.0, 0.0, 0.0};  // anchor not 0
  s.terms[0] = spline;
  EXPECT_THROW(validate(s, cat, p), InvariantError);
  s.terms[0]->coefficients[0] = 0.0;
  EXPECT_NO_THROW(validate(s, cat, p));
  s.sigma_eps = 0.0;
  EXPECT_THROW(validate(s, cat, p), InvariantError);
}

TEST(Model, GibbsSigmaMoments) {
  const Dataset d = testing::benchmark_data(40, 4);
  const TermCatalog cat(testing::benchmark_spec(), "trt");
  ModelState s = initialize_state(d, cat, PriorParams{}, true);
  const Eigen::Map<const Eigen::VectorXd> y(d.outcome.data(), 40);
  const double ssr = (y - linear_predictor(s, cat, d.covariates)).squaredNorm();
  const double shape = 0.01 + 20.0, rate = 0.01 + ssr / 2.0;
  Rng rng(1);
  const int draws = 40000;
  double m = 0.0, m2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double v = std::pow(gibbs_update_sigma(s, cat, d, 0.01, 0.01, rng), 2);
    m += v;
    m2 += v * v;
  }
  m /= draws;
  const double var = m2 / draws - m * m;
  const double mean_true = rate / (shape - 1.0);
  const double var_true = mean_true * mean_true / (shape - 2.0);
  EXPECT_NEAR(m / mean_true, 1.0, 0.01);
  EXPECT_NEAR(var / var_true, 1.0, 0.04);
}

}  // namespace
}  // namespace rjbma
