#include "rjbma/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rjbma/errors.hpp"
#include "rjbma/model.hpp"
#include "rjbma/sampler.hpp"

namespace rjbma {

namespace {

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(begin),
                         v.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
         static_cast<double>(end - begin);
}

double sample_variance(const std::vector<double>& v, std::size_t begin, std::size_t end, double mean) {
  double ss = 0.0;
  for (std::size_t i = begin; i < end; ++i) ss += (v[i] - mean) * (v[i] - mean);
  return ss / static_cast<double>(end - begin - 1);
}

}  // namespace

void validate(const ChainMatrix& cm) {
  if (cm.values.empty()) throw ValidationError("chain matrix has no chains");
  for (const auto& chain : cm.values) {
    if (chain.size() != cm.draws()) throw ValidationError("chains have unequal draw counts");
    for (double v : chain)
      if (!std::isfinite(v)) throw ValidationError("chain matrix contains non-finite values");
  }
}

std::optional<double> split_rhat(const ChainMatrix& cm) {
  validate(cm);
  if (cm.draws() < 2) throw ValidationError("split R-hat needs at least 2 draws per chain");
  const std::size_t half = cm.draws() / 2;
  if (half < 2) return std::nullopt;

  std::vector<double> means, variances;
  for (const auto& chain : cm.values) {
    for (std::size_t begin : {std::size_t{0}, chain.size() - half}) {
      const double m = mean_of(chain, begin, begin + half);
      means.push_back(m);
      variances.push_back(sample_variance(chain, begin, begin + half, m));
    }
  }
  const double n = static_cast<double>(half);
  const double W = std::accumulate(variances.begin(), variances.end(), 0.0) /
                   static_cast<double>(variances.size());
  if (!(W > 0.0)) return std::nullopt;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
  double between = 0.0;
  for (double m : means) between += (m - grand) * (m - grand);
  const double B = n * between / static_cast<double>(means.size() - 1);
  const double var_plus = (n - 1.0) / n * W + B / n;
  return std::sqrt(var_plus / W);
}

std::optional<double> ess(const ChainMatrix& cm) {
  validate(cm);
  const std::size_t N = cm.draws();
  const std::size_t M = cm.chains();
  if (N < 4) throw ValidationError("ESS needs at least 4 draws per chain");

  std::vector<double> means(M);
  std::vector<std::vector<double>> centred(M);
  for (std::size_t m = 0; m < M; ++m) {
    means[m] = mean_of(cm.values[m], 0, N);
    centred[m].resize(N);
    for (std::size_t i = 0; i < N; ++i) centred[m][i] = cm.values[m][i] - means[m];
  }
  // Biased (1/N) autocovariance at `lag`, averaged over chains.
  auto mean_acov = [&](std::size_t lag) {
    double total = 0.0;
    for (const auto& c : centred) {
      double s = 0.0;
      for (std::size_t i = 0; i + lag < N; ++i) s += c[i] * c[i + lag];
      total += s / static_cast<double>(N);
    }
    return total / static_cast<double>(M);
  };

  const double nn = static_cast<double>(N);
  const double acov0 = mean_acov(0);
  const double W = acov0 * nn / (nn - 1.0);
  double var_plus = (nn - 1.0) / nn * W;
  if (M > 1) {
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(M);
    double between = 0.0;
    for (double m : means) between += (m - grand) * (m - grand);
    var_plus += between / static_cast<double>(M - 1);
  }
  if (!(var_plus > 0.0) || !(W > 0.0)) return std::nullopt;

  auto rho = [&](std::size_t lag) {
    return 1.0 - (W - (lag == 0 ? acov0 : mean_acov(lag))) / var_plus;
  };
  double sum_pairs = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t lag = 0; lag + 1 < N; lag += 2) {
    double pair = rho(lag) + rho(lag + 1);
    if (!(pair > 0.0)) break;
    pair = std::min(pair, previous);
    previous = pair;
    sum_pairs += pair;
  }
  const double tau = -1.0 + 2.0 * sum_pairs;
  const double total = nn * static_cast<double>(M);
  if (!(tau > 0.0)) return 2.0 * total;
  return std::clamp(total / tau, 1.0, 2.0 * total);
}

std::map<std::string, std::optional<double>> rhats(const FitResult& fit) {
  const std::size_t C = fit.chains.size();
  ChainMatrix mu, phi, sigma;
  for (const auto& chain : fit.chains) {
    auto& a = mu.values.emplace_back();
    auto& b = phi.values.emplace_back();
    auto& c = sigma.values.emplace_back();
    for (const auto& s : chain.draws) {
      a.push_back(s.intercept);
      b.push_back(s.exposure_effect);
      c.push_back(s.sigma_eps);
    }
  }
  std::map<std::string, std::optional<double>> out;
  out["intercept"] = split_rhat(mu);
  out[fit.data.exposure_name] = split_rhat(phi);
  out["sigma"] = split_rhat(sigma);

  const std::size_t n = fit.data.n();
  std::vector<ChainMatrix> gamma(n);
  for (auto& g : gamma) g.values.resize(C);
  for (std::size_t c = 0; c < C; ++c) {
    for (const auto& s : fit.chains[c].draws) {
      const Eigen::VectorXd b = blip(s, fit.catalog, fit.data.covariates);
      for (std::size_t i = 0; i < n; ++i) gamma[i].values[c].push_back(b(static_cast<Eigen::Index>(i)));
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    out["gamma[" + std::to_string(i + 1) + "]"] = split_rhat(gamma[i]);
  return out;
}

}  // namespace rjbma
