// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "rjbma/archive.hpp"
#include "rjbma/bspline.hpp"
#include "rjbma/diagnostics.hpp"
#include "rjbma/posterior.hpp"
#include "rjbma/sampler.hpp"
#include "rjbma/simulator.hpp"

using namespace rjbma;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 2024;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[x] ";
    }
    detail << what << "; ";
  }
};

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const CandidateSpec kSpec{
    {"X_1"}, {"Z_1", "Z_2", "Z_3", "Z_4", "Z_5"}, {"X_1", "Z_1", "Z_2", "Z_3", "Z_4", "Z_5"}};

Dataset benchmark(std::size_t n, std::uint64_t seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  return validate_dataset(simulate(cfg), "Y", "trt", kSpec);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Verdict recovery(const FitResult& fit) {
  Verdict v;
  for (const char* t : {"X_1", "X_1:trt", "Z_1", "Z_1:trt"}) {
    const double p = pip(fit, t);
    v.require(p >= 0.99, std::string("pip ") + t + " " + fmt(p));
  }
  double worst = 0.0;
  for (const char* t : {"Z_2", "Z_3", "Z_4", "Z_5", "Z_2:trt", "Z_3:trt", "Z_4:trt", "Z_5:trt"})
    worst = std::max(worst, pip(fit, t));
  v.require(worst <= 0.10, "max null pip " + fmt(worst));
  const double sigma = mean_of(scalar_draws(fit, "sigma"));
  v.require(sigma >= 0.48 && sigma <= 0.56, "sigma " + fmt(sigma));
  const double z1 = mean_of(scalar_draws(fit, "Z_1"));
  const double z1t = mean_of(scalar_draws(fit, "Z_1:trt"));
  v.require(std::fabs(z1 - 2.0) <= 0.15, "Z_1 " + fmt(z1));
  v.require(std::fabs(z1t - 2.0) <= 0.20, "Z_1:trt " + fmt(z1t));
  v.require(fit.wall_time_seconds < 600.0, "runtime " + fmt(fit.wall_time_seconds, 1) + " s");
  return v;
}

Verdict blip_accuracy(const FitResult& fit) {
  Verdict v;
  Table grid;
  std::vector<double> x, z1;
  for (int z = 0; z < 2; ++z)
    for (int i = 0; i <= 20; ++i) {
      x.push_back(i / 20.0);
      z1.push_back(z);
    }
  const std::vector<double> zeros(x.size(), 0.0);
  grid.add("trt", std::vector<double>(x.size(), 1.0));
  grid.add("X_1", x);
  grid.add("Z_1", z1);
  for (const char* name : {"Z_2", "Z_3", "Z_4", "Z_5"}) grid.add(name, zeros);
  const Eigen::MatrixXd g = fitted_trt_eff(fit, grid);

  for (int z = 0; z < 2; ++z) {
    int close = 0, covered = 0;
    double worst = 0.0;
    for (int i = 0; i <= 20; ++i) {
      const Eigen::Index c = z * 21 + i;
      const std::vector<double> draws(g.col(c).data(), g.col(c).data() + g.rows());
      const double truth = 2.0 * z + std::cos(2.0 * std::numbers::pi * (i / 20.0));
      const double est = mean_of(draws);
      const auto [lo, hi] = credint(draws, 0.95);
      worst = std::max(worst, std::fabs(est - truth));
      close += std::fabs(est - truth) <= 0.15;
      covered += lo <= truth && truth <= hi;
    }
    v.require(close == 21, "z1=" + std::to_string(z) + " mean within 0.15 at " + std::to_string(close) +
                               "/21 (max error " + fmt(worst) + ")");
    v.require(covered >= 18, "z1=" + std::to_string(z) + " band covers " + std::to_string(covered) + "/21");
  }
  return v;
}

Verdict subspace(const FitResult& fit) {
  Verdict v;
  const SubspaceReport r = effective_subspace(fit, 0.025);
  const ScaleInfo& s = fit.data.scale[0];
  const double tol = 1e-9 * (s.max - s.min);
  bool seen0 = false, seen1 = false;
  for (const auto& st : r.strata) {
    if (st.variable != "X_1" || st.levels.size() != 1 || st.levels[0].first != "Z_1") continue;
    const auto& iv = st.intervals;
    if (st.levels[0].second == 0) {
      seen0 = true;
      const bool shape = iv.size() == 2 && std::fabs(iv[0].lower - s.min) <= tol &&
                         std::fabs(iv[1].upper - s.max) <= tol;
      v.require(shape, "Z_1=0 has two intervals touching both ends");
      if (iv.size() == 2) {
        v.require(std::fabs(iv[0].upper - 0.23) <= 0.06, "Z_1=0 left end " + fmt(iv[0].upper));
        v.require(std::fabs(iv[1].lower - 0.77) <= 0.06, "Z_1=0 right start " + fmt(iv[1].lower));
      }
    } else {
      seen1 = true;
      const bool full = iv.size() == 1 && std::fabs(iv[0].lower - s.min) <= tol &&
                        std::fabs(iv[0].upper - s.max) <= tol;
      v.require(full, "Z_1=1 covers the full range");
    }
  }
  v.require(seen0 && seen1, "strata Z_1=0 and Z_1=1 reported");
  v.detail << "\"" << describe(r) << "\"; ";
  return v;
}

// Pearson chi-square against a pmf on {0..K}; tail bins merged until each
// expected count is at least 5.
double chi_square_p(const std::vector<int>& values, const std::vector<double>& pmf, std::string& note) {
  const double n = static_cast<double>(values.size());
  std::vector<double> observed(pmf.size(), 0.0);
  for (int k : values) observed.at(static_cast<std::size_t>(k)) += 1.0;
  std::vector<double> obs, expd;
  double tail_o = 0.0, tail_e = 0.0;
  for (std::size_t k = pmf.size(); k-- > 0;) {
    tail_o += observed[k];
    tail_e += n * pmf[k];
    if (tail_e >= 5.0) {
      obs.push_back(tail_o);
      expd.push_back(tail_e);
      tail_o = tail_e = 0.0;
    }
  }
  if (tail_e > 0.0) {
    obs.back() += tail_o;
    expd.back() += tail_e;
  }
  double stat = 0.0;
  for (std::size_t b = 0; b < obs.size(); ++b) stat += (obs[b] - expd[b]) * (obs[b] - expd[b]) / expd[b];
  const boost::math::chi_squared dist(static_cast<double>(obs.size() - 1));
  const double p = boost::math::cdf(boost::math::complement(dist, stat));
  note = "chi2 " + fmt(stat, 2) + " on " + std::to_string(obs.size() - 1) + " df, p " + fmt(p, 3);
  return p;
}

std::vector<double> truncated_poisson(double lambda, int upper) {
  std::vector<double> pmf;
  for (int k = 0; k <= upper; ++k) pmf.push_back(std::exp(truncated_poisson_log_pmf(k, lambda, upper)));
  return pmf;
}

// Thinned counts: the thinning interval is the integrated autocorrelation
// time, so the kept draws are close to independent.
std::vector<int> thinned(const std::vector<int>& counts, std::string& note) {
  ChainMatrix cm;
  cm.values.emplace_back(counts.begin(), counts.end());
  const double e = ess(cm).value_or(1.0);
  const auto step = static_cast<std::size_t>(std::ceil(static_cast<double>(counts.size()) / e));
  std::vector<int> out;
  for (std::size_t i = 0; i < counts.size(); i += std::max<std::size_t>(step, 1)) out.push_back(counts[i]);
  note = "ESS " + fmt(e, 0) + ", thin " + std::to_string(step) + ", " + std::to_string(out.size()) + " draws, ";
  return out;
}

Verdict prior_recovery() {
  Verdict v;
  const Dataset data = benchmark(200, 5);
  const TermCatalog catalog(kSpec, "trt");
  const PriorParams priors;
  McmcSpecs mcmc;
  mcmc.iter = 100000;
  mcmc.warmup = 1000;
  mcmc.sigma_v = 20.0;
  const SamplerOptions prior_only{true, true};

  mcmc.bma = false;
  const ChainResult knots = run_chain(data, catalog, mcmc, priors, 99, 0, prior_only);
  std::vector<int> k;
  for (const auto& s : knots.draws) k.push_back(static_cast<int>(s.terms[0]->knots.size()));
  std::string thin_note, test_note;
  const auto k_thin = thinned(k, thin_note);
  const double pk = chi_square_p(k_thin, truncated_poisson(priors.lambda_2, priors.k_max), test_note);
  v.require(pk > 0.01, "knot count vs TP(1, 9): " + thin_note + test_note);

  mcmc.bma = true;
  const ChainResult terms = run_chain(data, catalog, mcmc, priors, 99, 0, prior_only);
  std::vector<int> t;
  for (const auto& s : terms.draws) t.push_back(static_cast<int>(s.included_count()));
  const auto t_thin = thinned(t, thin_note);
  const double pt = chi_square_p(t_thin, truncated_poisson(priors.lambda_1, 12), test_note);
  v.require(pt > 0.01, "term count vs TP(0.1, 12): " + thin_note + test_note);
  return v;
}

Verdict conjugacy() {
  Verdict v;
  const Dataset data = benchmark(50, 17);
  const TermCatalog catalog(kSpec, "trt");
  ModelState state = initialize_state(data, catalog, PriorParams{}, true);
  state.intercept = 1.0;
  state.exposure_effect = 0.5;
  state.terms[1] = TermValue{{}, {2.0}};
  const Eigen::Map<const Eigen::VectorXd> y(data.outcome.data(), static_cast<Eigen::Index>(data.n()));
  const double ssr = (y - linear_predictor(state, catalog, data.covariates)).squaredNorm();
  const double a0 = 0.01, b0 = 0.01;
  const double shape = a0 + 0.5 * static_cast<double>(data.n());
  const double rate = b0 + 0.5 * ssr;
  const double mean_true = rate / (shape - 1.0);
  const double var_true = mean_true * mean_true / (shape - 2.0);

  Rng rng(kSeed);
  const int draws = 100000;
  double m = 0.0, m2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double s = gibbs_update_sigma(state, catalog, data, a0, b0, rng);
    m += s * s;
    m2 += s * s * s * s;
  }
  m /= draws;
  const double var = m2 / draws - m * m;
  v.require(std::fabs(m / mean_true - 1.0) <= 0.02, "mean ratio " + fmt(m / mean_true, 4));
  v.require(std::fabs(var / var_true - 1.0) <= 0.02, "variance ratio " + fmt(var / var_true, 4));
  return v;
}

double cox_de_boor(const std::vector<double>& t, std::size_t i, int p, double x) {
  if (p == 0) {
    if (t[i] <= x && x < t[i + 1]) return 1.0;
    return (x == t.back() && t[i] < x && t[i + 1] == x) ? 1.0 : 0.0;
  }
  double value = 0.0;
  const double left = t[i + p] - t[i];
  const double right = t[i + p + 1] - t[i + 1];
  if (left > 0.0) value += (x - t[i]) / left * cox_de_boor(t, i, p - 1, x);
  if (right > 0.0) value += (t[i + p + 1] - x) / right * cox_de_boor(t, i + 1, p - 1, x);
  return value;
}

Verdict bspline_oracle() {
  Verdict v;
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<int> degree(0, 3), count(0, 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, worst_sum = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    KnotConfig knots;
    knots.degree = degree(rng);
    const int k = count(rng);
    std::set<double> interior;
    while (static_cast<int>(interior.size()) < k) {
      const double loc = u(rng);
      if (loc > 0.0) interior.insert(loc);
    }
    knots.interior.assign(interior.begin(), interior.end());
    std::vector<double> x{0.0, 1.0};
    x.insert(x.end(), knots.interior.begin(), knots.interior.end());
    for (int i = 0; i < 40; ++i) x.push_back(u(rng));
    const Eigen::MatrixXd B = basis_matrix(x, knots);
    const auto t = knots.full_knots();
    for (std::size_t r = 0; r < x.size(); ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      worst_sum = std::max(worst_sum, std::fabs(B.row(row).sum() - 1.0));
      for (std::size_t j = 0; j < knots.basis_dim(); ++j)
        worst = std::max(worst, std::fabs(B(row, static_cast<Eigen::Index>(j)) - cox_de_boor(t, j, knots.degree, x[r])));
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1e", worst);
  v.require(worst <= 1e-10, std::string("max |basis - recursion| ") + buf + " over 1000 configurations");
  std::snprintf(buf, sizeof buf, "%.1e", worst_sum);
  v.require(worst_sum <= 1e-10, std::string("max |row sum - 1| ") + buf);
  return v;
}

Verdict diagnostics_oracle(const FitResult& fit) {
  Verdict v;
  const ChainMatrix hand{{{1, 2, 3, 4}, {1, 2, 3, 4}}};
  const double r = split_rhat(hand).value_or(0.0);
  v.require(std::fabs(r - std::sqrt(19.0 / 6.0)) <= 1e-6 && std::fabs(r - 1.7795) < 5e-5,
            "hand example R-hat " + fmt(r, 6));

  std::mt19937_64 rng(kSeed);
  std::normal_distribution<double> z;
  ChainMatrix iid;
  iid.values.emplace_back(10000);
  for (auto& x : iid.values[0]) x = z(rng);
  const double e = ess(iid).value_or(0.0);
  v.require(std::fabs(e / 10000.0 - 1.0) <= 0.10, "i.i.d. ESS " + fmt(e, 0) + " of 10000");

  const auto rh = rhats(fit);
  const double phi = rh.at("trt").value_or(99.0);
  v.require(phi <= 1.05, "R-hat(trt) " + fmt(phi));
  std::vector<std::size_t> rows(fit.data.n());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i + 1;
  std::shuffle(rows.begin(), rows.end(), rng);
  double worst = 0.0;
  for (std::size_t i = 0; i < 20; ++i)
    worst = std::max(worst, rh.at("gamma[" + std::to_string(rows[i]) + "]").value_or(99.0));
  v.require(worst <= 1.05, "max R-hat over 20 random gamma rows " + fmt(worst));
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism(const FitResult& fit, const Dataset& data) {
  Verdict v;
  FitOptions serial;
  serial.max_threads = 1;
  const FitResult again = run_rjmcmc(data, kSpec, McmcSpecs{}, PriorParams{}, kSeed, serial);
  const fs::path root = fs::temp_directory_path() / ("rjbma_acceptance_" + std::to_string(std::random_device{}()));
  save_fit(fit, root / "a");
  save_fit(again, root / "b");
  bool same = true;
  std::size_t bytes = 0;
  for (int c = 1; c <= fit.mcmc.chains; ++c) {
    const std::string name = "chain_" + std::to_string(c) + "_scalars.csv";
    const std::string a = slurp(root / "a" / name), b = slurp(root / "b" / name);
    same = same && !a.empty() && a == b;
    bytes += a.size();
  }
  fs::remove_all(root);
  v.require(same, "scalar CSVs of a repeated run (one thread vs one per chain) identical, " +
                      std::to_string(bytes) + " bytes");
  return v;
}

}  // namespace

int main() {
  const Dataset data = benchmark(1000, kSeed);
  const FitResult fit = run_rjmcmc(data, kSpec, McmcSpecs{}, PriorParams{}, kSeed);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"end-to-end recovery", [&] { return recovery(fit); }},
      {"blip-function accuracy", [&] { return blip_accuracy(fit); }},
      {"effective subspace", [&] { return subspace(fit); }},
      {"transdimensional prior recovery", prior_recovery},
      {"conjugacy oracle", conjugacy},
      {"B-spline oracle", bspline_oracle},
      {"diagnostics oracle", [&] { return diagnostics_oracle(fit); }},
      {"determinism", [&] { return determinism(fit, data); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    failures += !v.pass;
    std::printf("%s criterion %zu (%s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
