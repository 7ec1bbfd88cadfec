#include "rjbma/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rjbma/errors.hpp"

namespace rjbma {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("quantile probability must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

std::vector<const ModelState*> pooled_draws(const FitResult& fit) {
  std::vector<const ModelState*> out;
  out.reserve(fit.total_draws());
  for (const auto& chain : fit.chains)
    for (const auto& s : chain.draws) out.push_back(&s);
  return out;
}

namespace {

// Reads one named scalar out of a state; excluded binary terms read as 0.
struct ScalarReader {
  enum class Kind { intercept, exposure, sigma, term } kind;
  std::size_t term = 0;

  double operator()(const ModelState& s) const {
    switch (kind) {
      case Kind::intercept: return s.intercept;
      case Kind::exposure: return s.exposure_effect;
      case Kind::sigma: return s.sigma_eps;
      case Kind::term: return s.terms[term] ? s.terms[term]->coefficients[0] : 0.0;
    }
    return 0.0;
  }
};

std::optional<ScalarReader> find_scalar(const FitResult& fit, const std::string& name) {
  using K = ScalarReader::Kind;
  if (name == "intercept") return ScalarReader{K::intercept};
  if (name == fit.data.exposure_name) return ScalarReader{K::exposure};
  if (name == "sigma") return ScalarReader{K::sigma};
  const auto t = fit.catalog.find(name);
  if (t && fit.catalog[*t].kind == TermKind::binary) return ScalarReader{K::term, *t};
  return std::nullopt;
}

ScalarReader scalar_reader(const FitResult& fit, const std::string& name) {
  const auto r = find_scalar(fit, name);
  if (!r) {
    const auto t = fit.catalog.find(name);
    if (t) throw ValidationError("'" + name + "' is a spline term and has no scalar draws");
    throw ValidationError("unknown parameter '" + name + "'");
  }
  return *r;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void require_draws(const FitResult& fit) {
  if (fit.total_draws() == 0) throw ValidationError("fit has no stored draws");
}

}  // namespace

bool is_scalar_name(const FitResult& fit, const std::string& name) {
  return find_scalar(fit, name).has_value();
}

std::vector<double> scalar_draws(const FitResult& fit, const std::string& name) {
  const ScalarReader read = scalar_reader(fit, name);
  std::vector<double> out;
  out.reserve(fit.total_draws());
  for (const auto& chain : fit.chains)
    for (const auto& s : chain.draws) out.push_back(read(s));
  return out;
}

ChainMatrix scalar_chains(const FitResult& fit, const std::string& name) {
  const ScalarReader read = scalar_reader(fit, name);
  ChainMatrix cm;
  for (const auto& chain : fit.chains) {
    auto& row = cm.values.emplace_back();
    row.reserve(chain.draws.size());
    for (const auto& s : chain.draws) row.push_back(read(s));
  }
  return cm;
}

double pip(const FitResult& fit, const std::string& term) {
  const std::size_t t = fit.catalog.index(term);
  require_draws(fit);
  std::size_t included = 0;
  for (const ModelState* s : pooled_draws(fit)) included += s->included(t) ? 1 : 0;
  return static_cast<double>(included) / static_cast<double>(fit.total_draws());
}

std::map<std::string, double> coef(const FitResult& fit) {
  require_draws(fit);
  std::map<std::string, double> out;
  out["intercept"] = mean_of(scalar_draws(fit, "intercept"));
  out[fit.data.exposure_name] = mean_of(scalar_draws(fit, fit.data.exposure_name));
  for (const auto& info : fit.catalog.terms())
    if (info.kind == TermKind::binary) out[info.name] = mean_of(scalar_draws(fit, info.name));
  return out;
}

std::pair<double, double> credint(std::span<const double> draws, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("credible level must lie in (0, 1)");
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile_sorted(sorted, tail), quantile_sorted(sorted, 1.0 - tail)};
}

std::pair<double, double> credint(const FitResult& fit, const std::string& name, double level) {
  require_draws(fit);
  return credint(scalar_draws(fit, name), level);
}

namespace {

template <typename RowFn>
Eigen::MatrixXd per_draw(const FitResult& fit, const Covariates& x, RowFn fn) {
  const auto draws = pooled_draws(fit);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(draws.size()), static_cast<Eigen::Index>(x.rows()));
  for (std::size_t d = 0; d < draws.size(); ++d)
    out.row(static_cast<Eigen::Index>(d)) = fn(*draws[d]).transpose();
  return out;
}

void check_covariates(const FitResult& fit, const Covariates& x) {
  if (x.continuous.size() != fit.data.continuous_names.size() ||
      x.binary.size() != fit.data.binary_names.size())
    throw ValidationError("new data does not supply every candidate variable");
  for (const auto& c : x.continuous)
    if (c.size() != x.rows()) throw ValidationError("new data columns differ in length");
  for (const auto& c : x.binary)
    if (c.size() != x.rows()) throw ValidationError("new data columns differ in length");
}

}  // namespace

Eigen::MatrixXd fitted_draws(const FitResult& fit, const Covariates& x) {
  check_covariates(fit, x);
  return per_draw(fit, x, [&](const ModelState& s) { return linear_predictor(s, fit.catalog, x); });
}

Eigen::MatrixXd predict_draws(const FitResult& fit, const Covariates& x, Rng& rng) {
  Eigen::MatrixXd out = fitted_draws(fit, x);
  const auto draws = pooled_draws(fit);
  for (Eigen::Index d = 0; d < out.rows(); ++d) {
    const double sigma = draws[static_cast<std::size_t>(d)]->sigma_eps;
    for (Eigen::Index i = 0; i < out.cols(); ++i) out(d, i) += normal(rng, 0.0, sigma);
  }
  return out;
}

Eigen::MatrixXd fitted_trt_eff(const FitResult& fit, const Covariates& x) {
  check_covariates(fit, x);
  return per_draw(fit, x, [&](const ModelState& s) { return blip(s, fit.catalog, x); });
}

Eigen::MatrixXd predict_trt_eff(const FitResult& fit, const Covariates& x, Rng& rng) {
  Eigen::MatrixXd out = fitted_trt_eff(fit, x);
  const auto draws = pooled_draws(fit);
  for (Eigen::Index d = 0; d < out.rows(); ++d) {
    const double sd = std::sqrt(2.0) * draws[static_cast<std::size_t>(d)]->sigma_eps;
    for (Eigen::Index i = 0; i < out.cols(); ++i) out(d, i) += normal(rng, 0.0, sd);
  }
  return out;
}

Eigen::MatrixXd fitted_draws(const FitResult& fit, const Table& newdata) {
  return fitted_draws(fit, prepare_newdata(newdata, fit.data).covariates);
}

Eigen::MatrixXd fitted_trt_eff(const FitResult& fit, const Table& newdata) {
  return fitted_trt_eff(fit, prepare_newdata(newdata, fit.data).covariates);
}

namespace {

std::vector<double> column_quantiles(const Eigen::MatrixXd& m, double p) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  std::vector<double> col(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index d = 0; d < m.rows(); ++d) col[static_cast<std::size_t>(d)] = m(d, j);
    std::sort(col.begin(), col.end());
    out[static_cast<std::size_t>(j)] = quantile_sorted(col, p);
  }
  return out;
}

std::string format_endpoint(double v) {
  double r = std::round(v * 100.0) / 100.0;
  if (r == 0.0) r = 0.0;  // no "-0"
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << r;
  std::string s = os.str();
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

SubspaceReport effective_subspace(const FitResult& fit, double alpha, double grid_resolution,
                                  double pip_cutoff) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (!(grid_resolution > 0.0 && grid_resolution <= 1.0))
    throw ValidationError("grid resolution must lie in (0, 1]");
  require_draws(fit);

  SubspaceReport report;
  report.alpha = alpha;
  report.quantiles = column_quantiles(fitted_trt_eff(fit, fit.data.covariates), alpha);
  for (double q : report.quantiles) report.in_subspace.push_back(q > 0.0);

  std::vector<std::size_t> binaries, continuous;  // catalog indices of selected predictive terms
  for (std::size_t t = 0; t < fit.catalog.size(); ++t) {
    const auto& info = fit.catalog[t];
    if (info.role != TermRole::predictive || pip(fit, info.name) <= pip_cutoff) continue;
    (info.kind == TermKind::binary ? binaries : continuous).push_back(t);
  }

  Covariates base;
  base.exposure = {1.0};
  for (const auto& col : fit.data.covariates.continuous) base.continuous.push_back({quantile(col, 0.5)});
  base.binary.assign(fit.data.binary_names.size(), {0.0});

  const std::size_t combos = std::size_t{1} << binaries.size();
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / grid_resolution));
  for (std::size_t combo = 0; combo < combos; ++combo) {
    Covariates row = base;
    std::vector<std::pair<std::string, int>> levels;
    for (std::size_t b = 0; b < binaries.size(); ++b) {
      const int level = static_cast<int>((combo >> (binaries.size() - 1 - b)) & 1U);
      const auto& info = fit.catalog[binaries[b]];
      row.binary[info.column][0] = level;
      levels.emplace_back(info.variable, level);
    }
    if (continuous.empty()) {
      SubspaceStratum s;
      s.levels = levels;
      s.positive = column_quantiles(fitted_trt_eff(fit, row), alpha)[0] > 0.0;
      report.strata.push_back(std::move(s));
      continue;
    }
    for (std::size_t t : continuous) {
      const auto& info = fit.catalog[t];
      const ScaleInfo& scale = fit.data.scale[info.column];
      Covariates grid = row;
      grid.exposure.assign(steps + 1, 1.0);
      for (auto& col : grid.continuous) col.assign(steps + 1, col[0]);
      for (auto& col : grid.binary) col.assign(steps + 1, col[0]);
      for (std::size_t g = 0; g <= steps; ++g)
        grid.continuous[info.column][g] = std::min(1.0, static_cast<double>(g) * grid_resolution);

      SubspaceStratum s;
      s.levels = levels;
      s.variable = info.variable;
      s.grid_quantiles = column_quantiles(fitted_trt_eff(fit, grid), alpha);
      for (double u : grid.continuous[info.column]) s.grid.push_back(scale.restore(u));
      std::optional<std::size_t> start;
      for (std::size_t g = 0; g <= steps + 1; ++g) {
        const bool in = g <= steps && s.grid_quantiles[g] > 0.0;
        if (in && !start) start = g;
        if (!in && start) {
          s.intervals.push_back({s.grid[*start], s.grid[g - 1]});
          start.reset();
        }
      }
      report.strata.push_back(std::move(s));
    }
  }
  return report;
}

std::string describe(const SubspaceReport& report) {
  std::ostringstream os;
  std::optional<std::vector<std::pair<std::string, int>>> open_levels;
  bool first_group = true;
  for (const auto& s : report.strata) {
    const bool same_group = open_levels && *open_levels == s.levels;
    if (!same_group) {
      if (!first_group) os << ", ";
      first_group = false;
      for (std::size_t i = 0; i < s.levels.size(); ++i)
        os << (i ? ", " : "") << s.levels[i].first << " = " << s.levels[i].second;
      if (!s.levels.empty()) os << ": ";
      open_levels = s.levels;
    } else {
      os << "; ";
    }
    if (s.variable.empty()) {
      os << (s.positive ? "all" : "none");
      continue;
    }
    if (s.intervals.empty()) {
      os << s.variable << " in none";
      continue;
    }
    os << s.variable << " in ";
    for (std::size_t i = 0; i < s.intervals.size(); ++i)
      os << (i ? " or " : "") << "[" << format_endpoint(s.intervals[i].lower) << ", "
         << format_endpoint(s.intervals[i].upper) << "]";
  }
  return os.str();
}

namespace {

SummaryRow summarize(const FitResult& fit, const std::string& name, double pip_value,
                     double diagnostics_pip) {
  const auto draws = scalar_draws(fit, name);
  SummaryRow row;
  row.name = name;
  row.estimate = mean_of(draws);
  row.est_error = sd_of(draws, row.estimate);
  std::tie(row.lower95, row.upper95) = credint(draws, 0.95);
  row.pip = pip_value;
  if (pip_value >= diagnostics_pip && fit.chains.front().draws.size() >= 4) {
    const ChainMatrix cm = scalar_chains(fit, name);
    row.eff_sample = ess(cm);
    row.rhat = split_rhat(cm);
  }
  return row;
}

}  // namespace

SummaryTable summary_table(const FitResult& fit, double diagnostics_pip) {
  require_draws(fit);
  SummaryTable table;
  table.rows.push_back(summarize(fit, "intercept", 1.0, diagnostics_pip));
  table.rows.push_back(summarize(fit, fit.data.exposure_name, 1.0, diagnostics_pip));
  std::vector<SummaryRow> binary;
  for (const auto& info : fit.catalog.terms()) {
    if (info.kind == TermKind::binary)
      binary.push_back(summarize(fit, info.name, pip(fit, info.name), diagnostics_pip));
    else
      table.spline_pips.emplace_back(info.name, pip(fit, info.name));
  }
  std::stable_sort(binary.begin(), binary.end(),
                   [](const SummaryRow& a, const SummaryRow& b) { return a.pip > b.pip; });
  table.rows.insert(table.rows.end(), binary.begin(), binary.end());
  table.sigma = summarize(fit, "sigma", 1.0, diagnostics_pip);
  return table;
}

}  // namespace rjbma
