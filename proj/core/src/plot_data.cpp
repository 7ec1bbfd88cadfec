#include "rjbma/plot_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "rjbma/csv.hpp"
#include "rjbma/errors.hpp"
#include "rjbma/posterior.hpp"

namespace rjbma {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& names,
             const char* what) {
  for (const auto& [name, value] : names)
    if (name == s) return value;
  std::string options;
  for (const auto& [name, value] : names) options += (options.empty() ? "" : ", ") + std::string(name);
  throw ValidationError("unknown " + std::string(what) + " '" + std::string(s) + "' (expected " +
                        options + ")");
}

// One covariate pattern per column of the draws matrices.
struct Patterns {
  Covariates x;
  std::vector<std::vector<PlotCell>> labels;  // per pattern
};

class Builder {
 public:
  Builder(const FitResult& fit, const PlotDataRequest& req) : fit_(fit), req_(req) {}

  PlotData run() {
    if (req_.sample_type == SampleType::estimand) return estimand();
    select();
    return req_.plot_type == PlotType::cred ? cred() : individual();
  }

 private:
  bool predictive_role() const { return req_.effect_type == EffectType::exposure_effect; }

  std::vector<std::string> selected(TermKind kind) const {
    const TermRole role = predictive_role() ? TermRole::predictive : TermRole::prognostic;
    std::vector<std::string> out;
    for (const auto& info : fit_.catalog.terms())
      if (info.kind == kind && info.role == role && pip(fit_, info.name) > req_.pip_cutoff)
        out.push_back(info.variable);
    return out;
  }

  void select() {
    const auto& data = fit_.data;
    variables_ = req_.variables;
    facets_ = req_.facet_by;
    if (variables_.empty()) {
      variables_ = selected(TermKind::spline);
      notes_.push_back(
          "Automatically setting variables to be continuous model variables with pip > pip_cutoff.");
    }
    if (facets_.empty()) {
      facets_ = selected(TermKind::binary);
      notes_.push_back("Automatically setting facet_by to be binary model variables with pip > pip_cutoff.");
    }
    for (const auto& v : variables_) {
      if (std::find(data.continuous_names.begin(), data.continuous_names.end(), v) ==
          data.continuous_names.end())
        throw ValidationError("unknown continuous variable '" + v + "'");
    }
    for (const auto& f : facets_) {
      if (std::find(data.binary_names.begin(), data.binary_names.end(), f) == data.binary_names.end())
        throw ValidationError("unknown binary variable '" + f + "'");
    }
    for (const auto& [name, value] : req_.fixed) {
      const bool known = name == data.exposure_name ||
                         std::count(data.continuous_names.begin(), data.continuous_names.end(), name) ||
                         std::count(data.binary_names.begin(), data.binary_names.end(), name);
      if (!known) throw ValidationError("unknown variable '" + name + "'");
      if (!std::isfinite(value)) throw ValidationError("value of '" + name + "' is not finite");
    }

    std::vector<std::string> defaulted;
    auto check = [&](const std::string& name) {
      const bool used = std::count(variables_.begin(), variables_.end(), name) ||
                        std::count(facets_.begin(), facets_.end(), name) || req_.fixed.count(name);
      if (!used) defaulted.push_back(name);
    };
    for (const auto& name : data.continuous_names) check(name);
    for (const auto& name : data.binary_names) check(name);
    if (!predictive_role() && !req_.fixed.count(data.exposure_name)) defaulted.push_back(data.exposure_name);
    if (!defaulted.empty()) {
      std::string list;
      for (const auto& name : defaulted) list += (list.empty() ? "" : ", ") + name;
      notes_.push_back("The following variables were not provided and will be set to 0: " + list);
    }
  }

  // Base pattern: fixed values or 0, rescaled and clamped to the training range.
  void base_row(Covariates& x) {
    const auto& data = fit_.data;
    auto value_of = [&](const std::string& name) {
      const auto it = req_.fixed.find(name);
      return it == req_.fixed.end() ? 0.0 : it->second;
    };
    const double e = value_of(data.exposure_name);
    if (e != 0.0 && e != 1.0) throw ValidationError("exposure value must be 0 or 1");
    x.exposure.push_back(e);
    x.continuous.resize(data.continuous_names.size());
    x.binary.resize(data.binary_names.size());
    for (std::size_t j = 0; j < data.continuous_names.size(); ++j) {
      const double u = data.scale[j].rescale(value_of(data.continuous_names[j]));
      const bool scanned = std::count(variables_.begin(), variables_.end(), data.continuous_names[j]) > 0;
      if (!scanned && (u < 0.0 || u > 1.0) && clamped_.insert(data.continuous_names[j]).second)
        notes_.push_back("'" + data.continuous_names[j] + "' was clamped to the training range");
      x.continuous[j].push_back(std::clamp(u, 0.0, 1.0));
    }
    for (std::size_t j = 0; j < data.binary_names.size(); ++j) {
      const double b = value_of(data.binary_names[j]);
      if (b != 0.0 && b != 1.0)
        throw ValidationError("value of '" + data.binary_names[j] + "' must be 0 or 1");
      x.binary[j].push_back(b);
    }
  }

  // Every 0/1 combination of the facets, first facet most significant.
  std::vector<std::vector<int>> facet_levels() const {
    std::vector<std::vector<int>> out;
    const std::size_t k = facets_.size();
    for (std::size_t code = 0; code < (std::size_t{1} << k); ++code) {
      std::vector<int> levels(k);
      for (std::size_t j = 0; j < k; ++j) levels[j] = static_cast<int>((code >> (k - 1 - j)) & 1U);
      out.push_back(levels);
    }
    return out;
  }

  void set_facets(Covariates& x, const std::vector<int>& levels) const {
    for (std::size_t j = 0; j < facets_.size(); ++j)
      x.binary[fit_.data.binary_index(facets_[j])].back() = levels[j];
  }

  Eigen::MatrixXd draws(const Covariates& x) {
    Rng rng(req_.seed);
    const bool effect = predictive_role();
    if (req_.sample_type == SampleType::fitted)
      return effect ? fitted_trt_eff(fit_, x) : fitted_draws(fit_, x);
    return effect ? predict_trt_eff(fit_, x, rng) : predict_draws(fit_, x, rng);
  }

  PlotData cred() {
    const auto& data = fit_.data;
    Patterns p;
    const auto levels = facet_levels();
    const std::size_t steps = static_cast<std::size_t>(std::floor(1.0 / req_.grid_resolution + 1e-9));
    auto add = [&](const std::string& variable, std::optional<double> u, const std::vector<int>& lv) {
      base_row(p.x);
      set_facets(p.x, lv);
      std::vector<PlotCell> label{variable};
      if (u) {
        const std::size_t j = data.continuous_index(variable);
        p.x.continuous[j].back() = *u;
        label.emplace_back(data.scale[j].restore(*u));
      } else {
        label.emplace_back(std::string());
      }
      for (int l : lv) label.emplace_back(static_cast<double>(l));
      p.labels.push_back(std::move(label));
    };
    for (const auto& v : variables_)
      for (const auto& lv : levels)
        for (std::size_t g = 0; g <= steps; ++g)
          add(v, std::min(1.0, static_cast<double>(g) * req_.grid_resolution), lv);
    if (variables_.empty())
      for (const auto& lv : levels) add("", std::nullopt, lv);

    const Eigen::MatrixXd m = draws(p.x);
    PlotData out;
    out.columns = {"variable", "x"};
    for (const auto& f : facets_) out.columns.push_back(f);
    for (const char* c : {"mean", "lower", "upper"}) out.columns.emplace_back(c);
    std::vector<double> col(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index d = 0; d < m.rows(); ++d) col[static_cast<std::size_t>(d)] = m(d, j);
      const auto [lo, hi] = credint(col, req_.level);
      auto row = p.labels[static_cast<std::size_t>(j)];
      row.emplace_back(m.col(j).mean());
      row.emplace_back(lo);
      row.emplace_back(hi);
      out.rows.push_back(std::move(row));
    }
    out.notes = notes_;
    return out;
  }

  // One pattern per combination of continuous quantiles (0.25, 0.75) and facet levels.
  PlotData individual() {
    const auto& data = fit_.data;
    std::vector<std::vector<double>> quantiles;  // per variable, rescaled
    for (const auto& v : variables_) {
      const auto& col = data.covariates.continuous[data.continuous_index(v)];
      std::vector<double> sorted(col.begin(), col.end());
      std::sort(sorted.begin(), sorted.end());
      quantiles.push_back({quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.75)});
    }
    Patterns p;
    const std::size_t combos = std::size_t{1} << variables_.size();
    for (std::size_t code = 0; code < combos; ++code) {
      for (const auto& lv : facet_levels()) {
        base_row(p.x);
        std::vector<PlotCell> label;
        for (std::size_t j = 0; j < variables_.size(); ++j) {
          const std::size_t bit = (code >> (variables_.size() - 1 - j)) & 1U;
          const std::size_t c = data.continuous_index(variables_[j]);
          p.x.continuous[c].back() = quantiles[j][bit];
          label.emplace_back(data.scale[c].restore(quantiles[j][bit]));
        }
        set_facets(p.x, lv);
        for (int l : lv) label.emplace_back(static_cast<double>(l));
        p.labels.push_back(std::move(label));
      }
    }

    const Eigen::MatrixXd m = draws(p.x);
    PlotData out;
    const bool trace = req_.plot_type == PlotType::trace;
    if (trace) out.columns = {"chain", "iteration"};
    for (const auto& v : variables_) out.columns.push_back(v);
    for (const auto& f : facets_) out.columns.push_back(f);
    out.columns.emplace_back("value");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      Eigen::Index d = 0;
      for (const auto& chain : fit_.chains) {
        for (std::size_t i = 0; i < chain.draws.size(); ++i, ++d) {
          std::vector<PlotCell> row;
          if (trace) {
            row.emplace_back(static_cast<double>(chain.chain_index + 1));
            row.emplace_back(static_cast<double>(chain.iterations[i]));
          }
          for (const auto& cell : p.labels[static_cast<std::size_t>(j)]) row.push_back(cell);
          row.emplace_back(m(d, j));
          out.rows.push_back(std::move(row));
        }
      }
    }
    out.notes = notes_;
    return out;
  }

  std::string parameter(const std::string& variable) const {
    const auto& data = fit_.data;
    if (variable == "intercept" || variable == "sigma" || variable == data.exposure_name) return variable;
    const auto info = fit_.catalog.find(variable);
    if (!info) throw ValidationError("unknown variable '" + variable + "'");
    const TermInfo& term = fit_.catalog[*info];
    if (term.kind == TermKind::spline)
      throw ValidationError("'" + variable + "' is a spline term; use fitted or predictive samples");
    if (term.role == TermRole::predictive) return term.name;
    if (!predictive_role()) return term.name;
    if (!term.child)
      throw ValidationError("'" + variable + "' is not a candidate interaction with " + data.exposure_name);
    return fit_.catalog[*term.child].name;
  }

  PlotData estimand() {
    std::vector<std::string> names;
    if (req_.variables.empty()) {
      names.push_back(predictive_role() ? fit_.data.exposure_name : std::string("intercept"));
      for (const auto& v : selected(TermKind::binary)) names.push_back(parameter(v));
      notes_.push_back(std::string("Automatically setting variables to be ") +
                       (predictive_role() ? "the exposure effect" : "the intercept") +
                       " and binary model variables with pip > pip_cutoff.");
    } else {
      for (const auto& v : req_.variables) names.push_back(parameter(v));
    }
    PlotData out;
    const bool trace = req_.plot_type == PlotType::trace;
    if (trace) out.columns = {"chain", "iteration"};
    std::vector<std::vector<double>> series;
    for (const auto& name : names) {
      out.columns.push_back(name);
      series.push_back(scalar_draws(fit_, name));
    }
    std::size_t d = 0;
    for (const auto& chain : fit_.chains) {
      for (std::size_t i = 0; i < chain.draws.size(); ++i, ++d) {
        std::vector<PlotCell> row;
        if (trace) {
          row.emplace_back(static_cast<double>(chain.chain_index + 1));
          row.emplace_back(static_cast<double>(chain.iterations[i]));
        }
        for (const auto& s : series) row.emplace_back(s[d]);
        out.rows.push_back(std::move(row));
      }
    }
    out.notes = notes_;
    return out;
  }

  const FitResult& fit_;
  const PlotDataRequest& req_;
  std::vector<std::string> variables_;
  std::vector<std::string> facets_;
  std::vector<std::string> notes_;
  std::set<std::string> clamped_;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

SampleType sample_type_from_string(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, SampleType>, 3> names{
      {{"estimand", SampleType::estimand}, {"fitted", SampleType::fitted}, {"predictive", SampleType::predictive}}};
  return parse_enum(s, names, "sample type");
}

PlotType plot_type_from_string(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, PlotType>, 3> names{
      {{"hist", PlotType::hist}, {"trace", PlotType::trace}, {"cred", PlotType::cred}}};
  return parse_enum(s, names, "plot type");
}

EffectType effect_type_from_string(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, EffectType>, 2> names{
      {{"outcome", EffectType::outcome}, {"exposure_effect", EffectType::exposure_effect}}};
  return parse_enum(s, names, "effect type");
}

void validate(const PlotDataRequest& req) {
  if (req.sample_type == SampleType::estimand && req.plot_type == PlotType::cred)
    throw ValidationError("estimand samples support hist and trace plots only");
  if (req.sample_type == SampleType::estimand && !req.facet_by.empty())
    throw ValidationError("facet_by does not apply to estimand samples");
  if (!(req.pip_cutoff >= 0.0 && req.pip_cutoff < 1.0)) throw ValidationError("pip_cutoff must lie in [0, 1)");
  if (!(req.level > 0.0 && req.level < 1.0)) throw ValidationError("level must lie in (0, 1)");
  if (!(req.grid_resolution > 0.0 && req.grid_resolution <= 1.0))
    throw ValidationError("grid resolution must lie in (0, 1]");
}

std::size_t PlotData::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ValidationError("no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

double PlotData::number(std::size_t row, const std::string& column) const {
  return std::get<double>(rows.at(row).at(column_index(column)));
}

PlotData plot_data(const FitResult& fit, const PlotDataRequest& req) {
  validate(req);
  if (fit.total_draws() == 0) throw ValidationError("fit has no stored draws");
  return Builder(fit, req).run();
}

std::string format_plot_csv(const PlotData& data) {
  std::string out;
  for (std::size_t j = 0; j < data.columns.size(); ++j) out += (j ? "," : "") + csv_field(data.columns[j]);
  out += '\n';
  for (const auto& row : data.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      if (const double* v = std::get_if<double>(&row[j]))
        out += format_double(*v);
      else
        out += csv_field(std::get<std::string>(row[j]));
    }
    out += '\n';
  }
  return out;
}

void emit_plot_data(const FitResult& fit, const PlotDataRequest& req,
                    const std::filesystem::path& out_path, std::vector<std::string>* notes) {
  const PlotData data = plot_data(fit, req);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + out_path.string() + "'");
  out << format_plot_csv(data);
  if (!out) throw IoError("failed writing '" + out_path.string() + "'");
  if (notes) *notes = data.notes;
}

}  // namespace rjbma
