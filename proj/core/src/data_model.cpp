#include "rjbma/data_model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "rjbma/errors.hpp"

namespace rjbma {

namespace {

bool is_binary(double v) { return v == 0.0 || v == 1.0; }

void require_finite(const std::vector<double>& col, const std::string& name) {
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (!std::isfinite(col[i])) {
      std::ostringstream msg;
      msg << "non-finite value in column '" << name << "' at row " << i + 1;
      throw ValidationError(msg.str());
    }
  }
}

void require_binary(const std::vector<double>& col, const std::string& name,
                    const char* what) {
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (!is_binary(col[i])) {
      std::ostringstream msg;
      msg << what << " '" << name << "': value " << col[i] << " at row " << i + 1
          << " is not 0/1";
      throw ValidationError(msg.str());
    }
  }
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name,
                     const char* what) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ValidationError(std::string("unknown ") + what + " '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

bool Table::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& Table::column(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ValidationError("missing column '" + name + "'");
  return columns[static_cast<std::size_t>(it - names.begin())];
}

void Table::add(std::string name, std::vector<double> values) {
  if (has(name)) throw ValidationError("duplicate column '" + name + "'");
  if (!columns.empty() && values.size() != rows())
    throw ValidationError("column '" + name + "' has wrong length");
  names.push_back(std::move(name));
  columns.push_back(std::move(values));
}

void validate_candidates(const CandidateSpec& spec, const std::string& outcome_name,
                         const std::string& exposure_name) {
  if (outcome_name == exposure_name)
    throw ValidationError("outcome and exposure must be different columns");
  std::set<std::string> prognostic;
  for (const auto* list : {&spec.spline_vars, &spec.binary_vars}) {
    for (const auto& name : *list) {
      if (name == outcome_name || name == exposure_name)
        throw ValidationError("candidate '" + name + "' is the outcome or exposure column");
      if (!prognostic.insert(name).second)
        throw ValidationError("candidate '" + name + "' listed more than once");
    }
  }
  std::set<std::string> seen;
  for (const auto& name : spec.interaction_vars) {
    if (!prognostic.contains(name))
      throw ValidationError("predictive candidate '" + name +
                            "' is not a prognostic candidate");
    if (!seen.insert(name).second)
      throw ValidationError("predictive candidate '" + name + "' listed more than once");
  }
}

std::size_t Dataset::continuous_index(const std::string& name) const {
  return index_of(continuous_names, name, "continuous variable");
}

std::size_t Dataset::binary_index(const std::string& name) const {
  return index_of(binary_names, name, "binary variable");
}

Dataset validate_dataset(const Table& raw, const std::string& outcome_name,
                         const std::string& exposure_name, const CandidateSpec& spec) {
  validate_candidates(spec, outcome_name, exposure_name);
  for (const auto& col : raw.columns) {
    if (col.size() != raw.rows()) throw ValidationError("columns have unequal lengths");
  }

  Dataset data;
  data.outcome_name = outcome_name;
  data.exposure_name = exposure_name;
  data.outcome = raw.column(outcome_name);
  if (data.outcome.size() < 2) throw ValidationError("need at least 2 rows, got " +
                                                     std::to_string(data.outcome.size()));
  require_finite(data.outcome, outcome_name);

  data.covariates.exposure = raw.column(exposure_name);
  require_binary(data.covariates.exposure, exposure_name, "non-binary exposure");

  for (const auto& name : spec.spline_vars) {
    const auto& col = raw.column(name);
    require_finite(col, name);
    auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    if (!(*hi > *lo))
      throw ValidationError("degenerate continuous variable '" + name + "' (constant column)");
    ScaleInfo s{*lo, *hi};
    std::vector<double> scaled(col.size());
    std::transform(col.begin(), col.end(), scaled.begin(),
                   [&](double x) { return std::clamp(s.rescale(x), 0.0, 1.0); });
    data.continuous_names.push_back(name);
    data.continuous_raw.push_back(col);
    data.covariates.continuous.push_back(std::move(scaled));
    data.scale.push_back(s);
  }
  for (const auto& name : spec.binary_vars) {
    const auto& col = raw.column(name);
    require_binary(col, name, "non-binary variable");
    data.binary_names.push_back(name);
    data.covariates.binary.push_back(col);
  }
  return data;
}

Table to_table(const Dataset& data) {
  Table t;
  t.add(data.outcome_name, data.outcome);
  t.add(data.exposure_name, data.covariates.exposure);
  for (std::size_t j = 0; j < data.continuous_names.size(); ++j)
    t.add(data.continuous_names[j], data.continuous_raw[j]);
  for (std::size_t j = 0; j < data.binary_names.size(); ++j)
    t.add(data.binary_names[j], data.covariates.binary[j]);
  return t;
}

NewData prepare_newdata(const Table& raw, const Dataset& training) {
  NewData out;
  out.covariates.exposure = raw.column(training.exposure_name);
  require_binary(out.covariates.exposure, training.exposure_name, "non-binary exposure");
  for (std::size_t j = 0; j < training.continuous_names.size(); ++j) {
    const auto& name = training.continuous_names[j];
    const auto& col = raw.column(name);
    require_finite(col, name);
    const ScaleInfo& s = training.scale[j];
    std::vector<double> scaled(col.size());
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < col.size(); ++i) {
      double u = s.rescale(col[i]);
      if (u < 0.0 || u > 1.0) ++clamped;
      scaled[i] = std::clamp(u, 0.0, 1.0);
    }
    if (clamped > 0) {
      std::ostringstream msg;
      msg << clamped << " value(s) of '" << name << "' outside the training range ["
          << s.min << ", " << s.max << "] were clamped";
      out.warnings.push_back(msg.str());
    }
    out.covariates.continuous.push_back(std::move(scaled));
  }
  for (const auto& name : training.binary_names) {
    const auto& col = raw.column(name);
    require_binary(col, name, "non-binary variable");
    out.covariates.binary.push_back(col);
  }
  return out;
}

std::pair<McmcSpecs, PriorParams> default_specs() { return {McmcSpecs{}, PriorParams{}}; }

void validate(const McmcSpecs& s) {
  if (s.iter <= 0) throw ValidationError("iter must be positive");
  if (s.warmup < 0 || s.warmup >= s.iter)
    throw ValidationError("warmup must satisfy 0 <= warmup < iter");
  if (s.thin < 1) throw ValidationError("thin must be >= 1");
  if (s.chains < 1) throw ValidationError("chains must be >= 1");
  if (!(s.sigma_v > 0.0) || !std::isfinite(s.sigma_v))
    throw ValidationError("sigma_v must be positive");
}

void validate(const PriorParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be positive");
  };
  positive(p.lambda_1, "lambda_1");
  positive(p.lambda_2, "lambda_2");
  positive(p.a_0, "a_0");
  positive(p.b_0, "b_0");
  positive(p.w, "w");
  positive(p.sigma_B, "sigma_B");
  if (p.degree < 0) throw ValidationError("degree must be >= 0");
  if (p.k_max < 0) throw ValidationError("k_max must be >= 0");
}

}  // namespace rjbma
