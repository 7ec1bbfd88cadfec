#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace rjbma {

// Column-major numeric table with named columns, as read from CSV.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  bool has(const std::string& name) const;
  const std::vector<double>& column(const std::string& name) const;
  void add(std::string name, std::vector<double> values);
};

// Affine map between a continuous variable's observed range and [0, 1].
struct ScaleInfo {
  double min = 0.0;
  double max = 1.0;

  double rescale(double x) const { return (x - min) / (max - min); }
  double restore(double u) const { return min + u * (max - min); }

  friend bool operator==(const ScaleInfo&, const ScaleInfo&) = default;
};

// Names of the candidate terms. Predictive candidates must be a subset of the
// prognostic ones.
struct CandidateSpec {
  std::vector<std::string> spline_vars;
  std::vector<std::string> binary_vars;
  std::vector<std::string> interaction_vars;

  friend bool operator==(const CandidateSpec&, const CandidateSpec&) = default;
};

// Throws ValidationError if names collide, repeat, or interactions are not a
// subset of the prognostic candidates.
void validate_candidates(const CandidateSpec& spec, const std::string& outcome_name,
                         const std::string& exposure_name);

// Covariates on the internal scale: continuous columns live in [0, 1].
struct Covariates {
  std::vector<double> exposure;
  std::vector<std::vector<double>> continuous;  // one column per spline candidate
  std::vector<std::vector<double>> binary;      // one column per binary candidate

  std::size_t rows() const { return exposure.size(); }

  friend bool operator==(const Covariates&, const Covariates&) = default;
};

struct Dataset {
  std::string outcome_name;
  std::string exposure_name;
  std::vector<std::string> continuous_names;
  std::vector<std::string> binary_names;

  std::vector<double> outcome;
  Covariates covariates;
  std::vector<std::vector<double>> continuous_raw;  // original units
  std::vector<ScaleInfo> scale;

  std::size_t n() const { return outcome.size(); }
  std::size_t continuous_index(const std::string& name) const;
  std::size_t binary_index(const std::string& name) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Validates a raw table into a Dataset. Only the candidate columns are kept.
// Errors (ValidationError) name the offending column.
Dataset validate_dataset(const Table& raw, const std::string& outcome_name,
                         const std::string& exposure_name, const CandidateSpec& spec);

// Inverse of validate_dataset: the kept columns in original units.
Table to_table(const Dataset& data);

// New covariate rows mapped onto the training scale. Continuous values outside
// the training range are clamped to it; each clamp is reported in `warnings`.
struct NewData {
  Covariates covariates;
  std::vector<std::string> warnings;
};

// `raw` must contain the exposure column and every candidate column of `training`.
NewData prepare_newdata(const Table& raw, const Dataset& training);

struct McmcSpecs {
  int iter = 4000;
  int warmup = 2000;
  int thin = 1;
  int chains = 4;
  double sigma_v = 0.1;  // proposal variance
  bool bma = true;

  int stored_draws() const { return (iter - warmup) / thin; }

  friend bool operator==(const McmcSpecs&, const McmcSpecs&) = default;
};

struct PriorParams {
  double lambda_1 = 0.1;
  double lambda_2 = 1.0;
  double a_0 = 0.01;
  double b_0 = 0.01;
  int degree = 3;
  int k_max = 9;
  double w = 1.0;
  double sigma_B = std::sqrt(20.0);

  friend bool operator==(const PriorParams&, const PriorParams&) = default;
};

std::pair<McmcSpecs, PriorParams> default_specs();

void validate(const McmcSpecs& specs);
void validate(const PriorParams& priors);

}  // namespace rjbma
