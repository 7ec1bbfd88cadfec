#include "rjbma/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "rjbma/errors.hpp"

namespace rjbma {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

constexpr std::array<std::string_view, kMoveKindCount> kMoveNames = {
    "knot_move", "knot_birth", "knot_death", "term_birth", "term_death", "coef_walk", "sigma_gibbs"};

bool accept(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) return true;
  return std::log(uniform01(rng)) < log_ratio;
}

std::size_t uniform_index(std::size_t size, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng);
}

int draw_truncated_poisson(double lambda, int k_upper, Rng& rng) {
  double u = uniform01(rng);
  for (int k = 0; k < k_upper; ++k) {
    u -= std::exp(truncated_poisson_log_pmf(k, lambda, k_upper));
    if (u < 0.0) return k;
  }
  return k_upper;
}

double log_or_neginf(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace

std::string_view to_string(MoveKind kind) { return kMoveNames[static_cast<std::size_t>(kind)]; }

MoveKind move_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kMoveKindCount; ++i)
    if (kMoveNames[i] == name) return static_cast<MoveKind>(i);
  throw ValidationError("unknown move kind '" + std::string(name) + "'");
}

double AcceptanceCounts::rate(MoveKind kind) const {
  const auto i = static_cast<std::size_t>(kind);
  return attempted[i] == 0 ? 0.0
                           : static_cast<double>(accepted[i]) / static_cast<double>(attempted[i]);
}

std::size_t FitResult::total_draws() const {
  std::size_t total = 0;
  for (const auto& c : chains) total += c.draws.size();
  return total;
}

ModelState initialize_state(const Dataset& data, const TermCatalog& catalog,
                            const PriorParams& priors, bool bma) {
  ModelState s;
  const double n = static_cast<double>(data.n());
  const double mean = std::accumulate(data.outcome.begin(), data.outcome.end(), 0.0) / n;
  double ss = 0.0;
  for (double y : data.outcome) ss += (y - mean) * (y - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  s.intercept = mean;
  s.exposure_effect = 0.0;
  s.sigma_eps = sd > 0.0 ? sd : 1.0;
  s.terms.assign(catalog.size(), std::nullopt);
  if (!bma) {
    for (std::size_t t = 0; t < catalog.size(); ++t) {
      TermValue v;
      if (catalog[t].kind == TermKind::binary) {
        v.coefficients = {0.0};
      } else {
        v.knots.degree = priors.degree;
        v.coefficients.assign(v.knots.basis_dim(), 0.0);
      }
      s.terms[t] = std::move(v);
    }
  }
  return s;
}

KnotMoveProbabilities knot_move_probabilities(std::size_t k, int k_max) {
  const auto kmax = static_cast<std::size_t>(k_max);
  if (kmax == 0) return {};
  if (k == 0) return {1.0, 0.0, 0.0};
  if (k >= kmax) return {0.0, 0.5, 0.5};
  return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
}

std::vector<std::size_t> addable_terms(const ModelState& state, const TermCatalog& catalog) {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < catalog.size(); ++t) {
    if (state.included(t)) continue;
    const auto& parent = catalog[t].parent;
    if (!parent || state.included(*parent)) out.push_back(t);
  }
  return out;
}

std::vector<std::size_t> removable_terms(const ModelState& state, const TermCatalog& catalog) {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < catalog.size(); ++t) {
    if (!state.included(t)) continue;
    const auto& child = catalog[t].child;
    if (!child || !state.included(*child)) out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ChainKernel

ChainKernel::ChainKernel(const Dataset& data, const TermCatalog& catalog,
                         const PriorParams& priors, double sigma_v, ModelState initial,
                         SamplerOptions options)
    : data_(&data),
      catalog_(&catalog),
      priors_(priors),
      proposal_sd_(std::sqrt(sigma_v)),
      options_(options),
      state_(std::move(initial)) {
  validate(state_, catalog, priors);
  const auto n = static_cast<Eigen::Index>(data.n());
  y_ = Eigen::Map<const Eigen::VectorXd>(data.outcome.data(), n);
  exposure_ = Eigen::Map<const Eigen::VectorXd>(data.covariates.exposure.data(), n);
  caches_.assign(catalog.size(), std::nullopt);
  for (std::size_t t = 0; t < catalog.size(); ++t)
    if (state_.terms[t]) caches_[t] = build_cache(*state_.terms[t], design(t, state_.terms[t]->knots));
  refresh();
}

Eigen::MatrixXd ChainKernel::design(std::size_t term, const KnotConfig& knots) const {
  const auto& info = (*catalog_)[term];
  const auto& x = data_->covariates;
  Eigen::MatrixXd out;
  if (info.kind == TermKind::binary) {
    out = Eigen::Map<const Eigen::VectorXd>(x.binary[info.column].data(),
                                            static_cast<Eigen::Index>(x.rows()));
  } else {
    out = centred_basis_matrix(x.continuous[info.column], knots);
  }
  if (info.role == TermRole::predictive) out = exposure_.asDiagonal() * out;
  return out;
}

ChainKernel::TermCache ChainKernel::build_cache(const TermValue& value, Eigen::MatrixXd design) const {
  TermCache cache{std::move(design), {}};
  const Eigen::Map<const Eigen::VectorXd> c(value.coefficients.data(),
                                            static_cast<Eigen::Index>(value.coefficients.size()));
  cache.contribution = cache.design * c;
  return cache;
}

void ChainKernel::refresh() {
  residual_ = y_ - Eigen::VectorXd::Constant(y_.size(), state_.intercept) -
              state_.exposure_effect * exposure_;
  for (std::size_t t = 0; t < caches_.size(); ++t) {
    if (!caches_[t]) continue;
    const auto& c = state_.terms[t]->coefficients;
    caches_[t]->contribution =
        caches_[t]->design *
        Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    residual_ -= caches_[t]->contribution;
  }
}

double ChainKernel::delta_log_likelihood(const Eigen::VectorXd& delta) const {
  if (options_.prior_only) return 0.0;
  // ||r - d||^2 - ||r||^2 = d.d - 2 r.d
  const double change = delta.squaredNorm() - 2.0 * residual_.dot(delta);
  return -0.5 * change / (state_.sigma_eps * state_.sigma_eps);
}

double ChainKernel::delta_log_likelihood(const Pending& p) const {
  Eigen::VectorXd delta = p.value ? p.cache.contribution : Eigen::VectorXd::Zero(y_.size());
  if (caches_[p.term]) delta -= caches_[p.term]->contribution;
  return delta_log_likelihood(delta);
}

ChainKernel::Pending ChainKernel::pending(std::size_t term, std::optional<TermValue> value) const {
  if (!value) return Pending{term, std::nullopt, {}};
  Eigen::MatrixXd d = design(term, value->knots);
  return pending(term, std::move(value), std::move(d));
}

ChainKernel::Pending ChainKernel::pending(std::size_t term, std::optional<TermValue> value,
                                          Eigen::MatrixXd design) const {
  Pending p{term, std::move(value), {}};
  p.cache = build_cache(*p.value, std::move(design));
  return p;
}

void ChainKernel::apply(Pending&& p) {
  if (caches_[p.term]) residual_ += caches_[p.term]->contribution;
  if (p.value) {
    residual_ -= p.cache.contribution;
    caches_[p.term] = std::move(p.cache);
  } else {
    caches_[p.term].reset();
  }
  state_.terms[p.term] = std::move(p.value);
}

double ChainKernel::log_term_proposal(const TermValue& value, const TermInfo& info) const {
  if (info.kind == TermKind::binary)
    return log_normal_density(value.coefficients[0], 0.0, proposal_sd_);
  const int k = static_cast<int>(value.knots.size());
  double lq = truncated_poisson_log_pmf(k, priors_.lambda_2, priors_.k_max) + std::lgamma(k + 1.0);
  for (std::size_t j = 1; j < value.coefficients.size(); ++j)
    lq += log_normal_density(value.coefficients[j], 0.0, proposal_sd_);
  return lq;
}

double ChainKernel::term_move_log_probability(const ModelState& from, bool birth) const {
  const auto addable = addable_terms(from, *catalog_).size();
  const auto removable = removable_terms(from, *catalog_).size();
  if (birth) {
    if (addable == 0) return kNegInf;
    const double p = removable > 0 ? 0.5 : 1.0;
    return std::log(p / static_cast<double>(addable));
  }
  if (removable == 0) return kNegInf;
  const double p = addable > 0 ? 0.5 : 1.0;
  return std::log(p / static_cast<double>(removable));
}

TermValue ChainKernel::draw_term_value(std::size_t term, Rng& rng) const {
  TermValue v;
  if ((*catalog_)[term].kind == TermKind::binary) {
    v.coefficients = {normal(rng, 0.0, proposal_sd_)};
    return v;
  }
  v.knots.degree = priors_.degree;
  const int k = draw_truncated_poisson(priors_.lambda_2, priors_.k_max, rng);
  for (;;) {
    v.knots.interior.resize(static_cast<std::size_t>(k));
    for (auto& loc : v.knots.interior) loc = uniform01(rng);
    std::sort(v.knots.interior.begin(), v.knots.interior.end());
    bool ok = true;
    double prev = 0.0;
    for (double loc : v.knots.interior) {
      ok = ok && loc > prev;
      prev = loc;
    }
    if (ok) break;
  }
  v.coefficients.assign(v.knots.basis_dim(), 0.0);
  for (std::size_t j = 1; j < v.coefficients.size(); ++j)
    v.coefficients[j] = normal(rng, 0.0, proposal_sd_);
  return v;
}

namespace {

// Knot birth in free coordinates (every coefficient but the anchored first):
// new = A old + u v, where A is function-preserving insertion and v is the
// part of unit vector e_j that is orthogonal to range(A) in the data metric of
// the larger design. The matching death is then a least-squares projection.
struct KnotJump {
  Eigen::MatrixXd a;
  Eigen::VectorXd v;
  Eigen::MatrixXd metric;
  Eigen::LDLT<Eigen::MatrixXd> normal;  // of A' G A
  double log_jacobian = 0.0;

  KnotJump(const KnotConfig& smaller, double location, std::size_t j,
           const Eigen::MatrixXd& larger_design) {
    const Eigen::MatrixXd full = knot_insertion_matrix(smaller, location);
    a = full.bottomRightCorner(full.rows() - 1, full.cols() - 1);
    const Eigen::MatrixXd x = larger_design.rightCols(a.rows());
    metric = x.transpose() * x;
    // Keeps the metric positive definite when a basis function sees no data.
    const double ridge = 1e-10 * (metric.trace() / static_cast<double>(metric.rows()) + 1.0);
    metric.diagonal().array() += ridge;
    normal.compute(a.transpose() * metric * a);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(a.rows());
    e(static_cast<Eigen::Index>(j) - 1) = 1.0;
    v = e - a * normal.solve(a.transpose() * metric * e);
    Eigen::MatrixXd m(a.rows(), a.rows());
    m << a, e;
    log_jacobian = std::log(std::abs(m.determinant()));
  }

  std::vector<double> forward(const std::vector<double>& old_c, double u) const {
    const Eigen::Map<const Eigen::VectorXd> c(old_c.data() + 1, a.cols());
    const Eigen::VectorXd next = a * c + u * v;
    std::vector<double> out{0.0};
    out.insert(out.end(), next.begin(), next.end());
    return out;
  }

  // Conditional posterior of u given the smaller state, whose residuals are
  // `residual`; with `prior_only` the likelihood part is dropped.
  GaussianProposal conditional(const Eigen::MatrixXd& larger_design, const Eigen::VectorXd& residual,
                               const std::vector<double>& old_c, double sigma, double sigma_B,
                               bool prior_only) const {
    const Eigen::Map<const Eigen::VectorXd> c(old_c.data() + 1, a.cols());
    const Eigen::VectorXd shift = a * c;
    double precision = v.squaredNorm() / (sigma_B * sigma_B);
    double linear = -v.dot(shift) / (sigma_B * sigma_B);
    if (!prior_only) {
      const Eigen::VectorXd xv = larger_design.rightCols(a.rows()) * v;
      precision += xv.squaredNorm() / (sigma * sigma);
      linear += xv.dot(residual) / (sigma * sigma);
    }
    return {linear / precision, 1.0 / std::sqrt(precision)};
  }

  Eigen::VectorXd column(const Eigen::MatrixXd& larger_design) const {
    return larger_design.rightCols(a.rows()) * v;
  }

  // Inverse of forward: returns the smaller coefficient vector and u.
  std::pair<std::vector<double>, double> backward(const std::vector<double>& new_c) const {
    const Eigen::Map<const Eigen::VectorXd> c(new_c.data() + 1, a.rows());
    const Eigen::VectorXd gv = metric * v;
    const double u = gv.dot(c) / gv.dot(v);
    const Eigen::VectorXd old = normal.solve(a.transpose() * metric * (c - u * v));
    std::vector<double> out{0.0};
    out.insert(out.end(), old.begin(), old.end());
    return {out, u};
  }
};

}  // namespace

GaussianProposal ChainKernel::knot_birth_proposal(std::size_t term, double location) const {
  const TermValue& current = *state_.terms.at(term);
  const auto& inner = current.knots.interior;
  const auto knot_index =
      static_cast<std::size_t>(std::lower_bound(inner.begin(), inner.end(), location) - inner.begin());
  const Eigen::MatrixXd larger = design(term, insert_knot(current.knots, location, priors_.k_max));
  const KnotJump jump(current.knots, location, birth_coefficient_index(knot_index, priors_.degree),
                      larger);
  return jump.conditional(larger, residual_, current.coefficients, state_.sigma_eps,
                          priors_.sigma_B, options_.prior_only);
}

double ChainKernel::knot_birth_log_ratio(std::size_t term, double location, double coefficient,
                                         ModelState* proposed) const {
  const auto& info = (*catalog_)[term];
  if (info.kind != TermKind::spline || !state_.terms[term])
    throw ValidationError("knot birth needs an included spline term");
  const TermValue& current = *state_.terms[term];
  const std::size_t k = current.knots.size();
  if (k >= static_cast<std::size_t>(priors_.k_max) || !(location > 0.0 && location < 1.0))
    return kNegInf;
  const auto& inner = current.knots.interior;
  const auto pos = std::lower_bound(inner.begin(), inner.end(), location);
  if (pos != inner.end() && *pos == location) return kNegInf;

  TermValue next;
  next.knots = insert_knot(current.knots, location, priors_.k_max);
  const auto knot_index = static_cast<std::size_t>(pos - inner.begin());
  Eigen::MatrixXd larger = design(term, next.knots);
  const KnotJump jump(current.knots, location, birth_coefficient_index(knot_index, priors_.degree),
                      larger);
  const GaussianProposal q = jump.conditional(larger, residual_, current.coefficients,
                                              state_.sigma_eps, priors_.sigma_B,
                                              options_.prior_only);
  next.coefficients = jump.forward(current.coefficients, coefficient);

  const auto fwd = knot_move_probabilities(k, priors_.k_max);
  const auto rev = knot_move_probabilities(k + 1, priors_.k_max);
  const Pending p = pending(term, next, std::move(larger));
  const double ratio = delta_log_likelihood(p) + log_term_prior(next, info, priors_) -
                       log_term_prior(current, info, priors_) -
                       log_normal_density(coefficient, q.mean, q.sd) + jump.log_jacobian +
                       log_or_neginf(rev.death / static_cast<double>(k + 1)) -
                       log_or_neginf(fwd.birth);
  if (proposed) {
    *proposed = state_;
    proposed->terms[term] = std::move(next);
  }
  return ratio;
}

double ChainKernel::knot_death_log_ratio(std::size_t term, std::size_t knot_index,
                                         ModelState* proposed) const {
  const auto& info = (*catalog_)[term];
  if (info.kind != TermKind::spline || !state_.terms[term])
    throw ValidationError("knot death needs an included spline term");
  const TermValue& current = *state_.terms[term];
  const std::size_t k = current.knots.size();
  if (knot_index >= k) return kNegInf;

  TermValue next;
  next.knots = remove_knot(current.knots, knot_index);
  const KnotJump jump(next.knots, current.knots.interior[knot_index],
                      birth_coefficient_index(knot_index, priors_.degree), caches_[term]->design);
  auto [coefficients, removed] = jump.backward(current.coefficients);
  const Eigen::VectorXd smaller_residual = residual_ + removed * jump.column(caches_[term]->design);
  const GaussianProposal q = jump.conditional(caches_[term]->design, smaller_residual, coefficients,
                                              state_.sigma_eps, priors_.sigma_B,
                                              options_.prior_only);
  next.coefficients = std::move(coefficients);

  const auto fwd = knot_move_probabilities(k, priors_.k_max);
  const auto rev = knot_move_probabilities(k - 1, priors_.k_max);
  const Pending p = pending(term, next);
  const double ratio = delta_log_likelihood(p) + log_term_prior(next, info, priors_) -
                       log_term_prior(current, info, priors_) +
                       log_normal_density(removed, q.mean, q.sd) - jump.log_jacobian +
                       log_or_neginf(rev.birth) -
                       log_or_neginf(fwd.death / static_cast<double>(k));
  if (proposed) {
    *proposed = state_;
    proposed->terms[term] = std::move(next);
  }
  return ratio;
}

namespace {

// Support of the knot relocation proposal: the gap between neighbours,
// intersected with the +/- w window around the current location.
std::pair<double, double> move_window(const std::vector<double>& inner, std::size_t i,
                                      double location, double w) {
  const double prev = i == 0 ? 0.0 : inner[i - 1];
  const double next = i + 1 == inner.size() ? 1.0 : inner[i + 1];
  return {std::max(prev, location - w), std::min(next, location + w)};
}

}  // namespace

ChainKernel::Relocation ChainKernel::relocation(std::size_t term, std::size_t knot_index,
                                                double location) const {
  const TermValue& current = *state_.terms[term];
  const Eigen::MatrixXd& old_design = caches_[term]->design;
  const std::size_t j = birth_coefficient_index(knot_index, priors_.degree);
  const KnotConfig smaller = remove_knot(current.knots, knot_index);
  const KnotJump from(smaller, current.knots.interior[knot_index], j, old_design);
  auto [smaller_c, removed] = from.backward(current.coefficients);
  const Eigen::VectorXd smaller_residual = residual_ + removed * from.column(old_design);

  Relocation r;
  r.value.knots = insert_knot(smaller, location, priors_.k_max);
  r.design = design(term, r.value.knots);
  const KnotJump to(smaller, location, j, r.design);
  r.removed = removed;
  r.removed_proposal = from.conditional(old_design, smaller_residual, smaller_c, state_.sigma_eps,
                                        priors_.sigma_B, options_.prior_only);
  r.proposal = to.conditional(r.design, smaller_residual, smaller_c, state_.sigma_eps,
                              priors_.sigma_B, options_.prior_only);
  r.log_jacobian = to.log_jacobian - from.log_jacobian;
  r.forward = [to, smaller_c](double u) { return to.forward(smaller_c, u); };
  return r;
}

GaussianProposal ChainKernel::knot_move_proposal(std::size_t term, std::size_t knot_index,
                                                 double location) const {
  return relocation(term, knot_index, location).proposal;
}

double ChainKernel::knot_move_log_ratio(std::size_t term, std::size_t knot_index, double location,
                                        double coefficient, ModelState* proposed) const {
  const auto& info = (*catalog_)[term];
  if (info.kind != TermKind::spline || !state_.terms[term])
    throw ValidationError("knot move needs an included spline term");
  const TermValue& current = *state_.terms[term];
  const auto& inner = current.knots.interior;
  if (knot_index >= inner.size()) return kNegInf;
  const auto [lo, hi] = move_window(inner, knot_index, inner[knot_index], priors_.w);
  if (!(location > lo && location < hi)) return kNegInf;
  const auto [rlo, rhi] = move_window(inner, knot_index, location, priors_.w);

  Relocation r = relocation(term, knot_index, location);
  TermValue next = std::move(r.value);
  next.coefficients = r.forward(coefficient);
  const Pending p = pending(term, next, std::move(r.design));
  // Knot count and the flat location prior are unchanged.
  const double ratio = delta_log_likelihood(p) + log_term_prior(next, info, priors_) -
                       log_term_prior(current, info, priors_) +
                       log_normal_density(r.removed, r.removed_proposal.mean, r.removed_proposal.sd) -
                       log_normal_density(coefficient, r.proposal.mean, r.proposal.sd) +
                       r.log_jacobian + std::log(hi - lo) - std::log(rhi - rlo);
  if (proposed) {
    *proposed = state_;
    proposed->terms[term] = std::move(next);
  }
  return ratio;
}

double ChainKernel::term_birth_log_ratio(std::size_t term, const TermValue& value,
                                         ModelState* proposed) const {
  const auto addable = addable_terms(state_, *catalog_);
  if (std::find(addable.begin(), addable.end(), term) == addable.end())
    throw ValidationError("term '" + (*catalog_)[term].name + "' cannot be added");
  const auto& info = (*catalog_)[term];
  ModelState next = state_;
  next.terms[term] = value;
  const std::size_t K = state_.included_count();
  const Pending p = pending(term, value);
  const double ratio = delta_log_likelihood(p) + log_model_prior(K + 1, *catalog_, priors_) -
                       log_model_prior(K, *catalog_, priors_) +
                       log_term_prior(value, info, priors_) - log_term_proposal(value, info) +
                       term_move_log_probability(next, false) -
                       term_move_log_probability(state_, true);
  if (proposed) *proposed = std::move(next);
  return ratio;
}

double ChainKernel::term_death_log_ratio(std::size_t term, ModelState* proposed) const {
  const auto removable = removable_terms(state_, *catalog_);
  if (std::find(removable.begin(), removable.end(), term) == removable.end())
    throw ValidationError("term '" + (*catalog_)[term].name + "' cannot be removed");
  const auto& info = (*catalog_)[term];
  const TermValue& value = *state_.terms[term];
  ModelState next = state_;
  next.terms[term].reset();
  const std::size_t K = state_.included_count();
  const Pending p = pending(term, std::nullopt);
  const double ratio = delta_log_likelihood(p) + log_model_prior(K - 1, *catalog_, priors_) -
                       log_model_prior(K, *catalog_, priors_) -
                       log_term_prior(value, info, priors_) + log_term_proposal(value, info) +
                       term_move_log_probability(next, true) -
                       term_move_log_probability(state_, false);
  if (proposed) *proposed = std::move(next);
  return ratio;
}

MoveRecord ChainKernel::update_knots(std::size_t term, Rng& rng, ModelState* proposal) {
  const auto& info = (*catalog_)[term];
  if (info.kind != TermKind::spline) throw ValidationError("'" + info.name + "' is not a spline term");
  if (!state_.terms[term]) throw ValidationError("'" + info.name + "' is not included");
  const TermValue& current = *state_.terms[term];
  const std::size_t k = current.knots.size();
  const auto probs = knot_move_probabilities(k, priors_.k_max);

  ModelState candidate;
  MoveRecord rec{MoveKind::knot_move, kNegInf, false};
  const double u = uniform01(rng);
  if (u < probs.birth) {
    rec.kind = MoveKind::knot_birth;
    const double location = uniform01(rng);
    const auto& inner = current.knots.interior;
    if (location > 0.0 && std::find(inner.begin(), inner.end(), location) == inner.end()) {
      const GaussianProposal q = knot_birth_proposal(term, location);
      rec.log_ratio = knot_birth_log_ratio(term, location, normal(rng, q.mean, q.sd), &candidate);
    }
  } else if (u < probs.birth + probs.death) {
    rec.kind = MoveKind::knot_death;
    rec.log_ratio = knot_death_log_ratio(term, uniform_index(k, rng), &candidate);
  } else if (probs.move > 0.0) {
    const std::size_t i = uniform_index(k, rng);
    const auto [lo, hi] = move_window(current.knots.interior, i, current.knots.interior[i], priors_.w);
    const double location = std::uniform_real_distribution<double>(lo, hi)(rng);
    if (location > lo) {
      const GaussianProposal q = knot_move_proposal(term, i, location);
      rec.log_ratio = knot_move_log_ratio(term, i, location, normal(rng, q.mean, q.sd), &candidate);
    }
  } else {
    return rec;  // k_max == 0: nothing to propose
  }
  if (std::isfinite(rec.log_ratio) && accept(rec.log_ratio, rng)) {
    rec.accepted = true;
    apply(pending(term, candidate.terms[term]));
  }
  if (proposal) *proposal = std::move(candidate);
  return rec;
}

MoveRecord ChainKernel::update_terms(Rng& rng, ModelState* proposal) {
  const auto addable = addable_terms(state_, *catalog_);
  const auto removable = removable_terms(state_, *catalog_);
  MoveRecord rec{MoveKind::term_birth, kNegInf, false};
  if (addable.empty() && removable.empty()) return rec;
  const bool birth =
      removable.empty() || (!addable.empty() && uniform01(rng) < 0.5);
  ModelState candidate;
  std::size_t term;
  if (birth) {
    term = addable[uniform_index(addable.size(), rng)];
    const TermValue value = draw_term_value(term, rng);
    rec.log_ratio = term_birth_log_ratio(term, value, &candidate);
  } else {
    rec.kind = MoveKind::term_death;
    term = removable[uniform_index(removable.size(), rng)];
    rec.log_ratio = term_death_log_ratio(term, &candidate);
  }
  if (std::isfinite(rec.log_ratio) && accept(rec.log_ratio, rng)) {
    rec.accepted = true;
    apply(pending(term, candidate.terms[term]));
  }
  if (proposal) *proposal = std::move(candidate);
  return rec;
}

double ChainKernel::walk_sd(double column_norm2) const {
  if (options_.prior_only || !(column_norm2 > 0.0)) return proposal_sd_;
  return std::min(proposal_sd_, kWalkScale * state_.sigma_eps / std::sqrt(column_norm2));
}

ChainKernel::WalkStep ChainKernel::walk(double& coefficient,
                                        const Eigen::Ref<const Eigen::VectorXd>& column,
                                        Eigen::VectorXd* contribution, Rng& rng) {
  const double norm2 = column.squaredNorm();
  const double step = normal(rng, 0.0, walk_sd(norm2));
  WalkStep out{coefficient + step, 0.0, false};
  double dll = 0.0;
  if (!options_.prior_only) {
    const double change = step * step * norm2 - 2.0 * step * residual_.dot(column);
    dll = -0.5 * change / (state_.sigma_eps * state_.sigma_eps);
  }
  out.log_ratio = dll + log_normal_density(out.proposed, 0.0, priors_.sigma_B) -
                  log_normal_density(coefficient, 0.0, priors_.sigma_B);
  out.accepted = accept(out.log_ratio, rng);
  if (out.accepted) {
    coefficient = out.proposed;
    residual_ -= step * column;
    if (contribution) *contribution += step * column;
  }
  return out;
}

void ChainKernel::update_coefficients(Rng& rng, std::vector<MoveRecord>* records,
                                      std::vector<ModelState>* proposals) {
  // `slot` locates the coefficient inside a ModelState so proposals can be rebuilt.
  auto log = [&](const WalkStep& step, auto&& slot) {
    if (records) records->push_back({MoveKind::coef_walk, step.log_ratio, step.accepted});
    if (proposals) {
      ModelState s = state_;
      slot(s) = step.proposed;
      proposals->push_back(std::move(s));
    }
  };
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(y_.size());
  log(walk(state_.intercept, ones, nullptr, rng),
      [](ModelState& s) -> double& { return s.intercept; });
  log(walk(state_.exposure_effect, exposure_, nullptr, rng),
      [](ModelState& s) -> double& { return s.exposure_effect; });
  for (std::size_t t = 0; t < catalog_->size(); ++t) {
    if (!state_.terms[t]) continue;
    auto& coefs = state_.terms[t]->coefficients;
    auto& cache = *caches_[t];
    const std::size_t first = (*catalog_)[t].kind == TermKind::spline ? 1 : 0;
    for (std::size_t j = first; j < coefs.size(); ++j) {
      log(walk(coefs[j], cache.design.col(static_cast<Eigen::Index>(j)), &cache.contribution, rng),
          [t, j](ModelState& s) -> double& { return s.terms[t]->coefficients[j]; });
    }
  }
}

MoveRecord ChainKernel::update_sigma(Rng& rng) {
  if (options_.prior_only || options_.fix_sigma) return {MoveKind::sigma_gibbs, 0.0, false};
  state_.sigma_eps = draw_sigma(residual_sum_of_squares(), data_->n(), priors_.a_0, priors_.b_0, rng);
  return {MoveKind::sigma_gibbs, 0.0, true};
}

// ---------------------------------------------------------------------------
// Free-function wrappers

MoveOutcome update_knots(const ModelState& state, std::size_t term, const Dataset& data,
                         const TermCatalog& catalog, const PriorParams& priors, double sigma_v,
                         Rng& rng, SamplerOptions options) {
  ChainKernel kernel(data, catalog, priors, sigma_v, state, options);
  MoveOutcome out;
  const auto rec = kernel.update_knots(term, rng, &out.proposed_state);
  out.log_acceptance_ratio = rec.log_ratio;
  out.accepted = rec.accepted;
  out.move_kind = rec.kind;
  return out;
}

MoveOutcome update_terms(const ModelState& state, const Dataset& data, const TermCatalog& catalog,
                         const McmcSpecs& mcmc, const PriorParams& priors, Rng& rng,
                         SamplerOptions options) {
  if (!mcmc.bma) throw ValidationError("term birth/death requires bma = true");
  ChainKernel kernel(data, catalog, priors, mcmc.sigma_v, state, options);
  MoveOutcome out;
  const auto rec = kernel.update_terms(rng, &out.proposed_state);
  out.log_acceptance_ratio = rec.log_ratio;
  out.accepted = rec.accepted;
  out.move_kind = rec.kind;
  return out;
}

std::vector<MoveOutcome> update_coefficients(const ModelState& state, const Dataset& data,
                                             const TermCatalog& catalog,
                                             const PriorParams& priors, double sigma_v, Rng& rng,
                                             SamplerOptions options) {
  ChainKernel kernel(data, catalog, priors, sigma_v, state, options);
  std::vector<MoveRecord> records;
  std::vector<ModelState> proposals;
  kernel.update_coefficients(rng, &records, &proposals);
  std::vector<MoveOutcome> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    out.push_back({std::move(proposals[i]), records[i].log_ratio, records[i].accepted,
                   records[i].kind});
  return out;
}

// ---------------------------------------------------------------------------
// Drivers

ChainResult run_chain(const Dataset& data, const TermCatalog& catalog, const McmcSpecs& mcmc,
                      const PriorParams& priors, std::uint64_t seed, int chain_index,
                      SamplerOptions options) {
  validate(mcmc);
  validate(priors);
  Rng rng(seed);
  ChainKernel kernel(data, catalog, priors, mcmc.sigma_v,
                     initialize_state(data, catalog, priors, mcmc.bma), options);
  ChainResult result;
  result.seed = seed;
  result.chain_index = chain_index;
  result.draws.reserve(static_cast<std::size_t>(mcmc.stored_draws()));
  result.iterations.reserve(static_cast<std::size_t>(mcmc.stored_draws()));

  MoveKind stage = MoveKind::knot_move;
  int it = 0;
  try {
    std::vector<MoveRecord> records;
    for (it = 1; it <= mcmc.iter; ++it) {
      if (priors.k_max > 0) {
        for (std::size_t t = 0; t < catalog.size(); ++t) {
          if (catalog[t].kind != TermKind::spline || !kernel.state().included(t)) continue;
          stage = MoveKind::knot_move;
          const auto rec = kernel.update_knots(t, rng);
          result.acceptance.record(rec.kind, rec.accepted);
        }
      }
      if (mcmc.bma && catalog.size() > 0) {
        stage = MoveKind::term_birth;
        const auto rec = kernel.update_terms(rng);
        result.acceptance.record(rec.kind, rec.accepted);
      }
      stage = MoveKind::coef_walk;
      records.clear();
      kernel.update_coefficients(rng, &records);
      for (const auto& rec : records) result.acceptance.record(rec.kind, rec.accepted);

      kernel.refresh();
      stage = MoveKind::sigma_gibbs;
      const auto srec = kernel.update_sigma(rng);
      if (srec.accepted) result.acceptance.record(srec.kind, true);

      validate(kernel.state(), catalog, priors);
      if (it > mcmc.warmup && (it - mcmc.warmup) % mcmc.thin == 0) {
        result.draws.push_back(kernel.state());
        result.iterations.push_back(it);
      }
    }
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "chain " << chain_index << " failed at iteration " << it << " during "
        << to_string(stage) << ": " << e.what();
    throw InvariantError(msg.str());
  }
  return result;
}

std::uint64_t chain_seed(std::uint64_t master_seed, int chain_index) {
  return splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(chain_index) + 1));
}

FitResult run_rjmcmc(const Dataset& data, const CandidateSpec& candidates, const McmcSpecs& mcmc,
                     const PriorParams& priors, std::uint64_t master_seed, FitOptions options) {
  validate(mcmc);
  validate(priors);
  validate_candidates(candidates, data.outcome_name, data.exposure_name);
  if (candidates.spline_vars != data.continuous_names || candidates.binary_vars != data.binary_names)
    throw ValidationError("candidate lists do not match the dataset's columns");

  FitResult fit;
  fit.data = data;
  fit.candidates = candidates;
  fit.catalog = TermCatalog(candidates, data.exposure_name);
  fit.mcmc = mcmc;
  fit.priors = priors;
  fit.master_seed = master_seed;
  fit.chains.resize(static_cast<std::size_t>(mcmc.chains));

  const auto start = std::chrono::steady_clock::now();
  const unsigned width = options.max_threads == 0 ? static_cast<unsigned>(mcmc.chains)
                                                  : options.max_threads;
  for (int first = 0; first < mcmc.chains; first += static_cast<int>(width)) {
    std::vector<std::future<ChainResult>> running;
    const int last = std::min(mcmc.chains, first + static_cast<int>(width));
    for (int c = first; c < last; ++c) {
      running.push_back(std::async(std::launch::async, [&, c] {
        return run_chain(fit.data, fit.catalog, mcmc, priors, chain_seed(master_seed, c), c,
                         options.sampler);
      }));
    }
    // Join every chain before reporting the first failure.
    std::exception_ptr failure;
    for (int c = first; c < last; ++c) {
      try {
        fit.chains[static_cast<std::size_t>(c)] = running[static_cast<std::size_t>(c - first)].get();
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  fit.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return fit;
}

}  // namespace rjbma
