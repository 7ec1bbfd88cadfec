#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rjbma/data_model.hpp"
#include "rjbma/model.hpp"
#include "rjbma/rng.hpp"

namespace rjbma {

enum class MoveKind : std::size_t {
  knot_move,
  knot_birth,
  knot_death,
  term_birth,
  term_death,
  coef_walk,
  sigma_gibbs,
};
inline constexpr std::size_t kMoveKindCount = 7;

std::string_view to_string(MoveKind kind);
MoveKind move_kind_from_string(std::string_view name);

struct MoveOutcome {
  ModelState proposed_state;
  double log_acceptance_ratio = 0.0;  // may be -infinity
  bool accepted = false;
  MoveKind move_kind = MoveKind::coef_walk;
};

struct AcceptanceCounts {
  std::array<std::uint64_t, kMoveKindCount> attempted{};
  std::array<std::uint64_t, kMoveKindCount> accepted{};

  void record(MoveKind kind, bool ok) {
    ++attempted[static_cast<std::size_t>(kind)];
    if (ok) ++accepted[static_cast<std::size_t>(kind)];
  }
  double rate(MoveKind kind) const;

  friend bool operator==(const AcceptanceCounts&, const AcceptanceCounts&) = default;
};

struct ChainResult {
  std::vector<ModelState> draws;  // post-warmup, thinned
  std::vector<int> iterations;    // 1-based iteration of each stored draw
  AcceptanceCounts acceptance;
  std::uint64_t seed = 0;
  int chain_index = 0;

  friend bool operator==(const ChainResult&, const ChainResult&) = default;
};

struct FitResult {
  std::vector<ChainResult> chains;
  Dataset data;
  CandidateSpec candidates;
  TermCatalog catalog;
  McmcSpecs mcmc;
  PriorParams priors;
  std::uint64_t master_seed = 0;
  double wall_time_seconds = 0.0;

  std::size_t total_draws() const;
};

struct SamplerOptions {
  bool prior_only = false;  // likelihood held constant; used for prior-recovery checks
  bool fix_sigma = false;   // skip the Gibbs step for sigma_eps
};

// Starting point: intercept = mean(Y), exposure effect 0, sigma = sd(Y). With
// bma on every term starts excluded; with bma off every term starts included
// with zero coefficients and no interior knots.
ModelState initialize_state(const Dataset& data, const TermCatalog& catalog,
                            const PriorParams& priors, bool bma);

// Probabilities of the three knot sub-moves for a spline with k knots.
struct KnotMoveProbabilities {
  double birth = 0.0;
  double death = 0.0;
  double move = 0.0;
};
KnotMoveProbabilities knot_move_probabilities(std::size_t k, int k_max);

// Terms that a term birth may add / a term death may remove (strong heredity).
std::vector<std::size_t> addable_terms(const ModelState& state, const TermCatalog& catalog);
std::vector<std::size_t> removable_terms(const ModelState& state, const TermCatalog& catalog);

struct GaussianProposal {
  double mean;
  double sd;
};

struct MoveRecord {
  MoveKind kind;
  double log_ratio;
  bool accepted;
};

// One chain's sampler state. Keeps per-term design matrices, contributions and
// the residual vector in sync with the current ModelState so each proposal
// costs O(n * basis size).
class ChainKernel {
 public:
  static constexpr double kWalkScale = 2.38;

  ChainKernel(const Dataset& data, const TermCatalog& catalog, const PriorParams& priors,
              double sigma_v, ModelState initial, SamplerOptions options = {});

  const ModelState& state() const { return state_; }
  double residual_sum_of_squares() const { return residual_.squaredNorm(); }

  // Each update optionally copies the proposal it evaluated into `proposal`.
  MoveRecord update_knots(std::size_t term, Rng& rng, ModelState* proposal = nullptr);
  MoveRecord update_terms(Rng& rng, ModelState* proposal = nullptr);
  // Random-walk sweep over intercept, exposure effect and every active coefficient.
  void update_coefficients(Rng& rng, std::vector<MoveRecord>* records = nullptr,
                           std::vector<ModelState>* proposals = nullptr);
  MoveRecord update_sigma(Rng& rng);

  // Distribution of the free coefficient drawn by a knot birth at `location`:
  // its Gaussian conditional posterior given the current state. The birth
  // inserts the knot without changing the spline, then moves the spline along
  // the new basis direction orthogonal (over the data) to the old basis.
  GaussianProposal knot_birth_proposal(std::size_t term, double location) const;
  // A knot move is a death of the knot followed by a birth at `location`; the
  // coefficient drawn for the birth follows this distribution.
  GaussianProposal knot_move_proposal(std::size_t term, std::size_t knot_index,
                                      double location) const;

  // Deterministic log acceptance ratios for fully specified proposals. The
  // proposal is written to `proposed` when non-null. Nothing is applied.
  double knot_birth_log_ratio(std::size_t term, double location, double coefficient,
                              ModelState* proposed = nullptr) const;
  double knot_death_log_ratio(std::size_t term, std::size_t knot_index,
                              ModelState* proposed = nullptr) const;
  double knot_move_log_ratio(std::size_t term, std::size_t knot_index, double location,
                             double coefficient, ModelState* proposed = nullptr) const;
  double term_birth_log_ratio(std::size_t term, const TermValue& value,
                              ModelState* proposed = nullptr) const;
  double term_death_log_ratio(std::size_t term, ModelState* proposed = nullptr) const;

  // Recomputes contributions and residuals from the state (drops round-off).
  void refresh();

 private:
  struct TermCache {
    Eigen::MatrixXd design;        // basis (or z) with predictive rows scaled by exposure
    Eigen::VectorXd contribution;  // design * coefficients
  };
  struct Pending {
    std::size_t term;
    std::optional<TermValue> value;
    TermCache cache;
  };

  // Design columns of a term: centred basis (or z), predictive rows scaled by exposure.
  Eigen::MatrixXd design(std::size_t term, const KnotConfig& knots) const;
  TermCache build_cache(const TermValue& value, Eigen::MatrixXd design) const;
  double delta_log_likelihood(const Eigen::VectorXd& delta) const;
  double delta_log_likelihood(const Pending& p) const;
  Pending pending(std::size_t term, std::optional<TermValue> value) const;
  Pending pending(std::size_t term, std::optional<TermValue> value, Eigen::MatrixXd design) const;
  void apply(Pending&& p);
  struct Relocation {
    TermValue value;  // knots only; coefficients come from `forward`
    Eigen::MatrixXd design;
    double removed = 0.0;
    GaussianProposal removed_proposal{};
    GaussianProposal proposal{};
    double log_jacobian = 0.0;
    std::function<std::vector<double>(double)> forward;
  };
  Relocation relocation(std::size_t term, std::size_t knot_index, double location) const;
  struct WalkStep {
    double proposed;
    double log_ratio;
    bool accepted;
  };
  WalkStep walk(double& coefficient, const Eigen::Ref<const Eigen::VectorXd>& column,
                Eigen::VectorXd* contribution, Rng& rng);
  // Random-walk sd for a coefficient whose design column has squared norm
  // `column_norm2`: sqrt(sigma_v), capped at kWalkScale times the coefficient's
  // conditional posterior sd under a flat prior. Independent of the coefficient
  // itself, so the proposal stays symmetric.
  double walk_sd(double column_norm2) const;
  double log_term_proposal(const TermValue& value, const TermInfo& info) const;
  double term_move_log_probability(const ModelState& from, bool birth) const;
  TermValue draw_term_value(std::size_t term, Rng& rng) const;

  const Dataset* data_;
  const TermCatalog* catalog_;
  PriorParams priors_;
  double proposal_sd_;
  SamplerOptions options_;
  ModelState state_;
  Eigen::VectorXd y_;
  Eigen::VectorXd exposure_;
  std::vector<std::optional<TermCache>> caches_;
  Eigen::VectorXd residual_;
};

// Single-move wrappers over ChainKernel for callers holding a bare state.
MoveOutcome update_knots(const ModelState& state, std::size_t term, const Dataset& data,
                         const TermCatalog& catalog, const PriorParams& priors, double sigma_v,
                         Rng& rng, SamplerOptions options = {});
MoveOutcome update_terms(const ModelState& state, const Dataset& data, const TermCatalog& catalog,
                         const McmcSpecs& mcmc, const PriorParams& priors, Rng& rng,
                         SamplerOptions options = {});
std::vector<MoveOutcome> update_coefficients(const ModelState& state, const Dataset& data,
                                             const TermCatalog& catalog,
                                             const PriorParams& priors, double sigma_v, Rng& rng,
                                             SamplerOptions options = {});

ChainResult run_chain(const Dataset& data, const TermCatalog& catalog, const McmcSpecs& mcmc,
                      const PriorParams& priors, std::uint64_t seed, int chain_index = 0,
                      SamplerOptions options = {});

std::uint64_t chain_seed(std::uint64_t master_seed, int chain_index);

struct FitOptions {
  SamplerOptions sampler;
  unsigned max_threads = 0;  // 0: one thread per chain
};

FitResult run_rjmcmc(const Dataset& data, const CandidateSpec& candidates, const McmcSpecs& mcmc,
                     const PriorParams& priors, std::uint64_t master_seed,
                     FitOptions options = {});

}  // namespace rjbma
