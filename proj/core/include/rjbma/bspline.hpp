#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rjbma {

// Interior knots of a clamped B-spline on [0, 1]. The boundary knots 0 and 1
// are implicit, each repeated degree + 1 times.
struct KnotConfig {
  std::vector<double> interior;  // strictly increasing, inside (0, 1)
  int degree = 3;

  std::size_t size() const { return interior.size(); }
  std::size_t basis_dim() const { return interior.size() + static_cast<std::size_t>(degree) + 1; }

  // Boundary-padded knot vector, length size() + 2 * (degree + 1).
  std::vector<double> full_knots() const;

  friend bool operator==(const KnotConfig&, const KnotConfig&) = default;
};

// Throws ValidationError unless knots are strictly increasing in (0, 1) and
// at most k_max of them.
void validate(const KnotConfig& knots, int k_max);

struct SplineTerm {
  std::string variable;
  KnotConfig knots;
  std::vector<double> coefficients;  // length knots.basis_dim()

  friend bool operator==(const SplineTerm&, const SplineTerm&) = default;
};

// Writes the degree + 1 possibly-nonzero basis values at x into `values` and
// returns the index of the first of them. `values` must hold degree + 1 entries
// and `left`/`right` are scratch of the same size. x must lie in [0, 1].
std::size_t basis_nonzero(double x, const KnotConfig& knots, std::span<double> values,
                          std::span<double> left, std::span<double> right);

// Dense n x basis_dim matrix; throws ValidationError for x outside [0, 1].
Eigen::MatrixXd basis_matrix(std::span<const double> x, const KnotConfig& knots);

// Integral over [0, 1] of each basis function: (t[j+degree+1] - t[j]) / (degree + 1).
std::vector<double> basis_integrals(const KnotConfig& knots);

// basis_matrix with each column's integral subtracted, so every spline in the
// span integrates to 0 over [0, 1].
Eigen::MatrixXd centred_basis_matrix(std::span<const double> x, const KnotConfig& knots);

// basis_matrix(x, term.knots) * term.coefficients.
Eigen::VectorXd evaluate_spline(std::span<const double> x, const SplineTerm& term);
double evaluate_spline(double x, const SplineTerm& term);

// Returns a copy with `location` added. Throws ValidationError if the location
// is outside (0, 1), already present, or the config already holds k_max knots.
KnotConfig insert_knot(const KnotConfig& knots, double location, int k_max);

// Returns a copy with interior knot `index` removed.
KnotConfig remove_knot(const KnotConfig& knots, std::size_t index);

// Boehm knot insertion: the (basis_dim + 1) x basis_dim matrix A such that the
// spline with coefficients A * c on insert_knot(knots, location) equals the
// spline with coefficients c on `knots`. `location` must lie in (0, 1).
Eigen::MatrixXd knot_insertion_matrix(const KnotConfig& knots, double location);

// Where a knot birth places the new coefficient: for the knot that sits at
// interior index `knot_index` after insertion, a basis function whose support
// contains it. Always >= 1, so the anchored first coefficient is untouched.
std::size_t birth_coefficient_index(std::size_t knot_index, int degree);

}  // namespace rjbma
