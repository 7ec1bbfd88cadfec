#include "rjbma/bspline.hpp"

#include <algorithm>
#include <sstream>

#include "rjbma/errors.hpp"

namespace rjbma {

std::vector<double> KnotConfig::full_knots() const {
  const std::size_t pad = static_cast<std::size_t>(degree) + 1;
  std::vector<double> t;
  t.reserve(interior.size() + 2 * pad);
  t.insert(t.end(), pad, 0.0);
  t.insert(t.end(), interior.begin(), interior.end());
  t.insert(t.end(), pad, 1.0);
  return t;
}

void validate(const KnotConfig& knots, int k_max) {
  if (knots.degree < 0) throw ValidationError("spline degree must be >= 0");
  if (knots.interior.size() > static_cast<std::size_t>(k_max))
    throw ValidationError("knot count " + std::to_string(knots.interior.size()) +
                          " exceeds k_max " + std::to_string(k_max));
  double prev = 0.0;
  for (double k : knots.interior) {
    if (!(k > prev) || !(k < 1.0)) {
      std::ostringstream msg;
      msg << "interior knots must be strictly increasing inside (0, 1); got " << k;
      throw ValidationError(msg.str());
    }
    prev = k;
  }
}

std::size_t basis_nonzero(double x, const KnotConfig& knots, std::span<double> values,
                          std::span<double> left, std::span<double> right) {
  const auto p = static_cast<std::size_t>(knots.degree);
  const auto& inner = knots.interior;
  // Number of interior knots <= x; x == 1 falls in the last non-empty span.
  std::size_t m = x >= 1.0 ? inner.size()
                           : static_cast<std::size_t>(
                                 std::upper_bound(inner.begin(), inner.end(), x) - inner.begin());
  // Knot value at padded position j, without materialising the full vector.
  auto knot = [&](std::size_t j) {
    if (j <= p) return 0.0;
    if (j - p - 1 < inner.size()) return inner[j - p - 1];
    return 1.0;
  };
  const std::size_t span = m + p;

  values[0] = 1.0;
  for (std::size_t j = 1; j <= p; ++j) {
    left[j] = x - knot(span + 1 - j);
    right[j] = knot(span + j) - x;
    double saved = 0.0;
    for (std::size_t r = 0; r < j; ++r) {
      const double temp = values[r] / (right[r + 1] + left[j - r]);
      values[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    values[j] = saved;
  }
  return span - p;
}

Eigen::MatrixXd basis_matrix(std::span<const double> x, const KnotConfig& knots) {
  const std::size_t p1 = static_cast<std::size_t>(knots.degree) + 1;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()),
                                            static_cast<Eigen::Index>(knots.basis_dim()));
  std::vector<double> values(p1), left(p1), right(p1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) {
      std::ostringstream msg;
      msg << "spline argument " << x[i] << " outside [0, 1]";
      throw ValidationError(msg.str());
    }
    const std::size_t first = basis_nonzero(x[i], knots, values, left, right);
    for (std::size_t r = 0; r < p1; ++r)
      B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(first + r)) = values[r];
  }
  return B;
}

std::vector<double> basis_integrals(const KnotConfig& knots) {
  const auto t = knots.full_knots();
  const std::size_t p = static_cast<std::size_t>(knots.degree);
  std::vector<double> out(knots.basis_dim());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = (t[j + p + 1] - t[j]) / static_cast<double>(p + 1);
  return out;
}

Eigen::MatrixXd centred_basis_matrix(std::span<const double> x, const KnotConfig& knots) {
  Eigen::MatrixXd b = basis_matrix(x, knots);
  const auto integrals = basis_integrals(knots);
  for (Eigen::Index j = 0; j < b.cols(); ++j) b.col(j).array() -= integrals[static_cast<std::size_t>(j)];
  return b;
}

Eigen::VectorXd evaluate_spline(std::span<const double> x, const SplineTerm& term) {
  if (term.coefficients.size() != term.knots.basis_dim())
    throw ValidationError("spline '" + term.variable + "' has " +
                          std::to_string(term.coefficients.size()) +
                          " coefficients for a basis of dimension " +
                          std::to_string(term.knots.basis_dim()));
  const Eigen::Map<const Eigen::VectorXd> c(term.coefficients.data(),
                                            static_cast<Eigen::Index>(term.coefficients.size()));
  return basis_matrix(x, term.knots) * c;
}

double evaluate_spline(double x, const SplineTerm& term) {
  return evaluate_spline(std::span<const double>(&x, 1), term)(0);
}

KnotConfig insert_knot(const KnotConfig& knots, double location, int k_max) {
  if (knots.interior.size() >= static_cast<std::size_t>(k_max))
    throw ValidationError("cannot insert knot: already at k_max = " + std::to_string(k_max));
  if (!(location > 0.0 && location < 1.0))
    throw ValidationError("knot location must lie inside (0, 1)");
  auto pos = std::lower_bound(knots.interior.begin(), knots.interior.end(), location);
  if (pos != knots.interior.end() && *pos == location)
    throw ValidationError("knot already present at that location");
  KnotConfig out = knots;
  out.interior.insert(out.interior.begin() + (pos - knots.interior.begin()), location);
  return out;
}

KnotConfig remove_knot(const KnotConfig& knots, std::size_t index) {
  if (index >= knots.interior.size())
    throw ValidationError("knot index " + std::to_string(index) + " out of range (" +
                          std::to_string(knots.interior.size()) + " knots)");
  KnotConfig out = knots;
  out.interior.erase(out.interior.begin() + static_cast<std::ptrdiff_t>(index));
  return out;
}

Eigen::MatrixXd knot_insertion_matrix(const KnotConfig& knots, double location) {
  if (!(location > 0.0 && location < 1.0)) throw ValidationError("knot location must lie in (0, 1)");
  const auto t = knots.full_knots();
  const auto p = static_cast<std::size_t>(knots.degree);
  const std::size_t d = knots.basis_dim();
  // Span index l with t[l] <= location < t[l + 1].
  const std::size_t l =
      static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), location) - t.begin()) - 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d + 1), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i <= d; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (i + p <= l) {
      a(r, r) = 1.0;
    } else if (i <= l) {
      const double alpha = (location - t[i]) / (t[i + p] - t[i]);
      a(r, r - 1) = 1.0 - alpha;
      a(r, r) = alpha;
    } else {
      a(r, r - 1) = 1.0;
    }
  }
  return a;
}

std::size_t birth_coefficient_index(std::size_t knot_index, int degree) {
  return knot_index + (static_cast<std::size_t>(degree) + 2) / 2;
}

}  // namespace rjbma
