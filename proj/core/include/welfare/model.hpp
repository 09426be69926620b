#pragma once

// Welfare model for a single posted tax rate (or price) facing a binary
// purchase decision. Everything here is pure and thread-safe.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace welfare {

/// Raised for any argument outside the model's domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Weight on private welfare relative to public revenue, strictly inside (0,1).
/// Baselines that need the boundary value 0 (monopoly pricing) take a raw double.
class WelfareWeight {
 public:
  explicit WelfareWeight(double lambda);
  double value() const noexcept { return lambda_; }

 private:
  double lambda_;
};

/// 1 iff the individual buys at tax rate x, i.e. x <= v (ties buy).
inline int demand(double x, double v) noexcept { return x <= v ? 1 : 0; }

/// x * 1(x <= v) + lambda * max(v - x, 0).
double social_welfare(double x, double v, double lambda) noexcept;

/// Expected welfare when v ~ Uniform[0,1]: x(1-x) + lambda (1-x)^2 / 2.
double expected_welfare_uniform(double x, double lambda) noexcept;

/// Maximizer of expected_welfare_uniform: (1-lambda)/(2-lambda).
double uniform_optimal_policy(double lambda) noexcept;

struct Atom {
  double value;
  double mass;
};

/// Finitely supported valuation distribution. Atoms are kept sorted by value.
class DiscreteDistribution {
 public:
  /// Throws DomainError unless masses are nonnegative, values lie in [0,1]
  /// and the masses sum to 1 within 1e-12.
  explicit DiscreteDistribution(std::vector<Atom> atoms);

  std::span<const Atom> atoms() const noexcept { return atoms_; }

  /// P(v >= x).
  double survival(double x) const noexcept;

  /// E[max(v - x, 0)], i.e. the integral of demand over [x, 1].
  double integrated_demand(double x) const noexcept;

  /// x * P(v >= x) + lambda * E[max(v - x, 0)].
  double expected_welfare(double x, double lambda) const noexcept;

  /// Inverse-CDF draw from a uniform u in [0,1).
  double quantile(double u) const noexcept;

 private:
  std::vector<Atom> atoms_;
};

double expected_welfare_discrete(double x, const DiscreteDistribution& dist, double lambda) noexcept;

/// Checks social_welfare(x + eps) <= social_welfare(x) + eps. Always true.
bool one_sided_lipschitz_check(double x, double eps, double v, double lambda);

/// The K+1 evenly spaced candidate policies (k-1)/K, k = 1..K+1.
class PolicyGrid {
 public:
  explicit PolicyGrid(std::size_t K);

  std::size_t K() const noexcept { return K_; }
  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t k) const noexcept { return points_[k]; }
  std::span<const double> points() const noexcept { return points_; }

 private:
  std::size_t K_;
  std::vector<double> points_;
};

}  // namespace welfare
