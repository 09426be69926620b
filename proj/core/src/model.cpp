#include "welfare/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace welfare {

WelfareWeight::WelfareWeight(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw DomainError("lambda must lie in (0,1), got " + std::to_string(lambda));
  }
}

double social_welfare(double x, double v, double lambda) noexcept {
  const double revenue = x <= v ? x : 0.0;
  return revenue + lambda * std::max(v - x, 0.0);
}

double expected_welfare_uniform(double x, double lambda) noexcept {
  const double rest = 1.0 - x;
  return x * rest + lambda * rest * rest / 2.0;
}

double uniform_optimal_policy(double lambda) noexcept { return (1.0 - lambda) / (2.0 - lambda); }

DiscreteDistribution::DiscreteDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw DomainError("discrete distribution needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (!(a.mass >= 0.0)) throw DomainError("atom mass must be nonnegative");
    if (!(a.value >= 0.0 && a.value <= 1.0)) throw DomainError("atom value must lie in [0,1]");
    total += a.mass;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("atom masses must sum to 1 (sum = " + std::to_string(total) + ")");
  }
  std::stable_sort(atoms_.begin(), atoms_.end(),
                   [](const Atom& a, const Atom& b) { return a.value < b.value; });
}

double DiscreteDistribution::survival(double x) const noexcept {
  double s = 0.0;
  for (const auto& a : atoms_) {
    if (a.value >= x) s += a.mass;
  }
  return s;
}

double DiscreteDistribution::integrated_demand(double x) const noexcept {
  double s = 0.0;
  for (const auto& a : atoms_) {
    if (a.value > x) s += a.mass * (a.value - x);
  }
  return s;
}

double DiscreteDistribution::expected_welfare(double x, double lambda) const noexcept {
  return x * survival(x) + lambda * integrated_demand(x);
}

double DiscreteDistribution::quantile(double u) const noexcept {
  double cum = 0.0;
  for (const auto& a : atoms_) {
    cum += a.mass;
    if (u < cum) return a.value;
  }
  // u within rounding of 1: return the largest atom carrying mass.
  for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it) {
    if (it->mass > 0.0) return it->value;
  }
  return atoms_.back().value;
}

double expected_welfare_discrete(double x, const DiscreteDistribution& dist, double lambda) noexcept {
  return dist.expected_welfare(x, lambda);
}

bool one_sided_lipschitz_check(double x, double eps, double v, double lambda) {
  if (eps < 0.0 || x + eps > 1.0) throw DomainError("one-sided Lipschitz check needs 0 <= eps and x + eps <= 1");
  return social_welfare(x + eps, v, lambda) <= social_welfare(x, v, lambda) + eps;
}

PolicyGrid::PolicyGrid(std::size_t K) : K_(K) {
  if (K == 0) throw DomainError("policy grid needs K >= 1");
  points_.resize(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    points_[k] = static_cast<double>(k) / static_cast<double>(K);
  }
}

}  // namespace welfare
