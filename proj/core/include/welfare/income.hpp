#pragma once

// Tempered Exp3 for income taxation with piecewise-constant tax schedules.
//
// Each wage bracket carries its own table of welfare estimates over the tax
// grid. A single uniform draw per round selects the rate in every bracket by
// inverse CDF, so the brackets' choices are perfectly correlated.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "welfare/environment.hpp"
#include "welfare/exp3.hpp"
#include "welfare/model.hpp"

namespace welfare {

/// Bracket lower edges {w^1 = 0 < w^2 < ... < w^H} in [0,1].
class WageGrid {
 public:
  explicit WageGrid(std::vector<double> points);

  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t h) const noexcept { return points_[h]; }
  std::span<const double> points() const noexcept { return points_; }
  /// Index of the bracket containing w, i.e. of max{w' in grid : w' <= w}.
  std::size_t bracket(double w) const noexcept;

 private:
  std::vector<double> points_;
};

double bracket_floor(double w, const WageGrid& grid) noexcept;

/// 1 iff v <= w (1 - x).
inline int labor_supply(double w, double v, double x) noexcept { return v <= w * (1.0 - x) ? 1 : 0; }

/// Welfare weight omega(w), constant on each bracket. Entries lie in [0,1].
class BracketWeights {
 public:
  BracketWeights(const WageGrid& grid, std::vector<double> per_bracket);
  double operator()(double w) const noexcept { return weights_[grid_.bracket(w)]; }
  double at_bracket(std::size_t h) const noexcept { return weights_[h]; }
  const WageGrid& grid() const noexcept { return grid_; }

 private:
  WageGrid grid_;
  std::vector<double> weights_;
};

/// x(w) w 1(v <= w (1 - x(w))) + omega(w) max(w (1 - x(w)) - v, 0), where
/// `schedule` holds one rate per bracket.
double income_social_welfare(std::span<const double> schedule, const BracketWeights& omega, double w, double v);

/// Same quantity for a single rate and weight.
double income_welfare_at(double x, double omega, double w, double v) noexcept;

struct IncomeExp3Config {
  std::size_t K = 10;
  double gamma = 0.1;
  double eta = 0.005;
  std::vector<double> wage_grid{0.0};
  std::vector<double> omega{0.7};

  void validate() const;
  bool in_theorem_regime() const noexcept { return static_cast<double>(K + 1) * eta < gamma; }
};

struct TaxSchedule {
  std::vector<std::size_t> arms;  // chosen grid index per bracket
  std::vector<double> rates;      // the matching tax rates
};

class IncomeExp3 {
 public:
  explicit IncomeExp3(const IncomeExp3Config& config);

  const IncomeExp3Config& config() const noexcept { return config_; }
  const WageGrid& wages() const noexcept { return omega_.grid(); }
  const PolicyGrid& grid() const noexcept { return grid_; }
  std::size_t brackets() const noexcept { return wages().size(); }
  std::uint64_t round() const noexcept { return round_; }

  /// Welfare estimates of bracket h over the tax grid.
  std::span<const double> sw_hat(std::size_t h) const noexcept;
  /// Marginal assignment probabilities of bracket h for the coming round.
  std::span<const double> probabilities(std::size_t h) const noexcept;

  /// Draws the round's schedule from the uniform `draw`.
  TaxSchedule propose(double draw) const;
  /// Feeds back participation; the wage is only available when y = 1.
  void update(const TaxSchedule& schedule, int y, std::optional<double> observed_wage);

 private:
  void refresh_probabilities();

  IncomeExp3Config config_;
  PolicyGrid grid_;
  BracketWeights omega_;
  std::vector<double> sw_hat_;  // row-major, brackets x arms
  std::vector<double> probs_;
  std::uint64_t round_ = 0;
};

struct IncomeStep {
  TaxSchedule schedule;
  int y;
  double x;  // rate applied to this individual
};

/// propose + participation decision + update, for an individual (w, v).
IncomeStep income_step(IncomeExp3& algo, double draw, double w, double v);

/// Expression bounding the regret of the income algorithm, evaluated without
/// checking its hypothesis.
double theorem5_bound_formula(std::size_t K, double gamma, double eta, std::size_t H, double T) noexcept;
/// Throws DomainError unless (K+1) eta < gamma.
double theorem5_bound(std::size_t K, double gamma, double eta, std::size_t H, double T);

struct IncomeTuning {
  std::size_t K;
  double gamma;
  double eta;
};

/// K = round(c1 (T/H)^{1/3}), gamma = c2/(K+1), eta = c3/(K+1)^2.
IncomeTuning theorem5_tuning(double c1, double c2, double c3, std::size_t H, double T);

// Wage sources for simulation. Wages are environment-side data.
struct ConstantWage {
  double w;
};
struct UniformWage {};
struct WageSequence {
  std::vector<double> values;
};

class WageSource {
 public:
  using Kind = std::variant<ConstantWage, UniformWage, WageSequence>;

  explicit WageSource(Kind kind, std::uint64_t seed = 0);
  WageSource with_seed(std::uint64_t seed) const { return WageSource(kind_, seed); }
  const Kind& kind() const noexcept { return kind_; }
  double draw(std::uint64_t round) const;

 private:
  Kind kind_;
  CounterStream stream_;
};

struct IncomeRound {
  double w;
  double v;
  std::size_t bracket;
  std::size_t arm;
  double x;
  int y;
  double welfare;
};

std::vector<IncomeRound> run_income_episode(const IncomeExp3Config& config, const WageSource& wages,
                                            const Environment& env, std::uint64_t T, std::uint64_t seed);

}  // namespace welfare
