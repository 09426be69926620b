#pragma once

// Tempered Exp3 for social welfare, its tuning calculators, and the two
// baselines it is compared against (uniform random policy and Exp3 on
// revenue alone, i.e. monopoly pricing).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "welfare/environment.hpp"
#include "welfare/model.hpp"

namespace welfare {

struct Exp3Config {
  std::size_t K = 20;
  double gamma = 0.1;
  double eta = 0.025;
  /// Weight on private welfare. 0 is accepted and turns the estimator into
  /// a pure revenue estimator.
  double lambda = 0.7;

  /// Throws DomainError for K = 0, gamma outside (0,1], eta <= 0, lambda outside [0,1].
  void validate() const;
  /// The upper bound only applies when (K+1) eta < gamma.
  bool in_theorem_regime() const noexcept;
};

/// p_k = (1-gamma) softmax(eta * scores)_k + gamma / (K+1), computed with the
/// maximum score subtracted before exponentiation.
void tempered_softmax(std::span<const double> scores, double eta, double gamma, std::span<double> out);

/// Inverse-CDF arm choice: the largest k whose preceding cumulative
/// probability is <= u. Used by every algorithm so a shared uniform draw
/// selects the same arm from the same distribution.
std::size_t sample_inverse_cdf(std::span<const double> probs, double u) noexcept;

struct Exp3State {
  std::vector<double> dem_hat;  // cumulative IPW demand per arm
  std::vector<double> sw_hat;   // cumulative welfare estimate per arm
  std::uint64_t round = 0;

  explicit Exp3State(std::size_t arms = 0) : dem_hat(arms, 0.0), sw_hat(arms, 0.0) {}
};

struct StepOutcome {
  std::size_t arm;
  double x;
  int y;
  double p;  // probability with which the arm was chosen
};

std::vector<double> assignment_probabilities(const Exp3State& state, const Exp3Config& config);

class TemperedExp3 {
 public:
  explicit TemperedExp3(const Exp3Config& config);

  const Exp3Config& config() const noexcept { return config_; }
  const PolicyGrid& grid() const noexcept { return grid_; }
  const Exp3State& state() const noexcept { return state_; }

  /// Probabilities for the next round.
  std::span<const double> probabilities();

  /// One round: choose an arm with `draw` in [0,1), observe demand at
  /// valuation v, update the estimates.
  StepOutcome step(double draw, double v);

 private:
  Exp3Config config_;
  PolicyGrid grid_;
  Exp3State state_;
  std::vector<double> probs_;
  double weight_over_K_;
  bool probs_fresh_ = false;
};

/// Free-function form of TemperedExp3::step for callers holding bare state.
StepOutcome step(Exp3State& state, const Exp3Config& config, double draw, double v);

/// Conventional Exp3 on revenue x * y (the monopoly-pricing problem).
class MonopolyExp3 {
 public:
  MonopolyExp3(std::size_t K, double gamma, double eta);

  std::span<const double> revenue_hat() const noexcept { return revenue_hat_; }
  StepOutcome step(double draw, double v);

 private:
  PolicyGrid grid_;
  double gamma_;
  double eta_;
  std::vector<double> revenue_hat_;
  std::vector<double> probs_;
};

/// Picks every grid point with probability 1/(K+1).
class UniformRandomPolicy {
 public:
  explicit UniformRandomPolicy(std::size_t K);
  StepOutcome step(double draw, double v) const noexcept;

 private:
  PolicyGrid grid_;
  std::vector<double> probs_;
};

/// (gamma + eta (e-2) (K+1)/K ((2K+1)/6 + lambda^2/gamma) + lambda/K) T + log(K+1)/eta.
/// Evaluates the expression without checking its hypothesis.
double theorem2_bound_formula(const Exp3Config& config, double T) noexcept;

/// As above, but throws DomainError unless (K+1) eta < gamma.
double theorem2_bound(const Exp3Config& config, double T);

struct Exp3Tuning {
  std::size_t K;
  double gamma;
  double eta;
  bool clamped;  // gamma was >= 1 and has been reset to 0.5
};

/// Approximate minimizer of the upper bound for a known horizon T >= 2.
Exp3Tuning optimized_tuning(double lambda, double T);

struct EpisodeRound {
  std::size_t arm;
  double x;
  int y;
  double welfare;  // realized welfare at the true valuation; never fed back
};

using Trajectory = std::vector<EpisodeRound>;

/// Runs Tempered Exp3 for T rounds. Policy randomness comes from the counter
/// stream keyed by `seed`; valuations come from `env`.
Trajectory run_episode(const Exp3Config& config, const Environment& env, std::uint64_t T, std::uint64_t seed);

Trajectory run_monopoly_episode(std::size_t K, double gamma, double eta, double lambda, const Environment& env,
                                std::uint64_t T, std::uint64_t seed);

Trajectory run_uniform_episode(std::size_t K, double lambda, const Environment& env, std::uint64_t T,
                               std::uint64_t seed);

}  // namespace welfare
