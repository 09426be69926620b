#include "welfare/exp3.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <string>

#include "welfare/rng.hpp"

namespace welfare {

namespace {

constexpr double kEMinus2 = std::numbers::e - 2.0;

}  // namespace

void Exp3Config::validate() const {
  if (K == 0) throw DomainError("K must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0,1], got " + std::to_string(gamma));
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("eta must be positive, got " + std::to_string(eta));
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0,1], got " + std::to_string(lambda));
}

bool Exp3Config::in_theorem_regime() const noexcept { return static_cast<double>(K + 1) * eta < gamma; }

void tempered_softmax(std::span<const double> scores, double eta, double gamma, std::span<double> out) {
  assert(scores.size() == out.size());
  const double top = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    out[k] = std::exp(eta * (scores[k] - top));
    z += out[k];
  }
  const double floor = gamma / static_cast<double>(scores.size());
  const double scale = (1.0 - gamma) / z;
  for (double& p : out) p = p * scale + floor;
}

std::size_t sample_inverse_cdf(std::span<const double> probs, double u) noexcept {
  std::size_t k = 0;
  double cum = 0.0;
  for (std::size_t j = 1; j < probs.size(); ++j) {
    cum += probs[j - 1];
    if (cum > u) break;
    k = j;
  }
  return k;
}

std::vector<double> assignment_probabilities(const Exp3State& state, const Exp3Config& config) {
  std::vector<double> p(state.sw_hat.size());
  tempered_softmax(state.sw_hat, config.eta, config.gamma, p);
  return p;
}

namespace {

// Adds delta to dem_hat[k] and the matching terms of every welfare estimate:
// arm k gains x_k * delta, arms below k gain (weight/K) * delta.
void apply_ipw_update(Exp3State& s, const PolicyGrid& grid, std::size_t k, double delta, double weight_over_K) {
  s.dem_hat[k] += delta;
  s.sw_hat[k] += grid[k] * delta;
  const double spill = weight_over_K * delta;
  for (std::size_t j = 0; j < k; ++j) s.sw_hat[j] += spill;
}

}  // namespace

TemperedExp3::TemperedExp3(const Exp3Config& config)
    : config_(config), grid_((config.validate(), config.K)), state_(config.K + 1), probs_(config.K + 1) {
  weight_over_K_ = config_.lambda / static_cast<double>(config_.K);
}

std::span<const double> TemperedExp3::probabilities() {
  if (!probs_fresh_) {
    tempered_softmax(state_.sw_hat, config_.eta, config_.gamma, probs_);
    probs_fresh_ = true;
  }
  return probs_;
}

StepOutcome TemperedExp3::step(double draw, double v) {
  const auto p = probabilities();
#ifndef NDEBUG
  double total = 0.0;
  for (double pk : p) {
    assert(pk >= config_.gamma / static_cast<double>(p.size()) * (1.0 - 1e-12));
    total += pk;
  }
  assert(std::abs(total - 1.0) <= 1e-12);
#endif
  const std::size_t k = sample_inverse_cdf(p, draw);
  const double x = grid_[k];
  const int y = demand(x, v);
  const double pk = p[k];
  if (y == 1) apply_ipw_update(state_, grid_, k, 1.0 / pk, weight_over_K_);
  ++state_.round;
  probs_fresh_ = false;
  return {k, x, y, pk};
}

StepOutcome step(Exp3State& state, const Exp3Config& config, double draw, double v) {
  config.validate();
  const PolicyGrid grid(config.K);
  const auto p = assignment_probabilities(state, config);
  const std::size_t k = sample_inverse_cdf(p, draw);
  const int y = demand(grid[k], v);
  if (y == 1) apply_ipw_update(state, grid, k, 1.0 / p[k], config.lambda / static_cast<double>(config.K));
  ++state.round;
  return {k, grid[k], y, p[k]};
}

MonopolyExp3::MonopolyExp3(std::size_t K, double gamma, double eta)
    : grid_(K), gamma_(gamma), eta_(eta), revenue_hat_(K + 1, 0.0), probs_(K + 1) {
  Exp3Config{K, gamma, eta, 0.0}.validate();
}

StepOutcome MonopolyExp3::step(double draw, double v) {
  tempered_softmax(revenue_hat_, eta_, gamma_, probs_);
  const std::size_t k = sample_inverse_cdf(probs_, draw);
  const double x = grid_[k];
  const int y = demand(x, v);
  // IPW estimate of cumulative revenue x_k * sum_j y_j(x_k).
  if (y == 1) revenue_hat_[k] += x * (1.0 / probs_[k]);
  return {k, x, y, probs_[k]};
}

UniformRandomPolicy::UniformRandomPolicy(std::size_t K)
    : grid_(K), probs_(K + 1, 1.0 / static_cast<double>(K + 1)) {}

StepOutcome UniformRandomPolicy::step(double draw, double v) const noexcept {
  const std::size_t k = sample_inverse_cdf(probs_, draw);
  return {k, grid_[k], demand(grid_[k], v), probs_[k]};
}

double theorem2_bound_formula(const Exp3Config& c, double T) noexcept {
  const double K = static_cast<double>(c.K);
  const double rate = c.gamma +
                      c.eta * kEMinus2 * ((K + 1.0) / K) * ((2.0 * K + 1.0) / 6.0 + c.lambda * c.lambda / c.gamma) +
                      c.lambda / K;
  return rate * T + std::log(K + 1.0) / c.eta;
}

double theorem2_bound(const Exp3Config& config, double T) {
  config.validate();
  if (!config.in_theorem_regime()) {
    throw DomainError("bound requires (K+1) * eta < gamma; got K=" + std::to_string(config.K) +
                      ", eta=" + std::to_string(config.eta) + ", gamma=" + std::to_string(config.gamma));
  }
  return theorem2_bound_formula(config, T);
}

Exp3Tuning optimized_tuning(double lambda, double T) {
  if (!(T >= 2.0)) throw DomainError("optimized tuning needs T >= 2");
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("optimized tuning needs lambda in (0,1)");
  const double a = std::cbrt(9.0 * kEMinus2) * std::pow(std::sqrt(lambda / 3.0) + lambda, 2.0 / 3.0);
  const double ratio = std::log(T) / T;
  Exp3Tuning t{};
  t.eta = std::pow(ratio, 2.0 / 3.0) / a;
  t.gamma = lambda * std::sqrt(kEMinus2 / a) * std::cbrt(ratio);
  const double K = std::sqrt(3.0 * lambda * a / kEMinus2) * std::cbrt(1.0 / ratio);
  t.K = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(K)));
  t.clamped = false;
  if (t.gamma >= 1.0) {
    t.gamma = 0.5;
    t.clamped = true;
  }
  return t;
}

namespace {

template <class Algo>
Trajectory run_with(Algo& algo, double lambda, const Environment& env, std::uint64_t T, std::uint64_t seed) {
  const CounterStream draws(derive_key(seed, {kPolicyStream}));
  Trajectory out;
  out.reserve(T);
  for (std::uint64_t i = 1; i <= T; ++i) {
    const double v = env.draw(i);
    const auto s = algo.step(draws.uniform(i), v);
    out.push_back({s.arm, s.x, s.y, social_welfare(s.x, v, lambda)});
  }
  return out;
}

}  // namespace

Trajectory run_episode(const Exp3Config& config, const Environment& env, std::uint64_t T, std::uint64_t seed) {
  TemperedExp3 algo(config);
  return run_with(algo, config.lambda, env, T, seed);
}

Trajectory run_monopoly_episode(std::size_t K, double gamma, double eta, double lambda, const Environment& env,
                                std::uint64_t T, std::uint64_t seed) {
  MonopolyExp3 algo(K, gamma, eta);
  return run_with(algo, lambda, env, T, seed);
}

Trajectory run_uniform_episode(std::size_t K, double lambda, const Environment& env, std::uint64_t T,
                               std::uint64_t seed) {
  UniformRandomPolicy algo(K);
  return run_with(algo, lambda, env, T, seed);
}

}  // namespace welfare
