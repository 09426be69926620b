#pragma once

// Exact benchmarks (best constant policy) and cumulative regret.

#include <cstdint>
#include <span>
#include <vector>

#include "welfare/environment.hpp"
#include "welfare/exp3.hpp"
#include "welfare/income.hpp"

namespace welfare {

struct Benchmark {
  double x;        // best constant policy
  double welfare;  // cumulative (adversarial) or per-round expected (stochastic) welfare at x
};

/// Cumulative welfare sum_i sw(x, v_i) of a constant policy.
double cumulative_welfare(double x, std::span<const double> values, double lambda) noexcept;

/// Exact supremum over x in [0,1] of the cumulative welfare. The objective is
/// piecewise linear with upward jumps only at x = v_i, so the supremum is
/// attained on {0} union {v_i}. Ties go to the smallest x.
Benchmark best_constant_adversarial(std::span<const double> values, double lambda);

/// Best constant policy under a known distribution: closed form for uniform,
/// enumeration of {0} union support for discrete laws, golden-section search
/// for the concave family. Throws DomainError for fixed sequences.
Benchmark best_constant_stochastic(const Environment& env, double lambda);

struct RegretRecord {
  std::uint64_t round;
  double x;
  int y;
  double welfare;
  double cum_welfare;
  double cum_regret;
};

/// Adversarial regret against the fixed policy `benchmark.x`, using the
/// valuations the trajectory was played against.
std::vector<RegretRecord> cumulative_regret_adversarial(const Trajectory& trajectory, std::span<const double> values,
                                                        double lambda, const Benchmark& benchmark);

/// Stochastic regret t W(x*) - sum_i W(x_i), using the expected welfare of
/// the chosen policies rather than their noisy realizations.
std::vector<RegretRecord> cumulative_regret_stochastic(const Trajectory& trajectory, const Environment& env,
                                                       double lambda, const Benchmark& benchmark);

/// Per-bracket best constant rates for the income model.
struct IncomeBenchmark {
  std::vector<double> rates;
  std::vector<double> welfare;      // best cumulative welfare per bracket
  std::vector<std::uint64_t> counts;  // individuals per bracket
};

IncomeBenchmark best_schedule_adversarial(std::span<const IncomeRound> rounds, const BracketWeights& omega);

struct IncomeRegret {
  double total;
  std::vector<double> per_bracket;
  std::vector<std::uint64_t> counts;
  double realized_total;  // sum of realized welfare, accumulated round by round
};

IncomeRegret income_regret(std::span<const IncomeRound> rounds, const BracketWeights& omega);

}  // namespace welfare
