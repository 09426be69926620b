#include "welfare/regret.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace welfare {

double cumulative_welfare(double x, std::span<const double> values, double lambda) noexcept {
  double total = 0.0;
  for (double v : values) total += social_welfare(x, v, lambda);
  return total;
}

namespace {

// Maximizes x * A(x) + B(x) where A and B are suffix sums over items whose
// threshold is >= x. Candidates are 0 and every threshold in [0,1].
struct ThresholdItem {
  double threshold;
  double slope;   // contribution to A
  double offset;  // contribution to B
};

Benchmark maximize_thresholds(std::vector<ThresholdItem> items) {
  std::sort(items.begin(), items.end(),
            [](const ThresholdItem& a, const ThresholdItem& b) { return a.threshold < b.threshold; });
  const std::size_t n = items.size();
  std::vector<double> suffix_slope(n + 1, 0.0), suffix_offset(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    suffix_slope[i] = suffix_slope[i + 1] + items[i].slope;
    suffix_offset[i] = suffix_offset[i + 1] + items[i].offset;
  }
  // x = 0: every item with threshold >= 0 contributes.
  std::size_t first_nonneg = 0;
  while (first_nonneg < n && items[first_nonneg].threshold < 0.0) ++first_nonneg;
  Benchmark best{0.0, suffix_offset[first_nonneg]};
  for (std::size_t i = first_nonneg; i < n; ++i) {
    const double x = items[i].threshold;
    if (x > 1.0) break;
    if (i > first_nonneg && x == items[i - 1].threshold) continue;
    const double value = x * suffix_slope[i] + suffix_offset[i];
    if (value > best.welfare) best = {x, value};
  }
  return best;
}

}  // namespace

Benchmark best_constant_adversarial(std::span<const double> values, double lambda) {
  if (values.empty()) throw DomainError("best constant policy needs a nonempty sequence");
  // For x <= v: sw = x + lambda (v - x) = x (1 - lambda) + lambda v.
  std::vector<ThresholdItem> items;
  items.reserve(values.size());
  for (double v : values) items.push_back({v, 1.0 - lambda, lambda * v});
  auto best = maximize_thresholds(std::move(items));
  // Report the exact cumulative welfare at the maximizer.
  best.welfare = cumulative_welfare(best.x, values, lambda);
  return best;
}

namespace {

double golden_section_max(auto&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

Benchmark best_over_support(const DiscreteDistribution& dist, double lambda) {
  Benchmark best{0.0, dist.expected_welfare(0.0, lambda)};
  for (const auto& a : dist.atoms()) {
    const double w = dist.expected_welfare(a.value, lambda);
    if (w > best.welfare || (w == best.welfare && a.value < best.x)) best = {a.value, w};
  }
  return best;
}

// Largest rate at which (w, v) still participates. 1 - v/w can round above
// the true cutoff, so step down until the participation test agrees.
double participation_threshold(double w, double v) noexcept {
  double x = 1.0 - v / w;
  while (x >= 0.0 && labor_supply(w, v, x) == 0) x = std::nextafter(x, -1.0);
  return x;
}

}  // namespace

Benchmark best_constant_stochastic(const Environment& env, double lambda) {
  const auto& kind = env.kind();
  if (std::holds_alternative<UniformEnv>(kind)) {
    const double x = uniform_optimal_policy(lambda);
    return {x, expected_welfare_uniform(x, lambda)};
  }
  if (const auto* d = std::get_if<DiscreteEnv>(&kind)) return best_over_support(d->dist, lambda);
  if (const auto* m = std::get_if<FourPointMuEnv>(&kind)) return best_over_support(m->dist, lambda);
  if (std::holds_alternative<ConcaveEnv>(kind)) {
    auto W = [&](double x) { return env.expected_welfare(x, lambda); };
    const double x = golden_section_max(W, 0.0, 1.0, 1e-10);
    return {x, W(x)};
  }
  throw DomainError("no stochastic benchmark for environment '" + env.name() + "'");
}

std::vector<RegretRecord> cumulative_regret_adversarial(const Trajectory& trajectory, std::span<const double> values,
                                                        double lambda, const Benchmark& benchmark) {
  if (values.size() != trajectory.size()) {
    throw DomainError("trajectory has " + std::to_string(trajectory.size()) + " rounds but the sequence has " +
                      std::to_string(values.size()));
  }
  std::vector<RegretRecord> out;
  out.reserve(trajectory.size());
  double cum_best = 0.0, cum = 0.0;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& r = trajectory[i];
    cum_best += social_welfare(benchmark.x, values[i], lambda);
    cum += r.welfare;
    out.push_back({i + 1, r.x, r.y, r.welfare, cum, cum_best - cum});
  }
  return out;
}

std::vector<RegretRecord> cumulative_regret_stochastic(const Trajectory& trajectory, const Environment& env,
                                                       double lambda, const Benchmark& benchmark) {
  std::unordered_map<double, double> cache;
  std::vector<RegretRecord> out;
  out.reserve(trajectory.size());
  double cum_gap = 0.0, cum = 0.0;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& r = trajectory[i];
    auto [it, fresh] = cache.try_emplace(r.x, 0.0);
    if (fresh) it->second = env.expected_welfare(r.x, lambda);
    // Accumulating per-round gaps keeps the curve nondecreasing in floating point.
    cum_gap += std::max(0.0, benchmark.welfare - it->second);
    cum += r.welfare;
    out.push_back({i + 1, r.x, r.y, r.welfare, cum, cum_gap});
  }
  return out;
}

IncomeBenchmark best_schedule_adversarial(std::span<const IncomeRound> rounds, const BracketWeights& omega) {
  const std::size_t H = omega.grid().size();
  std::vector<std::vector<ThresholdItem>> items(H);
  IncomeBenchmark out{std::vector<double>(H, 0.0), std::vector<double>(H, 0.0), std::vector<std::uint64_t>(H, 0)};
  for (const auto& r : rounds) {
    const std::size_t h = omega.grid().bracket(r.w);
    ++out.counts[h];
    if (r.w <= 0.0) continue;  // zero wage: welfare is 0 for every rate
    const double om = omega(r.w);
    // Participation iff x <= 1 - v/w; then sw = x w (1 - omega) + omega (w - v).
    items[h].push_back({participation_threshold(r.w, r.v), r.w * (1.0 - om), om * (r.w - r.v)});
  }
  for (std::size_t h = 0; h < H; ++h) {
    const auto best = maximize_thresholds(std::move(items[h]));
    out.rates[h] = best.x;
    double total = 0.0;
    for (const auto& r : rounds) {
      if (omega.grid().bracket(r.w) == h) total += income_welfare_at(best.x, omega(r.w), r.w, r.v);
    }
    out.welfare[h] = total;
  }
  return out;
}

IncomeRegret income_regret(std::span<const IncomeRound> rounds, const BracketWeights& omega) {
  const auto bench = best_schedule_adversarial(rounds, omega);
  const std::size_t H = bench.rates.size();
  IncomeRegret out{0.0, std::vector<double>(H, 0.0), bench.counts, 0.0};
  std::vector<double> realized(H, 0.0);
  for (const auto& r : rounds) {
    realized[r.bracket] += r.welfare;
    out.realized_total += r.welfare;
  }
  double best_total = 0.0;
  for (std::size_t h = 0; h < H; ++h) {
    out.per_bracket[h] = bench.welfare[h] - realized[h];
    best_total += bench.welfare[h];
  }
  out.total = best_total - out.realized_total;
  return out;
}

}  // namespace welfare
