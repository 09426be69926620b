#include "welfare/income.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace welfare {

WageGrid::WageGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty() || points_.front() != 0.0) throw DomainError("wage grid must start at 0");
  for (std::size_t h = 1; h < points_.size(); ++h) {
    if (!(points_[h] > points_[h - 1])) throw DomainError("wage grid must be strictly increasing");
  }
  if (points_.back() > 1.0) throw DomainError("wage grid must lie in [0,1]");
}

std::size_t WageGrid::bracket(double w) const noexcept {
  const auto it = std::upper_bound(points_.begin(), points_.end(), w);
  return it == points_.begin() ? 0 : static_cast<std::size_t>(it - points_.begin()) - 1;
}

double bracket_floor(double w, const WageGrid& grid) noexcept { return grid[grid.bracket(w)]; }

BracketWeights::BracketWeights(const WageGrid& grid, std::vector<double> per_bracket)
    : grid_(grid), weights_(std::move(per_bracket)) {
  if (weights_.size() != grid_.size()) {
    throw DomainError("omega needs one weight per wage bracket (" + std::to_string(grid_.size()) + "), got " +
                      std::to_string(weights_.size()));
  }
  for (double w : weights_) {
    if (!(w >= 0.0 && w <= 1.0)) throw DomainError("omega entries must lie in [0,1]");
  }
}

double income_welfare_at(double x, double omega, double w, double v) noexcept {
  const double net = w * (1.0 - x);
  const double revenue = v <= net ? x * w : 0.0;
  return revenue + omega * std::max(net - v, 0.0);
}

double income_social_welfare(std::span<const double> schedule, const BracketWeights& omega, double w, double v) {
  const std::size_t h = omega.grid().bracket(w);
  if (schedule.size() != omega.grid().size()) throw DomainError("schedule needs one rate per bracket");
  return income_welfare_at(schedule[h], omega(w), w, v);
}

void IncomeExp3Config::validate() const {
  Exp3Config{K, gamma, eta, 0.0}.validate();
  BracketWeights(WageGrid(wage_grid), omega);
}

IncomeExp3::IncomeExp3(const IncomeExp3Config& config)
    : config_((config.validate(), config)),
      grid_(config.K),
      omega_(WageGrid(config.wage_grid), config.omega),
      sw_hat_(omega_.grid().size() * (config.K + 1), 0.0),
      probs_(sw_hat_.size()) {
  refresh_probabilities();
}

std::span<const double> IncomeExp3::sw_hat(std::size_t h) const noexcept {
  return std::span<const double>(sw_hat_).subspan(h * grid_.size(), grid_.size());
}

std::span<const double> IncomeExp3::probabilities(std::size_t h) const noexcept {
  return std::span<const double>(probs_).subspan(h * grid_.size(), grid_.size());
}

void IncomeExp3::refresh_probabilities() {
  const std::size_t arms = grid_.size();
  for (std::size_t h = 0; h < brackets(); ++h) {
    tempered_softmax(std::span<const double>(sw_hat_).subspan(h * arms, arms), config_.eta, config_.gamma,
                     std::span<double>(probs_).subspan(h * arms, arms));
  }
}

TaxSchedule IncomeExp3::propose(double draw) const {
  TaxSchedule s;
  s.arms.resize(brackets());
  s.rates.resize(brackets());
  for (std::size_t h = 0; h < brackets(); ++h) {
    s.arms[h] = sample_inverse_cdf(probabilities(h), draw);
    s.rates[h] = grid_[s.arms[h]];
  }
  return s;
}

void IncomeExp3::update(const TaxSchedule& schedule, int y, std::optional<double> observed_wage) {
  ++round_;
  if (y == 0) return;
  if (!observed_wage) throw std::logic_error("a participating individual's wage must be reported");
  const double w = *observed_wage;
  const std::size_t h = wages().bracket(w);
  const std::size_t k = schedule.arms[h];
  const std::size_t arms = grid_.size();
  // Only the observed bracket's estimate is nonzero this round.
  const double d_hat = w * (1.0 / probabilities(h)[k]);
  double* row = sw_hat_.data() + h * arms;
  row[k] += grid_[k] * d_hat;
  const double spill = omega_(w) / static_cast<double>(config_.K) * d_hat;
  for (std::size_t j = 0; j < k; ++j) row[j] += spill;
  tempered_softmax(std::span<const double>(row, arms), config_.eta, config_.gamma,
                   std::span<double>(probs_).subspan(h * arms, arms));
}

IncomeStep income_step(IncomeExp3& algo, double draw, double w, double v) {
  auto schedule = algo.propose(draw);
  const double x = schedule.rates[algo.wages().bracket(w)];
  const int y = labor_supply(w, v, x);
  algo.update(schedule, y, y == 1 ? std::optional<double>(w) : std::nullopt);
  return {std::move(schedule), y, x};
}

double theorem5_bound_formula(std::size_t K, double gamma, double eta, std::size_t H, double T) noexcept {
  const double k = static_cast<double>(K);
  const double rate = gamma + eta * (std::numbers::e - 2.0) * ((k + 1.0) / k) * ((2.0 * k + 1.0) / 6.0 + 1.0 / gamma) +
                      1.0 / k;
  return rate * T + static_cast<double>(H) * std::log(k + 1.0) / eta;
}

double theorem5_bound(std::size_t K, double gamma, double eta, std::size_t H, double T) {
  Exp3Config{K, gamma, eta, 0.0}.validate();
  if (H == 0) throw DomainError("H must be >= 1");
  if (!(static_cast<double>(K + 1) * eta < gamma)) throw DomainError("bound requires (K+1) * eta < gamma");
  return theorem5_bound_formula(K, gamma, eta, H, T);
}

IncomeTuning theorem5_tuning(double c1, double c2, double c3, std::size_t H, double T) {
  if (H == 0 || !(T >= 1.0)) throw DomainError("tuning needs H >= 1 and T >= 1");
  const auto K = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(c1 * std::cbrt(T / H))));
  const double k1 = static_cast<double>(K + 1);
  return {K, c2 / k1, c3 / (k1 * k1)};
}

WageSource::WageSource(Kind kind, std::uint64_t seed)
    : kind_(std::move(kind)), stream_(derive_key(seed, {kWageStream})) {
  if (const auto* c = std::get_if<ConstantWage>(&kind_); c && !(c->w >= 0.0 && c->w <= 1.0)) {
    throw DomainError("constant wage must lie in [0,1]");
  }
  if (const auto* s = std::get_if<WageSequence>(&kind_)) {
    for (double w : s->values) {
      if (!(w >= 0.0 && w <= 1.0)) throw DomainError("wage sequence values must lie in [0,1]");
    }
  }
}

double WageSource::draw(std::uint64_t round) const {
  if (const auto* c = std::get_if<ConstantWage>(&kind_)) return c->w;
  if (const auto* s = std::get_if<WageSequence>(&kind_)) {
    if (round == 0 || round > s->values.size()) throw std::out_of_range("round beyond wage sequence");
    return s->values[round - 1];
  }
  return stream_.uniform(round);
}

std::vector<IncomeRound> run_income_episode(const IncomeExp3Config& config, const WageSource& wages,
                                            const Environment& env, std::uint64_t T, std::uint64_t seed) {
  IncomeExp3 algo(config);
  const BracketWeights omega(WageGrid(config.wage_grid), config.omega);
  const CounterStream draws(derive_key(seed, {kPolicyStream}));
  std::vector<IncomeRound> out;
  out.reserve(T);
  for (std::uint64_t i = 1; i <= T; ++i) {
    const double w = wages.draw(i);
    const double v = env.draw(i);
    const auto step = income_step(algo, draws.uniform(i), w, v);
    const std::size_t h = algo.wages().bracket(w);
    out.push_back({w, v, h, step.schedule.arms[h], step.x, step.y, income_welfare_at(step.x, omega(w), w, v)});
  }
  return out;
}

}  // namespace welfare
