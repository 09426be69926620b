#include "welfare/dyadic.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace welfare {

DyadicConfig DyadicConfig::for_horizon(double lambda, double T) {
  if (!(T >= 2.0)) throw DomainError("dyadic search horizon must be >= 2");
  return {std::pow(T, -2.5), lambda};
}

void DyadicConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1), got " + std::to_string(delta));
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0,1]");
}

ProbePoints epoch_probe_points(double lo, double hi, std::uint64_t epoch) {
  if (!(hi > lo)) throw DomainError("active interval must have positive length");
  const double c = (lo + hi) / 2.0;
  const double d = hi - lo;
  const double offset = (epoch % 2 == 1) ? d / 4.0 : d / 6.0;
  return {c - offset, c, c + offset};
}

Target select_sampling_target(const std::array<double, 5>& g) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (g[i] > g[best]) best = i;
  }
  return static_cast<Target>(best);
}

double interior_sample_point(double w1, double w2, std::size_t n, std::size_t k) noexcept {
  return w1 + (w2 - w1) * ((static_cast<double>(k) + 0.5) / static_cast<double>(n + 1));
}

std::size_t truncated_count(std::size_t hits) noexcept { return std::bit_floor(hits + 1) - 1; }

void IntervalLog::record(std::uint64_t t, int y) {
  times_.push_back(t);
  prefix_y_.push_back(prefix_y_.back() + static_cast<std::uint64_t>(y));
}

std::uint64_t IntervalLog::truncation_index() const noexcept {
  const std::size_t m = n();
  return m == 0 ? 0 : times_[m - 1];
}

double IntervalLog::mean() const noexcept {
  const std::size_t m = n();
  return static_cast<double>(prefix_y_[m]) / static_cast<double>(m + 1);
}

namespace {

IntervalLog scan(double w1, double w2, std::uint64_t t, std::span<const std::pair<double, int>> history) {
  IntervalLog log(w1, w2);
  const std::uint64_t end = std::min<std::uint64_t>(t, history.size());
  for (std::uint64_t i = 0; i < end; ++i) {
    if (log.contains(history[i].first)) log.record(i + 1, history[i].second);
  }
  return log;
}

}  // namespace

IntervalEstimate interval_demand_estimate(double w1, double w2, std::uint64_t t,
                                          std::span<const std::pair<double, int>> history) {
  const auto log = scan(w1, w2, t, history);
  return {log.mean(), log.n()};
}

std::uint64_t truncation_index(double w1, double w2, std::uint64_t t,
                               std::span<const std::pair<double, int>> history) {
  return scan(w1, w2, t, history).truncation_index();
}

double point_half_width(double x, std::size_t n, double delta) noexcept {
  if (x == 0.0) return 0.0;
  if (n == 0) return kInfinity;
  return x * std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

double interval_half_width(double w1, double w2, std::size_t n, double lambda, double delta) noexcept {
  const double m = static_cast<double>(n + 1);
  return lambda * (w2 - w1) * (std::sqrt(std::log(2.0 / delta) / (2.0 * m)) + 2.0 / m);
}

HalfWidths half_widths(double x, std::size_t n_x, double w1, double w2, std::size_t interval_n, double lambda,
                       double delta) noexcept {
  return {point_half_width(x, n_x, delta), interval_half_width(w1, w2, interval_n, lambda, delta)};
}

TrimDecision trim_decision(const ConfidenceTriple& j) noexcept {
  if (j.left.lower() >= 0.0 || j.whole.lower() >= 0.0) return TrimDecision::kDropLeft;
  if (j.right.upper() <= 0.0 || j.whole.upper() <= 0.0) return TrimDecision::kDropRight;
  return TrimDecision::kContinue;
}

// ---------------------------------------------------------------------------

DyadicSearch::DyadicSearch(const DyadicConfig& config) : config_(config) {
  config_.validate();
  log_term_ = std::log(2.0 / config_.delta);
  start_epoch();
}

PointStats DyadicSearch::point(double x) const {
  const auto it = points_.find(x);
  return it == points_.end() ? PointStats{} : it->second;
}

IntervalLog DyadicSearch::rebuild_log(double w1, double w2) const {
  return scan(w1, w2, history_.size(), history_);
}

void DyadicSearch::start_epoch() {
  ++epoch_;
  epoch_start_ = history_.size();
  probes_ = epoch_probe_points(lo_, hi_, epoch_);
  left_log_ = rebuild_log(probes_.l, probes_.c);
  right_log_ = rebuild_log(probes_.c, probes_.r);
}

std::array<double, 5> DyadicSearch::target_half_widths() const {
  const double d = config_.delta;
  const double lam = config_.lambda;
  return {point_half_width(probes_.l, point(probes_.l).n, d), point_half_width(probes_.c, point(probes_.c).n, d),
          point_half_width(probes_.r, point(probes_.r).n, d),
          interval_half_width(probes_.l, probes_.c, left_log_.n(), lam, d),
          interval_half_width(probes_.c, probes_.r, right_log_.n(), lam, d)};
}

ConfidenceTriple DyadicSearch::confidence_intervals() const {
  const double lam = config_.lambda;
  const auto pl = point(probes_.l);
  const auto pc = point(probes_.c);
  const auto pr = point(probes_.r);
  const auto g = target_half_widths();

  // Welfare difference estimate x' D(x') - x D(x) - lambda (x' - x) D(x, x').
  const double rev_l = probes_.l * pl.mean();
  const double rev_c = probes_.c * pc.mean();
  const double rev_r = probes_.r * pr.mean();
  const double left = rev_c - rev_l - lam * (probes_.c - probes_.l) * left_log_.mean();
  const double right = rev_r - rev_c - lam * (probes_.r - probes_.c) * right_log_.mean();

  ConfidenceTriple j;
  j.left = {left, g[1] + g[0] + g[3]};
  j.right = {right, g[2] + g[1] + g[4]};
  j.whole = {left + right, g[2] + g[0] + g[3] + g[4]};
  return j;
}

double DyadicSearch::next_policy() {
  const Target target = select_sampling_target(target_half_widths());
  switch (target) {
    case Target::kLeft:
      return probes_.l;
    case Target::kCenter:
      return probes_.c;
    case Target::kRight:
      return probes_.r;
    case Target::kLeftInterval:
    case Target::kRightInterval:
      break;
  }
  const bool left = target == Target::kLeftInterval;
  const double w1 = left ? probes_.l : probes_.c;
  const double w2 = left ? probes_.c : probes_.r;
  const std::size_t n = left ? left_log_.n() : right_log_.n();
  std::size_t& k = interior_counters_[{w1, w2}];
  if (k > n) k = 0;
  const double x = interior_sample_point(w1, w2, n, k);
  k = (k + 1) % (n + 1);
  return x;
}

void DyadicSearch::observe(double x, int y) {
  history_.emplace_back(x, y);
  const std::uint64_t t = history_.size();
  auto& p = points_[x];
  ++p.n;
  p.successes += static_cast<std::size_t>(y);
  if (left_log_.contains(x)) left_log_.record(t, y);
  if (right_log_.contains(x)) right_log_.record(t, y);
}

TrimDecision DyadicSearch::try_trim() {
  const auto decision = trim_decision(confidence_intervals());
  if (decision == TrimDecision::kDropLeft) {
    lo_ = std::max(lo_, probes_.l);
  } else if (decision == TrimDecision::kDropRight) {
    hi_ = std::min(hi_, probes_.r);
  }
  if (decision != TrimDecision::kContinue) start_epoch();
  return decision;
}

StepOutcome DyadicSearch::step(double v) {
  const double x = next_policy();
  const int y = demand(x, v);
  observe(x, y);
  try_trim();
  return {0, x, y, 1.0};
}

DyadicRun run_dyadic(const DyadicConfig& config, const Environment& env, std::uint64_t T) {
  DyadicSearch search(config);
  DyadicRun run;
  run.trajectory.reserve(T);
  run.epochs.push_back({0, search.lo(), search.hi()});
  for (std::uint64_t t = 1; t <= T; ++t) {
    const double v = env.draw(t);
    const auto s = search.step(v);
    run.trajectory.push_back({0, s.x, s.y, social_welfare(s.x, v, config.lambda)});
    if (search.epoch_start() == t) run.epochs.push_back({t, search.lo(), search.hi()});
  }
  run.final_lo = search.lo();
  run.final_hi = search.hi();
  return run;
}

}  // namespace welfare
