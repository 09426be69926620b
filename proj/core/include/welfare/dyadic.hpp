#pragma once

// Dyadic search for welfare maximization when expected welfare is concave.
//
// The search keeps an active interval and, per epoch, three probe points
// l < c < r. It samples either a probe point or an interior point of (l,c) or
// (c,r), builds confidence intervals for the welfare differences between the
// probes, and trims the active interval once one of them excludes zero.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "welfare/environment.hpp"
#include "welfare/exp3.hpp"

namespace welfare {

struct DyadicConfig {
  double delta = 0.01;
  double lambda = 0.7;

  /// delta = T^{-5/2}.
  static DyadicConfig for_horizon(double lambda, double T);
  void validate() const;
};

struct ProbePoints {
  double l;
  double c;
  double r;
};

/// Midpoint c of [lo, hi] and offsets d/4 (odd epochs) or d/6 (even epochs).
ProbePoints epoch_probe_points(double lo, double hi, std::uint64_t epoch);

enum class Target : std::uint8_t { kLeft, kCenter, kRight, kLeftInterval, kRightInterval };

/// Argmax of the five half-widths (ordered l, c, r, (l,c), (c,r)); ties go to
/// the earliest entry.
Target select_sampling_target(const std::array<double, 5>& half_widths) noexcept;

/// w1 + (w2 - w1) (k + 1/2) / (n + 1).
double interior_sample_point(double w1, double w2, std::size_t n, std::size_t k) noexcept;

/// Largest count of the form 2^m - 1 not exceeding `hits`.
std::size_t truncated_count(std::size_t hits) noexcept;

/// Hits of past queries inside an open interval (w1, w2), in time order.
class IntervalLog {
 public:
  IntervalLog() = default;
  IntervalLog(double w1, double w2) : w1_(w1), w2_(w2) {}

  double lo() const noexcept { return w1_; }
  double hi() const noexcept { return w2_; }
  bool contains(double x) const noexcept { return w1_ < x && x < w2_; }

  void record(std::uint64_t t, int y);

  std::size_t hits() const noexcept { return times_.size(); }
  /// n_t(w1, w2): the hit count truncated to 2^m - 1.
  std::size_t n() const noexcept { return truncated_count(hits()); }
  /// s(w1, w2, t): the time of the n-th hit, 0 when n = 0.
  std::uint64_t truncation_index() const noexcept;
  /// Sum of outcomes over the first n hits divided by n + 1.
  double mean() const noexcept;

 private:
  double w1_ = 0.0;
  double w2_ = 0.0;
  std::vector<std::uint64_t> times_;
  std::vector<std::uint64_t> prefix_y_{0};
};

struct IntervalEstimate {
  double mean;
  std::size_t n;
};

/// Scans a query history (times are 1-based positions) up to time t.
IntervalEstimate interval_demand_estimate(double w1, double w2, std::uint64_t t,
                                          std::span<const std::pair<double, int>> history);
std::uint64_t truncation_index(double w1, double w2, std::uint64_t t,
                               std::span<const std::pair<double, int>> history);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// x sqrt(log(2/delta) / (2 n)), with a/0 = +inf and 0/0 = 0.
double point_half_width(double x, std::size_t n, double delta) noexcept;
/// lambda (w2 - w1) (sqrt(log(2/delta) / (2 (n+1))) + 2 / (n+1)).
double interval_half_width(double w1, double w2, std::size_t n, double lambda, double delta) noexcept;

struct HalfWidths {
  double point;
  double interval;
};

HalfWidths half_widths(double x, std::size_t n_x, double w1, double w2, std::size_t interval_n, double lambda,
                       double delta) noexcept;

struct ConfidenceInterval {
  double center = 0.0;
  double half_width = kInfinity;

  double lower() const noexcept { return center - half_width; }
  double upper() const noexcept { return center + half_width; }
  bool contains(double v) const noexcept { return lower() <= v && v <= upper(); }
};

struct ConfidenceTriple {
  ConfidenceInterval left;   // J(l, c)
  ConfidenceInterval right;  // J(c, r)
  ConfidenceInterval whole;  // J(l, r)
};

enum class TrimDecision : std::uint8_t { kContinue, kDropLeft, kDropRight };

/// Drop everything left of l when J(l,c) or J(l,r) lies above 0; otherwise
/// drop everything right of r when J(c,r) or J(l,r) lies below 0.
TrimDecision trim_decision(const ConfidenceTriple& j) noexcept;

struct PointStats {
  std::size_t n = 0;
  std::size_t successes = 0;
  double mean() const noexcept { return n == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(n); }
};

class DyadicSearch {
 public:
  explicit DyadicSearch(const DyadicConfig& config);

  const DyadicConfig& config() const noexcept { return config_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::uint64_t epoch() const noexcept { return epoch_; }
  std::uint64_t epoch_start() const noexcept { return epoch_start_; }
  std::uint64_t round() const noexcept { return history_.size(); }
  const ProbePoints& probes() const noexcept { return probes_; }
  const IntervalLog& left_log() const noexcept { return left_log_; }
  const IntervalLog& right_log() const noexcept { return right_log_; }
  PointStats point(double x) const;

  /// Current half-widths in target order l, c, r, (l,c), (c,r).
  std::array<double, 5> target_half_widths() const;
  ConfidenceTriple confidence_intervals() const;

  /// Policy for the next round; advances the interior counter when an
  /// interval is sampled.
  double next_policy();
  /// Records the outcome of the policy just played.
  void observe(double x, int y);
  /// Applies the trimming rule; on a trim, starts the next epoch.
  TrimDecision try_trim();

  /// next_policy + observe + try_trim against valuation v.
  StepOutcome step(double v);

 private:
  void start_epoch();
  IntervalLog rebuild_log(double w1, double w2) const;

  DyadicConfig config_;
  double log_term_;  // log(2/delta)
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::uint64_t epoch_ = 0;
  std::uint64_t epoch_start_ = 0;
  ProbePoints probes_{};
  IntervalLog left_log_;
  IntervalLog right_log_;
  std::vector<std::pair<double, int>> history_;
  std::unordered_map<double, PointStats> points_;
  std::map<std::pair<double, double>, std::size_t> interior_counters_;
};

struct EpochRecord {
  std::uint64_t start;  // first round of the epoch is start + 1
  double lo;
  double hi;
};

struct DyadicRun {
  Trajectory trajectory;
  std::vector<EpochRecord> epochs;
  double final_lo;
  double final_hi;
};

/// Runs the search for T rounds against `env`. The search itself is
/// deterministic; all randomness comes from the environment's seed.
DyadicRun run_dyadic(const DyadicConfig& config, const Environment& env, std::uint64_t T);

}  // namespace welfare
