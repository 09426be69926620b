#pragma once

// Seeded multi-replication experiment runner.
//
// A plan fixes an algorithm, an environment, a list of horizons and a
// replication count. Replication r at horizon T draws all of its randomness
// from derive_key(seed, {T, r}), so results do not depend on how the work is
// spread over threads.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "welfare/environment.hpp"
#include "welfare/exp3.hpp"
#include "welfare/income.hpp"

namespace welfare {

enum class AlgorithmId { kExp3, kExp3Tuned, kUniformRandom, kMonopoly, kDyadic, kIncome };

std::string to_string(AlgorithmId id);
AlgorithmId algorithm_from_string(const std::string& name);

struct WageSpec {
  std::string kind = "constant";  // constant | uniform | sequence
  double w = 1.0;
  std::vector<double> values;
};

struct AlgorithmSpec {
  AlgorithmId id = AlgorithmId::kExp3;
  std::size_t K = 20;
  double gamma = 0.1;
  double eta = 0.025;
  double lambda = 0.7;
  // income only
  std::vector<double> wage_grid{0.0};
  std::vector<double> omega{0.7};
  WageSpec wage;
};

struct EnvSpec {
  std::string kind = "uniform";  // uniform | discrete | four_point_mu | concave_f | fixed_sequence
  /// For the two lower-bound families: epsilon = epsilon * T^(-epsilon_exponent).
  double epsilon = 0.0;
  double epsilon_exponent = 0.0;
  /// Weight used to build the lower-bound families; defaults to the algorithm's.
  std::optional<double> lambda;
  std::vector<Atom> support;
  std::vector<double> values;
  std::string path;
  /// Freeze each replication's draws into a fixed sequence and measure
  /// adversarial regret against it.
  bool freeze = false;
};

struct ExperimentPlan {
  std::string name = "experiment";
  AlgorithmSpec algorithm;
  EnvSpec environment;
  std::vector<std::uint64_t> horizons;
  std::uint64_t replications = 1;
  std::uint64_t seed = 0;
  std::size_t checkpoints_per_decade = 10;
  std::string output;

  /// Throws DomainError naming the offending field.
  void validate() const;
};

/// Geometrically spaced rounds in [1, T], always ending at T.
std::vector<std::uint64_t> checkpoint_rounds(std::uint64_t T, std::size_t per_decade);

/// Seed of replication r at horizon T.
std::uint64_t replication_seed(std::uint64_t base, std::uint64_t T, std::uint64_t r) noexcept;

/// Environment of a plan at horizon T (epsilon schedule applied), unseeded.
Environment make_environment(const EnvSpec& spec, double algorithm_lambda, std::uint64_t T);

/// The algorithm parameters actually used at horizon T (re-tuned for
/// exp3_tuned).
Exp3Config exp3_config_for(const AlgorithmSpec& spec, std::uint64_t T);

struct Replication {
  std::vector<double> cum_regret;           // at each checkpoint
  std::vector<double> cum_realized_regret;  // realized-welfare counterpart
  bool decomposition_ok = true;             // income: total == sum over brackets
};

struct CurvePoint {
  std::uint64_t t;
  double mean;
  double se;
  double lower;  // 95% normal band
  double upper;
  double mean_realized;
};

struct HorizonResult {
  std::uint64_t T;
  Exp3Config config;       // parameters used at this horizon (K, gamma, eta, lambda)
  bool tuning_clamped = false;
  double epsilon = 0.0;    // environment epsilon at this horizon
  std::vector<std::uint64_t> checkpoints;
  std::vector<Replication> replications;
  std::vector<CurvePoint> curve;
  bool decomposition_ok = true;
};

struct ResultSet {
  ExperimentPlan plan;
  std::vector<HorizonResult> horizons;
};

/// Runs one replication. Exposed for tests.
Replication run_replication(const ExperimentPlan& plan, std::uint64_t T, std::uint64_t r,
                            const std::vector<std::uint64_t>& checkpoints);

/// Runs every (T, r) pair on `threads` workers (0 = hardware concurrency).
ResultSet run_plan(const ExperimentPlan& plan, unsigned threads = 1);

/// Mean, standard error and 95% band across replications, per checkpoint.
std::vector<CurvePoint> aggregate(const std::vector<Replication>& reps, const std::vector<std::uint64_t>& checkpoints);

struct RateFit {
  double slope;
  double intercept;
  double r_squared;
  double slope_se;  // standard error of the slope; 0 with only two points
};

/// Least squares of log y on log x. Throws DomainError on fewer than two
/// points or a nonpositive y (degenerate series).
RateFit fit_rate(const std::vector<double>& xs, const std::vector<double>& ys);

/// Fit of final mean regret against T over the plan's horizons.
RateFit fit_rate(const ResultSet& results);

/// Throws DomainError unless there are >= 4 horizons spanning >= 2 decades.
void require_rate_sweep(const std::vector<std::uint64_t>& horizons);

using BoundFunction = std::function<double(const HorizonResult&, std::uint64_t t)>;

struct BoundRow {
  std::uint64_t T;
  std::uint64_t t;
  double mean;
  double se;
  double bound;
  bool ok;
};

struct BoundReport {
  bool applicable = true;  // false when some horizon is outside the theorem's regime
  bool pass = true;
  std::vector<BoundRow> rows;
};

/// mean + 3 SE <= bound at every checkpoint of every horizon.
BoundReport compare_to_bound(const ResultSet& results, const BoundFunction& bound);

/// The theorem bound for the algorithm of the plan, or nullopt if none applies.
std::optional<BoundFunction> default_bound(const ExperimentPlan& plan);

/// CSV with header algo,env,T,rep,checkpoint_t,cum_regret.
void write_csv(const ResultSet& results, std::ostream& out);

/// Summary document: plan echo, mean curves, rate fit, bound comparison.
std::string summary_json(const ResultSet& results);

/// Writes <dir>/<name>.csv and <dir>/<name>.summary.json. Errors carry the path.
void write_results(const ResultSet& results, const std::string& dir);

}  // namespace welfare
