#pragma once

// Valuation environments: i.i.d. draws from known distributions (including
// the two hard-instance families used in the lower-bound constructions) and
// fixed oblivious sequences.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "welfare/model.hpp"
#include "welfare/rng.hpp"

namespace welfare {

// ---------------------------------------------------------------------------
// Four-point family: atoms (1/4, 1/2, 3/4, 1) with masses
// (a, (1+eps) b, (1-eps) b, 1 - a - 2b).

struct MuEpsilonConstants {
  double a;
  double b;
};

MuEpsilonConstants mu_epsilon_constants(double lambda);

struct LowerBoundConstants {
  double c1;
  double c2;
  double c3;
  double C;
};

LowerBoundConstants lower_bound_proof_constants(double lambda);

/// Throws DomainError for lambda outside (0,1) or eps outside [-1,1].
DiscreteDistribution mu_epsilon_distribution(double lambda, double epsilon);

struct IdentityCheck {
  std::string name;
  double lhs;
  double rhs;
  double tolerance;
  bool pass;
};

struct IdentityReport {
  double lambda;
  double epsilon;
  std::vector<IdentityCheck> checks;
  bool all_pass() const noexcept;
};

/// Evaluates the welfare identities of the four-point family through
/// expected_welfare_discrete. `perturbation` is added to the left-hand sides
/// and exists so the failure path can be exercised.
IdentityReport check_mu_identities(double lambda, double epsilon, double perturbation = 0.0);

// ---------------------------------------------------------------------------
// Concave family with density
//   c * ((2^{2-lambda} - 8 h eps) x          on [0, 1/2)
//        x^{-(2-lambda)}                      on [1/2, 1-h]
//        (eta + eps)                          on (1-h, 1])

class ConcaveFamily {
 public:
  ConcaveFamily(double lambda, double epsilon);

  static double h_bar(double lambda);
  static double eta_bar(double lambda);
  static double eps_bar(double lambda);
  /// Normalizing constant, from the closed-form integral of the eps = 0 density.
  static double c_bar(double lambda);

  double lambda() const noexcept { return lambda_; }
  double epsilon() const noexcept { return epsilon_; }
  double h() const noexcept { return h_; }
  double eta() const noexcept { return eta_; }
  double c() const noexcept { return c_; }

  double density(double x) const noexcept;
  double cdf(double x) const noexcept;
  double survival(double x) const noexcept { return 1.0 - cdf(x); }
  /// E[max(v - x, 0)].
  double integrated_demand(double x) const noexcept;
  /// Expected welfare at the family's own lambda.
  double expected_welfare(double x) const noexcept;
  double quantile(double u) const noexcept;
  /// Slope of expected welfare on the middle piece [1/2, 1-h].
  double middle_slope() const noexcept;
  /// 1-h for eps > 0, 1/2 for eps < 0 (either endpoint for eps = 0).
  double optimal_policy() const noexcept;

 private:
  double mass(double lo, double hi) const noexcept;
  double first_moment(double lo, double hi) const noexcept;

  double lambda_;
  double epsilon_;
  double h_;
  double eta_;
  double c_;
  double slope_low_;  // 2^{2-lambda} - 8 h eps
};

// ---------------------------------------------------------------------------

struct UniformEnv {};
struct DiscreteEnv {
  DiscreteDistribution dist;
};
struct FourPointMuEnv {
  double lambda;
  double epsilon;
  DiscreteDistribution dist;
};
struct ConcaveEnv {
  ConcaveFamily family;
};
struct FixedSequenceEnv {
  std::vector<double> values;
};

/// An immutable valuation source. draw() is a pure function of (seed, round).
class Environment {
 public:
  using Kind = std::variant<UniformEnv, DiscreteEnv, FourPointMuEnv, ConcaveEnv, FixedSequenceEnv>;

  static Environment uniform(std::uint64_t seed = 0);
  static Environment discrete(std::vector<Atom> support, std::uint64_t seed = 0);
  static Environment four_point_mu(double lambda, double epsilon, std::uint64_t seed = 0);
  static Environment concave_f(double lambda, double epsilon, std::uint64_t seed = 0);
  static Environment fixed_sequence(std::vector<double> values);

  Environment with_seed(std::uint64_t seed) const;

  const Kind& kind() const noexcept { return kind_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::string name() const;

  bool is_stochastic() const noexcept;
  /// Number of available rounds for fixed sequences; 0 means unbounded.
  std::size_t length() const noexcept;

  /// Valuation for round >= 1. Throws std::out_of_range past the end of a
  /// fixed sequence.
  double draw(std::uint64_t round) const;

  /// Expected welfare under the environment's distribution. Throws
  /// DomainError for fixed sequences.
  double expected_welfare(double x, double lambda) const;

 private:
  Environment(Kind kind, std::uint64_t seed);

  Kind kind_;
  std::uint64_t seed_;
  CounterStream stream_;
};

double draw_valuation(const Environment& env, std::uint64_t round);

/// First `length` draws of a stochastic environment, frozen into a fixed sequence.
Environment freeze(const Environment& env, std::size_t length);

/// Reads one decimal value in [0,1] per line. Blank lines and lines starting
/// with '#' are skipped. Errors carry the path and line number.
std::vector<double> load_sequence_file(const std::filesystem::path& path);

}  // namespace welfare
