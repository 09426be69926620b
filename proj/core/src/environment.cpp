#include "welfare/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace welfare {

namespace {

void require_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw DomainError("lambda must lie in (0,1), got " + std::to_string(lambda));
  }
}

}  // namespace

MuEpsilonConstants mu_epsilon_constants(double lambda) {
  require_lambda(lambda);
  const double one_minus = 1.0 - lambda;
  const double a = one_minus * (136.0 - 99.0 * lambda) /
                   (2.0 * (4.0 - 3.0 * lambda) * (24.0 - 17.0 * lambda));
  const double b = one_minus / (2.0 * (24.0 - 17.0 * lambda));
  return {a, b};
}

LowerBoundConstants lower_bound_proof_constants(double lambda) {
  const auto [a, b] = mu_epsilon_constants(lambda);
  LowerBoundConstants k{};
  k.c1 = lambda / 4.0 * b;
  k.c2 = 0.125 * (1.0 - lambda) / (4.0 - 3.0 * lambda);
  k.c3 = b * std::sqrt(2.0 / (a * (1.0 - a - 2.0 * b)));
  k.C = std::min({k.c1 * k.c1 * k.c3 * k.c3 / k.c2, k.c2 / 2.0,
                  std::cbrt(k.c1 * k.c1 * k.c2 / (k.c3 * k.c3)) / 16.0});
  return k;
}

DiscreteDistribution mu_epsilon_distribution(double lambda, double epsilon) {
  if (!(epsilon >= -1.0 && epsilon <= 1.0)) {
    throw DomainError("four-point family needs epsilon in [-1,1], got " + std::to_string(epsilon));
  }
  const auto [a, b] = mu_epsilon_constants(lambda);
  return DiscreteDistribution({{0.25, a},
                               {0.5, (1.0 + epsilon) * b},
                               {0.75, (1.0 - epsilon) * b},
                               {1.0, 1.0 - a - 2.0 * b}});
}

bool IdentityReport::all_pass() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.pass; });
}

IdentityReport check_mu_identities(double lambda, double epsilon, double perturbation) {
  constexpr double kTol = 1e-10;
  const auto consts = lower_bound_proof_constants(lambda);
  const auto dist = mu_epsilon_distribution(lambda, epsilon);
  const auto plus = mu_epsilon_distribution(lambda, 1.0);
  const auto minus = mu_epsilon_distribution(lambda, -1.0);
  auto W = [lambda](const DiscreteDistribution& d, double x) { return expected_welfare_discrete(x, d, lambda); };

  IdentityReport report{lambda, epsilon, {}};
  auto add = [&](std::string name, double lhs, double rhs, double tol) {
    const bool ok = std::abs(lhs - rhs) <= tol;
    report.checks.push_back({std::move(name), lhs, rhs, tol, ok});
  };

  add("W(1) - W(1/4) = c1 * eps", W(dist, 1.0) - W(dist, 0.25) + perturbation, consts.c1 * epsilon, kTol);
  add("W^{+1}(1/4) - W^{-1}(3/4) = c2", W(plus, 0.25) - W(minus, 0.75) + perturbation, consts.c2, kTol);

  // Welfare is increasing between atoms and drops right after each atom, so
  // the maximum over a region is attained at an atom or the region's right
  // end; a dense grid plus the atoms is an exhaustive candidate set.
  auto region_max = [&](const DiscreteDistribution& d, double lo, double hi, bool lo_open) {
    double best = -std::numeric_limits<double>::infinity();
    constexpr int kGrid = 4000;
    for (int i = 0; i <= kGrid; ++i) {
      const double x = lo + (hi - lo) * i / kGrid;
      if (lo_open && x <= lo) continue;
      best = std::max(best, W(d, x));
    }
    for (const auto& a : d.atoms()) {
      if ((lo_open ? a.value > lo : a.value >= lo) && a.value <= hi) best = std::max(best, W(d, a.value));
    }
    return best;
  };
  add("max over (1/2,3/4] attained at 3/4", region_max(dist, 0.5, 0.75, true) + perturbation, W(dist, 0.75), kTol);
  add("max over [0,1/2] attained at 1/4", region_max(dist, 0.0, 0.5, false) + perturbation, W(dist, 0.25), kTol);
  add("max over (3/4,1] attained at 1", region_max(dist, 0.75, 1.0, true) + perturbation, W(dist, 1.0), kTol);
  add("C > 0", consts.C > 0.0 ? 1.0 : 0.0, 1.0, 0.0);
  return report;
}

// ---------------------------------------------------------------------------

double ConcaveFamily::h_bar(double lambda) { return (1.0 - std::sqrt(1.0 - lambda)) / 2.0; }

double ConcaveFamily::eta_bar(double lambda) {
  const double h = h_bar(lambda);
  return 1.0 / (h * std::pow(1.0 - h, 1.0 - lambda) * (1.0 - lambda));
}

double ConcaveFamily::eps_bar(double lambda) {
  return 0.5 * std::min(eta_bar(lambda), 2.0 / 3.0 * std::pow(2.0, -lambda));
}

double ConcaveFamily::c_bar(double lambda) {
  const double h = h_bar(lambda);
  const double low = std::pow(2.0, -1.0 - lambda);  // 2^{2-lambda} / 8
  const double mid = (std::pow(0.5, lambda - 1.0) - std::pow(1.0 - h, lambda - 1.0)) / (1.0 - lambda);
  const double high = eta_bar(lambda) * h;
  return 1.0 / (low + mid + high);
}

ConcaveFamily::ConcaveFamily(double lambda, double epsilon) : lambda_(lambda), epsilon_(epsilon) {
  require_lambda(lambda);
  if (!(std::abs(epsilon) < eps_bar(lambda))) {
    throw DomainError("concave family needs |epsilon| < " + std::to_string(eps_bar(lambda)) + ", got " +
                      std::to_string(epsilon));
  }
  h_ = h_bar(lambda);
  eta_ = eta_bar(lambda);
  c_ = c_bar(lambda);
  slope_low_ = std::pow(2.0, 2.0 - lambda) - 8.0 * h_ * epsilon;
}

double ConcaveFamily::density(double x) const noexcept {
  if (x < 0.0 || x > 1.0) return 0.0;
  if (x < 0.5) return c_ * slope_low_ * x;
  if (x <= 1.0 - h_) return c_ * std::pow(x, lambda_ - 2.0);
  return c_ * (eta_ + epsilon_);
}

double ConcaveFamily::mass(double lo, double hi) const noexcept {
  double m = 0.0;
  const double mid_hi = 1.0 - h_;
  if (double a = std::max(lo, 0.0), b = std::min(hi, 0.5); a < b) {
    m += c_ * slope_low_ * (b * b - a * a) / 2.0;
  }
  if (double a = std::max(lo, 0.5), b = std::min(hi, mid_hi); a < b) {
    m += c_ * (std::pow(a, lambda_ - 1.0) - std::pow(b, lambda_ - 1.0)) / (1.0 - lambda_);
  }
  if (double a = std::max(lo, mid_hi), b = std::min(hi, 1.0); a < b) {
    m += c_ * (eta_ + epsilon_) * (b - a);
  }
  return m;
}

double ConcaveFamily::first_moment(double lo, double hi) const noexcept {
  double m = 0.0;
  const double mid_hi = 1.0 - h_;
  if (double a = std::max(lo, 0.0), b = std::min(hi, 0.5); a < b) {
    m += c_ * slope_low_ * (b * b * b - a * a * a) / 3.0;
  }
  if (double a = std::max(lo, 0.5), b = std::min(hi, mid_hi); a < b) {
    m += c_ * (std::pow(b, lambda_) - std::pow(a, lambda_)) / lambda_;
  }
  if (double a = std::max(lo, mid_hi), b = std::min(hi, 1.0); a < b) {
    m += c_ * (eta_ + epsilon_) * (b * b - a * a) / 2.0;
  }
  return m;
}

double ConcaveFamily::cdf(double x) const noexcept {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return mass(0.0, x);
}

double ConcaveFamily::integrated_demand(double x) const noexcept {
  x = std::clamp(x, 0.0, 1.0);
  return first_moment(x, 1.0) - x * mass(x, 1.0);
}

double ConcaveFamily::expected_welfare(double x) const noexcept {
  x = std::clamp(x, 0.0, 1.0);
  return x * mass(x, 1.0) + lambda_ * integrated_demand(x);
}

double ConcaveFamily::quantile(double u) const noexcept {
  const double f_low = mass(0.0, 0.5);
  if (u < f_low) return std::sqrt(2.0 * u / (c_ * slope_low_));
  const double f_mid = f_low + mass(0.5, 1.0 - h_);
  if (u < f_mid) {
    const double t = std::pow(0.5, lambda_ - 1.0) - (u - f_low) * (1.0 - lambda_) / c_;
    return std::pow(t, 1.0 / (lambda_ - 1.0));
  }
  return std::min(1.0, (1.0 - h_) + (u - f_mid) / (c_ * (eta_ + epsilon_)));
}

double ConcaveFamily::middle_slope() const noexcept { return c_ * (1.0 - lambda_) * h_ * epsilon_; }

double ConcaveFamily::optimal_policy() const noexcept { return epsilon_ > 0.0 ? 1.0 - h_ : 0.5; }

// ---------------------------------------------------------------------------

Environment::Environment(Kind kind, std::uint64_t seed)
    : kind_(std::move(kind)), seed_(seed), stream_(derive_key(seed, {kEnvironmentStream})) {}

Environment Environment::uniform(std::uint64_t seed) { return Environment(UniformEnv{}, seed); }

Environment Environment::discrete(std::vector<Atom> support, std::uint64_t seed) {
  return Environment(DiscreteEnv{DiscreteDistribution(std::move(support))}, seed);
}

Environment Environment::four_point_mu(double lambda, double epsilon, std::uint64_t seed) {
  return Environment(FourPointMuEnv{lambda, epsilon, mu_epsilon_distribution(lambda, epsilon)}, seed);
}

Environment Environment::concave_f(double lambda, double epsilon, std::uint64_t seed) {
  return Environment(ConcaveEnv{ConcaveFamily(lambda, epsilon)}, seed);
}

Environment Environment::fixed_sequence(std::vector<double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
      throw DomainError("fixed sequence value " + std::to_string(i + 1) + " outside [0,1]");
    }
  }
  return Environment(FixedSequenceEnv{std::move(values)}, 0);
}

Environment Environment::with_seed(std::uint64_t seed) const { return Environment(kind_, seed); }

std::string Environment::name() const {
  struct Namer {
    std::string operator()(const UniformEnv&) const { return "uniform"; }
    std::string operator()(const DiscreteEnv&) const { return "discrete"; }
    std::string operator()(const FourPointMuEnv&) const { return "four_point_mu"; }
    std::string operator()(const ConcaveEnv&) const { return "concave_f"; }
    std::string operator()(const FixedSequenceEnv&) const { return "fixed_sequence"; }
  };
  return std::visit(Namer{}, kind_);
}

bool Environment::is_stochastic() const noexcept { return !std::holds_alternative<FixedSequenceEnv>(kind_); }

std::size_t Environment::length() const noexcept {
  if (const auto* f = std::get_if<FixedSequenceEnv>(&kind_)) return f->values.size();
  return 0;
}

double Environment::draw(std::uint64_t round) const {
  if (round == 0) throw std::out_of_range("rounds are numbered from 1");
  if (const auto* f = std::get_if<FixedSequenceEnv>(&kind_)) {
    if (round > f->values.size()) {
      throw std::out_of_range("round " + std::to_string(round) + " beyond fixed sequence of length " +
                              std::to_string(f->values.size()));
    }
    return f->values[round - 1];
  }
  const double u = stream_.uniform(round);
  if (std::holds_alternative<UniformEnv>(kind_)) return u;
  if (const auto* d = std::get_if<DiscreteEnv>(&kind_)) return d->dist.quantile(u);
  if (const auto* m = std::get_if<FourPointMuEnv>(&kind_)) return m->dist.quantile(u);
  return std::get<ConcaveEnv>(kind_).family.quantile(u);
}

double Environment::expected_welfare(double x, double lambda) const {
  if (std::holds_alternative<UniformEnv>(kind_)) return expected_welfare_uniform(x, lambda);
  if (const auto* d = std::get_if<DiscreteEnv>(&kind_)) return d->dist.expected_welfare(x, lambda);
  if (const auto* m = std::get_if<FourPointMuEnv>(&kind_)) return m->dist.expected_welfare(x, lambda);
  if (const auto* c = std::get_if<ConcaveEnv>(&kind_)) {
    const auto& fam = c->family;
    const double xc = std::clamp(x, 0.0, 1.0);
    return xc * fam.survival(xc) + lambda * fam.integrated_demand(xc);
  }
  throw DomainError("fixed sequences have no expected welfare");
}

double draw_valuation(const Environment& env, std::uint64_t round) { return env.draw(round); }

Environment freeze(const Environment& env, std::size_t length) {
  if (!env.is_stochastic()) throw DomainError("freeze needs a stochastic environment");
  std::vector<double> values(length);
  for (std::size_t i = 0; i < length; ++i) values[i] = env.draw(i + 1);
  return Environment::fixed_sequence(std::move(values));
}

std::vector<double> load_sequence_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sequence file " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string_view token(line.data() + first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": not a number: '" +
                               std::string(token) + "'");
    }
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": value outside [0,1]");
    }
    values.push_back(v);
  }
  return values;
}

}  // namespace welfare
