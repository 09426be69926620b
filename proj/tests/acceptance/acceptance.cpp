// Acceptance run: one PASS/FAIL line per criterion, with the measured values.
//
//   acceptance            runs criteria 1-9
//   acceptance 4 6        runs only the listed criteria
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "welfare/dyadic.hpp"
#include "welfare/environment.hpp"
#include "welfare/exp3.hpp"
#include "welfare/harness.hpp"
#include "welfare/income.hpp"
#include "welfare/regret.hpp"
#include "welfare/rng.hpp"

using namespace welfare;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentPlan exp3_plan(std::size_t K, double gamma, double eta, double lambda, EnvSpec env,
                         std::vector<std::uint64_t> horizons, std::uint64_t reps, std::uint64_t seed) {
  ExperimentPlan p;
  p.name = "acceptance";
  p.algorithm.id = AlgorithmId::kExp3;
  p.algorithm.K = K;
  p.algorithm.gamma = gamma;
  p.algorithm.eta = eta;
  p.algorithm.lambda = lambda;
  p.environment = std::move(env);
  p.horizons = std::move(horizons);
  p.replications = reps;
  p.seed = seed;
  p.checkpoints_per_decade = 4;
  return p;
}

EnvSpec env_of(const std::string& kind, double epsilon = 0.0) {
  EnvSpec e;
  e.kind = kind;
  e.epsilon = epsilon;
  return e;
}

// Exp3 on the uniform law with K=20, gamma=0.1, eta=0.025, lambda=0.7: the
// per-round regret at T=1e5, with a one-sided 95% upper bound, is below half
// the per-round regret of the uniform-random start.
Outcome criterion1() {
  const double lambda = 0.7;
  const std::size_t K = 20;
  const auto plan = exp3_plan(K, 0.1, 0.025, lambda, env_of("uniform"), {100000}, 4000, 2024);
  const auto res = run_plan(plan, 0);
  const auto& last = res.horizons[0].curve.back();
  const double T = static_cast<double>(last.t);

  const auto best = best_constant_stochastic(Environment::uniform(), lambda);
  double grid_mean = 0.0;
  for (std::size_t k = 0; k <= K; ++k) grid_mean += expected_welfare_uniform(static_cast<double>(k) / K, lambda);
  const double initial = best.welfare - grid_mean / static_cast<double>(K + 1);

  const double ratio = last.mean / T / initial;
  const double upper = (last.mean + 1.645 * last.se) / T / initial;
  return {upper < 0.5, fmt("4000 reps, T=1e5: R/T=%.6f, initial level %.6f, ratio %.4f (95%% upper %.4f) < 0.5",
                           last.mean / T, initial, ratio, upper)};
}

// Five parameter sets inside the regime (K+1) eta < gamma, five environments,
// 1000 replications: mean + 3 SE stays below the bound at every checkpoint.
Outcome criterion2() {
  struct Cfg {
    std::size_t K;
    double gamma, eta, lambda;
  };
  const std::vector<Cfg> cfgs{{10, 0.3, 0.01, 0.7}, {20, 0.5, 0.01, 0.5}, {5, 0.2, 0.02, 0.9},
                              {8, 0.4, 0.03, 0.3},  {15, 0.6, 0.02, 0.95}};
  EnvSpec discrete = env_of("discrete");
  discrete.support = {{0.2, 0.3}, {0.5, 0.4}, {0.9, 0.3}};
  EnvSpec frozen = env_of("four_point_mu", 0.5);
  frozen.freeze = true;
  const std::vector<EnvSpec> envs{env_of("uniform"), discrete, env_of("four_point_mu", 0.5), env_of("concave_f"),
                                  frozen};
  const std::vector<std::string> labels{"uniform", "discrete", "four_point_mu", "concave_f", "frozen four_point_mu"};

  bool pass = true;
  int rows = 0, failures = 0;
  double worst = 0.0;
  std::uint64_t seed = 100;
  std::string failed;
  for (const auto& c : cfgs) {
    for (std::size_t e = 0; e < envs.size(); ++e) {
      const auto plan = exp3_plan(c.K, c.gamma, c.eta, c.lambda, envs[e], {2000}, 1000, seed++);
      const auto res = run_plan(plan, 0);
      const auto bound = default_bound(plan);
      if (!bound) return {false, "no bound available for " + labels[e]};
      const auto report = compare_to_bound(res, *bound);
      if (!report.applicable) return {false, "configuration outside the regime"};
      for (const auto& r : report.rows) {
        ++rows;
        worst = std::max(worst, (r.mean + 3.0 * r.se) / r.bound);
        if (!r.ok) ++failures;
      }
      if (!report.pass) {
        pass = false;
        failed += fmt(" [K=%zu %s]", c.K, labels[e].c_str());
      }
    }
  }
  return {pass, fmt("25 runs x 1000 reps, T=2000: %d checkpoints, %d above bound, max (mean+3SE)/bound %.4f",
                    rows, failures, worst) + failed};
}

// Four-point identities on a 5 x 5 grid to 1e-10, and C(lambda) > 0.
Outcome criterion3() {
  const std::vector<double> lambdas{0.1, 0.3, 0.5, 0.7, 0.95};
  const std::vector<double> epsilons{-1.0, -0.5, 0.0, 0.5, 1.0};
  int checks = 0, failures = 0;
  double worst = 0.0, min_c = 1e300;
  for (double lambda : lambdas) {
    for (double eps : epsilons) {
      for (const auto& c : check_mu_identities(lambda, eps).checks) {
        ++checks;
        const double err = std::abs(c.lhs - c.rhs);
        worst = std::max(worst, err);
        if (!c.pass || err > 1e-10) ++failures;
      }
    }
    min_c = std::min(min_c, lower_bound_proof_constants(lambda).C);
  }
  return {failures == 0 && min_c > 0.0,
          fmt("%d identities, max error %.3g, %d failures; min C(lambda) = %.6g", checks, worst, failures, min_c)};
}

// Fitted regret exponents: tuned Exp3 on the four-point family with
// eps = T^(-1/3) in [0.55, 0.80]; dyadic search on uniform and concave_f in
// [0.40, 0.65]; synthetic power laws recovered to 1e-9.
Outcome criterion4() {
  bool pass = true;
  std::string detail;

  ExperimentPlan exp3;
  exp3.name = "acceptance";
  exp3.algorithm.id = AlgorithmId::kExp3Tuned;
  exp3.algorithm.lambda = 0.95;
  exp3.environment = env_of("four_point_mu", 1.0);
  exp3.environment.epsilon_exponent = 1.0 / 3.0;
  exp3.horizons = {10000, 31623, 100000, 316228, 1000000};
  exp3.replications = 3;
  exp3.seed = 7;
  exp3.checkpoints_per_decade = 4;
  const auto fit_exp3 = fit_rate(run_plan(exp3, 0));
  const bool ok_exp3 = fit_exp3.slope >= 0.55 && fit_exp3.slope <= 0.80;
  pass = pass && ok_exp3;
  detail += fmt("exp3_tuned slope %.3f (r^2 %.4f) %s; ", fit_exp3.slope, fit_exp3.r_squared,
                ok_exp3 ? "in [0.55,0.80]" : "OUTSIDE [0.55,0.80]");

  auto dyadic_plan = [](EnvSpec env) {
    ExperimentPlan p;
    p.name = "acceptance";
    p.algorithm.id = AlgorithmId::kDyadic;
    p.algorithm.lambda = 0.7;
    p.environment = std::move(env);
    p.horizons = {10000, 100000, 1000000, 10000000};
    p.replications = 3;
    p.seed = 11;
    p.checkpoints_per_decade = 4;
    return p;
  };
  const double eps = ConcaveFamily::eps_bar(0.7) / 2.0;
  for (const auto& [label, env] : {std::pair{std::string("uniform"), env_of("uniform")},
                                   std::pair{std::string("concave_f"), env_of("concave_f", eps)}}) {
    const auto fit = fit_rate(run_plan(dyadic_plan(env), 0));
    const bool ok = fit.slope >= 0.40 && fit.slope <= 0.65;
    pass = pass && ok;
    detail += fmt("dyadic %s slope %.3f %s; ", label.c_str(), fit.slope, ok ? "in [0.40,0.65]" : "OUTSIDE [0.40,0.65]");
  }

  double worst = 0.0;
  for (double a : {0.5, 2.0 / 3.0, 0.75}) {
    for (double c : {0.3, 1.0, 40.0}) {
      std::vector<double> xs, ys;
      for (double T = 1e3; T <= 1e7; T *= 3.1) {
        xs.push_back(T);
        ys.push_back(c * std::pow(T, a));
      }
      worst = std::max(worst, std::abs(fit_rate(xs, ys).slope - a));
    }
  }
  const bool ok_synth = worst <= 1e-9;
  pass = pass && ok_synth;
  detail += fmt("synthetic power laws max slope error %.3g", worst);
  return {pass, detail};
}

// Dyadic search with delta = T^(-5/2) on the uniform law, 200 seeds, T=1e5:
// the final interval contains the optimum in at least 95% of runs and the
// active intervals are nested.
Outcome criterion5() {
  const double lambda = 0.7;
  constexpr std::uint64_t T = 100000;
  const double x_star = best_constant_stochastic(Environment::uniform(), lambda).x;
  const auto cfg = DyadicConfig::for_horizon(lambda, static_cast<double>(T));
  int contained = 0, monotone = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto run = run_dyadic(cfg, Environment::uniform(replication_seed(5, T, s)), T);
    if (run.final_lo <= x_star && x_star <= run.final_hi) ++contained;
    bool nested = true;
    for (std::size_t i = 1; i < run.epochs.size(); ++i) {
      const auto& a = run.epochs[i - 1];
      const auto& b = run.epochs[i];
      if (b.lo < a.lo || b.hi > a.hi || b.hi - b.lo > a.hi - a.lo) nested = false;
    }
    if (run.final_lo < run.epochs.back().lo || run.final_hi > run.epochs.back().hi) nested = false;
    if (nested) ++monotone;
  }
  return {contained >= 190 && monotone == 200,
          fmt("x*=%.6f contained in %d/200 final intervals (need >= 190); widths nonincreasing in %d/200", x_star,
              contained, monotone)};
}

// Best-constant oracle against a 1e6-point grid on 100 sequences of length 50.
Outcome criterion6() {
  constexpr int kSequences = 100;
  constexpr int kLength = 50;
  constexpr int kGrid = 1000000;
  const CounterStream stream(derive_key(6, {6}));
  std::uint64_t counter = 0;
  double worst = 0.0;
  for (int s = 0; s < kSequences; ++s) {
    const double lambda = stream.uniform(counter++);
    std::vector<double> values(kLength);
    for (auto& v : values) v = static_cast<double>(stream.bits(counter++) % (kGrid + 1)) / kGrid;
    const auto oracle = best_constant_adversarial(values, lambda);
    double brute = -1.0;
    for (int i = 0; i <= kGrid; ++i) {
      brute = std::max(brute, cumulative_welfare(static_cast<double>(i) / kGrid, values, lambda));
    }
    worst = std::max(worst, std::abs(oracle.welfare - brute));
  }
  return {worst <= 1e-9, fmt("100 sequences, max |oracle - grid| = %.3g (tolerance 1e-9)", worst)};
}

// Reductions: income model with one bracket, unit wage, omega = lambda and
// cost 1 - v reproduces Tempered Exp3; lambda = 0 reproduces revenue Exp3.
Outcome criterion7() {
  constexpr std::uint64_t T = 20000;
  const double lambda = 0.65;
  const CounterStream s(derive_key(7, {1}));
  std::vector<double> values(T), costs(T);
  for (std::size_t i = 0; i < T; ++i) {
    values[i] = static_cast<double>(s.bits(i) % 1025) / 1024.0;
    costs[i] = 1.0 - values[i];
  }
  const auto env = Environment::fixed_sequence(values);
  const auto cost_env = Environment::fixed_sequence(costs);
  const auto draws = CounterStream(derive_key(7, {kPolicyStream}));

  IncomeExp3 income({12, 0.2, 0.01, {0.0}, {lambda}});
  TemperedExp3 tempered({12, 0.2, 0.01, lambda});
  std::uint64_t income_mismatch = 0;
  for (std::uint64_t t = 1; t <= T; ++t) {
    const auto a = income_step(income, draws.uniform(t), 1.0, cost_env.draw(t));
    const auto b = tempered.step(draws.uniform(t), env.draw(t));
    if (a.schedule.arms[0] != b.arm || a.y != b.y) ++income_mismatch;
  }
  const auto sa = income.sw_hat(0);
  const bool income_equal = income_mismatch == 0 && std::equal(sa.begin(), sa.end(), tempered.state().sw_hat.begin());

  TemperedExp3 revenue({12, 0.1, 0.005, 0.0});
  MonopolyExp3 mono(12, 0.1, 0.005);
  const auto uenv = Environment::uniform(7);
  std::uint64_t mono_mismatch = 0;
  for (std::uint64_t t = 1; t <= T; ++t) {
    const auto a = revenue.step(draws.uniform(t), uenv.draw(t));
    const auto b = mono.step(draws.uniform(t), uenv.draw(t));
    if (a.arm != b.arm || a.p != b.p) ++mono_mismatch;
  }
  const auto rev = mono.revenue_hat();
  const bool mono_equal = mono_mismatch == 0 && std::equal(rev.begin(), rev.end(), revenue.state().sw_hat.begin());

  return {income_equal && mono_equal,
          fmt("%llu rounds: income arm mismatches %llu, estimates %s; lambda=0 mismatches %llu, estimates %s",
              static_cast<unsigned long long>(T), static_cast<unsigned long long>(income_mismatch),
              income_equal ? "identical" : "differ", static_cast<unsigned long long>(mono_mismatch),
              mono_equal ? "identical" : "differ")};
}

// Unbiasedness of the cumulative welfare estimates over replays of a fixed
// ten-round sequence.
Outcome criterion8() {
  const Exp3Config cfg{20, 0.3, 0.01, 0.7};
  const std::vector<double> v{0.05, 0.93, 0.41, 0.67, 0.22, 0.88, 0.5, 0.15, 0.74, 0.36};
  const std::size_t arms = cfg.K + 1;
  std::vector<double> target(arms, 0.0);
  for (std::size_t k = 0; k < arms; ++k) {
    const double xk = static_cast<double>(k) / cfg.K;
    for (double vi : v) {
      double above = 0.0;
      for (std::size_t j = k + 1; j < arms; ++j) above += static_cast<double>(j) / cfg.K <= vi ? 1.0 : 0.0;
      target[k] += (xk <= vi ? xk : 0.0) + cfg.lambda / cfg.K * above;
    }
  }

  constexpr int kReplays = 100000;
  std::vector<double> sum(arms, 0.0), sum2(arms, 0.0);
  const CounterStream draws(derive_key(8, {kPolicyStream}));
  std::uint64_t c = 0;
  for (int r = 0; r < kReplays; ++r) {
    TemperedExp3 algo(cfg);
    for (double vi : v) algo.step(draws.uniform(c++), vi);
    for (std::size_t k = 0; k < arms; ++k) {
      const double s = algo.state().sw_hat[k];
      sum[k] += s;
      sum2[k] += s * s;
    }
  }
  int outside = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < arms; ++k) {
    const double mean = sum[k] / kReplays;
    const double var = (sum2[k] - kReplays * mean * mean) / (kReplays - 1);
    const double se = std::sqrt(var / kReplays);
    const double z = std::abs(mean - target[k]) / se;
    worst = std::max(worst, z);
    if (z > 3.0) ++outside;
  }
  return {outside == 0, fmt("1e5 replays, %zu arms: max |mean - target| / SE = %.3f, %d arms beyond 3 SE", arms, worst,
                            outside)};
}

// The CSV is byte-identical for 1, 2 and 8 worker threads.
Outcome criterion9() {
  std::vector<ExperimentPlan> plans;
  plans.push_back(exp3_plan(10, 0.2, 0.01, 0.7, env_of("uniform"), {500, 3000}, 24, 3));
  EnvSpec frozen = env_of("four_point_mu", 0.5);
  frozen.freeze = true;
  plans.push_back(exp3_plan(10, 0.2, 0.01, 0.7, frozen, {1000}, 16, 4));
  ExperimentPlan dyadic;
  dyadic.name = "acceptance";
  dyadic.algorithm.id = AlgorithmId::kDyadic;
  dyadic.algorithm.lambda = 0.6;
  dyadic.environment = env_of("uniform");
  dyadic.horizons = {5000};
  dyadic.replications = 12;
  dyadic.seed = 5;
  plans.push_back(dyadic);
  ExperimentPlan income = dyadic;
  income.algorithm.id = AlgorithmId::kIncome;
  income.algorithm.K = 10;
  income.algorithm.gamma = 0.2;
  income.algorithm.eta = 0.01;
  income.algorithm.wage_grid = {0.0, 0.5};
  income.algorithm.omega = {0.8, 0.4};
  income.algorithm.wage.kind = "uniform";
  plans.push_back(income);

  int identical = 0;
  std::size_t bytes = 0;
  for (const auto& plan : plans) {
    std::vector<std::string> outputs;
    for (unsigned threads : {1u, 2u, 8u}) {
      std::ostringstream out;
      write_csv(run_plan(plan, threads), out);
      outputs.push_back(out.str());
    }
    bytes += outputs[0].size();
    if (outputs[0] == outputs[1] && outputs[0] == outputs[2]) ++identical;
  }
  return {identical == static_cast<int>(plans.size()),
          fmt("%d/%zu plans (exp3, frozen, dyadic, income; %zu CSV bytes) identical across 1, 2, 8 threads",
              identical, plans.size(), bytes)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                        criterion6, criterion7, criterion8, criterion9};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion: " << argv[i] << "\n";
      return 2;
    }
    selected.push_back(n);
  }
  if (selected.empty()) {
    for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) selected.push_back(n);
  }

  bool all = true;
  for (int n : selected) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << o.detail << fmt(" (%.1fs)", secs)
              << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
