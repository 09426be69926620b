#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "welfare/environment.hpp"
#include "welfare/harness.hpp"
#include "welfare/plan_config.hpp"
#include "welfare/regret.hpp"

namespace welfare::cli {

namespace {

// Composite 3-point Gauss-Legendre. Nodes are interior, so a density with
// jumps at a and b is integrated piece by piece without touching the jumps.
double gauss_legendre(auto&& f, double a, double b, int n) {
  const double node = std::sqrt(3.0 / 5.0);
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double mid = a + (i + 0.5) * h;
    s += (5.0 * f(mid - node * h / 2.0) + 8.0 * f(mid) + 5.0 * f(mid + node * h / 2.0)) / 18.0;
  }
  return s * h;
}

void concave_rows(double lambda, double eps, double perturbation, std::vector<VerifyRow>& rows) {
  const ConcaveFamily fam(lambda, eps);
  const double h = fam.h();
  std::ostringstream tag;
  tag << "concave lambda=" << lambda << " eps=" << eps;
  const std::string group = tag.str();
  auto add = [&](std::string name, double lhs, double rhs, double tol) {
    lhs += perturbation;
    rows.push_back({group, std::move(name), lhs, rhs, tol, std::abs(lhs - rhs) <= tol});
  };

  auto f = [&](double x) { return fam.density(x); };
  const double total = gauss_legendre(f, 0.0, 0.5, 2000) + gauss_legendre(f, 0.5, 1.0 - h, 4000) +
                       gauss_legendre(f, 1.0 - h, 1.0, 2000);
  add("density integrates to 1", total, 1.0, 1e-9);

  double worst = -std::numeric_limits<double>::infinity();
  constexpr int kGrid = 1000;
  for (int i = 1; i < kGrid; ++i) {
    const double x0 = static_cast<double>(i - 1) / kGrid, x1 = static_cast<double>(i) / kGrid,
                 x2 = static_cast<double>(i + 1) / kGrid;
    worst = std::max(worst, fam.expected_welfare(x0) - 2.0 * fam.expected_welfare(x1) + fam.expected_welfare(x2));
  }
  add("second differences <= 1e-9 (concavity)", std::max(worst, 0.0), 0.0, 1e-9);

  const double slope = (fam.expected_welfare(1.0 - h) - fam.expected_welfare(0.5)) / (0.5 - h);
  add("linear middle piece slope", slope, fam.middle_slope(), 1e-9);

  const auto best = best_constant_stochastic(Environment::concave_f(lambda, eps), lambda);
  add("maximizer location", best.x, eps > 0.0 ? 1.0 - h : 0.5, 1e-6);
}

void oracle_rows(double perturbation, std::vector<VerifyRow>& rows) {
  constexpr int kSequences = 10;
  constexpr int kLength = 50;
  constexpr int kGrid = 100000;
  const CounterStream stream(derive_key(2024, {7}));
  std::uint64_t counter = 0;
  double worst = 0.0;
  for (int s = 0; s < kSequences; ++s) {
    const double lambda = 0.05 + 0.9 * stream.uniform(counter++);
    std::vector<double> values(kLength);
    // Values sit on the brute-force grid so the grid contains every candidate.
    for (auto& v : values) v = static_cast<double>(stream.bits(counter++) % (kGrid + 1)) / kGrid;
    const auto oracle = best_constant_adversarial(values, lambda);
    double brute = -1.0;
    for (int i = 0; i <= kGrid; ++i) brute = std::max(brute, cumulative_welfare(static_cast<double>(i) / kGrid, values, lambda));
    worst = std::max(worst, std::abs(oracle.welfare - brute));
  }
  rows.push_back({"oracle", "candidate set vs 1e5-point grid, 10 sequences", worst + perturbation, 0.0, 1e-9,
                  worst + perturbation <= 1e-9});
}

}  // namespace

std::vector<VerifyRow> verify_suite(const std::vector<double>& lambdas, const std::vector<double>& epsilons,
                                    double perturbation) {
  std::vector<VerifyRow> rows;
  for (double lambda : lambdas) {
    for (double eps : epsilons) {
      const auto report = check_mu_identities(lambda, eps, perturbation);
      std::ostringstream tag;
      tag << "mu lambda=" << lambda << " eps=" << eps;
      for (const auto& c : report.checks) rows.push_back({tag.str(), c.name, c.lhs, c.rhs, c.tolerance, c.pass});
    }
  }
  for (double lambda : lambdas) {
    const double e = ConcaveFamily::eps_bar(lambda) / 2.0;
    concave_rows(lambda, e, perturbation, rows);
    concave_rows(lambda, -e, perturbation, rows);
  }
  oracle_rows(perturbation, rows);
  return rows;
}

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 1;
  bool quiet = false;
};

ExperimentPlan resolve_plan(const Common& c) {
  auto overrides = c.overrides;
  if (c.seed_set) overrides.push_back("seed=" + std::to_string(c.seed));
  return c.config.empty() ? plan_from_overrides(overrides) : load_plan(c.config, overrides);
}

std::string output_dir(const Common& c, const ExperimentPlan& plan) {
  if (!c.out_dir.empty()) return c.out_dir;
  return plan.output.empty() ? "." : plan.output;
}

void print_horizons(const ResultSet& results, std::ostream& out) {
  for (const auto& hr : results.horizons) {
    const auto& p = hr.curve.back();
    out << "  T=" << hr.T << "  mean regret=" << p.mean << "  se=" << p.se << "  per-round=" << p.mean / hr.T;
    if (!hr.config.in_theorem_regime() && default_bound(results.plan)) out << "  [outside-theorem regime]";
    out << '\n';
  }
}

int cmd_simulate(const Common& c, std::ostream& out) {
  const auto plan = resolve_plan(c);
  const auto results = run_plan(plan, c.threads);
  const auto dir = output_dir(c, plan);
  write_results(results, dir);
  if (!c.quiet) {
    out << "plan " << plan.name << ": " << to_string(plan.algorithm.id) << " on " << plan.environment.kind << ", "
        << plan.replications << " replications\n";
    print_horizons(results, out);
    out << "wrote " << dir << "/" << plan.name << ".csv and " << plan.name << ".summary.json\n";
  }
  return kOk;
}

int cmd_rates(const Common& c, std::ostream& out) {
  const auto plan = resolve_plan(c);
  try {
    require_rate_sweep(plan.horizons);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("horizons: ") + e.what());
  }
  const auto results = run_plan(plan, c.threads);
  const auto dir = output_dir(c, plan);
  write_results(results, dir);
  const auto fit = fit_rate(results);
  if (!c.quiet) print_horizons(results, out);
  out << std::setprecision(4) << "slope " << fit.slope << " +/- " << 1.96 * fit.slope_se << " (95%), r^2 "
      << fit.r_squared << '\n';
  return kOk;
}

int cmd_verify(const std::vector<double>& lambdas, const std::vector<double>& epsilons, bool point_mode,
               double perturbation, bool quiet, std::ostream& out) {
  if (point_mode) {
    const auto ab = mu_epsilon_constants(lambdas.front());
    const auto k = lower_bound_proof_constants(lambdas.front());
    out << std::setprecision(10) << "lambda " << lambdas.front() << "\n  a  = " << ab.a << "\n  b  = " << ab.b
        << "\n  c1 = " << k.c1 << "\n  c2 = " << k.c2 << "\n  c3 = " << k.c3 << "\n  C  = " << k.C << '\n';
  }
  const auto rows = verify_suite(lambdas, epsilons, perturbation);
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (!r.pass) ++failed;
    if (quiet && r.pass) continue;
    out << (r.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(34) << r.group << std::setw(44) << r.name
        << std::right << std::setprecision(12) << " lhs=" << r.lhs << " rhs=" << r.rhs << '\n';
  }
  out << rows.size() - failed << "/" << rows.size() << " checks passed\n";
  return failed == 0 ? kOk : kRuntimeFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive welfare maximization: simulation and verification"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON plan file");
    sub->add_option("--override", common.overrides, "key=value applied after the config file (repeatable)");
    sub->add_option("--out", common.out_dir, "output directory");
    sub->add_option("--seed", common.seed, "base seed")->each([&](const std::string&) { common.seed_set = true; });
    sub->add_option("--threads", common.threads, "worker threads (0 = all cores)");
    sub->add_flag("--quiet", common.quiet, "less output");
  };
  auto* simulate = app.add_subcommand("simulate", "run a plan and write CSV and summary JSON");
  add_common(simulate);
  auto* rates = app.add_subcommand("rates", "run a horizon sweep and fit the regret growth exponent");
  add_common(rates);

  auto* verify = app.add_subcommand("verify", "run the analytic identity suite");
  std::vector<double> lambdas{0.1, 0.3, 0.5, 0.7, 0.95};
  std::vector<double> epsilons{-1.0, -0.5, 0.0, 0.5, 1.0};
  double lambda = 0.0, epsilon = 0.0, perturbation = 0.0;
  bool verify_quiet = false;
  auto* lambda_opt = verify->add_option("--lambda", lambda, "single lambda; also prints the proof constants");
  verify->add_option("--epsilon", epsilon, "single epsilon (with --lambda)");
  verify->add_option("--perturb", perturbation, "test hook: shift every identity by this amount");
  verify->add_flag("--quiet", verify_quiet, "print failures only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(common, out);
    if (rates->parsed()) return cmd_rates(common, out);
    if (lambda_opt->count() > 0) {
      return cmd_verify({lambda}, {epsilon}, true, perturbation, verify_quiet, out);
    }
    return cmd_verify(lambdas, epsilons, false, perturbation, verify_quiet, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

}  // namespace welfare::cli
