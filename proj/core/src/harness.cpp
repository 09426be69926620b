#include "welfare/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "welfare/dyadic.hpp"
#include "welfare/regret.hpp"

namespace welfare {

namespace {

constexpr struct {
  AlgorithmId id;
  const char* name;
} kAlgorithmNames[] = {
    {AlgorithmId::kExp3, "exp3"},     {AlgorithmId::kExp3Tuned, "exp3_tuned"}, {AlgorithmId::kUniformRandom, "uniform_random"},
    {AlgorithmId::kMonopoly, "monopoly"}, {AlgorithmId::kDyadic, "dyadic"},   {AlgorithmId::kIncome, "income"},
};

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(AlgorithmId id) {
  for (const auto& a : kAlgorithmNames) {
    if (a.id == id) return a.name;
  }
  return "unknown";
}

AlgorithmId algorithm_from_string(const std::string& name) {
  for (const auto& a : kAlgorithmNames) {
    if (name == a.name) return a.id;
  }
  throw DomainError("unknown algorithm '" + name +
                    "' (expected exp3, exp3_tuned, uniform_random, monopoly, dyadic or income)");
}

void ExperimentPlan::validate() const {
  if (replications < 1) throw DomainError("replications must be >= 1");
  if (horizons.empty()) throw DomainError("horizons must not be empty");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1) throw DomainError("horizons must be >= 1");
    if (i > 0 && horizons[i] <= horizons[i - 1]) throw DomainError("horizons must be strictly increasing");
  }
  if (checkpoints_per_decade < 1) throw DomainError("checkpoints_per_decade must be >= 1");
  const auto& a = algorithm;
  if (!(a.lambda >= 0.0 && a.lambda <= 1.0)) throw DomainError("algorithm.lambda must lie in [0,1]");
  // Building each horizon's pieces once surfaces every parameter error up front.
  for (auto T : horizons) {
    switch (a.id) {
      case AlgorithmId::kDyadic:
        DyadicConfig::for_horizon(a.lambda, std::max<double>(2.0, static_cast<double>(T))).validate();
        break;
      case AlgorithmId::kIncome: {
        IncomeExp3Config c{a.K, a.gamma, a.eta, a.wage_grid, a.omega};
        c.validate();
        break;
      }
      default:
        exp3_config_for(a, T).validate();
    }
    const auto env = make_environment(environment, a.lambda, T);
    if (!env.is_stochastic() && env.length() < T) {
      throw DomainError("environment.values has " + std::to_string(env.length()) + " entries but horizon is " +
                        std::to_string(T));
    }
  }
  if (a.id == AlgorithmId::kIncome) {
    if (a.wage.kind != "constant" && a.wage.kind != "uniform" && a.wage.kind != "sequence") {
      throw DomainError("algorithm.wage.kind must be constant, uniform or sequence");
    }
    if (a.wage.kind == "sequence" && a.wage.values.size() < horizons.back()) {
      throw DomainError("algorithm.wage.values is shorter than the largest horizon");
    }
  }
}

std::vector<std::uint64_t> checkpoint_rounds(std::uint64_t T, std::size_t per_decade) {
  std::vector<std::uint64_t> out;
  for (std::size_t j = 0;; ++j) {
    const double t = std::round(std::pow(10.0, static_cast<double>(j) / static_cast<double>(per_decade)));
    if (t >= static_cast<double>(T)) break;
    const auto ti = static_cast<std::uint64_t>(t);
    if (out.empty() || ti > out.back()) out.push_back(ti);
  }
  out.push_back(T);
  return out;
}

std::uint64_t replication_seed(std::uint64_t base, std::uint64_t T, std::uint64_t r) noexcept {
  return derive_key(base, {T, r});
}

Environment make_environment(const EnvSpec& spec, double algorithm_lambda, std::uint64_t T) {
  const double lambda = spec.lambda.value_or(algorithm_lambda);
  const double eps = spec.epsilon * std::pow(static_cast<double>(T), -spec.epsilon_exponent);
  if (spec.kind == "uniform") return Environment::uniform();
  if (spec.kind == "discrete") return Environment::discrete(spec.support);
  if (spec.kind == "four_point_mu") return Environment::four_point_mu(lambda, eps);
  if (spec.kind == "concave_f") return Environment::concave_f(lambda, eps);
  if (spec.kind == "fixed_sequence") {
    if (!spec.path.empty()) return Environment::fixed_sequence(load_sequence_file(spec.path));
    return Environment::fixed_sequence(spec.values);
  }
  throw DomainError("unknown environment kind '" + spec.kind +
                    "' (expected uniform, discrete, four_point_mu, concave_f or fixed_sequence)");
}

Exp3Config exp3_config_for(const AlgorithmSpec& spec, std::uint64_t T) {
  if (spec.id == AlgorithmId::kExp3Tuned) {
    const auto t = optimized_tuning(spec.lambda, static_cast<double>(T));
    return {t.K, t.gamma, t.eta, spec.lambda};
  }
  return {spec.K, spec.gamma, spec.eta, spec.lambda};
}

namespace {

WageSource make_wages(const WageSpec& spec, std::uint64_t seed) {
  if (spec.kind == "uniform") return WageSource(UniformWage{}, seed);
  if (spec.kind == "sequence") return WageSource(WageSequence{spec.values}, seed);
  return WageSource(ConstantWage{spec.w}, seed);
}

Replication income_replication(const ExperimentPlan& plan, const Environment& env, std::uint64_t T,
                               std::uint64_t seed, const std::vector<std::uint64_t>& checkpoints) {
  const auto& a = plan.algorithm;
  const IncomeExp3Config config{a.K, a.gamma, a.eta, a.wage_grid, a.omega};
  const auto rounds = run_income_episode(config, make_wages(a.wage, seed), env, T, seed);
  const BracketWeights omega(WageGrid(a.wage_grid), a.omega);
  const auto bench = best_schedule_adversarial(rounds, omega);
  const auto regret = income_regret(rounds, omega);

  Replication rep;
  double per_bracket = 0.0;
  std::uint64_t count = 0;
  for (std::size_t h = 0; h < regret.per_bracket.size(); ++h) {
    per_bracket += regret.per_bracket[h];
    count += regret.counts[h];
  }
  rep.decomposition_ok =
      count == T && std::abs(per_bracket - regret.total) <= 1e-9 * std::max<double>(1.0, static_cast<double>(T));

  double best = 0.0, realized = 0.0;
  std::size_t c = 0;
  for (std::uint64_t i = 0; i < T; ++i) {
    const auto& r = rounds[i];
    best += income_welfare_at(bench.rates[r.bracket], omega(r.w), r.w, r.v);
    realized += r.welfare;
    if (i + 1 == checkpoints[c]) {
      rep.cum_regret.push_back(best - realized);
      rep.cum_realized_regret.push_back(best - realized);
      ++c;
    }
  }
  return rep;
}

// Turns a stream of played rounds into cumulative regret at the checkpoints
// without storing the trajectory.
class RegretAccumulator {
 public:
  RegretAccumulator(const Environment& env, double lambda, std::uint64_t T, const std::vector<std::uint64_t>& checkpoints)
      : env_(env), lambda_(lambda), checkpoints_(checkpoints) {
    rep_.cum_regret.reserve(checkpoints.size());
    rep_.cum_realized_regret.reserve(checkpoints.size());
    if (env.is_stochastic()) {
      bench_ = best_constant_stochastic(env, lambda);
    } else {
      const auto& seq = std::get<FixedSequenceEnv>(env.kind()).values;
      bench_ = best_constant_adversarial(std::span<const double>(seq.data(), T), lambda);
    }
  }

  void add(std::uint64_t round, double x, double v, double welfare) {
    realized_ += welfare;
    if (env_.is_stochastic()) {
      auto [it, fresh] = expected_.try_emplace(x, 0.0);
      if (fresh) it->second = env_.expected_welfare(x, lambda_);
      // Summing nonnegative gaps keeps the curve nondecreasing in floating point.
      gap_ += std::max(0.0, bench_.welfare - it->second);
    } else {
      best_ += social_welfare(bench_.x, v, lambda_);
    }
    if (round != checkpoints_[next_]) return;
    if (env_.is_stochastic()) {
      rep_.cum_regret.push_back(gap_);
      rep_.cum_realized_regret.push_back(static_cast<double>(round) * bench_.welfare - realized_);
    } else {
      rep_.cum_regret.push_back(best_ - realized_);
      rep_.cum_realized_regret.push_back(best_ - realized_);
    }
    ++next_;
  }

  Replication take() { return std::move(rep_); }

 private:
  const Environment& env_;
  double lambda_;
  const std::vector<std::uint64_t>& checkpoints_;
  Benchmark bench_{};
  std::unordered_map<double, double> expected_;
  double gap_ = 0.0, best_ = 0.0, realized_ = 0.0;
  std::size_t next_ = 0;
  Replication rep_;
};

template <class Algo>
void play_drawn(Algo& algo, const Environment& env, std::uint64_t T, std::uint64_t seed, double lambda,
                RegretAccumulator& acc) {
  const CounterStream draws(derive_key(seed, {kPolicyStream}));
  for (std::uint64_t i = 1; i <= T; ++i) {
    const double v = env.draw(i);
    const auto s = algo.step(draws.uniform(i), v);
    acc.add(i, s.x, v, social_welfare(s.x, v, lambda));
  }
}

}  // namespace

Replication run_replication(const ExperimentPlan& plan, std::uint64_t T, std::uint64_t r,
                            const std::vector<std::uint64_t>& checkpoints) {
  const std::uint64_t seed = replication_seed(plan.seed, T, r);
  const auto& a = plan.algorithm;
  Environment env = make_environment(plan.environment, a.lambda, T).with_seed(seed);
  if (plan.environment.freeze && env.is_stochastic()) env = freeze(env, T);

  if (a.id == AlgorithmId::kIncome) return income_replication(plan, env, T, seed, checkpoints);

  RegretAccumulator acc(env, a.lambda, T, checkpoints);
  switch (a.id) {
    case AlgorithmId::kExp3:
    case AlgorithmId::kExp3Tuned: {
      TemperedExp3 algo(exp3_config_for(a, T));
      play_drawn(algo, env, T, seed, a.lambda, acc);
      break;
    }
    case AlgorithmId::kUniformRandom: {
      UniformRandomPolicy algo(a.K);
      play_drawn(algo, env, T, seed, a.lambda, acc);
      break;
    }
    case AlgorithmId::kMonopoly: {
      MonopolyExp3 algo(a.K, a.gamma, a.eta);
      play_drawn(algo, env, T, seed, a.lambda, acc);
      break;
    }
    case AlgorithmId::kDyadic: {
      DyadicSearch search(DyadicConfig::for_horizon(a.lambda, std::max<double>(2.0, static_cast<double>(T))));
      for (std::uint64_t i = 1; i <= T; ++i) {
        const double v = env.draw(i);
        const auto s = search.step(v);
        acc.add(i, s.x, v, social_welfare(s.x, v, a.lambda));
      }
      break;
    }
    case AlgorithmId::kIncome:
      break;
  }
  return acc.take();
}

std::vector<CurvePoint> aggregate(const std::vector<Replication>& reps, const std::vector<std::uint64_t>& checkpoints) {
  std::vector<CurvePoint> out;
  const double n = static_cast<double>(reps.size());
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    double sum = 0.0, sum_realized = 0.0;
    for (const auto& r : reps) {
      sum += r.cum_regret[c];
      sum_realized += r.cum_realized_regret[c];
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : reps) ss += (r.cum_regret[c] - mean) * (r.cum_regret[c] - mean);
    const double se = reps.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    out.push_back({checkpoints[c], mean, se, mean - 1.96 * se, mean + 1.96 * se, sum_realized / n});
  }
  return out;
}

ResultSet run_plan(const ExperimentPlan& plan, unsigned threads) {
  plan.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

  ResultSet results{plan, {}};
  struct Job {
    std::size_t horizon;
    std::uint64_t rep;
  };
  std::vector<Job> jobs;
  for (std::size_t h = 0; h < plan.horizons.size(); ++h) {
    const auto T = plan.horizons[h];
    HorizonResult hr;
    hr.T = T;
    if (plan.algorithm.id == AlgorithmId::kExp3Tuned) {
      hr.config = exp3_config_for(plan.algorithm, T);
      hr.tuning_clamped = optimized_tuning(plan.algorithm.lambda, static_cast<double>(T)).clamped;
    } else {
      const auto& a = plan.algorithm;
      hr.config = {a.K, a.gamma, a.eta, a.lambda};
    }
    hr.epsilon = plan.environment.epsilon * std::pow(static_cast<double>(T), -plan.environment.epsilon_exponent);
    hr.checkpoints = checkpoint_rounds(T, plan.checkpoints_per_decade);
    hr.replications.resize(plan.replications);
    results.horizons.push_back(std::move(hr));
    for (std::uint64_t r = 0; r < plan.replications; ++r) jobs.push_back({h, r});
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      auto& hr = results.horizons[jobs[j].horizon];
      try {
        hr.replications[jobs[j].rep] = run_replication(plan, hr.T, jobs[j].rep, hr.checkpoints);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs.size());
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& hr : results.horizons) {
    hr.curve = aggregate(hr.replications, hr.checkpoints);
    hr.decomposition_ok =
        std::all_of(hr.replications.begin(), hr.replications.end(), [](const Replication& r) { return r.decomposition_ok; });
  }
  return results;
}

RateFit fit_rate(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw DomainError("rate fit needs as many x values as y values");
  if (xs.size() < 2) throw DomainError("rate fit needs at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0)) throw DomainError("rate fit needs positive horizons");
    if (!(ys[i] > 0.0)) throw DomainError("degenerate series: regret is not positive at every horizon");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
    mx += lx.back();
    my += ly.back();
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw DomainError("rate fit needs at least two distinct horizons");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (intercept + slope * lx[i]);
    ss_res += e * e;
  }
  const double r2 = syy == 0.0 ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  const double slope_se = xs.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
  return {slope, intercept, r2, slope_se};
}

RateFit fit_rate(const ResultSet& results) {
  std::vector<double> xs, ys;
  for (const auto& hr : results.horizons) {
    xs.push_back(static_cast<double>(hr.T));
    ys.push_back(hr.curve.back().mean);
  }
  return fit_rate(xs, ys);
}

void require_rate_sweep(const std::vector<std::uint64_t>& horizons) {
  if (horizons.size() < 4) throw DomainError("a rate fit needs at least 4 horizons, got " + std::to_string(horizons.size()));
  const double span = std::log10(static_cast<double>(horizons.back()) / static_cast<double>(horizons.front()));
  if (span < 2.0 - 1e-12) throw DomainError("a rate fit needs horizons spanning at least two decades");
}

BoundReport compare_to_bound(const ResultSet& results, const BoundFunction& bound) {
  BoundReport report;
  for (const auto& hr : results.horizons) {
    report.applicable = report.applicable && hr.config.in_theorem_regime();
    for (const auto& p : hr.curve) {
      const double b = bound(hr, p.t);
      const bool ok = p.mean + 3.0 * p.se <= b;
      report.rows.push_back({hr.T, p.t, p.mean, p.se, b, ok});
      report.pass = report.pass && ok;
    }
  }
  return report;
}

std::optional<BoundFunction> default_bound(const ExperimentPlan& plan) {
  const auto& a = plan.algorithm;
  switch (a.id) {
    case AlgorithmId::kExp3:
    case AlgorithmId::kExp3Tuned:
      return BoundFunction([](const HorizonResult& hr, std::uint64_t t) {
        return theorem2_bound_formula(hr.config, static_cast<double>(t));
      });
    case AlgorithmId::kIncome: {
      const std::size_t H = a.wage_grid.size();
      return BoundFunction([H](const HorizonResult& hr, std::uint64_t t) {
        return theorem5_bound_formula(hr.config.K, hr.config.gamma, hr.config.eta, H, static_cast<double>(t));
      });
    }
    default:
      return std::nullopt;
  }
}

void write_csv(const ResultSet& results, std::ostream& out) {
  const std::string algo = to_string(results.plan.algorithm.id);
  const std::string env = results.plan.environment.kind + (results.plan.environment.freeze ? "_frozen" : "");
  out << "algo,env,T,rep,checkpoint_t,cum_regret\n";
  for (const auto& hr : results.horizons) {
    for (std::size_t r = 0; r < hr.replications.size(); ++r) {
      for (std::size_t c = 0; c < hr.checkpoints.size(); ++c) {
        out << algo << ',' << env << ',' << hr.T << ',' << r << ',' << hr.checkpoints[c] << ','
            << format_double(hr.replications[r].cum_regret[c]) << '\n';
      }
    }
  }
}

namespace {

nlohmann::ordered_json plan_json(const ExperimentPlan& p) {
  using nlohmann::ordered_json;
  const auto& a = p.algorithm;
  ordered_json algo{{"id", to_string(a.id)}, {"K", a.K}, {"gamma", a.gamma}, {"eta", a.eta}, {"lambda", a.lambda}};
  if (a.id == AlgorithmId::kIncome) {
    algo["wage_grid"] = a.wage_grid;
    algo["omega"] = a.omega;
    algo["wage"] = {{"kind", a.wage.kind}, {"w", a.wage.w}};
  }
  const auto& e = p.environment;
  ordered_json env{{"kind", e.kind}, {"epsilon", e.epsilon}, {"epsilon_exponent", e.epsilon_exponent}, {"freeze", e.freeze}};
  if (e.lambda) env["lambda"] = *e.lambda;
  if (!e.path.empty()) env["path"] = e.path;
  return {{"name", p.name},
          {"algorithm", algo},
          {"environment", env},
          {"horizons", p.horizons},
          {"replications", p.replications},
          {"seed", p.seed},
          {"checkpoints_per_decade", p.checkpoints_per_decade}};
}

}  // namespace

std::string summary_json(const ResultSet& results) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["plan"] = plan_json(results.plan);

  const auto bound = default_bound(results.plan);
  ordered_json horizons = ordered_json::array();
  bool all_in_regime = true;
  for (const auto& hr : results.horizons) {
    ordered_json h;
    h["T"] = hr.T;
    h["parameters"] = {{"K", hr.config.K}, {"gamma", hr.config.gamma}, {"eta", hr.config.eta},
                       {"lambda", hr.config.lambda}, {"clamped", hr.tuning_clamped}};
    h["epsilon"] = hr.epsilon;
    if (bound) {
      const bool in_regime = hr.config.in_theorem_regime();
      all_in_regime = all_in_regime && in_regime;
      h["regime"] = in_regime ? "in-theorem" : "outside-theorem regime";
    }
    ordered_json curve = ordered_json::array();
    for (const auto& p : hr.curve) {
      ordered_json row{{"t", p.t}, {"mean", p.mean}, {"se", p.se}, {"lower", p.lower}, {"upper", p.upper},
                       {"mean_realized", p.mean_realized}};
      if (bound) row["bound"] = (*bound)(hr, p.t);
      curve.push_back(std::move(row));
    }
    h["curve"] = std::move(curve);
    if (results.plan.algorithm.id == AlgorithmId::kIncome) h["decomposition_ok"] = hr.decomposition_ok;
    horizons.push_back(std::move(h));
  }
  doc["horizons"] = std::move(horizons);

  if (results.horizons.size() >= 2) {
    try {
      const auto fit = fit_rate(results);
      doc["rate_fit"] = {{"status", "fitted"}, {"slope", fit.slope}, {"intercept", fit.intercept},
                         {"r_squared", fit.r_squared}, {"slope_se", fit.slope_se}};
    } catch (const DomainError& e) {
      doc["rate_fit"] = {{"status", "not fitted"}, {"reason", e.what()}};
    }
  } else {
    doc["rate_fit"] = {{"status", "not fitted"}, {"reason", "single horizon"}};
  }

  if (bound) {
    const auto report = compare_to_bound(results, *bound);
    std::size_t violations = 0;
    for (const auto& r : report.rows) violations += r.ok ? 0 : 1;
    doc["bound_check"] = {{"status", all_in_regime ? (report.pass ? "pass" : "fail") : "outside-theorem regime"},
                          {"violations", violations},
                          {"checked", report.rows.size()}};
  } else {
    doc["bound_check"] = {{"status", "no bound for this algorithm"}};
  }
  return doc.dump(2) + "\n";
}

void write_results(const ResultSet& results, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  const fs::path csv = fs::path(dir) / (results.plan.name + ".csv");
  const fs::path json = fs::path(dir) / (results.plan.name + ".summary.json");
  {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv.string());
    write_csv(results, out);
    if (!out) throw std::runtime_error("write failed for " + csv.string());
  }
  std::ofstream out(json, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + json.string());
  out << summary_json(results);
  if (!out) throw std::runtime_error("write failed for " + json.string());
}

}  // namespace welfare
