#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "welfare/environment.hpp"

using namespace welfare;

namespace {

// Expected welfare over explicit atoms, independent of DiscreteDistribution.
double brute_welfare(double x, const std::vector<Atom>& atoms, double lambda) {
  double w = 0.0;
  for (const auto& a : atoms) w += a.mass * social_welfare(x, a.value, lambda);
  return w;
}

std::vector<Atom> four_atoms(double a, double b, double eps) {
  return {{0.25, a}, {0.5, (1 + eps) * b}, {0.75, (1 - eps) * b}, {1.0, 1 - a - 2 * b}};
}

}  // namespace

TEST_CASE("four-point constants") {
  const auto k95 = mu_epsilon_constants(0.95);
  CHECK(k95.a == doctest::Approx(0.11617280531708672).epsilon(1e-14));
  CHECK(k95.b == doctest::Approx(0.0031847133757961807).epsilon(1e-14));
  const auto k50 = mu_epsilon_constants(0.5);
  CHECK(k50.a == doctest::Approx(43.25 / 77.5).epsilon(1e-14));
  CHECK(k50.b == doctest::Approx(0.5 / 31.0).epsilon(1e-14));
  CHECK_THROWS_AS(mu_epsilon_constants(0.0), DomainError);
  CHECK_THROWS_AS(mu_epsilon_constants(1.0), DomainError);
}

TEST_CASE("lower-bound proof constants") {
  const auto c = lower_bound_proof_constants(0.95);
  CHECK(c.c1 == doctest::Approx(0.2375 * 0.0031847133757961807).epsilon(1e-13));
  CHECK(c.c2 == doctest::Approx(0.125 * 0.05 / 1.15).epsilon(1e-13));
  CHECK(c.c3 == doctest::Approx(0.0141065).epsilon(1e-5));
  CHECK(c.C == doctest::Approx(2.0947e-8).epsilon(1e-3));

  const auto h = lower_bound_proof_constants(0.5);
  CHECK(h.c1 == doctest::Approx(0.002016129).epsilon(1e-6));
  CHECK(h.c2 == doctest::Approx(0.025).epsilon(1e-13));
  CHECK(h.C == doctest::Approx(3.70e-7).epsilon(1e-2));

  for (int i = 1; i < 100; ++i) {
    const double lambda = i / 100.0;
    const auto k = mu_epsilon_constants(lambda);
    REQUIRE(k.a > 0.0);
    REQUIRE(k.b > 0.0);
    REQUIRE(1.0 - k.a - 2.0 * k.b > 0.0);
    REQUIRE(lower_bound_proof_constants(lambda).C > 0.0);
  }
}

TEST_CASE("four-point masses form a probability vector") {
  for (double lambda : {0.05, 0.3, 0.5, 0.7, 0.95}) {
    for (double eps = -1.0; eps <= 1.0; eps += 0.125) {
      const auto d = mu_epsilon_distribution(lambda, eps);
      double total = 0.0;
      for (const auto& a : d.atoms()) {
        CHECK(a.mass >= 0.0);
        total += a.mass;
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(mu_epsilon_distribution(0.5, 1.01), DomainError);
}

TEST_CASE("four-point identities against brute-force expectations") {
  for (double lambda : {0.1, 0.3, 0.5, 0.7, 0.95}) {
    const auto k = mu_epsilon_constants(lambda);
    const auto c = lower_bound_proof_constants(lambda);
    for (double eps : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const auto atoms = four_atoms(k.a, k.b, eps);
      CHECK(brute_welfare(1.0, atoms, lambda) - brute_welfare(0.25, atoms, lambda) ==
            doctest::Approx(c.c1 * eps).epsilon(1e-10).scale(1.0));
      const auto report = check_mu_identities(lambda, eps);
      CHECK(report.all_pass());
    }
    const double diff = brute_welfare(0.25, four_atoms(k.a, k.b, 1.0), lambda) -
                        brute_welfare(0.75, four_atoms(k.a, k.b, -1.0), lambda);
    CHECK(std::abs(diff - c.c2) <= 1e-10);
  }
  const auto k = mu_epsilon_constants(0.5);
  const auto atoms = four_atoms(k.a, k.b, -0.7);
  CHECK(std::abs(brute_welfare(1.0, atoms, 0.5) - brute_welfare(0.25, atoms, 0.5) -
                 (-0.7) * lower_bound_proof_constants(0.5).c1) <= 1e-12);
}

TEST_CASE("identity report flags a perturbation") {
  CHECK(check_mu_identities(0.95, 1.0).all_pass());
  CHECK_FALSE(check_mu_identities(0.95, 1.0, 1e-6).all_pass());
}

TEST_CASE("seeded draws are deterministic") {
  const auto u = Environment::uniform(42);
  const auto again = Environment::uniform(42);
  const auto other = Environment::uniform(43);
  int differ = 0;
  for (std::uint64_t i = 1; i <= 1000; ++i) {
    REQUIRE(u.draw(i) == again.draw(i));
    REQUIRE(draw_valuation(u, i) == u.draw(i));
    differ += u.draw(i) != other.draw(i);
  }
  CHECK(differ > 990);
  CHECK(u.draw(7) == u.draw(7));
}

TEST_CASE("fixed sequences") {
  const auto env = Environment::fixed_sequence({0.3, 0.9});
  CHECK(env.draw(1) == 0.3);
  CHECK(env.draw(2) == 0.9);
  CHECK_THROWS_AS(env.draw(3), std::out_of_range);
  CHECK_THROWS_AS(Environment::fixed_sequence({0.2, 1.2}), DomainError);
  CHECK_THROWS_AS(env.expected_welfare(0.5, 0.5), DomainError);
  CHECK(env.length() == 2);
  CHECK_FALSE(env.is_stochastic());
}

TEST_CASE("four-point draws at eps = 1 never hit 3/4") {
  const auto env = Environment::four_point_mu(0.95, 1.0, 3);
  for (std::uint64_t i = 1; i <= 20000; ++i) {
    const double v = env.draw(i);
    REQUIRE((v == 0.25 || v == 0.5 || v == 1.0));
  }
}

TEST_CASE("freezing keeps the draws") {
  const auto env = Environment::four_point_mu(0.7, 0.3, 9);
  const auto frozen = freeze(env, 100);
  REQUIRE(frozen.length() == 100);
  for (std::uint64_t i = 1; i <= 100; ++i) CHECK(frozen.draw(i) == env.draw(i));
  CHECK_THROWS_AS(freeze(frozen, 10), DomainError);
}

TEST_CASE("sequence files") {
  const auto dir = std::filesystem::temp_directory_path() / "welfare_env_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "good.txt") << "# header\n0.25\n\n1\n0\n";
    std::ofstream(dir / "bad.txt") << "0.5\nabc\n";
    std::ofstream(dir / "range.txt") << "0.5\n1.5\n";
  }
  CHECK(load_sequence_file(dir / "good.txt") == std::vector<double>{0.25, 1.0, 0.0});
  try {
    load_sequence_file(dir / "bad.txt");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("bad.txt:2") != std::string::npos);
  }
  CHECK_THROWS(load_sequence_file(dir / "range.txt"));
  CHECK_THROWS(load_sequence_file(dir / "missing.txt"));
}

TEST_CASE("concave family constants") {
  CHECK(ConcaveFamily::h_bar(0.75) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(ConcaveFamily::eta_bar(0.75) == doctest::Approx(17.192).epsilon(1e-4));
  CHECK(ConcaveFamily::c_bar(0.75) == doctest::Approx(0.198).epsilon(5e-3));
  for (double lambda : {0.1, 0.5, 0.75, 0.95}) {
    const double h = ConcaveFamily::h_bar(lambda);
    CHECK(h > 0.0);
    CHECK(h < 0.5);
  }
  CHECK_THROWS_AS(ConcaveFamily(0.75, ConcaveFamily::eps_bar(0.75)), DomainError);
  CHECK_NOTHROW(ConcaveFamily(0.75, 0.99 * ConcaveFamily::eps_bar(0.75)));
}

TEST_CASE("concave family: normalization, concavity, linear middle piece, maximizer") {
  for (double lambda : {0.3, 0.75, 0.9}) {
    for (double sign : {-1.0, 1.0}) {
      const ConcaveFamily fam(lambda, sign * ConcaveFamily::eps_bar(lambda) / 2.0);
      CHECK(fam.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(fam.cdf(0.0) == 0.0);

      double worst = -1.0;
      for (int i = 1; i < 1000; ++i) {
        const double d2 = fam.expected_welfare((i - 1) / 1000.0) - 2 * fam.expected_welfare(i / 1000.0) +
                          fam.expected_welfare((i + 1) / 1000.0);
        worst = std::max(worst, d2);
      }
      CHECK(worst <= 1e-9);

      const double h = fam.h();
      for (int i = 0; i <= 20; ++i) {
        const double x = 0.5 + (0.5 - h) * i / 20.0;
        CHECK(fam.expected_welfare(x) - fam.expected_welfare(0.5) ==
              doctest::Approx(fam.middle_slope() * (x - 0.5)).epsilon(1e-9).scale(1.0));
      }

      double best_x = 0.0, best = -1.0;
      for (int i = 0; i <= 20000; ++i) {
        const double x = i / 20000.0;
        if (fam.expected_welfare(x) > best) best = fam.expected_welfare(x), best_x = x;
      }
      CHECK(best_x == doctest::Approx(sign > 0 ? 1.0 - h : 0.5).epsilon(1e-3));
      CHECK(fam.optimal_policy() == (sign > 0 ? 1.0 - h : 0.5));
    }
  }
}

TEST_CASE("concave family sampler matches its CDF (KS < 0.002)") {
  const double lambda = 0.75;
  const auto env = Environment::concave_f(lambda, 0.05, 17);
  const ConcaveFamily fam(lambda, 0.05);
  constexpr std::uint64_t n = 1000000;
  std::vector<double> draws(n);
  for (std::uint64_t i = 0; i < n; ++i) draws[i] = env.draw(i + 1);
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double F = fam.cdf(draws[i]);
    ks = std::max({ks, std::abs(F - static_cast<double>(i) / n), std::abs(F - static_cast<double>(i + 1) / n)});
  }
  CHECK(ks < 0.002);
}
