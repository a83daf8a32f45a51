#include <doctest.h>

#include <cmath>

#include "dps/errors.hpp"
#include "dps/exact.hpp"
#include "dps/heavy_traffic.hpp"
#include "oracles.hpp"

using namespace dps;

namespace {

SystemParams random_instance(Rng& rng) {
  const std::size_t k = 1 + rng.index(12);
  std::vector<double> lambda;
  std::vector<double> cost;
  for (std::size_t i = 0; i < k; ++i) {
    lambda.push_back(rng.uniform(0.1, 10.0));
    cost.push_back(rng.uniform(0.05, 50.0));
  }
  return SystemParams::with_load(lambda, cost, rng.uniform(0.05, 0.995), std::exp(rng.uniform(-2.0, 2.5)));
}

}  // namespace

TEST_CASE("heavy-traffic sojourn by direct arithmetic") {
  SystemParams p({4.5, 4.5}, {2.0, 1.0}, 10.0, 1.0);
  const double gamma = (1.0 / 0.9) * (0.45 + 0.225);
  CHECK(gamma == doctest::Approx(0.75));
  const double expected = 1.0 / (0.1 * 10.0 * 1.0 * gamma);
  CHECK(expected == doctest::Approx(4.0 / 3.0));
  CHECK(v_ht(p, PriorityVector{1.0, 2.0}, 1.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  const auto ctx = heavy_traffic_context(p, PriorityVector{1.0, 2.0});
  CHECK(ctx.gamma == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("equal priorities cancel inside the heavy-traffic sojourn") {
  SystemParams p({1.0, 2.0, 0.5}, {3.0, 2.0, 1.0}, 5.0, 1.0);
  for (double b : {0.01, 1.0, 7.0}) {
    const auto pri = PriorityVector::uniform(3, b);
    CHECK(v_ht(p, pri, b) == doctest::Approx(1.0 / ((1.0 - p.load()) * 5.0)).epsilon(1e-12));
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(w_ht_class(p, pri, i) == doctest::Approx(1.0 / ((1.0 - p.load()) * 5.0)).epsilon(1e-12));
  }
}

TEST_CASE("class-level heavy-traffic time") {
  SystemParams one({1.0}, {1.0}, 3.0, 1.0);
  for (double b : {0.1, 1.0, 10.0})
    CHECK(w_ht_class(one, PriorityVector{2.0}, 0, b) == doctest::Approx(1.0 / ((1.0 - one.load()) * 3.0)));
  SystemParams p({4.5, 4.5}, {2.0, 1.0}, 10.0, 1.0);
  const PriorityVector pri{1.0, 2.0};
  CHECK(oracle::rel(w_ht_class(p, pri, 0), v_ht(p, pri, 1.0)) < 1e-14);
  CHECK(oracle::rel(w_ht_class(p, pri, 1), v_ht(p, pri, 2.0)) < 1e-14);
  CHECK_THROWS_AS(w_ht_class(p, pri, 2), std::out_of_range);
}

TEST_CASE("closed-form heavy-traffic equilibrium of the worked instance") {
  SystemParams p({1.0, 1.0}, {4.0, 1.0}, 4.0, 1.0);
  const auto r = hte_job_level(p);
  CHECK(r.kind == EquilibriumKind::JobHte);
  CHECK(r.priorities[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(r.priorities[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(heavy_traffic_context(p, r.priorities).s1 == doctest::Approx(1.5).epsilon(1e-14));
  // Each coordinate minimizes its own heavy-traffic cost against the profile.
  for (std::size_t i = 0; i < 2; ++i) {
    const double c = p.cost_rate(i);
    const double best = oracle::grid_scan_min(
        [&](double b) { return c * v_ht(p, r.priorities, b) + b; }, 1e-4, 1e4);
    CHECK(oracle::rel(best, r.priorities[i]) < 1e-8);
  }
}

TEST_CASE("heavy-traffic equilibrium first-order conditions on random instances") {
  Rng rng(2);
  for (int n = 0; n < 1000; ++n) {
    const auto p = random_instance(rng);
    const auto beta = hte_job_level(p).priorities;
    for (std::size_t i = 0; i < p.num_classes(); ++i) {
      CHECK(hte_foc_residual(p, beta, i) < 1e-10);
      // d/dlog(beta) of c V^HT + beta^alpha by finite differences, against the payment term
      const double slope = oracle::derivative(
          [&](double t) { return p.cost_rate(i) * v_ht(p, beta, std::exp(t)) + std::exp(p.alpha() * t); },
          std::log(beta[i]), 1e-5);
      CHECK(std::abs(slope) < 1e-6 * p.alpha() * std::pow(beta[i], p.alpha()));
    }
  }
}

TEST_CASE("ratio law, cost scaling and load invariance") {
  Rng rng(3);
  for (int n = 0; n < 200; ++n) {
    const auto p = random_instance(rng);
    const double a = p.alpha();
    const auto beta = hte_job_level(p).priorities;
    for (std::size_t i = 0; i < p.num_classes(); ++i)
      for (std::size_t j = 0; j < p.num_classes(); ++j)
        CHECK(oracle::rel(beta[i] / beta[j], std::pow(p.cost_rate(i) / p.cost_rate(j), 1.0 / (a + 1.0))) < 1e-12);
    const double zeta = std::exp(rng.uniform(-3.0, 3.0));
    const auto scaled = hte_job_level(p.with_costs_scaled(zeta)).priorities;
    for (std::size_t i = 0; i < p.num_classes(); ++i)
      CHECK(oracle::rel(scaled[i] / beta[i], std::pow(zeta, 1.0 / a)) < 1e-12);
    for (double rho : {0.5, 0.9, 0.99}) {
      const auto other = hte_job_level(p.with_load(rho)).priorities;
      for (std::size_t i = 0; i < p.num_classes(); ++i)
        CHECK(oracle::rel(other[i] / other[0], beta[i] / beta[0]) < 1e-12);
    }
  }
}

TEST_CASE("rescaling time scales the heavy-traffic equilibrium by s^(-1/alpha)") {
  const double s = 2.0;
  const double alpha = 1.5;
  SystemParams a({1.0, 2.0}, {5.0, 1.0}, 4.0, alpha);
  SystemParams b({s * 1.0, s * 2.0}, {5.0, 1.0}, s * 4.0, alpha);
  const auto x = hte_job_level(a).priorities;
  const auto y = hte_job_level(b).priorities;
  for (std::size_t i = 0; i < 2; ++i) CHECK(oracle::rel(y[i], x[i] * std::pow(s, -1.0 / alpha)) < 1e-14);
}

TEST_CASE("priorities tend to one as alpha grows and blow up as alpha shrinks") {
  SystemParams base({1.0, 2.0, 3.0}, {6.0, 2.0, 0.5}, 7.0, 1.0);
  std::vector<std::vector<double>> gaps;
  for (double a : {1.0, 10.0, 100.0, 1000.0}) {
    const auto beta = hte_job_level(base.with_alpha(a)).priorities;
    std::vector<double> g;
    for (std::size_t i = 0; i < 3; ++i) g.push_back(std::abs(beta[i] - 1.0));
    gaps.push_back(g);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(gaps[2][i] < gaps[1][i]);
    CHECK(gaps[3][i] < gaps[2][i]);
    CHECK(gaps[3][i] < 0.01);
  }
  std::vector<double> previous(3, 0.0);
  for (double a : {1.0, 0.1, 0.01}) {
    const auto beta = hte_job_level(base.with_alpha(a)).priorities;
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(beta[i] > previous[i]);
      previous[i] = beta[i];
    }
  }
  for (double b : previous) CHECK(b > 1e10);
}

TEST_CASE("heavy-traffic sojourn becomes exact as the load tends to one") {
  for (const auto& base : {SystemParams({1.0, 1.0}, {4.0, 1.0}, 4.0, 1.0),
                           SystemParams({1.0, 2.0, 0.5}, {9.0, 3.0, 1.0}, 5.0, 2.0),
                           SystemParams({1.0}, {1.0}, 2.0, 1.0)}) {
    const auto pri = hte_job_level(base).priorities;  // ratios stay fixed as rho moves
    for (double factor : {0.5, 1.0, 2.0}) {
      std::vector<double> gaps;
      for (double rho : {0.9, 0.99, 0.999}) {
        const auto p = base.with_load(rho);
        const auto w = solve_waiting_times(p, pri);
        const double beta = pri[0] * factor;
        gaps.push_back((1.0 - rho) * std::abs(v_ht(p, pri, beta) - tagged_sojourn(p, pri, w, beta)));
      }
      if (gaps[0] > 1e-12) {  // one class at its own priority is exact at every load
        CHECK(gaps[1] < gaps[0]);
        CHECK(gaps[2] < gaps[1]);
      }
      CHECK(gaps[2] < 0.01);
    }
  }
}

TEST_CASE("deviation gains vanish in heavy traffic") {
  const SystemParams one({1.0}, {1.0}, 2.0, 1.0);
  const SystemParams two({1.0, 1.0}, {4.0, 1.0}, 4.0, 1.0);
  for (const auto& base : {one, two}) {
    const auto seq = load_sequence(base, {0.9, 0.99, 0.999});
    REQUIRE(seq.size() == 3);
    CHECK(seq[2].load() == doctest::Approx(0.999));
    CHECK(seq[2].arrival_rate(0) == base.arrival_rate(0));
    for (const auto& g : deviation_check(seq, 1.0)) {
      CHECK(g.max_gain == 0.0);
      for (double x : g.per_class) CHECK(x == 0.0);
    }
    for (double delta : {0.5, 2.0}) {
      const auto gains = deviation_check(seq, delta);
      REQUIRE(gains.size() == 3);
      CHECK(gains.back().max_gain <= 1e-3);
    }
  }
}

TEST_CASE("distributions and quadrature") {
  const auto u = Distribution::uniform(1.0, 9.0);
  const double s2 = u.expectation([](double c) { return std::pow(c, -0.5); });
  CHECK(s2 == doctest::Approx(2.0 * (3.0 - 1.0) / 8.0).epsilon(1e-12));
  CHECK(u.mean() == doctest::Approx(5.0).epsilon(1e-12));
  const auto d = Distribution::density([](double x) { return 2.0 * (x - 1.0); }, 1.0, 2.0, 2.0);
  CHECK(d.mean() == doctest::Approx(5.0 / 3.0).epsilon(1e-10));
  const auto pm = Distribution::point_masses({{1.0, 0.25}, {3.0, 0.75}});
  CHECK(pm.mean() == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(pm.is_discrete());
  CHECK(Distribution::point_masses({{1.0, 2.0}, {3.0, 6.0}}).mean() == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS_AS(Distribution::point_masses({{1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Distribution::point_masses({{-1.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Distribution::density([](double) { return 2.0; }, 1.0, 2.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(Distribution::uniform(2.0, 1.0), std::invalid_argument);

  Rng rng(4);
  double acc = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double x = d.sample(rng);
    CHECK(x >= 1.0);
    CHECK(x <= 2.0);
    acc += x;
  }
  CHECK(acc / 20000.0 == doctest::Approx(5.0 / 3.0).epsilon(0.01));
}

TEST_CASE("limiting equilibrium for a point-mass cost distribution") {
  LimitingGameSpec spec{Distribution::point_mass(1.0), Distribution::point_mass(0.5), 1.0};
  CHECK(spec.load() == doctest::Approx(0.5));
  const auto b = limiting_hte(spec, 1.0);
  CHECK(b.s2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b(1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(limiting_foc_residual(spec, b, 1.0) < 1e-10);

  // Same answer as the one-class closed form with lambda = E[G] and rate mu.
  for (double alpha : {0.5, 1.0, 3.0}) {
    for (double c : {0.3, 1.0, 8.0}) {
      LimitingGameSpec s{Distribution::point_mass(c), Distribution::point_mass(0.7), 1.3};
      const auto strategy = limiting_hte(s, alpha);
      const auto single = hte_job_level(SystemParams({0.7}, {c}, 1.3, alpha)).priorities;
      CHECK(oracle::rel(strategy(c), single[0]) < 1e-10);
    }
  }
}

TEST_CASE("limiting equilibrium with a continuous cost distribution") {
  LimitingGameSpec spec{Distribution::uniform(1.0, 11.0), Distribution::uniform(1.0, 11.0), 10.0};
  const auto b = limiting_hte(spec, 1.0);
  CHECK(b.s2 == doctest::Approx(2.0 * (std::sqrt(11.0) - 1.0) / 10.0).epsilon(1e-10));
  const double gamma = spec.cost.expectation([&](double c) { return 1.0 / b(c); });
  CHECK(oracle::rel(b.gamma, gamma) < 1e-10);
  double previous = 0.0;
  for (double c = 1.0; c <= 11.0; c += 0.5) {
    CHECK(b(c) > previous);
    previous = b(c);
    CHECK(limiting_foc_residual(spec, b, c) < 1e-10);
  }
  CHECK_THROWS(limiting_hte(LimitingGameSpec{Distribution::uniform(1.0, 2.0),
                                             Distribution::uniform(1.0, 2.0), 1.0},
                            1.0));
}

TEST_CASE("finite heavy-traffic equilibria approach the limiting strategy") {
  LimitingGameSpec spec{Distribution::uniform(1.0, 11.0), Distribution::uniform(1.0, 11.0), 10.0};
  const auto b = limiting_hte(spec, 1.0);
  // A single draw is noisy at K = 10 (the sampled load fluctuates), so average over seeds.
  std::vector<double> mean_gap(3, 0.0);
  const std::size_t sizes[] = {10, 100, 1000};
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (std::size_t n = 0; n < 3; ++n) {
      Rng rng(seed, n);
      const auto game = sample_finite_game(spec, sizes[n], 1.0, rng);
      CHECK(game.num_classes() == sizes[n]);
      const auto beta = hte_job_level(game).priorities;
      double gap = 0.0;
      for (std::size_t i = 0; i < sizes[n]; ++i) gap = std::max(gap, std::abs(beta[i] - b(game.cost_rate(i))));
      mean_gap[n] += gap / 20.0;
    }
  CHECK(mean_gap[1] < mean_gap[0]);
  CHECK(mean_gap[2] < mean_gap[1]);
}
