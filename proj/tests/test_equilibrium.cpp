#include <doctest.h>

#include <cmath>

#include "dps/equilibrium.hpp"
#include "dps/errors.hpp"
#include "dps/exact.hpp"
#include "dps/heavy_traffic.hpp"
#include "dps/minimize.hpp"
#include "oracles.hpp"

using namespace dps;

namespace {

SystemParams random_instance(Rng& rng, std::size_t max_classes, double min_alpha) {
  const std::size_t k = 1 + rng.index(max_classes);
  std::vector<double> lambda;
  std::vector<double> cost;
  for (std::size_t i = 0; i < k; ++i) {
    lambda.push_back(rng.uniform(0.2, 5.0));
    cost.push_back(rng.uniform(0.2, 20.0));
  }
  return SystemParams::with_load(lambda, cost, rng.uniform(0.3, 0.95), rng.uniform(min_alpha, 3.0));
}

// Job-level best response found by grid scan, independent of the library minimizer.
double grid_best_response(const SystemParams& p, const PriorityVector& b, std::size_t i) {
  const auto w = solve_waiting_times(p, b);
  return oracle::refined_min(
      [&](double x) { return p.cost_rate(i) * tagged_sojourn(p, b, w, x) + std::pow(x, p.alpha()); },
      1e-8, 1e8);
}

}  // namespace

TEST_CASE("golden-section search on a log scale") {
  const auto m = golden_section_log([](double x) { return (std::log(x) - 1.0) * (std::log(x) - 1.0); },
                                    1e-3, 1e3, 1e-10);
  CHECK(std::abs(std::log(m.location) - 1.0) < 1e-9);
  CHECK_FALSE(m.at_lower);
  CHECK_FALSE(m.at_upper);
  const auto edge = golden_section_log([](double x) { return x; }, 1e-3, 1e3, 1e-10);
  CHECK(edge.at_lower);
  const auto flat = golden_section_log([](double) { return 1.0; }, 1e-3, 1e3, 1e-10);
  CHECK(flat.at_lower);  // plateaus resolve toward the smaller priority

  const auto polished = minimize_positive([](double x) { return x + 4.0 / x; },
                                          [](double x) { return 1.0 - 4.0 / (x * x); }, 1e-8, 1e8, 1e-12);
  CHECK(polished.location == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("solver configuration is validated") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.bracket_lo = 2.0;
  c.bracket_hi = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.damping = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.br_tolerance = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("job-level best response agrees with a grid scan") {
  Rng rng(11);
  for (int n = 0; n < 40; ++n) {
    const auto p = random_instance(rng, 5, 1.0);
    std::vector<double> b;
    for (std::size_t i = 0; i < p.num_classes(); ++i) b.push_back(std::exp(rng.uniform(-2.0, 2.0)));
    const PriorityVector pri(b);
    const std::size_t i = rng.index(p.num_classes());
    const double br = best_response_job(p, pri, i);
    const double g = grid_best_response(p, pri, i);
    const auto w = solve_waiting_times(p, pri);
    const auto f = [&](double x) { return p.cost_rate(i) * tagged_sojourn(p, pri, w, x) + std::pow(x, p.alpha()); };
    CHECK(f(br) <= f(g) * (1.0 + 1e-15));
    // Below ~1e-3 the objective is flat to rounding and the oracle loses digits.
    if (br > 1e-3) CHECK(oracle::rel(br, g) < 1e-8);
  }
}

TEST_CASE("job-level best response increases with the class cost") {
  const PriorityVector pri{1.0, 0.5};
  double previous = 0.0;
  for (double c1 = 2.0; c1 < 200.0; c1 *= 1.5) {
    SystemParams p({1.0, 2.0}, {c1, 1.0}, 4.0, 1.0);
    const double br = best_response_job(p, pri, 0);
    CHECK(br > previous);
    previous = br;
  }
}

TEST_CASE("best response pinned to the bracket is reported") {
  SystemParams p({1.0, 1.0}, {4.0, 1.0}, 4.0, 1.0);
  SolverConfig tight;
  tight.bracket_lo = 1e-8;
  tight.bracket_hi = 1e-6;
  CHECK_THROWS_AS(best_response_job(p, PriorityVector{1.0, 1.0}, 0, tight), BracketExhaustedError);
  try {
    best_response_job(p, PriorityVector{1.0, 1.0}, 0, tight);
  } catch (const BracketExhaustedError& e) {
    CHECK(e.location() == doctest::Approx(1e-6));
  }
}

TEST_CASE("single-class job equilibrium matches the closed-form fixed point") {
  for (double rho : {0.3, 0.5, 0.9}) {
    for (double alpha : {1.0, 2.0}) {
      for (double c : {0.5, 1.0, 7.0}) {
        const double mu = 2.0;
        SystemParams p({rho * mu}, {c}, mu, alpha);
        // Stationarity of c V(beta; b) + beta^alpha at beta = b, with V the one-class closed form.
        const double expected = std::pow(c * rho / (alpha * mu * (1.0 - rho) * (2.0 - rho)), 1.0 / alpha);
        const auto ne = solve_job_ne(p);
        CHECK(ne.converged);
        CHECK(ne.kind == EquilibriumKind::JobNe);
        CHECK(oracle::rel(ne.priorities[0], expected) < 1e-8);
        // Independent scalar fixed point: iterate the grid best response on the closed form.
        double b = 1.0;
        for (int it = 0; it < 200; ++it) {
          const double next = oracle::refined_min(
              [&](double x) { return c * closed_form_k1(p, b, x) + std::pow(x, alpha); }, 1e-6, 1e6);
          if (oracle::rel(next, b) < 1e-12) break;
          b = next;
        }
        CHECK(oracle::rel(ne.priorities[0], b) < 1e-8);
        CHECK(oracle::rel(best_response_job(p, ne.priorities, 0), ne.priorities[0]) < 1e-10);
      }
    }
  }
}

TEST_CASE("job equilibria pass verification, restart idempotently and are deterministic") {
  Rng rng(12);
  for (int n = 0; n < 15; ++n) {
    const auto p = random_instance(rng, 6, 1.0);
    const auto ne = solve_job_ne(p);
    REQUIRE(ne.converged);
    CHECK(ne.residual < SolverConfig{}.br_tolerance);
    CHECK_FALSE(ne.heuristic);
    CHECK(job_ne_verification_gap(p, ne.priorities) < 1e-8);
    for (std::size_t i = 0; i < p.num_classes(); ++i)
      CHECK(oracle::rel(ne.priorities[i], grid_best_response(p, ne.priorities, i)) < 1e-7);
    const auto again = solve_job_ne(p, {}, ne.priorities);
    CHECK(again.converged);
    CHECK(again.iterations <= 2);
    for (std::size_t i = 0; i < p.num_classes(); ++i) CHECK(oracle::rel(again.priorities[i], ne.priorities[i]) < 1e-9);
    const auto twin = solve_job_ne(p);
    CHECK(twin.priorities == ne.priorities);
    CHECK(twin.iterations == ne.iterations);
    CHECK(twin.residual == ne.residual);
  }
}

TEST_CASE("damping and iteration limits") {
  SystemParams p({1.0, 2.0, 0.5}, {5.0, 2.0, 1.0}, 4.0, 1.0);
  SolverConfig damped;
  damped.damping = 0.5;
  const auto a = solve_job_ne(p, damped);
  const auto b = solve_job_ne(p);
  REQUIRE(a.converged);
  for (std::size_t i = 0; i < 3; ++i) CHECK(oracle::rel(a.priorities[i], b.priorities[i]) < 1e-8);
  CHECK(a.iterations > b.iterations);
  SolverConfig short_run;
  short_run.max_iterations = 1;
  const auto c = solve_job_ne(p, short_run);
  CHECK_FALSE(c.converged);
  CHECK(c.iterations == 1);
}

TEST_CASE("alpha below one uses the multistart heuristic") {
  SystemParams p({1.0, 2.0}, {5.0, 1.0}, 4.0, 0.5);
  const auto ne = solve_job_ne(p);
  CHECK(ne.heuristic);
  REQUIRE(ne.converged);
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(oracle::rel(ne.priorities[i], grid_best_response(p, ne.priorities, i)) < 1e-7);
}

TEST_CASE("heavy-traffic error against the exact equilibrium shrinks with load") {
  Rng rng(13);
  std::vector<double> medians;
  for (double rho : {0.8, 0.9, 0.99}) {
    std::vector<double> errors;
    Rng draws(13);
    for (int s = 0; s < 15; ++s) {
      std::vector<double> c, l;
      for (int k = 0; k < 10; ++k) c.push_back(draws.uniform(0.0, 10.0) + 1.0);
      for (int k = 0; k < 10; ++k) l.push_back(draws.uniform(0.0, 10.0) + 1.0);
      const auto p = SystemParams::with_load(l, c, rho, 1.0);
      const auto ne = solve_job_ne(p);
      REQUIRE(ne.converged);
      errors.push_back(relative_error(hte_job_level(p).priorities, ne.priorities));
    }
    std::sort(errors.begin(), errors.end());
    medians.push_back(errors[7]);
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
  CHECK(relative_error(PriorityVector{2.0, 1.0}, PriorityVector{1.0, 1.0}) == doctest::Approx(1.0));
  CHECK(relative_error(PriorityVector{0.5, 1.0}, PriorityVector{1.0, 1.0}) == doctest::Approx(0.0));
}

TEST_CASE("class-level best response agrees with a grid scan") {
  Rng rng(14);
  for (int n = 0; n < 20; ++n) {
    const auto p = random_instance(rng, 4, 1.0);
    if (p.num_classes() < 2) continue;
    std::vector<double> b;
    for (std::size_t i = 0; i < p.num_classes(); ++i) b.push_back(std::exp(rng.uniform(-1.0, 1.0)));
    const PriorityVector pri(b);
    const std::size_t i = rng.index(p.num_classes());
    const auto br = best_response_class(p, pri, i);
    const double grid = oracle::refined_min(
        [&](double x) {
          return p.cost_rate(i) * solve_waiting_times(p, pri.with(i, x)).sojourn[i] + std::pow(x, p.alpha());
        },
        1e-8, 1e8);
    if (br.pinned)
      CHECK(grid < 1e-7);
    else
      CHECK(oracle::rel(br.priority, grid) < 1e-7);
  }
}

TEST_CASE("single-class class-level game pins to the bracket floor") {
  SystemParams p({1.0}, {1.0}, 2.0, 1.0);
  // One class under processor sharing: its sojourn ignores its own priority.
  for (double b : {0.01, 1.0, 100.0})
    CHECK(solve_waiting_times(p, PriorityVector{b}).sojourn[0] == doctest::Approx(1.0).epsilon(1e-12));
  const auto r = solve_class_ne(p);
  CHECK(r.bracket_pinned);
  CHECK(r.priorities[0] == doctest::Approx(SolverConfig{}.bracket_lo));
  const double grid = oracle::grid_scan_min(
      [&](double x) { return solve_waiting_times(p, PriorityVector{x}).sojourn[0] + x; }, 1e-8, 1e8);
  CHECK(grid == doctest::Approx(1e-8));
  const auto job = solve_job_ne(p);
  CHECK(std::abs(job.priorities[0] - r.priorities[0]) > 1e-3);
}

TEST_CASE("symmetric classes reach a nearly symmetric class equilibrium") {
  SystemParams p({1.0, 1.0}, {1.0 + 1e-9, 1.0}, 4.0, 1.0);
  REQUIRE(p.num_classes() == 2);
  const auto r = solve_class_ne(p, {}, PriorityVector{1.0, 1.0});
  REQUIRE(r.converged);
  CHECK(std::abs(r.priorities[0] - r.priorities[1]) < 1e-3);
  CHECK(r.kind == EquilibriumKind::ClassNe);
}

TEST_CASE("class and job equilibria differ on an asymmetric instance") {
  SystemParams p({1.0, 1.0}, {4.0, 1.0}, 4.0, 1.0);
  const auto job = solve_job_ne(p);
  const auto cls = solve_class_ne(p);
  REQUIRE(job.converged);
  REQUIRE(cls.converged);
  CHECK(std::abs(job.priorities[0] - cls.priorities[0]) > 1e-4);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto br = best_response_class(p, cls.priorities, i);
    CHECK(oracle::rel(br.priority, cls.priorities[i]) < 1e-8);
  }
}

TEST_CASE("class-level heavy-traffic equilibrium") {
  SystemParams p({1.0, 1.0}, {4.0, 1.0}, 4.0, 1.0);
  const auto r = solve_class_hte(p);
  REQUIRE(r.converged);
  CHECK(r.kind == EquilibriumKind::ClassHte);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(class_hte_foc_residual(p, r.priorities, i) < 1e-8);
    const double grid = oracle::refined_min(
        [&](double x) { return p.cost_rate(i) * w_ht_class(p, r.priorities, i, x) + x; }, 1e-6, 1e6);
    CHECK(oracle::rel(grid, r.priorities[i]) < 1e-7);
  }
  Rng rng(15);
  for (int n = 0; n < 30; ++n) {
    const auto q = random_instance(rng, 8, 1.0);
    if (q.num_classes() < 2) continue;
    const auto s = solve_class_hte(q);
    REQUIRE(s.converged);
    for (std::size_t i = 0; i < q.num_classes(); ++i) CHECK(class_hte_foc_residual(q, s.priorities, i) < 1e-8);
  }
  SystemParams one({1.0}, {1.0}, 2.0, 1.0);
  const auto pinned = solve_class_hte(one);
  CHECK(pinned.bracket_pinned);
  CHECK(pinned.priorities[0] == doctest::Approx(SolverConfig{}.bracket_lo));
}

TEST_CASE("finite class-level heavy-traffic equilibria approach the limiting strategy") {
  LimitingGameSpec spec{Distribution::uniform(1.0, 11.0), Distribution::uniform(1.0, 11.0), 10.0};
  const auto b = limiting_hte(spec, 1.0);
  std::vector<double> mean_gap(3, 0.0);
  const std::size_t sizes[] = {10, 100, 1000};
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (std::size_t n = 0; n < 3; ++n) {
      Rng rng(seed, n);
      const auto game = sample_finite_game(spec, sizes[n], 1.0, rng);
      const auto r = solve_class_hte(game);
      REQUIRE(r.converged);
      double gap = 0.0;
      for (std::size_t i = 0; i < sizes[n]; ++i) gap = std::max(gap, std::abs(r.priorities[i] - b(game.cost_rate(i))));
      mean_gap[n] += gap / 10.0;
    }
  CHECK(mean_gap[1] < mean_gap[0]);
  CHECK(mean_gap[2] < mean_gap[1]);
}

TEST_CASE("heuristic class-level runs below alpha = 1 never report false convergence") {
  Rng rng(16);
  int converged = 0;
  int total = 0;
  for (int n = 0; n < 60; ++n) {
    auto p = random_instance(rng, 6, 0.25);
    if (p.num_classes() < 2) continue;
    if (p.alpha() >= 1.0) p = p.with_alpha(p.alpha() / 3.5);
    const auto r = solve_class_hte(p);
    CHECK(r.heuristic);
    ++total;
    if (!r.converged || r.bracket_pinned) continue;
    ++converged;
    for (std::size_t i = 0; i < p.num_classes(); ++i) CHECK(class_hte_foc_residual(p, r.priorities, i) < 1e-8);
  }
  CHECK(converged > 0);
  CHECK(total > converged / 2);
}
