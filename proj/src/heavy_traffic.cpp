#include "dps/heavy_traffic.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dps/errors.hpp"
#include "dps/exact.hpp"

namespace dps {

HeavyTrafficContext heavy_traffic_context(const SystemParams& params,
                                          const PriorityVector& priorities) {
  require_matching(params, priorities);
  HeavyTrafficContext ctx;
  const double exponent = -1.0 / (params.alpha() + 1.0);
  for (std::size_t i = 0; i < params.num_classes(); ++i) {
    ctx.gamma += params.arrival_rate(i) / priorities[i];
    ctx.s1 += params.arrival_rate(i) * std::pow(params.cost_rate(i), exponent);
  }
  // (1/rho) sum rho_i / beta_i == sum lambda_i / beta_i / sum lambda_i
  ctx.gamma /= params.total_arrival_rate();
  return ctx;
}

double v_ht(const SystemParams& params, const PriorityVector& priorities, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("priority must be positive");
  const double gamma = heavy_traffic_context(params, priorities).gamma;
  return 1.0 / ((1.0 - params.load()) * params.service_rate() * beta * gamma);
}

double w_ht_class(const SystemParams& params, const PriorityVector& priorities, std::size_t i,
                  double beta) {
  require_matching(params, priorities);
  if (i >= params.num_classes()) throw std::out_of_range("class index out of range");
  if (!(beta > 0.0)) throw std::invalid_argument("priority must be positive");
  double others = 0.0;
  for (std::size_t j = 0; j < params.num_classes(); ++j)
    if (j != i) others += params.arrival_rate(j) / priorities[j];
  const double gamma_minus_i = (others + params.arrival_rate(i) / beta) /
                               params.total_arrival_rate();
  return 1.0 / ((1.0 - params.load()) * params.service_rate() * beta * gamma_minus_i);
}

double w_ht_class(const SystemParams& params, const PriorityVector& priorities, std::size_t i) {
  require_matching(params, priorities);
  if (i >= params.num_classes()) throw std::out_of_range("class index out of range");
  return w_ht_class(params, priorities, i, priorities[i]);
}

EquilibriumResult hte_job_level(const SystemParams& params) {
  const double alpha = params.alpha();
  const double rho = params.load();
  double s1 = 0.0;
  for (std::size_t i = 0; i < params.num_classes(); ++i)
    s1 += params.arrival_rate(i) * std::pow(params.cost_rate(i), -1.0 / (alpha + 1.0));
  const double scale = std::pow(alpha * (1.0 - rho) / rho * s1, -1.0 / alpha);

  std::vector<double> beta(params.num_classes());
  for (std::size_t i = 0; i < beta.size(); ++i)
    beta[i] = std::pow(params.cost_rate(i), 1.0 / (alpha + 1.0)) * scale;

  EquilibriumResult out;
  out.priorities = PriorityVector(std::move(beta));
  out.kind = EquilibriumKind::JobHte;
  out.converged = true;
  return out;
}

double hte_foc_residual(const SystemParams& params, const PriorityVector& priorities,
                        std::size_t i) {
  const double beta = priorities.at(i);
  const double payment = params.alpha() * std::pow(beta, params.alpha());
  // beta * d/dbeta [c V^HT(beta)] = -c V^HT(beta) since V^HT is proportional to 1/beta.
  const double waiting = params.cost_rate(i) * v_ht(params, priorities, beta);
  return std::abs(payment - waiting) / payment;
}

// ---------------------------------------------------------------------------

Distribution Distribution::point_masses(std::vector<std::pair<double, double>> atoms) {
  if (atoms.empty()) throw std::invalid_argument("point-mass distribution needs an atom");
  double total = 0.0;
  for (const auto& [value, weight] : atoms) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw std::invalid_argument("atoms must lie in (0, inf)");
    if (!(weight > 0.0)) throw std::invalid_argument("atom weights must be positive");
    total += weight;
  }
  Distribution d;
  d.atoms_ = std::move(atoms);
  std::sort(d.atoms_.begin(), d.atoms_.end());
  for (auto& atom : d.atoms_) atom.second /= total;
  d.lower_ = d.atoms_.front().first;
  d.upper_ = d.atoms_.back().first;
  return d;
}

Distribution Distribution::point_mass(double value) { return point_masses({{value, 1.0}}); }

Distribution Distribution::uniform(double lower, double upper) {
  if (!(lower > 0.0) || !(upper > lower))
    throw std::invalid_argument("uniform support must satisfy 0 < lower < upper");
  Distribution d;
  d.lower_ = lower;
  d.upper_ = upper;
  d.density_bound_ = 1.0 / (upper - lower);
  d.pdf_ = [h = d.density_bound_](double) { return h; };
  d.uniform_ = true;
  return d;
}

Distribution Distribution::density(std::function<double(double)> pdf, double lower, double upper,
                                   double density_bound) {
  if (!(lower > 0.0) || !(upper > lower))
    throw std::invalid_argument("density support must satisfy 0 < lower < upper");
  if (!(density_bound > 0.0)) throw std::invalid_argument("density bound must be positive");
  Distribution d;
  d.lower_ = lower;
  d.upper_ = upper;
  d.pdf_ = std::move(pdf);
  d.density_bound_ = density_bound;
  const double mass = d.expectation([](double) { return 1.0; });
  if (std::abs(mass - 1.0) > 1e-8)
    throw std::invalid_argument("density integrates to " + std::to_string(mass) + ", not 1");
  return d;
}

double Distribution::expectation(const std::function<double(double)>& g,
                                 double abs_tolerance) const {
  if (is_discrete()) {
    double acc = 0.0;
    for (const auto& [value, prob] : atoms_) acc += prob * g(value);
    return acc;
  }
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return g(x) * pdf_(x); }, lower_, upper_, 30, abs_tolerance, &error);
  if (!std::isfinite(value) || error > abs_tolerance)
    throw QuadratureError("quadrature did not reach tolerance (error estimate " +
                          std::to_string(error) + ")");
  return value;
}

double Distribution::mean() const {
  return expectation([](double x) { return x; });
}

double Distribution::sample(Rng& rng) const {
  if (is_discrete()) {
    double u = rng.uniform();
    for (const auto& [value, prob] : atoms_) {
      if (u < prob) return value;
      u -= prob;
    }
    return atoms_.back().first;
  }
  if (uniform_) return rng.uniform(lower_, upper_);
  for (;;) {
    const double x = rng.uniform(lower_, upper_);
    if (rng.uniform() * density_bound_ < pdf_(x)) return x;
  }
}

double LimitingGameSpec::load() const { return arrival.mean() / service_rate; }

void LimitingGameSpec::validate() const {
  if (!(service_rate > 0.0)) throw std::invalid_argument("service rate must be positive");
  if (!(priority_lower > 0.0) || !(priority_upper > priority_lower))
    throw std::invalid_argument("priority support must satisfy 0 < lower < upper");
  if (!(load() < 1.0)) throw InstabilityError("limiting game requires E_G[lambda] < mu");
}

double StrategyFunction::operator()(double cost) const {
  return std::pow(cost, 1.0 / (alpha + 1.0)) * scale;
}

StrategyFunction limiting_hte(const LimitingGameSpec& spec, double alpha) {
  spec.validate();
  if (!(alpha > 0.0)) throw std::invalid_argument("pricing exponent must be positive");
  StrategyFunction b;
  b.alpha = alpha;
  b.s2 = spec.cost.expectation([&](double c) { return std::pow(c, -1.0 / (alpha + 1.0)); });
  const double rho = spec.load();
  b.scale = std::pow(spec.service_rate * alpha * (1.0 - rho) * b.s2, -1.0 / alpha);
  b.gamma = spec.cost.expectation([&](double c) { return 1.0 / b(c); });
  return b;
}

double limiting_foc_residual(const LimitingGameSpec& spec, const StrategyFunction& strategy,
                             double cost) {
  const double beta = strategy(cost);
  const double waiting =
      cost / (spec.service_rate * (1.0 - spec.load()) * strategy.gamma * beta);
  const double payment = strategy.alpha * std::pow(beta, strategy.alpha);
  return std::abs(payment - waiting) / payment;
}

SystemParams sample_finite_game(const LimitingGameSpec& spec, std::size_t num_classes,
                                double alpha, Rng& rng) {
  spec.validate();
  if (num_classes == 0) throw std::invalid_argument("need at least one class");
  std::vector<double> lambda(num_classes);
  std::vector<double> cost(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) {
    cost[k] = spec.cost.sample(rng);
    lambda[k] = spec.arrival.sample(rng) / static_cast<double>(num_classes);
  }
  return SystemParams(std::move(lambda), std::move(cost), spec.service_rate, alpha);
}

std::vector<SystemParams> load_sequence(const SystemParams& base,
                                        const std::vector<double>& loads) {
  std::vector<SystemParams> out;
  out.reserve(loads.size());
  for (double rho : loads) out.push_back(base.with_load(rho));
  return out;
}

std::vector<DeviationGain> deviation_check(const std::vector<SystemParams>& params_seq,
                                           double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("deviation factor must be positive");
  std::vector<DeviationGain> out;
  for (const auto& params : params_seq) {
    if (!std::equal(params.cost_rates().begin(), params.cost_rates().end(),
                    params_seq.front().cost_rates().begin(),
                    params_seq.front().cost_rates().end()))
      throw std::invalid_argument("deviation_check instances must share one cost vector");
    const auto hte = hte_job_level(params).priorities;
    const auto profile = solve_waiting_times(params, hte);
    const double alpha = params.alpha();
    const double scale = 1.0 - params.load();

    DeviationGain gain;
    gain.load = params.load();
    gain.max_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < params.num_classes(); ++i) {
      const double c = params.cost_rate(i);
      const double b = hte[i];
      const auto cost_at = [&](double beta) {
        return c * tagged_job_time(params, hte, profile, beta).sojourn + std::pow(beta, alpha);
      };
      const double g = scale * (cost_at(b) - cost_at(delta * b));
      gain.per_class.push_back(g);
      gain.max_gain = std::max(gain.max_gain, g);
    }
    out.push_back(std::move(gain));
  }
  return out;
}

}  // namespace dps
