#include "dps/metrics.hpp"

#include <cmath>

#include "dps/errors.hpp"

namespace dps {

namespace {

// [sum lambda_i c_i^{alpha/(alpha+1)}] / [sum lambda_i c_i^{-1/(alpha+1)}] / c_K, with every
// term taken relative to the cheapest class so that one class gives exactly 1.
double normalized_sums_ratio(const SystemParams& params) {
  const std::size_t last = params.num_classes() - 1;
  const double a = params.alpha();
  const double lambda_k = params.arrival_rate(last);
  const double c_k = params.cost_rate(last);
  double num = 1.0;
  double den = 1.0;
  for (std::size_t i = 0; i < last; ++i) {
    const double lr = params.arrival_rate(i) / lambda_k;
    const double cr = params.cost_rate(i) / c_k;
    num += lr * std::pow(cr, a / (a + 1.0));
    den += lr * std::pow(cr, -1.0 / (a + 1.0));
  }
  return num / den;
}

double cost_ratio_term(const SystemParams& params) {
  return params.cost_rate(params.num_classes() - 1) * normalized_sums_ratio(params);
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace

double system_cost_hte(const SystemParams& params) {
  const double rho = params.load();
  return rho / (1.0 - rho) * cost_ratio_term(params);
}

double revenue_hte(const SystemParams& params) {
  const double rho = params.load();
  return rho / (params.alpha() * (1.0 - rho)) * cost_ratio_term(params);
}

std::vector<double> optimal_occupancy_cmu(const SystemParams& params) {
  std::vector<double> out(params.num_classes());
  double prev = 0.0;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < params.num_classes(); ++i) {
    cumulative += params.class_load(i);
    if (!(cumulative < 1.0)) throw InstabilityError("cumulative load reached 1");
    const double current = cumulative / (1.0 - cumulative);
    out[i] = current - prev;
    prev = current;
  }
  return out;
}

double optimal_cost_cmu(const SystemParams& params) {
  const auto n = optimal_occupancy_cmu(params);
  double total = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) total += params.cost_rate(i) * n[i];
  return total;
}

EconomicReport poa_report(const SystemParams& params) {
  EconomicReport r;
  r.system_cost = system_cost_hte(params);
  r.revenue = revenue_hte(params);
  r.optimal_cost = optimal_cost_cmu(params);
  r.poa = r.system_cost / r.optimal_cost;

  const std::size_t last = params.num_classes() - 1;
  const double a = params.alpha();
  const double lambda_k = params.arrival_rate(last);
  const double c_k = params.cost_rate(last);
  r.poa_bound_tight = normalized_sums_ratio(params);
  r.poa_bound_loose = (params.total_arrival_rate() - lambda_k) / lambda_k *
                          std::pow(params.cost_rate(0) / c_k, a / (a + 1.0)) +
                      1.0;
  return r;
}

RevenueSlopeProbe revenue_slope_probe(double initial_ratio, double alpha, int max_decades) {
  RevenueSlopeProbe probe;
  double ratio = initial_ratio;
  const double h = 1e-4 * alpha;
  for (int d = 0; d <= max_decades; ++d, ratio *= 10.0) {
    const SystemParams base({1.0, 1.0}, {ratio, 1.0}, 4.0, alpha);
    probe.cost_ratio = ratio;
    probe.slope = (revenue_hte(base.with_alpha(alpha + h)) - revenue_hte(base.with_alpha(alpha - h))) /
                  (2.0 * h);
    probe.positive = probe.slope > 0.0;
    if (probe.positive) break;
  }
  return probe;
}

MonotonicityReport monotonicity_suite(const std::vector<SystemParams>& grid,
                                      const std::vector<double>& alphas) {
  MonotonicityReport report;
  report.alphas = alphas;
  report.passed = true;
  for (const auto& params : grid) {
    MonotonicityRow row;
    for (double a : alphas) {
      const auto p = params.with_alpha(a);
      row.system_cost.push_back(system_cost_hte(p));
      row.revenue.push_back(revenue_hte(p));
    }
    row.cost_increasing = strictly_increasing(row.system_cost);
    row.revenue_decreasing = strictly_decreasing(row.revenue);
    row.revenue_asserted =
        params.cost_rate(0) / params.cost_rate(params.num_classes() - 1) < std::exp(4.0);
    // A single class has C constant in alpha: nothing to assert for C there.
    const bool cost_ok = params.num_classes() == 1 || row.cost_increasing;
    const bool revenue_ok = !row.revenue_asserted || row.revenue_decreasing;
    report.passed = report.passed && cost_ok && revenue_ok;
    report.rows.push_back(std::move(row));
  }
  report.probe = revenue_slope_probe();
  return report;
}

}  // namespace dps
