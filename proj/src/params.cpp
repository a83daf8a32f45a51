#include "dps/params.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dps/errors.hpp"

namespace dps {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

SystemParams::SystemParams(std::vector<double> arrival_rates, std::vector<double> cost_rates,
                           double service_rate, double alpha)
    : service_rate_(service_rate), alpha_(alpha) {
  if (arrival_rates.empty()) throw std::invalid_argument("at least one job class is required");
  if (arrival_rates.size() != cost_rates.size())
    throw std::invalid_argument("arrival_rates and cost_rates differ in length");
  for (std::size_t i = 0; i < arrival_rates.size(); ++i) {
    if (!positive_finite(arrival_rates[i]))
      throw std::invalid_argument("arrival rate of class " + std::to_string(i) + " must be > 0");
    if (!positive_finite(cost_rates[i]))
      throw std::invalid_argument("cost rate of class " + std::to_string(i) + " must be > 0");
  }
  if (!positive_finite(service_rate)) throw std::invalid_argument("service rate must be > 0");
  if (!positive_finite(alpha)) throw std::invalid_argument("pricing exponent must be > 0");

  // Stable sort keeps equal-cost classes in caller order before merging.
  std::vector<std::size_t> order(arrival_rates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cost_rates[a] > cost_rates[b]; });

  original_to_canonical_.assign(arrival_rates.size(), 0);
  for (std::size_t idx : order) {
    if (cost_rates_.empty() || cost_rates_.back() != cost_rates[idx]) {
      cost_rates_.push_back(cost_rates[idx]);
      arrival_rates_.push_back(arrival_rates[idx]);
    } else {
      arrival_rates_.back() += arrival_rates[idx];
    }
    original_to_canonical_[idx] = cost_rates_.size() - 1;
  }

  total_arrival_ = std::accumulate(arrival_rates_.begin(), arrival_rates_.end(), 0.0);
  if (!(total_arrival_ < service_rate_))
    throw InstabilityError("unstable system: load " + std::to_string(total_arrival_ / service_rate_) +
                           " >= 1");
}

SystemParams SystemParams::with_load(std::vector<double> arrival_rates,
                                     std::vector<double> cost_rates, double load, double alpha) {
  if (!(load > 0.0)) throw std::invalid_argument("load must be > 0");
  if (!(load < 1.0)) throw InstabilityError("unstable system: requested load >= 1");
  const double total = std::accumulate(arrival_rates.begin(), arrival_rates.end(), 0.0);
  return SystemParams(std::move(arrival_rates), std::move(cost_rates), total / load, alpha);
}

SystemParams SystemParams::with_service_rate(double service_rate) const {
  SystemParams copy = *this;
  if (!positive_finite(service_rate)) throw std::invalid_argument("service rate must be > 0");
  if (!(total_arrival_ < service_rate)) throw InstabilityError("unstable system: load >= 1");
  copy.service_rate_ = service_rate;
  return copy;
}

SystemParams SystemParams::with_load(double load) const {
  if (!(load > 0.0)) throw std::invalid_argument("load must be > 0");
  if (!(load < 1.0)) throw InstabilityError("unstable system: requested load >= 1");
  return with_service_rate(total_arrival_ / load);
}

SystemParams SystemParams::with_alpha(double alpha) const {
  if (!positive_finite(alpha)) throw std::invalid_argument("pricing exponent must be > 0");
  SystemParams copy = *this;
  copy.alpha_ = alpha;
  return copy;
}

SystemParams SystemParams::with_costs_scaled(double factor) const {
  if (!positive_finite(factor)) throw std::invalid_argument("cost scale factor must be > 0");
  SystemParams copy = *this;
  for (double& c : copy.cost_rates_) c *= factor;
  return copy;
}

PriorityVector::PriorityVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!positive_finite(values_[i]))
      throw std::invalid_argument("priority of class " + std::to_string(i) +
                                  " must be positive and finite");
}

PriorityVector PriorityVector::uniform(std::size_t size, double value) {
  return PriorityVector(std::vector<double>(size, value));
}

PriorityVector PriorityVector::scaled(double factor) const {
  std::vector<double> out = values_;
  for (double& v : out) v *= factor;
  return PriorityVector(std::move(out));
}

PriorityVector PriorityVector::with(std::size_t i, double value) const {
  std::vector<double> out = values_;
  out.at(i) = value;
  return PriorityVector(std::move(out));
}

void require_matching(const SystemParams& params, const PriorityVector& priorities) {
  if (priorities.size() != params.num_classes())
    throw std::invalid_argument("priority vector has " + std::to_string(priorities.size()) +
                                " entries for " + std::to_string(params.num_classes()) +
                                " classes");
}

}  // namespace dps
