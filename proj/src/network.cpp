#include "dps/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dps/errors.hpp"

namespace dps {

NetworkSpec::NetworkSpec(std::vector<double> service_rates, std::vector<NetworkClass> classes)
    : service_rates_(std::move(service_rates)), classes_(std::move(classes)) {
  if (service_rates_.empty()) throw std::invalid_argument("network needs at least one resource");
  if (classes_.empty()) throw std::invalid_argument("network needs at least one class");
  for (double mu : service_rates_)
    if (!(mu > 0.0) || !std::isfinite(mu))
      throw std::invalid_argument("service rates must be positive");
  users_.resize(service_rates_.size());
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    auto& cls = classes_[i];
    if (!(cls.arrival_rate > 0.0) || !(cls.cost_rate > 0.0))
      throw std::invalid_argument("class " + std::to_string(i) +
                                  " needs positive arrival and cost rates");
    if (cls.resources.empty())
      throw std::invalid_argument("class " + std::to_string(i) + " uses no resource");
    std::sort(cls.resources.begin(), cls.resources.end());
    if (std::adjacent_find(cls.resources.begin(), cls.resources.end()) != cls.resources.end())
      throw std::invalid_argument("class " + std::to_string(i) + " lists a resource twice");
    for (std::size_t j : cls.resources) {
      if (j >= service_rates_.size())
        throw std::invalid_argument("class " + std::to_string(i) + " uses unknown resource " +
                                    std::to_string(j));
      users_[j].push_back(i);
    }
  }
  for (std::size_t j = 0; j < service_rates_.size(); ++j)
    if (!(resource_load(j) < 1.0))
      throw InstabilityError("resource " + std::to_string(j) + " is unstable (load " +
                             std::to_string(resource_load(j)) + ")");
}

bool NetworkSpec::uses(std::size_t i, std::size_t j) const {
  const auto& r = network_class(i).resources;
  return std::binary_search(r.begin(), r.end(), j);
}

double NetworkSpec::resource_load(std::size_t j) const {
  double total = 0.0;
  for (std::size_t i : users(j)) total += classes_[i].arrival_rate;
  return total / service_rates_[j];
}

BidMatrix::BidMatrix(const NetworkSpec& spec, double initial)
    : num_classes_(spec.num_classes()),
      num_resources_(spec.num_resources()),
      values_(num_classes_ * num_resources_, 0.0) {
  if (!(initial > 0.0)) throw std::invalid_argument("bids must be positive");
  for (std::size_t i = 0; i < num_classes_; ++i)
    for (std::size_t j : spec.network_class(i).resources) values_[i * num_resources_ + j] = initial;
}

bool BidMatrix::defined(std::size_t i, std::size_t j) const {
  return i < num_classes_ && j < num_resources_ && values_[i * num_resources_ + j] > 0.0;
}

double BidMatrix::at(std::size_t i, std::size_t j) const {
  if (!defined(i, j))
    throw std::out_of_range("no bid for class " + std::to_string(i) + " at resource " +
                            std::to_string(j));
  return values_[i * num_resources_ + j];
}

void BidMatrix::set(std::size_t i, std::size_t j, double bid) {
  if (!defined(i, j))
    throw std::out_of_range("no bid for class " + std::to_string(i) + " at resource " +
                            std::to_string(j));
  if (!(bid > 0.0) || !std::isfinite(bid)) throw std::invalid_argument("bids must be positive");
  values_[i * num_resources_ + j] = bid;
}

namespace {

// a_j with V^HT_j(beta) = a_j / beta.
double resource_scale(const NetworkSpec& spec, const BidMatrix& bids, std::size_t j) {
  const auto& users = spec.users(j);
  if (users.empty()) throw std::invalid_argument("resource " + std::to_string(j) + " is unused");
  double total = 0.0;
  double inverse = 0.0;
  for (std::size_t i : users) {
    const double lambda = spec.network_class(i).arrival_rate;
    total += lambda;
    inverse += lambda / bids.at(i, j);
  }
  const double gamma = inverse / total;
  const double rho = spec.resource_load(j);
  return 1.0 / ((1.0 - rho) * spec.service_rate(j) * gamma);
}

}  // namespace

double v_ht_resource(const NetworkSpec& spec, const BidMatrix& bids, std::size_t j, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("priority must be positive");
  return resource_scale(spec, bids, j) / beta;
}

double inverse_bid(const NetworkSpec& spec, const BidMatrix& bids, std::size_t j,
                   double target_wait) {
  if (!(target_wait > 0.0)) throw std::invalid_argument("target wait must be positive");
  return resource_scale(spec, bids, j) / target_wait;
}

double inverse_bid_derivative(const NetworkSpec& spec, const BidMatrix& bids, std::size_t j,
                              double target_wait) {
  return -inverse_bid(spec, bids, j, target_wait) / target_wait;
}

NetworkReport solve_network_hte(const NetworkSpec& spec, const SolverConfig& config) {
  config.validate();
  BidMatrix bids(spec, 1.0);
  NetworkReport report{bids, {}, {}, {}, std::nullopt, 0, 0.0, false};

  std::vector<double> scale(spec.num_resources());
  for (int it = 1; it <= config.max_iterations; ++it) {
    for (std::size_t j = 0; j < spec.num_resources(); ++j)
      scale[j] = spec.users(j).empty() ? 0.0 : resource_scale(spec, bids, j);

    BidMatrix next = bids;
    double residual = 0.0;
    for (std::size_t i = 0; i < spec.num_classes(); ++i) {
      const auto& cls = spec.network_class(i);
      // minimize c V + (sum_j a_j) / V  =>  V = sqrt(sum_j a_j / c)
      double total_scale = 0.0;
      for (std::size_t j : cls.resources) total_scale += scale[j];
      const double wait = std::sqrt(total_scale / cls.cost_rate);
      for (std::size_t j : cls.resources) {
        const double old = bids.at(i, j);
        double fresh = scale[j] / wait;
        if (config.damping < 1.0) fresh = (1.0 - config.damping) * old + config.damping * fresh;
        // A class alone on resources with different loads cannot equalize its waits;
        // its bids then drift geometrically toward 0 or infinity.
        if (!(fresh >= config.bracket_lo && fresh <= config.bracket_hi))
          throw NonConvergenceError("network bid of class " + std::to_string(i + 1) + " at resource " +
                                    std::to_string(j + 1) + " left the bracket after " +
                                    std::to_string(it) + " sweeps; no equilibrium");
        next.set(i, j, fresh);
        residual = std::max(residual, std::abs(fresh - old) / old);
      }
    }
    bids = std::move(next);
    report.iterations = it;
    report.residual = residual;
    if (residual < config.br_tolerance) {
      report.converged = true;
      break;
    }
  }

  report.bids = bids;
  for (std::size_t i = 0; i < spec.num_classes(); ++i) {
    const auto& cls = spec.network_class(i);
    std::vector<double> waits;
    std::vector<double> slopes;
    double sum = 0.0;
    for (std::size_t j : cls.resources) {
      const double w = v_ht_resource(spec, bids, j, bids.at(i, j));
      waits.push_back(w);
      slopes.push_back(inverse_bid_derivative(spec, bids, j, w));
      sum += w;
    }
    report.equalized_wait.push_back(sum / static_cast<double>(waits.size()));
    report.waits.push_back(std::move(waits));
    report.slopes.push_back(std::move(slopes));
  }
  try {
    report.poa_bound = network_poa_bound(report, spec);
  } catch (const HypothesisError&) {
    report.poa_bound.reset();
  }
  return report;
}

double network_poa_bound(const NetworkReport& report, const NetworkSpec& spec) {
  const double lambda = spec.network_class(0).arrival_rate;
  for (std::size_t i = 1; i < spec.num_classes(); ++i)
    if (std::abs(spec.network_class(i).arrival_rate - lambda) > 1e-12 * lambda)
      throw HypothesisError("network PoA bound requires equal arrival rates across classes");
  if (report.slopes.size() != spec.num_classes())
    throw std::invalid_argument("report does not match the network");

  double worst = 1.0;
  for (std::size_t j = 0; j < spec.num_resources(); ++j) {
    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i : spec.users(j)) {
      const auto& r = spec.network_class(i).resources;
      const auto pos = static_cast<std::size_t>(std::lower_bound(r.begin(), r.end(), j) - r.begin());
      const double s = -report.slopes[i][pos];
      hi = std::max(hi, s);
      lo = std::min(lo, s);
    }
    if (!spec.users(j).empty()) worst = std::max(worst, std::sqrt(hi / lo));
  }
  return static_cast<double>(spec.num_classes() - 1) * worst + 1.0;
}

}  // namespace dps
