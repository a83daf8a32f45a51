#pragma once

#include <optional>
#include <vector>

#include "dps/equilibrium.hpp"

namespace dps {

struct NetworkClass {
  double arrival_rate = 0.0;
  double cost_rate = 0.0;
  std::vector<std::size_t> resources;  // r_i, zero-based resource indices
};

/// J independent DPS resources; class i needs every resource in r_i simultaneously
/// and pays its bid at each (alpha = 1). Each resource must be stable on its own.
class NetworkSpec {
 public:
  NetworkSpec(std::vector<double> service_rates, std::vector<NetworkClass> classes);

  std::size_t num_resources() const { return service_rates_.size(); }
  std::size_t num_classes() const { return classes_.size(); }
  double service_rate(std::size_t j) const { return service_rates_.at(j); }
  const NetworkClass& network_class(std::size_t i) const { return classes_.at(i); }
  /// Classes whose resource set contains j.
  const std::vector<std::size_t>& users(std::size_t j) const { return users_.at(j); }
  bool uses(std::size_t i, std::size_t j) const;
  /// rho_j = sum over users of lambda_i / mu_j.
  double resource_load(std::size_t j) const;

 private:
  std::vector<double> service_rates_;
  std::vector<NetworkClass> classes_;
  std::vector<std::vector<std::size_t>> users_;
};

/// Bids beta_ij, defined exactly on the pairs with j in r_i.
class BidMatrix {
 public:
  /// Every defined pair starts at `initial`.
  BidMatrix(const NetworkSpec& spec, double initial);

  double at(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, double bid);
  bool defined(std::size_t i, std::size_t j) const;
  std::size_t num_classes() const { return num_classes_; }
  std::size_t num_resources() const { return num_resources_; }

 private:
  std::size_t num_classes_;
  std::size_t num_resources_;
  std::vector<double> values_;  // row-major K x J, 0 where undefined
};

/// Heavy-traffic sojourn at resource j for a job bidding beta:
/// 1 / ((1 - rho_j) mu_j beta gamma_j), gamma_j aggregating all current bids at j.
double v_ht_resource(const NetworkSpec& spec, const BidMatrix& bids, std::size_t j, double beta);

/// Bid that makes the heavy-traffic sojourn at j equal `target_wait`.
double inverse_bid(const NetworkSpec& spec, const BidMatrix& bids, std::size_t j,
                   double target_wait);
/// d inverse_bid / d target_wait = -inverse_bid / target_wait.
double inverse_bid_derivative(const NetworkSpec& spec, const BidMatrix& bids, std::size_t j,
                              double target_wait);

struct NetworkReport {
  BidMatrix bids;
  std::vector<double> equalized_wait;        // V-bar_i
  std::vector<std::vector<double>> waits;    // V_ij in the order of r_i
  std::vector<std::vector<double>> slopes;   // b'_ij in the order of r_i
  std::optional<double> poa_bound;           // only when all arrival rates are equal
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Best-response dynamics for the network heavy-traffic equilibrium. A class's best
/// response equalizes its waits across r_i: it picks the common wait V minimizing
/// c_i V + sum_j inverse_bid_j(V) and bids inverse_bid_j(V) at each resource.
NetworkReport solve_network_hte(const NetworkSpec& spec, const SolverConfig& config = {});

/// Price-of-anarchy bound (K-1) max_j sqrt(max_i(-b'_ij) / min_i(-b'_ij)) + 1.
/// Throws HypothesisError unless every class has the same arrival rate.
double network_poa_bound(const NetworkReport& report, const NetworkSpec& spec);

}  // namespace dps
