#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dps {

/// A K-class DPS pricing game: arrival rates, unit-time costs, a common
/// exponential service rate and the pricing exponent (payment = beta^alpha).
///
/// Construction canonicalizes the classes: they are sorted by strictly
/// decreasing cost, and classes with exactly equal cost are merged into one
/// class whose arrival rate is the sum. original_to_canonical() maps each
/// caller-supplied index to the class it ended up in.
class SystemParams {
 public:
  SystemParams(std::vector<double> arrival_rates, std::vector<double> cost_rates,
               double service_rate, double alpha);

  /// Same instance with the service rate chosen so the load equals `load`.
  static SystemParams with_load(std::vector<double> arrival_rates,
                                std::vector<double> cost_rates, double load, double alpha);

  std::size_t num_classes() const { return arrival_rates_.size(); }
  std::span<const double> arrival_rates() const { return arrival_rates_; }
  std::span<const double> cost_rates() const { return cost_rates_; }
  double arrival_rate(std::size_t i) const { return arrival_rates_.at(i); }
  double cost_rate(std::size_t i) const { return cost_rates_.at(i); }
  double service_rate() const { return service_rate_; }
  double alpha() const { return alpha_; }

  double total_arrival_rate() const { return total_arrival_; }
  double load() const { return total_arrival_ / service_rate_; }
  double class_load(std::size_t i) const { return arrival_rate(i) / service_rate_; }

  std::span<const std::size_t> original_to_canonical() const { return original_to_canonical_; }

  SystemParams with_service_rate(double service_rate) const;
  SystemParams with_load(double load) const;
  SystemParams with_alpha(double alpha) const;
  SystemParams with_costs_scaled(double factor) const;

 private:
  std::vector<double> arrival_rates_;
  std::vector<double> cost_rates_;
  double service_rate_;
  double alpha_;
  double total_arrival_ = 0.0;
  std::vector<std::size_t> original_to_canonical_;
};

/// Class priority vector: one strictly positive, finite priority per class.
class PriorityVector {
 public:
  PriorityVector() = default;
  explicit PriorityVector(std::vector<double> values);
  PriorityVector(std::initializer_list<double> values)
      : PriorityVector(std::vector<double>(values)) {}

  static PriorityVector uniform(std::size_t size, double value);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(std::size_t i) const { return values_.at(i); }
  std::span<const double> values() const { return values_; }

  PriorityVector scaled(double factor) const;
  PriorityVector with(std::size_t i, double value) const;

  friend bool operator==(const PriorityVector&, const PriorityVector&) = default;

 private:
  std::vector<double> values_;
};

/// Throws std::invalid_argument unless `priorities` has one entry per class.
void require_matching(const SystemParams& params, const PriorityVector& priorities);

}  // namespace dps
