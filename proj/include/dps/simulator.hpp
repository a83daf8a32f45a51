#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dps/params.hpp"

namespace dps {

enum class Policy { Dps, StrictPriority, Ros };

std::string_view to_string(Policy policy);
Policy parse_policy(std::string_view name);

struct SimConfig {
  std::optional<double> warmup_time;       // default 10 / ((1 - rho) mu)
  std::optional<double> measurement_time;  // default ~1e6 events: 1e6 / (lambda + mu)
  int replications = 20;
  std::uint64_t rng_seed = 1;
  Policy policy = Policy::Dps;
  unsigned threads = 1;

  void validate() const;
  double warmup_for(const SystemParams& params) const;
  double measurement_for(const SystemParams& params) const;
};

/// Across-replication mean and standard error (sample sd / sqrt(R)).
struct SimEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int replications = 0;
  std::string quantity;

  /// (mean - reference) / std_error; 0 when both the gap and the error vanish.
  double z_score(double reference) const;
};

SimEstimate aggregate(std::string quantity, const std::vector<double>& per_replication);

struct ClassEstimates {
  std::vector<SimEstimate> sojourn;     // W_i
  std::vector<SimEstimate> occupancy;   // time-average N_i
  std::vector<SimEstimate> little_gap;  // lambda_i W_i - N_i per replication
  SimEstimate weighted_sojourn;         // sum_i lambda_i W_i
  SimEstimate total_occupancy;          // time-average of sum_i N_i
};

/// DPS as a jump chain on (n_1..n_K): class i completes at rate mu n_i beta_i / sum_j n_j beta_j
/// and the departing job is uniform within its class. Jobs arriving during the
/// measurement window are followed until they leave.
ClassEstimates simulate_dps(const SystemParams& params, const PriorityVector& priorities,
                            const SimConfig& config);

/// DPS with explicit per-job residual work (exponential(mu) at arrival) drained at
/// rate mu beta_i / sum_j n_j beta_j. Slower; used to cross-check the jump chain.
ClassEstimates simulate_dps_residual(const SystemParams& params,
                                     const PriorityVector& priorities, const SimConfig& config);

/// Sojourn of probe jobs with priority `beta`. Probes arrive as a Poisson stream
/// (rate lambda) into the unperturbed chain; each probe is played out on a copy of
/// the state, so probes never interact with each other or with the main run.
SimEstimate simulate_tagged(const SystemParams& params, const PriorityVector& priorities,
                            double beta, const SimConfig& config);

struct StrictPriorityEstimates {
  SimEstimate optimal_cost;            // sum_i c_i N_i
  std::vector<SimEstimate> occupancy;  // time-average N_i
  SimEstimate total_occupancy;
};

/// Preemptive-resume strict priority in canonical (descending cost) order.
StrictPriorityEstimates simulate_strict_priority(const SystemParams& params,
                                                 const SimConfig& config);

/// Non-preemptive random order of service: when the server frees up, waiting job l
/// starts with probability beta_l / sum_m beta_m.
ClassEstimates simulate_ros(const SystemParams& params, const PriorityVector& priorities,
                            const SimConfig& config);

/// Single-server ROS queue state, exposed so the service discipline can be driven
/// event by event.
class RosQueue {
 public:
  RosQueue(std::vector<double> priorities);

  struct Departure {
    std::size_t job_class;
    double arrival_time;
  };

  /// Returns true when the job went straight into service.
  bool arrive(std::size_t job_class, double time);
  /// Completes the job in service and draws the next one using `uniform` in [0, 1)
  /// twice (class, then job within class).
  template <class Uniform>
  Departure complete(Uniform&& uniform);

  bool busy() const { return in_service_.has_value(); }
  std::size_t in_service_class() const { return in_service_->job_class; }
  std::size_t count(std::size_t job_class) const;
  std::size_t waiting(std::size_t job_class) const { return waiting_.at(job_class).size(); }

 private:
  std::vector<double> priorities_;
  std::vector<std::vector<double>> waiting_;  // arrival times per class
  std::optional<Departure> in_service_;
};

template <class Uniform>
RosQueue::Departure RosQueue::complete(Uniform&& uniform) {
  const Departure done = in_service_.value();
  in_service_.reset();
  double total = 0.0;
  for (std::size_t i = 0; i < waiting_.size(); ++i)
    total += static_cast<double>(waiting_[i].size()) * priorities_[i];
  if (total > 0.0) {
    double u = uniform() * total;
    std::size_t cls = 0;
    for (; cls + 1 < waiting_.size(); ++cls) {
      const double w = static_cast<double>(waiting_[cls].size()) * priorities_[cls];
      if (u < w) break;
      u -= w;
    }
    while (waiting_[cls].empty()) --cls;  // guards round-off on the last bucket
    auto& queue = waiting_[cls];
    const auto pick = std::min(queue.size() - 1,
                               static_cast<std::size_t>(uniform() * static_cast<double>(queue.size())));
    in_service_ = Departure{cls, queue[pick]};
    queue[pick] = queue.back();
    queue.pop_back();
  }
  return done;
}

}  // namespace dps
