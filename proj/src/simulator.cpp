#include "dps/simulator.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dps/parallel.hpp"
#include "dps/rng.hpp"

namespace dps {

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::Dps: return "dps";
    case Policy::StrictPriority: return "strict-priority";
    case Policy::Ros: return "ros";
  }
  return "unknown";
}

Policy parse_policy(std::string_view name) {
  if (name == "dps" || name == "DPS") return Policy::Dps;
  if (name == "strict-priority" || name == "strict_priority") return Policy::StrictPriority;
  if (name == "ros" || name == "ROS") return Policy::Ros;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

void SimConfig::validate() const {
  if (warmup_time && !(*warmup_time >= 0.0)) throw std::invalid_argument("warmup_time must be >= 0");
  if (measurement_time && !(*measurement_time > 0.0))
    throw std::invalid_argument("measurement_time must be positive");
  if (replications < 2) throw std::invalid_argument("at least 2 replications are required");
}

double SimConfig::warmup_for(const SystemParams& params) const {
  if (warmup_time) return *warmup_time;
  return 10.0 / ((1.0 - params.load()) * params.service_rate());
}

double SimConfig::measurement_for(const SystemParams& params) const {
  if (measurement_time) return *measurement_time;
  return 1e6 / (params.total_arrival_rate() + params.service_rate());
}

double SimEstimate::z_score(double reference) const {
  const double gap = mean - reference;
  if (std_error > 0.0) return gap / std_error;
  if (gap == 0.0) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), gap);
}

SimEstimate aggregate(std::string quantity, const std::vector<double>& per_replication) {
  SimEstimate e;
  e.quantity = std::move(quantity);
  e.replications = static_cast<int>(per_replication.size());
  if (per_replication.empty()) return e;
  const double n = static_cast<double>(per_replication.size());
  e.mean = std::accumulate(per_replication.begin(), per_replication.end(), 0.0) / n;
  if (per_replication.size() > 1) {
    double ss = 0.0;
    for (double x : per_replication) ss += (x - e.mean) * (x - e.mean);
    e.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

namespace {

struct Window {
  double start;
  double end;

  bool contains(double t) const { return t >= start && t < end; }
  double overlap(double from, double to) const {
    return std::max(0.0, std::min(to, end) - std::max(from, start));
  }
};

Window window_for(const SystemParams& params, const SimConfig& config) {
  const double start = config.warmup_for(params);
  return Window{start, start + config.measurement_for(params)};
}

template <class Result, class Run>
std::vector<Result> run_replications(const SimConfig& config, Run&& run) {
  config.validate();
  std::vector<Result> out(static_cast<std::size_t>(config.replications));
  parallel_for(out.size(), config.threads, [&](std::size_t r) {
    Rng rng(config.rng_seed, r);
    out[r] = run(rng);
  });
  return out;
}

// Index drawn with probability proportional to weights[i]; `u` is uniform on [0, total).
template <class Weight>
std::size_t pick_weighted(std::size_t n, double u, Weight&& weight) {
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double w = weight(i);
    if (u < w) return i;
    u -= w;
  }
  std::size_t last = n - 1;
  while (last > 0 && weight(last) <= 0.0) --last;
  return last;
}

/// Per-replication tallies for policies that track individual jobs.
struct JobTally {
  std::vector<double> sojourn_sum;
  std::vector<double> sojourn_count;
  std::vector<double> area;
  double length = 0.0;

  explicit JobTally(std::size_t k = 0) : sojourn_sum(k, 0.0), sojourn_count(k, 0.0), area(k, 0.0) {}
};

ClassEstimates summarize(const SystemParams& params, const std::vector<JobTally>& reps) {
  const std::size_t k_count = params.num_classes();
  ClassEstimates out;
  std::vector<double> weighted(reps.size(), 0.0);
  std::vector<double> total(reps.size(), 0.0);
  for (std::size_t i = 0; i < k_count; ++i) {
    std::vector<double> w(reps.size());
    std::vector<double> n(reps.size());
    std::vector<double> gap(reps.size());
    for (std::size_t r = 0; r < reps.size(); ++r) {
      const auto& t = reps[r];
      w[r] = t.sojourn_count[i] > 0.0 ? t.sojourn_sum[i] / t.sojourn_count[i]
                                      : std::numeric_limits<double>::quiet_NaN();
      n[r] = t.area[i] / t.length;
      gap[r] = params.arrival_rate(i) * w[r] - n[r];
      weighted[r] += params.arrival_rate(i) * w[r];
      total[r] += n[r];
    }
    out.sojourn.push_back(aggregate("W_" + std::to_string(i + 1), w));
    out.occupancy.push_back(aggregate("E[N_" + std::to_string(i + 1) + "]", n));
    out.little_gap.push_back(aggregate("lambda*W-N_" + std::to_string(i + 1), gap));
  }
  out.weighted_sojourn = aggregate("sum lambda*W", weighted);
  out.total_occupancy = aggregate("E[N]", total);
  return out;
}

std::size_t draw_arrival_class(const SystemParams& params, double u) {
  return pick_weighted(params.num_classes(), u, [&](std::size_t i) { return params.arrival_rate(i); });
}

JobTally run_dps_chain(const SystemParams& params, const PriorityVector& beta, const Window& win,
                       Rng& rng) {
  const std::size_t k_count = params.num_classes();
  const double lambda = params.total_arrival_rate();
  const double mu = params.service_rate();
  JobTally tally(k_count);
  tally.length = win.end - win.start;
  std::vector<std::vector<double>> jobs(k_count);
  std::size_t present = 0;
  long outstanding = 0;
  double t = 0.0;
  for (;;) {
    double weight = 0.0;
    for (std::size_t i = 0; i < k_count; ++i) weight += static_cast<double>(jobs[i].size()) * beta[i];
    const double rate = lambda + (present > 0 ? mu : 0.0);
    const double next = t + rng.exponential(rate);
    const double overlap = win.overlap(t, next);
    if (overlap > 0.0)
      for (std::size_t i = 0; i < k_count; ++i) tally.area[i] += static_cast<double>(jobs[i].size()) * overlap;
    t = next;
    if (t >= win.end && outstanding == 0) break;

    const double u = rng.uniform() * rate;
    if (u < lambda) {
      const std::size_t cls = draw_arrival_class(params, u);
      jobs[cls].push_back(t);
      ++present;
      if (win.contains(t)) ++outstanding;
    } else {
      const double v = (u - lambda) / mu * weight;
      const std::size_t cls = pick_weighted(
          k_count, v, [&](std::size_t i) { return static_cast<double>(jobs[i].size()) * beta[i]; });
      auto& queue = jobs[cls];
      const std::size_t pick = rng.index(queue.size());
      const double arrived = queue[pick];
      queue[pick] = queue.back();
      queue.pop_back();
      --present;
      if (win.contains(arrived)) {
        tally.sojourn_sum[cls] += t - arrived;
        tally.sojourn_count[cls] += 1.0;
        --outstanding;
      }
    }
  }
  return tally;
}

struct ResidualJob {
  std::size_t cls;
  double arrived;
  double work;  // remaining time at full server capacity
};

JobTally run_dps_residual(const SystemParams& params, const PriorityVector& beta,
                          const Window& win, Rng& rng) {
  const std::size_t k_count = params.num_classes();
  const double lambda = params.total_arrival_rate();
  const double mu = params.service_rate();
  JobTally tally(k_count);
  tally.length = win.end - win.start;
  std::vector<ResidualJob> jobs;
  std::vector<double> counts(k_count, 0.0);
  long outstanding = 0;
  double t = 0.0;
  for (;;) {
    double weight = 0.0;
    for (const auto& j : jobs) weight += beta[j.cls];
    double to_departure = std::numeric_limits<double>::infinity();
    std::size_t leaving = 0;
    for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
      const double finish = jobs[idx].work * weight / beta[jobs[idx].cls];
      if (finish < to_departure) {
        to_departure = finish;
        leaving = idx;
      }
    }
    const double to_arrival = rng.exponential(lambda);
    const bool arrival = to_arrival < to_departure;
    const double dt = arrival ? to_arrival : to_departure;
    const double overlap = win.overlap(t, t + dt);
    if (overlap > 0.0)
      for (std::size_t i = 0; i < k_count; ++i) tally.area[i] += counts[i] * overlap;
    for (auto& j : jobs) j.work -= dt * beta[j.cls] / weight;
    t += dt;
    if (t >= win.end && outstanding == 0) break;

    if (arrival) {
      const std::size_t cls = draw_arrival_class(params, rng.uniform() * lambda);
      jobs.push_back(ResidualJob{cls, t, rng.exponential(mu)});
      counts[cls] += 1.0;
      if (win.contains(t)) ++outstanding;
    } else {
      const ResidualJob done = jobs[leaving];
      jobs[leaving] = jobs.back();
      jobs.pop_back();
      counts[done.cls] -= 1.0;
      if (win.contains(done.arrived)) {
        tally.sojourn_sum[done.cls] += t - done.arrived;
        tally.sojourn_count[done.cls] += 1.0;
        --outstanding;
      }
    }
  }
  return tally;
}

// Plays out one probe from the current counts; returns its sojourn.
double play_probe(const SystemParams& params, const PriorityVector& beta, double probe,
                  std::vector<double> counts, Rng& rng) {
  const std::size_t k_count = params.num_classes();
  const double lambda = params.total_arrival_rate();
  const double mu = params.service_rate();
  const double rate = lambda + mu;
  double elapsed = 0.0;
  for (;;) {
    elapsed += rng.exponential(rate);
    const double u = rng.uniform() * rate;
    if (u < lambda) {
      counts[draw_arrival_class(params, u)] += 1.0;
      continue;
    }
    double weight = probe;
    for (std::size_t i = 0; i < k_count; ++i) weight += counts[i] * beta[i];
    double v = (u - lambda) / mu * weight;
    if (v < probe) return elapsed;
    v -= probe;
    const std::size_t cls = pick_weighted(k_count, v, [&](std::size_t i) { return counts[i] * beta[i]; });
    counts[cls] -= 1.0;
  }
}

}  // namespace

ClassEstimates simulate_dps(const SystemParams& params, const PriorityVector& priorities,
                            const SimConfig& config) {
  require_matching(params, priorities);
  const Window win = window_for(params, config);
  auto reps = run_replications<JobTally>(
      config, [&](Rng& rng) { return run_dps_chain(params, priorities, win, rng); });
  return summarize(params, reps);
}

ClassEstimates simulate_dps_residual(const SystemParams& params,
                                     const PriorityVector& priorities, const SimConfig& config) {
  require_matching(params, priorities);
  const Window win = window_for(params, config);
  auto reps = run_replications<JobTally>(
      config, [&](Rng& rng) { return run_dps_residual(params, priorities, win, rng); });
  return summarize(params, reps);
}

SimEstimate simulate_tagged(const SystemParams& params, const PriorityVector& priorities,
                            double beta, const SimConfig& config) {
  require_matching(params, priorities);
  if (!(beta > 0.0)) throw std::invalid_argument("probe priority must be positive");
  const Window win = window_for(params, config);
  const std::size_t k_count = params.num_classes();
  const double lambda = params.total_arrival_rate();
  const double mu = params.service_rate();
  const double probe_rate = lambda;

  auto reps = run_replications<double>(config, [&](Rng& rng) {
    std::vector<double> counts(k_count, 0.0);
    double present = 0.0;
    double sum = 0.0;
    double probes = 0.0;
    double t = 0.0;
    while (t < win.end) {
      double weight = 0.0;
      for (std::size_t i = 0; i < k_count; ++i) weight += counts[i] * priorities[i];
      const double probing = win.contains(t) ? probe_rate : 0.0;
      const double rate = lambda + (present > 0.0 ? mu : 0.0) + probing;
      t += rng.exponential(rate);
      if (t >= win.end) break;
      const double u = rng.uniform() * rate;
      if (u < lambda) {
        counts[draw_arrival_class(params, u)] += 1.0;
        present += 1.0;
      } else if (u < lambda + probing) {
        if (win.contains(t)) {
          sum += play_probe(params, priorities, beta, counts, rng);
          probes += 1.0;
        }
      } else {
        const double v = (u - lambda - probing) / mu * weight;
        const std::size_t cls = pick_weighted(
            k_count, v, [&](std::size_t i) { return counts[i] * priorities[i]; });
        counts[cls] -= 1.0;
        present -= 1.0;
      }
    }
    return probes > 0.0 ? sum / probes : std::numeric_limits<double>::quiet_NaN();
  });
  return aggregate("V(beta)", reps);
}

StrictPriorityEstimates simulate_strict_priority(const SystemParams& params,
                                                 const SimConfig& config) {
  const Window win = window_for(params, config);
  const std::size_t k_count = params.num_classes();
  const double lambda = params.total_arrival_rate();
  const double mu = params.service_rate();

  auto reps = run_replications<std::vector<double>>(config, [&](Rng& rng) {
    std::vector<double> counts(k_count, 0.0);
    std::vector<double> area(k_count, 0.0);
    double present = 0.0;
    double t = 0.0;
    while (t < win.end) {
      const double rate = lambda + (present > 0.0 ? mu : 0.0);
      const double next = t + rng.exponential(rate);
      const double overlap = win.overlap(t, next);
      if (overlap > 0.0)
        for (std::size_t i = 0; i < k_count; ++i) area[i] += counts[i] * overlap;
      t = next;
      const double u = rng.uniform() * rate;
      if (u < lambda) {
        counts[draw_arrival_class(params, u)] += 1.0;
        present += 1.0;
      } else {
        std::size_t served = 0;
        while (counts[served] == 0.0) ++served;
        counts[served] -= 1.0;
        present -= 1.0;
      }
    }
    for (double& a : area) a /= (win.end - win.start);
    return area;
  });

  StrictPriorityEstimates out;
  std::vector<double> cost(reps.size(), 0.0);
  std::vector<double> total(reps.size(), 0.0);
  for (std::size_t i = 0; i < k_count; ++i) {
    std::vector<double> n(reps.size());
    for (std::size_t r = 0; r < reps.size(); ++r) {
      n[r] = reps[r][i];
      cost[r] += params.cost_rate(i) * n[r];
      total[r] += n[r];
    }
    out.occupancy.push_back(aggregate("E[N_" + std::to_string(i + 1) + "]", n));
  }
  out.optimal_cost = aggregate("C_opt", cost);
  out.total_occupancy = aggregate("E[N]", total);
  return out;
}

RosQueue::RosQueue(std::vector<double> priorities)
    : priorities_(std::move(priorities)), waiting_(priorities_.size()) {
  for (double b : priorities_)
    if (!(b > 0.0)) throw std::invalid_argument("priorities must be positive");
}

bool RosQueue::arrive(std::size_t job_class, double time) {
  if (job_class >= waiting_.size()) throw std::out_of_range("class index out of range");
  if (!in_service_) {
    in_service_ = Departure{job_class, time};
    return true;
  }
  waiting_[job_class].push_back(time);
  return false;
}

std::size_t RosQueue::count(std::size_t job_class) const {
  const std::size_t serving = in_service_ && in_service_->job_class == job_class ? 1 : 0;
  return waiting_.at(job_class).size() + serving;
}

ClassEstimates simulate_ros(const SystemParams& params, const PriorityVector& priorities,
                            const SimConfig& config) {
  require_matching(params, priorities);
  const Window win = window_for(params, config);
  const std::size_t k_count = params.num_classes();
  const double lambda = params.total_arrival_rate();
  const double mu = params.service_rate();

  auto reps = run_replications<JobTally>(config, [&](Rng& rng) {
    JobTally tally(k_count);
    tally.length = win.end - win.start;
    RosQueue queue(std::vector<double>(priorities.values().begin(), priorities.values().end()));
    std::vector<double> counts(k_count, 0.0);
    long outstanding = 0;
    double t = 0.0;
    for (;;) {
      const double rate = lambda + (queue.busy() ? mu : 0.0);
      const double next = t + rng.exponential(rate);
      const double overlap = win.overlap(t, next);
      if (overlap > 0.0)
        for (std::size_t i = 0; i < k_count; ++i) tally.area[i] += counts[i] * overlap;
      t = next;
      if (t >= win.end && outstanding == 0) break;
      const double u = rng.uniform() * rate;
      if (u < lambda) {
        const std::size_t cls = draw_arrival_class(params, u);
        queue.arrive(cls, t);
        counts[cls] += 1.0;
        if (win.contains(t)) ++outstanding;
      } else {
        const auto done = queue.complete([&] { return rng.uniform(); });
        counts[done.job_class] -= 1.0;
        if (win.contains(done.arrival_time)) {
          tally.sojourn_sum[done.job_class] += t - done.arrival_time;
          tally.sojourn_count[done.job_class] += 1.0;
          --outstanding;
        }
      }
    }
    return tally;
  });
  return summarize(params, reps);
}

}  // namespace dps
