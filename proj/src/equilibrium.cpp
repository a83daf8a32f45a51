#include "dps/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dps/errors.hpp"
#include "dps/exact.hpp"
#include "dps/heavy_traffic.hpp"
#include "dps/minimize.hpp"

namespace dps {

std::string_view to_string(EquilibriumKind kind) {
  switch (kind) {
    case EquilibriumKind::JobNe: return "job-NE";
    case EquilibriumKind::ClassNe: return "class-NE";
    case EquilibriumKind::JobHte: return "job-HTE";
    case EquilibriumKind::ClassHte: return "class-HTE";
    case EquilibriumKind::LimitingHte: return "limiting-HTE";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (!(br_tolerance > 0.0) || !(inner_tolerance > 0.0))
    throw std::invalid_argument("solver tolerances must be positive");
  if (!(bracket_lo > 0.0) || !(bracket_hi > bracket_lo))
    throw std::invalid_argument("solver bracket must satisfy 0 < lo < hi");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(damping > 0.0) || damping > 1.0) throw std::invalid_argument("damping must be in (0, 1]");
  if (multistart_count < 1) throw std::invalid_argument("multistart_count must be >= 1");
}

namespace {

int starts_for(const SystemParams& params, const SolverConfig& config) {
  return params.alpha() < 1.0 ? config.multistart_count : 1;
}

double job_best_response(const SystemParams& params, const PriorityVector& priorities,
                         const WaitingProfile& profile, std::size_t i,
                         const SolverConfig& config) {
  const double c = params.cost_rate(i);
  const double alpha = params.alpha();
  const auto objective = [&](double b) {
    return c * tagged_sojourn(params, priorities, profile, b) + std::pow(b, alpha);
  };
  const auto derivative = [&](double b) {
    return c * tagged_sojourn_derivative(params, priorities, profile, b) +
           alpha * std::pow(b, alpha - 1.0);
  };
  const auto m = minimize_positive(objective, derivative, config.bracket_lo, config.bracket_hi,
                                   config.inner_tolerance, starts_for(params, config));
  if (m.at_lower || m.at_upper)
    throw BracketExhaustedError("job-level best response of class " + std::to_string(i + 1) +
                                    " pinned to the search interval at " +
                                    std::to_string(m.location),
                                m.location);
  return m.location;
}

struct SweepOutput {
  std::vector<double> priorities;
  bool pinned = false;
};

template <class Sweep>
EquilibriumResult run_dynamics(const SystemParams& params, const SolverConfig& config,
                               PriorityVector current, EquilibriumKind kind, Sweep&& sweep) {
  config.validate();
  require_matching(params, current);
  EquilibriumResult out;
  out.kind = kind;
  out.heuristic = params.alpha() < 1.0;
  out.residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= config.max_iterations; ++it) {
    SweepOutput next = sweep(current);
    double residual = 0.0;
    for (std::size_t i = 0; i < next.priorities.size(); ++i) {
      const double old = current[i];
      double& fresh = next.priorities[i];
      if (config.damping < 1.0) fresh = (1.0 - config.damping) * old + config.damping * fresh;
      residual = std::max(residual, std::abs(fresh - old) / old);
    }
    current = PriorityVector(std::move(next.priorities));
    out.iterations = it;
    out.residual = residual;
    out.bracket_pinned = next.pinned;
    if (residual < config.br_tolerance) {
      out.converged = true;
      break;
    }
  }
  out.priorities = std::move(current);
  return out;
}

PriorityVector default_init(const SystemParams& params, const std::optional<PriorityVector>& init) {
  return init ? *init : hte_job_level(params).priorities;
}

struct ClassHteObjective {
  double kappa;   // c_i rho / (1 - rho)
  double others;  // sum_{j != i} lambda_j / beta_j
  double own;     // lambda_i
  double alpha;

  double value(double b) const { return kappa / (b * others + own) + std::pow(b, alpha); }
  double derivative(double b) const {
    const double s = b * others + own;
    return -kappa * others / (s * s) + alpha * std::pow(b, alpha - 1.0);
  }
};

ClassHteObjective class_hte_objective(const SystemParams& params, const PriorityVector& priorities,
                                      std::size_t i, double inverse_total) {
  const double rho = params.load();
  return ClassHteObjective{
      params.cost_rate(i) * rho / (1.0 - rho),
      inverse_total - params.arrival_rate(i) / priorities[i],
      params.arrival_rate(i),
      params.alpha(),
  };
}

double inverse_priority_total(const SystemParams& params, const PriorityVector& priorities) {
  double acc = 0.0;
  for (std::size_t j = 0; j < params.num_classes(); ++j)
    acc += params.arrival_rate(j) / priorities[j];
  return acc;
}

}  // namespace

double best_response_job(const SystemParams& params, const PriorityVector& priorities,
                         std::size_t i, const SolverConfig& config) {
  config.validate();
  require_matching(params, priorities);
  if (i >= params.num_classes()) throw std::out_of_range("class index out of range");
  return job_best_response(params, priorities, solve_waiting_times(params, priorities), i, config);
}

ClassBestResponse best_response_class(const SystemParams& params,
                                      const PriorityVector& priorities, std::size_t i,
                                      const SolverConfig& config) {
  config.validate();
  require_matching(params, priorities);
  if (i >= params.num_classes()) throw std::out_of_range("class index out of range");
  const double c = params.cost_rate(i);
  const double alpha = params.alpha();
  const auto objective = [&](double b) {
    return c * solve_waiting_times(params, priorities.with(i, b)).sojourn[i] + std::pow(b, alpha);
  };
  const auto derivative = [&](double b) {
    const auto trial = priorities.with(i, b);
    const auto profile = solve_waiting_times(params, trial);
    return c * sojourn_sensitivity(params, trial, profile, i)[i] +
           alpha * std::pow(b, alpha - 1.0);
  };
  const auto m = minimize_positive(objective, derivative, config.bracket_lo, config.bracket_hi,
                                   config.inner_tolerance, starts_for(params, config));
  if (m.at_upper)
    throw BracketExhaustedError("class-level best response of class " + std::to_string(i + 1) +
                                    " pinned to the bracket ceiling",
                                m.location);
  return ClassBestResponse{m.location, m.at_lower};
}

EquilibriumResult solve_job_ne(const SystemParams& params, const SolverConfig& config,
                               const std::optional<PriorityVector>& init) {
  return run_dynamics(params, config, default_init(params, init), EquilibriumKind::JobNe,
                      [&](const PriorityVector& current) {
                        const auto profile = solve_waiting_times(params, current);
                        SweepOutput out;
                        out.priorities.resize(params.num_classes());
                        for (std::size_t i = 0; i < params.num_classes(); ++i)
                          out.priorities[i] =
                              job_best_response(params, current, profile, i, config);
                        return out;
                      });
}

EquilibriumResult solve_class_ne(const SystemParams& params, const SolverConfig& config,
                                 const std::optional<PriorityVector>& init) {
  return run_dynamics(params, config, default_init(params, init), EquilibriumKind::ClassNe,
                      [&](const PriorityVector& current) {
                        SweepOutput out;
                        out.priorities.resize(params.num_classes());
                        for (std::size_t i = 0; i < params.num_classes(); ++i) {
                          const auto br = best_response_class(params, current, i, config);
                          out.priorities[i] = br.priority;
                          out.pinned = out.pinned || br.pinned;
                        }
                        return out;
                      });
}

EquilibriumResult solve_class_hte(const SystemParams& params, const SolverConfig& config,
                                  const std::optional<PriorityVector>& init) {
  return run_dynamics(
      params, config, default_init(params, init), EquilibriumKind::ClassHte,
      [&](const PriorityVector& current) {
        const double total = inverse_priority_total(params, current);
        SweepOutput out;
        out.priorities.resize(params.num_classes());
        for (std::size_t i = 0; i < params.num_classes(); ++i) {
          const auto f = class_hte_objective(params, current, i, total);
          const auto m = minimize_positive([&](double b) { return f.value(b); },
                                           [&](double b) { return f.derivative(b); },
                                           config.bracket_lo, config.bracket_hi,
                                           config.inner_tolerance, starts_for(params, config));
          if (m.at_upper)
            throw BracketExhaustedError("class-level HTE of class " + std::to_string(i + 1) +
                                            " pinned to the bracket ceiling",
                                        m.location);
          out.priorities[i] = m.location;
          out.pinned = out.pinned || m.at_lower;
        }
        return out;
      });
}

double class_hte_foc_residual(const SystemParams& params, const PriorityVector& priorities,
                              std::size_t i) {
  require_matching(params, priorities);
  const auto f = class_hte_objective(params, priorities, i, inverse_priority_total(params, priorities));
  const double b = priorities.at(i);
  return std::abs(b * f.derivative(b)) / (params.alpha() * std::pow(b, params.alpha()));
}

double job_ne_verification_gap(const SystemParams& params, const PriorityVector& priorities,
                               const SolverConfig& config) {
  const auto profile = solve_waiting_times(params, priorities);
  double gap = 0.0;
  for (std::size_t i = 0; i < params.num_classes(); ++i) {
    const double br = job_best_response(params, priorities, profile, i, config);
    gap = std::max(gap, std::abs(br - priorities[i]) / priorities[i]);
  }
  return gap;
}

double relative_error(const PriorityVector& hte, const PriorityVector& ne) {
  if (hte.size() != ne.size() || hte.size() == 0)
    throw std::invalid_argument("priority vectors must be non-empty and equally long");
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hte.size(); ++i) worst = std::max(worst, (hte[i] - ne[i]) / ne[i]);
  return worst;
}

}  // namespace dps
