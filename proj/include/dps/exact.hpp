#pragma once

#include <vector>

#include "dps/params.hpp"

namespace dps {

/// Steady-state expected sojourn time W_i and expected count E[N_i] = lambda_i W_i per class.
struct WaitingProfile {
  std::vector<double> sojourn;
  std::vector<double> occupancy;

  double total_occupancy() const;
};

/// Decomposition of the sojourn time of a tagged job: V = U_0 + sum_i U_i E[N_i].
struct TaggedJobTime {
  double sojourn = 0.0;
  double base = 0.0;                  // U_0
  std::vector<double> coefficients;   // U_i = beta_i / (beta_i + beta) * U_0
};

/// Solves the K x K linear system
///   mu W_k - sum_i lambda_i beta_i / (beta_i + beta_k) (W_k + W_i) = 1
/// for the per-class sojourn times of a DPS queue.
WaitingProfile solve_waiting_times(const SystemParams& params, const PriorityVector& priorities);

/// Expected sojourn of a single (infinitesimal) job with priority `beta` arriving
/// to the steady-state system run under `priorities`.
TaggedJobTime tagged_job_time(const SystemParams& params, const PriorityVector& priorities,
                              double beta);
TaggedJobTime tagged_job_time(const SystemParams& params, const PriorityVector& priorities,
                              const WaitingProfile& profile, double beta);

/// Only the sojourn component of tagged_job_time, without allocating the decomposition.
double tagged_sojourn(const SystemParams& params, const PriorityVector& priorities,
                      const WaitingProfile& profile, double beta);

/// d V(beta; priorities) / d beta, holding the class vector fixed.
double tagged_sojourn_derivative(const SystemParams& params, const PriorityVector& priorities,
                                 const WaitingProfile& profile, double beta);

/// d W_k / d beta_m for every k (the class vector itself changes).
std::vector<double> sojourn_sensitivity(const SystemParams& params,
                                        const PriorityVector& priorities,
                                        const WaitingProfile& profile, std::size_t m);

/// Single-class closed form
///   V(beta; class_priority) = 1/(mu(1-rho)) * (beta(1-rho) + b) / (b(1-rho) + beta).
/// Throws std::invalid_argument when the instance has more than one class.
double closed_form_k1(const SystemParams& params, double class_priority, double beta);

}  // namespace dps
