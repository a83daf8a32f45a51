#pragma once

#include <optional>

#include "dps/params.hpp"
#include "dps/result.hpp"

namespace dps {

struct SolverConfig {
  double br_tolerance = 1e-10;     // sup-norm relative change that ends the dynamics
  int max_iterations = 10'000;     // sweeps
  double bracket_lo = 1e-8;
  double bracket_hi = 1e8;
  double inner_tolerance = 1e-12;  // relative, 1-D minimizer
  double damping = 1.0;            // in (0, 1]; 1 = plain best response
  int multistart_count = 8;        // golden-section starts when alpha < 1

  void validate() const;
};

/// Job-level best response of a class-i job: argmin_beta c_i V(beta; priorities) + beta^alpha,
/// with the class vector held fixed. Throws BracketExhaustedError if the minimizer
/// lands on an end of [bracket_lo, bracket_hi].
double best_response_job(const SystemParams& params, const PriorityVector& priorities,
                         std::size_t i, const SolverConfig& config = {});

/// Class-level best response: argmin_beta c_i W_i(beta_1..beta..beta_K) + beta^alpha.
/// The candidate replaces coordinate i in the linear system on every evaluation.
/// A minimizer on the bracket floor is a legitimate answer and is reported via
/// `pinned`; the ceiling throws BracketExhaustedError.
struct ClassBestResponse {
  double priority = 0.0;
  bool pinned = false;
};
ClassBestResponse best_response_class(const SystemParams& params,
                                      const PriorityVector& priorities, std::size_t i,
                                      const SolverConfig& config = {});

/// Synchronous best-response dynamics for the job-level Nash equilibrium, started
/// from `init` (default: the closed-form heavy-traffic equilibrium). Hitting
/// max_iterations returns a result with converged = false.
EquilibriumResult solve_job_ne(const SystemParams& params, const SolverConfig& config = {},
                               const std::optional<PriorityVector>& init = std::nullopt);

EquilibriumResult solve_class_ne(const SystemParams& params, const SolverConfig& config = {},
                                 const std::optional<PriorityVector>& init = std::nullopt);

/// Class-level heavy-traffic equilibrium: each sweep solves, per class, the scalar
/// first-order condition of beta -> c_i / ((1-rho) mu beta gamma_{-i}(beta)) + beta^alpha.
EquilibriumResult solve_class_hte(const SystemParams& params, const SolverConfig& config = {},
                                  const std::optional<PriorityVector>& init = std::nullopt);

/// |beta f_i'(beta)| / (alpha beta^alpha) for the class-level heavy-traffic objective
/// of class i at beta = priorities[i].
double class_hte_foc_residual(const SystemParams& params, const PriorityVector& priorities,
                              std::size_t i);

/// Largest relative gap between each coordinate and a fresh job-level best response.
double job_ne_verification_gap(const SystemParams& params, const PriorityVector& priorities,
                               const SolverConfig& config = {});

/// max_i (beta_i^HT - beta_i^NE) / beta_i^NE.
double relative_error(const PriorityVector& hte, const PriorityVector& ne);

}  // namespace dps
