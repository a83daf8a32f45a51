#pragma once

#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "dps/params.hpp"
#include "dps/result.hpp"
#include "dps/rng.hpp"

namespace dps {

/// gamma = (1/rho) sum_i rho_i / beta_i and S1 = sum_i lambda_i c_i^{-1/(alpha+1)}.
struct HeavyTrafficContext {
  double gamma = 0.0;
  double s1 = 0.0;
};

HeavyTrafficContext heavy_traffic_context(const SystemParams& params,
                                          const PriorityVector& priorities);

/// Heavy-traffic sojourn of a job with priority `beta`: 1 / ((1-rho) mu beta gamma).
double v_ht(const SystemParams& params, const PriorityVector& priorities, double beta);

/// Class-level heavy-traffic waiting time of class i when the class as a whole
/// uses priority `beta`; gamma is replaced by gamma_{-i}(beta; priorities), so the
/// class's own choice enters the aggregate.
double w_ht_class(const SystemParams& params, const PriorityVector& priorities, std::size_t i,
                  double beta);
/// Same with beta = priorities[i].
double w_ht_class(const SystemParams& params, const PriorityVector& priorities, std::size_t i);

/// Closed-form job-level heavy-traffic equilibrium
///   beta_i = c_i^{1/(alpha+1)} [alpha (1-rho) rho^{-1} S1]^{-1/alpha}.
EquilibriumResult hte_job_level(const SystemParams& params);

/// Scale-free first-order residual of class i's heavy-traffic objective
/// c_i V^HT(beta; priorities) + beta^alpha at beta = priorities[i]:
/// |beta f'(beta)| / (alpha beta^alpha).
double hte_foc_residual(const SystemParams& params, const PriorityVector& priorities,
                        std::size_t i);

/// Probability distribution on a positive closed interval: a finite list of
/// weighted atoms, or a density on [lower, upper].
class Distribution {
 public:
  static Distribution point_masses(std::vector<std::pair<double, double>> atoms);
  static Distribution point_mass(double value);
  static Distribution uniform(double lower, double upper);
  /// `density_bound` must dominate the pdf on the support; it drives rejection sampling.
  static Distribution density(std::function<double(double)> pdf, double lower, double upper,
                              double density_bound);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  bool is_discrete() const { return !atoms_.empty(); }

  /// E[g(X)]; densities are integrated by adaptive Gauss-Kronrod to `abs_tolerance`.
  double expectation(const std::function<double(double)>& g, double abs_tolerance = 1e-10) const;
  double mean() const;
  double sample(Rng& rng) const;

 private:
  Distribution() = default;

  std::vector<std::pair<double, double>> atoms_;  // (value, probability)
  std::function<double(double)> pdf_;
  double lower_ = 0.0;
  double upper_ = 0.0;
  double density_bound_ = 0.0;
  bool uniform_ = false;
};

/// Continuum-of-classes game: cost distribution F, arrival distribution G,
/// per-class service rate mu and the admissible priority interval.
struct LimitingGameSpec {
  Distribution cost;
  Distribution arrival;
  double service_rate = 1.0;
  double priority_lower = 1e-8;
  double priority_upper = 1e8;

  /// rho = E_G[lambda] / mu.
  double load() const;
  /// Throws std::invalid_argument / InstabilityError on a malformed spec.
  void validate() const;
};

/// Equilibrium strategy B(c) = c^{1/(alpha+1)} (mu alpha (1-rho) S2)^{-1/alpha}.
struct StrategyFunction {
  double alpha = 1.0;
  double scale = 0.0;  // (mu alpha (1-rho) S2)^{-1/alpha}
  double s2 = 0.0;     // E_F[c^{-1/(alpha+1)}]
  double gamma = 0.0;  // E_F[1 / B(c)]

  double operator()(double cost) const;
};

StrategyFunction limiting_hte(const LimitingGameSpec& spec, double alpha);

/// Scale-free first-order residual of c V^HT(beta; B) + beta^alpha at beta = B(c).
double limiting_foc_residual(const LimitingGameSpec& spec, const StrategyFunction& strategy,
                             double cost);

/// Draws a K-class instance from (F, G). Rates are expressed per class: class k
/// arrives at lambda_k / K with lambda_k ~ G, and the server runs at mu, so the
/// load tends to E_G[lambda]/mu and the instance approaches the limiting game.
SystemParams sample_finite_game(const LimitingGameSpec& spec, std::size_t num_classes,
                                double alpha, Rng& rng);

/// Instances sharing the arrival rates and costs of `base` with load set to each
/// entry of `loads` (service rate shrinks toward the total arrival rate).
std::vector<SystemParams> load_sequence(const SystemParams& base, const std::vector<double>& loads);

struct DeviationGain {
  double load = 0.0;
  std::vector<double> per_class;  // (1-rho)[cost at HTE - cost when deviating by delta]
  double max_gain = 0.0;
};

/// For each instance, evaluates with the exact sojourn time how much a job of each
/// class gains (scaled by 1-rho) by multiplying its HTE priority by `delta`.
std::vector<DeviationGain> deviation_check(const std::vector<SystemParams>& params_seq,
                                           double delta);

}  // namespace dps
