#pragma once

#include <vector>

#include "dps/params.hpp"

namespace dps {

/// Economic summary of the job-level heavy-traffic equilibrium of one instance.
struct EconomicReport {
  double system_cost = 0.0;      // C = sum_i lambda_i c_i V^HT(beta_i*)
  double revenue = 0.0;          // R = sum_i lambda_i (beta_i*)^alpha
  double optimal_cost = 0.0;     // c-mu rule (strict priority by descending cost)
  double poa = 0.0;              // C / C_opt
  double poa_bound_tight = 0.0;
  double poa_bound_loose = 0.0;
};

/// C = rho/(1-rho) * sum lambda_i c_i^{alpha/(alpha+1)} / sum lambda_i c_i^{-1/(alpha+1)}.
double system_cost_hte(const SystemParams& params);
/// R = C / alpha.
double revenue_hte(const SystemParams& params);

/// Expected per-class counts under preemptive strict priority in descending cost:
/// E[N_i] = s_i/(1-s_i) - s_{i-1}/(1-s_{i-1}), s_i the cumulative load of classes 1..i.
std::vector<double> optimal_occupancy_cmu(const SystemParams& params);
double optimal_cost_cmu(const SystemParams& params);

EconomicReport poa_report(const SystemParams& params);

struct MonotonicityRow {
  std::vector<double> system_cost;  // one entry per alpha on the grid
  std::vector<double> revenue;
  bool cost_increasing = false;
  bool revenue_decreasing = false;
  bool revenue_asserted = false;  // c_1/c_K < e^4, where revenue must decrease
};

/// Sign probe of dR/dalpha for K = 2, lambda = (1, 1), c = (ratio, 1).
struct RevenueSlopeProbe {
  double cost_ratio = 0.0;
  double slope = 0.0;  // central difference of R at alpha
  bool positive = false;
};

struct MonotonicityReport {
  std::vector<double> alphas;
  std::vector<MonotonicityRow> rows;
  RevenueSlopeProbe probe;
  bool passed = false;  // every asserted monotonicity held
};

inline const std::vector<double> kDefaultAlphaGrid{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};

/// Central-difference dR/dalpha at `alpha` for the two-class probe instance
/// (load 0.5), starting at `initial_ratio` and multiplying the cost ratio by 10 until
/// the slope is positive or `max_decades` escalations were tried.
RevenueSlopeProbe revenue_slope_probe(double initial_ratio = 1e6, double alpha = 1.0,
                                      int max_decades = 12);

MonotonicityReport monotonicity_suite(const std::vector<SystemParams>& grid,
                                      const std::vector<double>& alphas = kDefaultAlphaGrid);

}  // namespace dps
