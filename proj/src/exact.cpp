#include "dps/exact.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dps/errors.hpp"

namespace dps {

namespace {

// Rows are the K equations, columns the unknowns W_1..W_K.
Eigen::MatrixXd waiting_matrix(const SystemParams& params, const PriorityVector& priorities) {
  const std::size_t k_count = params.num_classes();
  const double mu = params.service_rate();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k_count, k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    m(k, k) = mu;
    for (std::size_t i = 0; i < k_count; ++i) {
      const double a = params.arrival_rate(i) * priorities[i] / (priorities[i] + priorities[k]);
      m(k, k) -= a;
      m(k, i) -= a;
    }
  }
  return m;
}

Eigen::PartialPivLU<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& m) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14))
    throw SingularSystemError("waiting-time system is numerically singular (rcond " +
                              std::to_string(rcond) + ")");
  return lu;
}

}  // namespace

double WaitingProfile::total_occupancy() const {
  return std::accumulate(occupancy.begin(), occupancy.end(), 0.0);
}

WaitingProfile solve_waiting_times(const SystemParams& params, const PriorityVector& priorities) {
  require_matching(params, priorities);
  const auto lu = factorize(waiting_matrix(params, priorities));
  const Eigen::VectorXd w = lu.solve(Eigen::VectorXd::Ones(params.num_classes()));

  WaitingProfile out;
  out.sojourn.resize(params.num_classes());
  out.occupancy.resize(params.num_classes());
  for (std::size_t i = 0; i < params.num_classes(); ++i) {
    if (!std::isfinite(w[i]) || !(w[i] > 0.0))
      throw SingularSystemError("waiting-time system produced a non-positive sojourn time");
    out.sojourn[i] = w[i];
    out.occupancy[i] = params.arrival_rate(i) * w[i];
  }
  return out;
}

TaggedJobTime tagged_job_time(const SystemParams& params, const PriorityVector& priorities,
                              double beta) {
  return tagged_job_time(params, priorities, solve_waiting_times(params, priorities), beta);
}

TaggedJobTime tagged_job_time(const SystemParams& params, const PriorityVector& priorities,
                              const WaitingProfile& profile, double beta) {
  require_matching(params, priorities);
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("tagged priority must be positive and finite");

  const std::size_t k_count = params.num_classes();
  double denom = params.service_rate();
  for (std::size_t i = 0; i < k_count; ++i)
    denom -= params.arrival_rate(i) * priorities[i] / (priorities[i] + beta);

  TaggedJobTime out;
  out.base = 1.0 / denom;
  out.coefficients.resize(k_count);
  out.sojourn = out.base;
  for (std::size_t i = 0; i < k_count; ++i) {
    out.coefficients[i] = priorities[i] / (priorities[i] + beta) * out.base;
    out.sojourn += out.coefficients[i] * profile.occupancy[i];
  }
  return out;
}

double tagged_sojourn(const SystemParams& params, const PriorityVector& priorities,
                      const WaitingProfile& profile, double beta) {
  double denom = params.service_rate();
  double weighted = 1.0;
  for (std::size_t i = 0; i < params.num_classes(); ++i) {
    const double share = priorities[i] / (priorities[i] + beta);
    denom -= params.arrival_rate(i) * share;
    weighted += share * profile.occupancy[i];
  }
  return weighted / denom;
}

double tagged_sojourn_derivative(const SystemParams& params, const PriorityVector& priorities,
                                 const WaitingProfile& profile, double beta) {
  require_matching(params, priorities);
  double denom = params.service_rate();
  double d_denom = 0.0;
  double weighted = 1.0;
  double d_weighted = 0.0;
  for (std::size_t i = 0; i < params.num_classes(); ++i) {
    const double b = priorities[i];
    const double share = b / (b + beta);
    const double d_share = -b / ((b + beta) * (b + beta));
    denom -= params.arrival_rate(i) * share;
    d_denom -= params.arrival_rate(i) * d_share;
    weighted += share * profile.occupancy[i];
    d_weighted += d_share * profile.occupancy[i];
  }
  const double base = 1.0 / denom;
  const double d_base = -base * base * d_denom;
  return d_base * weighted + base * d_weighted;
}

std::vector<double> sojourn_sensitivity(const SystemParams& params,
                                        const PriorityVector& priorities,
                                        const WaitingProfile& profile, std::size_t m) {
  require_matching(params, priorities);
  const std::size_t k_count = params.num_classes();
  if (m >= k_count) throw std::out_of_range("class index out of range");

  // Differentiate M(beta) W = 1:  M dW = -(dM/dbeta_m) W.
  const auto& w = profile.sojourn;
  const double bm = priorities[m];
  Eigen::VectorXd rhs(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    if (k == m) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k_count; ++i) {
        if (i == m) continue;
        const double s = priorities[i] + bm;
        acc += params.arrival_rate(i) * priorities[i] / (s * s) * (w[m] + w[i]);
      }
      rhs[k] = -acc;
    } else {
      const double s = bm + priorities[k];
      rhs[k] = params.arrival_rate(m) * priorities[k] / (s * s) * (w[k] + w[m]);
    }
  }
  const auto lu = factorize(waiting_matrix(params, priorities));
  const Eigen::VectorXd dw = lu.solve(rhs);
  return std::vector<double>(dw.data(), dw.data() + dw.size());
}

double closed_form_k1(const SystemParams& params, double class_priority, double beta) {
  if (params.num_classes() != 1)
    throw std::invalid_argument("closed_form_k1 requires exactly one class");
  if (!(class_priority > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("priorities must be positive");
  const double rho = params.load();
  const double scale = 1.0 / (params.service_rate() * (1.0 - rho));
  return scale * (beta * (1.0 - rho) + class_priority) / (class_priority * (1.0 - rho) + beta);
}

}  // namespace dps
