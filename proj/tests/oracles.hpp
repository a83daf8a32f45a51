#pragma once

// Independent reference computations used only by the tests. None of them call
// into the library's solvers.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace oracle {

/// Stationary distribution of a finite CTMC given as (from, to, rate) triples.
class Ctmc {
 public:
  explicit Ctmc(int states) : states_(states), out_(static_cast<std::size_t>(states), 0.0) {}

  void add(int from, int to, double rate) {
    if (rate <= 0.0 || from == to) return;
    triplets_.emplace_back(to, from, rate);
    out_[static_cast<std::size_t>(from)] += rate;
  }

  std::vector<double> stationary() const {
    std::vector<Eigen::Triplet<double>> t;
    for (const auto& x : triplets_)
      if (x.row() != 0) t.push_back(x);
    for (int i = 1; i < states_; ++i) t.emplace_back(i, i, -out_[static_cast<std::size_t>(i)]);
    for (int i = 0; i < states_; ++i) t.emplace_back(0, i, 1.0);  // normalization row
    Eigen::SparseMatrix<double> a(states_, states_);
    a.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(states_);
    rhs[0] = 1.0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
    const Eigen::VectorXd p = lu.solve(rhs);
    return std::vector<double>(p.data(), p.data() + p.size());
  }

 private:
  int states_;
  std::vector<double> out_;
  std::vector<Eigen::Triplet<double>> triplets_;
};

/// Two-class DPS on the truncated lattice n_i <= cap; returns W_i = E[N_i] / lambda_i.
inline std::vector<double> dps_two_class(double l1, double l2, double mu, double b1, double b2,
                                         int cap) {
  const auto id = [cap](int n1, int n2) { return n1 * (cap + 1) + n2; };
  Ctmc chain((cap + 1) * (cap + 1));
  for (int n1 = 0; n1 <= cap; ++n1)
    for (int n2 = 0; n2 <= cap; ++n2) {
      const int s = id(n1, n2);
      if (n1 < cap) chain.add(s, id(n1 + 1, n2), l1);
      if (n2 < cap) chain.add(s, id(n1, n2 + 1), l2);
      const double w = n1 * b1 + n2 * b2;
      if (n1 > 0) chain.add(s, id(n1 - 1, n2), mu * n1 * b1 / w);
      if (n2 > 0) chain.add(s, id(n1, n2 - 1), mu * n2 * b2 / w);
    }
  const auto p = chain.stationary();
  double n1_mean = 0.0;
  double n2_mean = 0.0;
  for (int n1 = 0; n1 <= cap; ++n1)
    for (int n2 = 0; n2 <= cap; ++n2) {
      n1_mean += p[static_cast<std::size_t>(id(n1, n2))] * n1;
      n2_mean += p[static_cast<std::size_t>(id(n1, n2))] * n2;
    }
  return {n1_mean / l1, n2_mean / l2};
}

/// Two-class non-preemptive weighted random order of service; state (waiting n1, n2, in service).
inline std::vector<double> ros_two_class(double l1, double l2, double mu, double b1, double b2,
                                         int cap) {
  const auto id = [cap](int n1, int n2, int s) { return (n1 * (cap + 1) + n2) * 3 + s; };
  Ctmc chain((cap + 1) * (cap + 1) * 3);
  for (int n1 = 0; n1 <= cap; ++n1)
    for (int n2 = 0; n2 <= cap; ++n2)
      for (int s = 0; s < 3; ++s) {
        const int from = id(n1, n2, s);
        if (s == 0) {
          if (n1 > 0 || n2 > 0) continue;  // idle server with waiting jobs is unreachable
          chain.add(from, id(0, 0, 1), l1);
          chain.add(from, id(0, 0, 2), l2);
          continue;
        }
        if (n1 < cap) chain.add(from, id(n1 + 1, n2, s), l1);
        if (n2 < cap) chain.add(from, id(n1, n2 + 1, s), l2);
        const double w = n1 * b1 + n2 * b2;
        if (w == 0.0) {
          chain.add(from, id(0, 0, 0), mu);
        } else {
          if (n1 > 0) chain.add(from, id(n1 - 1, n2, 1), mu * n1 * b1 / w);
          if (n2 > 0) chain.add(from, id(n1, n2 - 1, 2), mu * n2 * b2 / w);
        }
      }
  // Unreachable idle states get a self-contained exit so the system stays nonsingular.
  for (int n1 = 0; n1 <= cap; ++n1)
    for (int n2 = 0; n2 <= cap; ++n2)
      if (n1 > 0 || n2 > 0) chain.add(id(n1, n2, 0), id(0, 0, 0), 1.0);
  const auto p = chain.stationary();
  double n1_mean = 0.0;
  double n2_mean = 0.0;
  for (int n1 = 0; n1 <= cap; ++n1)
    for (int n2 = 0; n2 <= cap; ++n2)
      for (int s = 0; s < 3; ++s) {
        const double q = p[static_cast<std::size_t>(id(n1, n2, s))];
        n1_mean += q * (n1 + (s == 1 ? 1 : 0));
        n2_mean += q * (n2 + (s == 2 ? 1 : 0));
      }
  return {n1_mean / l1, n2_mean / l2};
}

/// Minimizer of f on [lo, hi] by repeated log-grid scans, each zooming into the
/// neighbourhood of the best grid point.
inline double grid_scan_min(const std::function<double(double)>& f, double lo, double hi,
                            int points = 401, int rounds = 12) {
  double a = std::log(lo);
  double b = std::log(hi);
  double best = a;
  for (int r = 0; r < rounds; ++r) {
    double best_value = std::numeric_limits<double>::infinity();
    const double step = (b - a) / (points - 1);
    for (int k = 0; k < points; ++k) {
      const double x = a + step * k;
      const double v = f(std::exp(x));
      if (v < best_value) {
        best_value = v;
        best = x;
      }
    }
    a = std::max(std::log(lo), best - 2.0 * step);
    b = std::min(std::log(hi), best + 2.0 * step);
  }
  return std::exp(best);
}

/// Central difference with relative step h.
inline double derivative(const std::function<double(double)>& f, double x, double h = 1e-5) {
  const double dx = h * std::max(1.0, std::abs(x));
  return (f(x + dx) - f(x - dx)) / (2.0 * dx);
}

/// Grid scan followed by bisection on a central-difference slope; function values
/// alone only pin a smooth minimizer to about sqrt(machine epsilon).
inline double refined_min(const std::function<double(double)>& f, double lo, double hi) {
  const double x = grid_scan_min(f, lo, hi);
  const auto slope = [&](double y) {
    const double dy = 1e-6 * y;
    return (f(y + dy) - f(y - dy)) / (2.0 * dy);
  };
  double a = std::max(lo, x / 1.05);
  double b = std::min(hi, x * 1.05);
  if (slope(a) >= 0.0 || slope(b) <= 0.0) return x;
  for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
    const double m = 0.5 * (a + b);
    (slope(m) < 0.0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace oracle
