#include "dps/minimize.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace dps {

namespace {

const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

struct GoldenRun {
  ScalarMinimum best;
  double log_lo;
  double log_hi;
};

GoldenRun golden_run(const std::function<double(double)>& f, double a, double b, double tol,
                     int max_iterations) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(std::exp(c));
  double fd = f(std::exp(d));
  for (int it = 0; it < max_iterations && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(std::exp(d));
    }
  }
  GoldenRun run;
  run.best.location = std::exp(0.5 * (a + b));
  run.best.value = f(run.best.location);
  run.log_lo = a;
  run.log_hi = b;
  return run;
}

}  // namespace

ScalarMinimum golden_section_log(const std::function<double(double)>& f, double lo, double hi,
                                 double log_tolerance, int max_iterations) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("need 0 < lo < hi");
  const double a = std::log(lo);
  const double b = std::log(hi);
  auto run = golden_run(f, a, b, log_tolerance, max_iterations);
  run.best.at_lower = run.log_lo - a <= 2.0 * log_tolerance;
  run.best.at_upper = b - run.log_hi <= 2.0 * log_tolerance;
  return run.best;
}

ScalarMinimum minimize_positive(const std::function<double(double)>& objective,
                                const std::function<double(double)>& derivative, double lo,
                                double hi, double relative_tolerance, int starts) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("need 0 < lo < hi");
  starts = std::max(starts, 1);
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  const double golden_tol = 1e-9;
  const double width = (log_hi - log_lo) / starts;

  GoldenRun best{};
  bool have_best = false;
  for (int s = 0; s < starts; ++s) {
    const double a = log_lo + width * s;
    const double b = (s + 1 == starts) ? log_hi : a + width;
    auto run = golden_run(objective, a, b, golden_tol, 400);
    if (!have_best || run.best.value < best.best.value) {
      best = run;
      have_best = true;
    }
  }

  ScalarMinimum out = best.best;
  out.at_lower = best.log_lo - log_lo <= 2.0 * golden_tol;
  out.at_upper = log_hi - best.log_hi <= 2.0 * golden_tol;
  if (out.at_lower && derivative(lo) >= 0.0) {
    out.location = lo;
    out.value = objective(lo);
    return out;
  }
  if (out.at_upper && derivative(hi) <= 0.0) {
    out.location = hi;
    out.value = objective(hi);
    return out;
  }
  out.at_lower = out.at_upper = false;

  // Polish: widen the final golden bracket until the derivative changes sign.
  double pad = std::max(best.log_hi - best.log_lo, 1e-9);
  for (int attempt = 0; attempt < 8; ++attempt, pad *= 8.0) {
    const double a = std::exp(std::max(log_lo, best.log_lo - pad));
    const double b = std::exp(std::min(log_hi, best.log_hi + pad));
    const double fa = derivative(a);
    const double fb = derivative(b);
    if (fa == 0.0 || fb == 0.0) {
      const double root = fa == 0.0 ? a : b;
      out.location = root;
      out.value = objective(root);
      out.polished = true;
      return out;
    }
    if (fa < 0.0 && fb > 0.0) {
      std::uintmax_t max_iter = 200;
      const int bits = std::max(
          20, std::min(52, static_cast<int>(-std::log2(std::max(relative_tolerance, 1e-16)))));
      const auto bracket = boost::math::tools::toms748_solve(
          derivative, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(bits), max_iter);
      const double root = 0.5 * (bracket.first + bracket.second);
      const double value = objective(root);
      if (value <= out.value + 1e-12 * std::abs(out.value)) {
        out.location = root;
        out.value = value;
        out.polished = true;
      }
      return out;
    }
  }
  return out;
}

}  // namespace dps
