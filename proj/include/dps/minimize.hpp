#pragma once

#include <functional>

namespace dps {

struct ScalarMinimum {
  double location = 0.0;
  double value = 0.0;
  bool at_lower = false;  // minimizer sits on the lower end of the search interval
  bool at_upper = false;
  bool polished = false;  // refined by a root of the derivative
};

/// Golden-section search for a minimum of `f` over [lo, hi], performed on log(x).
/// Terminates when the log-bracket is narrower than `log_tolerance`; returns the
/// bracket midpoint. Equal function values move the bracket toward smaller x.
ScalarMinimum golden_section_log(const std::function<double(double)>& f, double lo, double hi,
                                 double log_tolerance, int max_iterations = 400);

/// Minimizes a positive-axis objective on [lo, hi].
///
/// `starts` > 1 splits the log-interval into equal segments, runs golden-section on
/// each and keeps the best (used when the objective is not known to be convex).
/// The winner is then refined by a bracketed root of `derivative`, which recovers
/// full double precision that golden-section alone cannot.
ScalarMinimum minimize_positive(const std::function<double(double)>& objective,
                                const std::function<double(double)>& derivative, double lo,
                                double hi, double relative_tolerance, int starts = 1);

}  // namespace dps
