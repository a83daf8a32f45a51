#pragma once

#include <string_view>

#include "dps/params.hpp"

namespace dps {

enum class EquilibriumKind { JobNe, ClassNe, JobHte, ClassHte, LimitingHte };

std::string_view to_string(EquilibriumKind kind);

/// A priority vector tagged with how it was obtained.
struct EquilibriumResult {
  PriorityVector priorities;
  EquilibriumKind kind = EquilibriumKind::JobHte;
  int iterations = 0;
  double residual = 0.0;       // sup-norm relative change of the last sweep
  bool converged = false;
  bool bracket_pinned = false;  // some coordinate sits on the search-interval floor
  bool heuristic = false;       // alpha < 1: multistart minimizer, no convexity guarantee
};

}  // namespace dps
