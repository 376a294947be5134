#pragma once

#include <vector>

#include "mcache/content.hpp"

namespace mcache {

/// Dense equality-form linear program: maximize c.x subject to A x = b, x >= 0.
struct LinearProgram {
  std::vector<std::vector<double>> rows;  // A, one entry per constraint
  std::vector<double> rhs;                // b
  std::vector<double> cost;               // c
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
  int pivots = 0;
};

/// Two-phase tableau simplex with Bland's rule. Redundant equality rows are
/// detected after phase one and dropped. Throws InfeasibleError when no
/// x >= 0 satisfies the constraints and std::runtime_error if the objective
/// is unbounded.
LpSolution solve_lp(const LinearProgram& lp, double tol = 1e-10);

}  // namespace mcache
