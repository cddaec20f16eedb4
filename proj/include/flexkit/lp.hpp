#pragma once

// Dense two-phase tableau simplex for small linear programs:
//
//   minimize  cost . x   subject to  A x <= rhs,  x free.
//
// Entering and leaving variables follow Bland's rule, so degenerate
// problems cannot cycle.

#include <cstddef>
#include <vector>

namespace flexkit {

struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<double> cost;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;

  explicit LinearProgram(std::size_t n = 0) : num_vars(n), cost(n, 0.0) {}
  void add_row(std::vector<double> coeffs, double bound);
  /// lo <= x_i <= hi as two rows.
  void add_bounds(std::size_t i, double lo, double hi);
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

LpSolution solve_lp(const LinearProgram& lp);

}  // namespace flexkit
