#include "flexkit/lp.hpp"

#include <cmath>
#include <limits>

#include "flexkit/errors.hpp"

namespace flexkit {

void LinearProgram::add_row(std::vector<double> coeffs, double bound) {
  if (coeffs.size() != num_vars) throw ShapeError("LP row width differs from variable count");
  rows.push_back(std::move(coeffs));
  rhs.push_back(bound);
}

void LinearProgram::add_bounds(std::size_t i, double lo, double hi) {
  std::vector<double> up(num_vars, 0.0);
  up[i] = 1.0;
  add_row(up, hi);
  std::vector<double> down(num_vars, 0.0);
  down[i] = -1.0;
  add_row(down, -lo);
}

namespace {

constexpr double kEps = 1e-11;
constexpr std::size_t kMaxPivots = 200000;

// Tableau with the objective (reduced costs) in row `m`, rhs in column `n`.
class Tableau {
 public:
  Tableau(std::size_t m, std::size_t n) : m_(m), n_(n), cells_((m + 1) * (n + 1), 0.0), basis_(m, 0) {}

  double& at(std::size_t i, std::size_t j) { return cells_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return cells_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::size_t pivots() const { return pivots_; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    basis_[r] = c;
    ++pivots_;
  }

  // Runs Bland's-rule simplex over columns [0, allowed). Returns false when unbounded.
  bool optimize(std::size_t allowed) {
    while (true) {
      if (pivots_ > kMaxPivots) throw Error("simplex exceeded its pivot budget");
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (at(m_, j) < -kEps) {
          enter = j;
          break;
        }
      }
      if (enter == allowed) return true;
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= kEps) continue;
        const double ratio = at(i, n_) / a;
        const bool tie = leave < m_ && ratio <= best + kEps;
        if (leave == m_ || ratio < best - kEps || (tie && basis_[i] < basis_[leave])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
  }

  void drop_row(std::size_t r) {
    // move the last constraint row into r, then shrink (objective row stays last)
    const std::size_t last = m_ - 1;
    if (r != last) {
      for (std::size_t j = 0; j <= n_; ++j) at(r, j) = at(last, j);
      basis_[r] = basis_[last];
    }
    for (std::size_t j = 0; j <= n_; ++j) at(last, j) = at(m_, j);
    basis_.pop_back();
    --m_;
    cells_.resize((m_ + 1) * (n_ + 1));
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> cells_;
  std::vector<std::size_t> basis_;
  std::size_t pivots_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars;
  const std::size_t m = lp.rows.size();
  if (lp.cost.size() != n || lp.rhs.size() != m) throw ShapeError("LP cost/rhs sizes are inconsistent");

  // columns: u (n), v (n), slack (m), artificial (one per row with negative rhs)
  std::size_t n_art = 0;
  for (double b : lp.rhs) n_art += b < 0 ? 1 : 0;
  const std::size_t structural = 2 * n + m;
  const std::size_t total = structural + n_art;
  Tableau tab(m, total);

  std::size_t art = structural;
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = lp.rhs[i] < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      tab.at(i, j) = sign * lp.rows[i][j];
      tab.at(i, n + j) = -sign * lp.rows[i][j];
    }
    tab.at(i, 2 * n + i) = sign;
    tab.rhs(i) = sign * lp.rhs[i];
    if (sign < 0) {
      tab.at(i, art) = 1.0;
      tab.basis()[i] = art++;
    } else {
      tab.basis()[i] = 2 * n + i;
    }
  }

  LpSolution sol;
  if (n_art > 0) {
    // phase 1: minimize the sum of artificials
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis()[i] < structural) continue;
      for (std::size_t j = 0; j <= total; ++j) tab.at(m, j) -= tab.at(i, j);
    }
    for (std::size_t j = structural; j < total; ++j) tab.at(m, j) = 0.0;
    tab.optimize(total);
    double scale = 1.0;
    for (double b : lp.rhs) scale = std::max(scale, std::abs(b));
    if (-tab.at(tab.rows(), total) > 1e-9 * scale) {
      sol.status = LpStatus::infeasible;
      sol.pivots = tab.pivots();
      return sol;
    }
    // drive artificials out of the basis; rows where that is impossible are redundant
    for (std::size_t i = 0; i < tab.rows();) {
      if (tab.basis()[i] < structural) {
        ++i;
        continue;
      }
      std::size_t col = structural;
      for (std::size_t j = 0; j < structural; ++j) {
        if (std::abs(tab.at(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col < structural) {
        tab.pivot(i, col);
        ++i;
      } else {
        tab.drop_row(i);
      }
    }
  }

  // phase 2 objective row: reduced costs of the original objective
  const std::size_t mm = tab.rows();
  for (std::size_t j = 0; j <= total; ++j) tab.at(mm, j) = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    tab.at(mm, j) = lp.cost[j];
    tab.at(mm, n + j) = -lp.cost[j];
  }
  for (std::size_t i = 0; i < mm; ++i) {
    const std::size_t b = tab.basis()[i];
    const double cb = b < n ? lp.cost[b] : (b < 2 * n ? -lp.cost[b - n] : 0.0);
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= total; ++j) tab.at(mm, j) -= cb * tab.at(i, j);
  }
  const bool bounded = tab.optimize(structural);
  sol.pivots = tab.pivots();
  if (!bounded) {
    sol.status = LpStatus::unbounded;
    return sol;
  }
  sol.status = LpStatus::optimal;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < mm; ++i) {
    const std::size_t b = tab.basis()[i];
    if (b < n) sol.x[b] += tab.rhs(i);
    else if (b < 2 * n) sol.x[b - n] -= tab.rhs(i);
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.cost[j] * sol.x[j];
  return sol;
}

}  // namespace flexkit
