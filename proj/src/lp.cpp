#include "mcache/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcache {

namespace {

class Tableau {
 public:
  Tableau(std::size_t m, std::size_t n) : m_(m), n_(n), cells_((m + 1) * (n + 1), 0.0), basis_(m) {}

  double& at(std::size_t r, std::size_t c) { return cells_[r * (n_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return cells_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  double& reduced(std::size_t c) { return at(m_, c); }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t s) {
    const double inv = 1.0 / at(r, s);
    for (std::size_t c = 0; c <= n_; ++c) at(r, c) *= inv;
    at(r, s) = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double factor = at(i, s);
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c <= n_; ++c) at(i, c) -= factor * at(r, c);
      at(i, s) = 0.0;
    }
    basis_[r] = s;
  }

  void drop_row(std::size_t r) {
    const std::size_t last = m_ - 1;
    if (r != last) {
      for (std::size_t c = 0; c <= n_; ++c) at(r, c) = at(last, c);
      basis_[r] = basis_[last];
    }
    // Move the objective row up one slot.
    for (std::size_t c = 0; c <= n_; ++c) at(last, c) = at(m_, c);
    --m_;
    basis_.pop_back();
    cells_.resize((m_ + 1) * (n_ + 1));
  }

  /// Maximizes the objective held in the last row over columns [0, allowed).
  /// Returns false when unbounded.
  bool optimize(std::size_t allowed, double tol, int& pivots) {
    for (;;) {
      std::size_t enter = allowed;
      for (std::size_t c = 0; c < allowed; ++c) {
        if (reduced(c) > tol) {
          enter = c;
          break;
        }
      }
      if (enter == allowed) return true;
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        const double coef = at(r, enter);
        if (coef <= tol) continue;
        const double ratio = rhs(r) / coef;
        if (ratio < best - tol || (ratio <= best + tol && leave < m_ && basis_[r] < basis_[leave])) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
      ++pivots;
    }
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> cells_;
  std::vector<std::size_t> basis_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, double tol) {
  const std::size_t m = lp.rows.size();
  const std::size_t n = lp.cost.size();
  if (lp.rhs.size() != m) throw std::invalid_argument("solve_lp: rhs size mismatch");
  for (const auto& row : lp.rows) {
    if (row.size() != n) throw std::invalid_argument("solve_lp: row size mismatch");
  }

  // Columns: n structural, then m artificials.
  Tableau tab(m, n + m);
  for (std::size_t r = 0; r < m; ++r) {
    const double sign = lp.rhs[r] < 0.0 ? -1.0 : 1.0;
    for (std::size_t c = 0; c < n; ++c) tab.at(r, c) = sign * lp.rows[r][c];
    tab.at(r, n + r) = 1.0;
    tab.rhs(r) = sign * lp.rhs[r];
    tab.basis()[r] = n + r;
  }

  // Phase one: maximize -sum(artificials).
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) tab.reduced(c) += tab.at(r, c);
    tab.reduced(n + m) += tab.rhs(r);
  }
  LpSolution sol;
  tab.optimize(n + m, tol, sol.pivots);
  double scale = 1.0;
  for (double v : lp.rhs) scale = std::max(scale, std::abs(v));
  if (tab.reduced(n + m) > 1e3 * tol * scale) {
    throw InfeasibleError("solve_lp: constraints admit no nonnegative solution");
  }

  // Pivot remaining artificials out of the basis or drop their redundant rows.
  for (std::size_t r = 0; r < tab.rows();) {
    if (tab.basis()[r] < n) {
      ++r;
      continue;
    }
    std::size_t col = n;
    for (std::size_t c = 0; c < n; ++c) {
      if (std::abs(tab.at(r, c)) > tol) {
        col = c;
        break;
      }
    }
    if (col < n) {
      tab.pivot(r, col);
      ++sol.pivots;
      ++r;
    } else {
      tab.drop_row(r);
    }
  }

  // Phase two objective in reduced form.
  for (std::size_t c = 0; c <= n + m; ++c) tab.reduced(c) = 0.0;
  for (std::size_t c = 0; c < n; ++c) tab.reduced(c) = lp.cost[c];
  for (std::size_t r = 0; r < tab.rows(); ++r) {
    const double cb = lp.cost[tab.basis()[r]];
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c <= n + m; ++c) tab.reduced(c) -= cb * tab.at(r, c);
  }
  if (!tab.optimize(n, tol, sol.pivots)) throw std::runtime_error("solve_lp: unbounded objective");

  sol.x.assign(n, 0.0);
  for (std::size_t r = 0; r < tab.rows(); ++r) sol.x[tab.basis()[r]] = std::max(0.0, tab.rhs(r));
  for (std::size_t c = 0; c < n; ++c) sol.objective += lp.cost[c] * sol.x[c];
  return sol;
}

}  // namespace mcache
