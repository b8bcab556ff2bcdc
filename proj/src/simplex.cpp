#include <algorithm>
#include <cmath>
#include <random>

#include "arbor/path_lp.hpp"

namespace arbor {

void pivot_rows(std::vector<double>& tab, int rows, int width, int pr, int pc, Exec exec) {
  double* base = tab.data();
  double* prow = base + static_cast<std::size_t>(pr) * width;
  const double inv = 1.0 / prow[pc];
  for (int j = 0; j < width; ++j) prow[j] *= inv;
  prow[pc] = 1.0;
  auto update = [&](int r) {
    if (r == pr) return;
    double* row = base + static_cast<std::size_t>(r) * width;
    const double f = row[pc];
    if (f == 0.0) return;
    for (int j = 0; j < width; ++j) row[j] -= f * prow[j];
    row[pc] = 0.0;
  };
  if (exec == Exec::serial) {
    for (int r = 0; r < rows; ++r) update(r);
  } else {
#pragma omp parallel for schedule(static) if (static_cast<long>(rows) * width > 20000)
    for (int r = 0; r < rows; ++r) update(r);
  }
}

namespace {

struct Phase1 {
  std::vector<double> tab;
  int m = 0, cols = 0, width = 0, first_art = 0;
  std::vector<int> basis, start_basis, art_col;
  double& at(int r, int c) { return tab[static_cast<std::size_t>(r) * width + c]; }
};

// Column layout: structural | slack per inequality | artificial | rhs | perturbed rhs.
// Rows are sign-normalised so both rhs columns start nonnegative.
Phase1 build(const LpProblem& lp, double perturb) {
  Phase1 t;
  t.m = static_cast<int>(lp.rows.size());
  const int m = t.m;
  std::vector<int> slack_col(m, -1);
  std::vector<double> sign(m, 1.0);
  t.art_col.assign(m, -1);
  int cols = lp.vars;
  for (int r = 0; r < m; ++r) {
    if (lp.rows[r].rhs < 0) sign[r] = -1.0;
    if (lp.rows[r].sense == Sense::le) slack_col[r] = cols++;
  }
  t.first_art = cols;
  for (int r = 0; r < m; ++r)
    if (lp.rows[r].sense == Sense::eq || sign[r] < 0) t.art_col[r] = cols++;
  t.cols = cols;
  t.width = cols + 2;
  t.tab.assign(static_cast<std::size_t>(m + 1) * t.width, 0.0);
  t.basis.resize(m);
  Rng rng = make_rng(0x51u, 7);
  std::uniform_real_distribution<double> jitter(0.5, 1.0);
  for (int r = 0; r < m; ++r) {
    for (auto [v, c] : lp.rows[r].coeffs) t.at(r, v) += sign[r] * c;
    if (slack_col[r] >= 0) t.at(r, slack_col[r]) = sign[r];
    if (t.art_col[r] >= 0) t.at(r, t.art_col[r]) = 1.0;
    t.at(r, cols) = sign[r] * lp.rows[r].rhs;
    t.at(r, cols + 1) = t.at(r, cols) + perturb * jitter(rng);
    t.basis[r] = t.art_col[r] >= 0 ? t.art_col[r] : slack_col[r];
  }
  t.start_basis = t.basis;
  // reduced costs of min sum(artificials)
  for (int r = 0; r < m; ++r)
    if (t.art_col[r] >= 0)
      for (int c = 0; c < t.width; ++c)
        if (c < t.first_art || c >= cols) t.at(m, c) -= t.at(r, c);
  return t;
}

// Dantzig pricing against rhs column rc. With lex set, ratio ties are broken
// lexicographically on the rows of B^-1 (the starting basis columns), which
// rules out cycling; otherwise the larger pivot element wins.
void pivot_to_optimum(Phase1& t, int rc, bool lex, Exec exec, long& pivots) {
  const double eps = 1e-11, piv_tol = 1e-9;
  const long cap = pivots + 200000L + 50L * (t.m + t.cols);
  const int m = t.m;
  for (;;) {
    int pc = -1;
    double most = -eps;
    for (int c = 0; c < t.cols; ++c)
      if (t.at(m, c) < most) {
        pc = c;
        most = t.at(m, c);
      }
    if (pc < 0) return;
    int pr = -1;
    double best = 0;
    for (int r = 0; r < m; ++r) {
      const double a = t.at(r, pc);
      if (a <= piv_tol) continue;
      const double ratio = t.at(r, rc) / a;
      bool take = pr < 0 || ratio < best - 1e-12;
      if (!take && std::abs(ratio - best) <= 1e-12) {
        if (!lex) {
          take = a > t.at(pr, pc);
        } else {
          const double ap = t.at(pr, pc);
          for (int j = 0; j < m; ++j) {
            const double x = t.at(r, t.start_basis[j]) / a, y = t.at(pr, t.start_basis[j]) / ap;
            if (std::abs(x - y) > 1e-12) {
              take = x < y;
              break;
            }
          }
        }
      }
      if (take) {
        pr = r;
        best = ratio;
      }
    }
    if (pr < 0) return;  // unbounded direction cannot occur in phase 1
    pivot_rows(t.tab, m + 1, t.width, pr, pc, exec);
    t.basis[pr] = pc;
    if (++pivots > cap) throw stage_error("solve_lp_feasibility", "cycling guard exceeded");
  }
}

}  // namespace

LpOutcome solve_lp_feasibility(const LpProblem& lp, double tol, Exec exec) {
  const int n = lp.vars;
  LpOutcome out;
  // The path LP is very degenerate (every rhs but the root's is 0), so first
  // solve with a jittered rhs and read the original rhs off the same basis.
  Phase1 t = build(lp, 1e-7);
  const int m = t.m, rc = t.cols;
  pivot_to_optimum(t, rc + 1, false, exec, out.pivots);
  bool usable = true;
  for (int r = 0; r < m && usable; ++r) usable = t.at(r, rc) >= -1e-9;
  if (usable) {
    for (int r = 0; r < m; ++r) t.at(r, rc) = std::max(0.0, t.at(r, rc));
  } else {
    t = build(lp, 0.0);
  }
  // finish exactly on the original rhs; usually no pivots remain
  pivot_to_optimum(t, rc, true, exec, out.pivots);

  double art = 0;
  for (int r = 0; r < m; ++r)
    if (t.basis[r] >= t.first_art) art += t.at(r, rc);
  out.artificial = art;
  out.x.assign(n, 0.0);
  for (int r = 0; r < m; ++r)
    if (t.basis[r] < n) out.x[t.basis[r]] = std::max(0.0, t.at(r, rc));
  out.feasible = out.artificial <= tol;
  if (!out.feasible) {
    for (int r = 0; r < m; ++r)
      if (t.basis[r] >= t.first_art && t.at(r, rc) > tol)
        for (int q = 0; q < m; ++q)
          if (t.art_col[q] == t.basis[r]) out.certificate.push_back(q);
    std::sort(out.certificate.begin(), out.certificate.end());
    out.x.clear();
    return out;
  }
  if (max_residual(lp, out.x) > 1e-6) throw stage_error("solve_lp_feasibility", "residual check failed");
  return out;
}

}  // namespace arbor
