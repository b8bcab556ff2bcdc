#include "arbor/profile.hpp"

#include <algorithm>
#include <cmath>

namespace arbor {

namespace {
int children_per_open(int k, int g) { return std::max(1, k * g / 4); }
}  // namespace

ParamProfile paper_default(int n, int k) {
  ParamProfile p;
  p.name = "paper-default";
  const double lg = std::max(2.0, std::log2(static_cast<double>(std::max(n, 4))));
  p.ell = std::max(2, static_cast<int>(std::ceil(10.0 * std::log2(lg))));
  p.L_local = 1024 * p.ell * p.ell;
  p.K_global = static_cast<int>(std::ceil(2048.0 * lg * lg * lg));
  p.granularity_base = static_cast<int>(std::ceil(4.0 * lg * lg));
  p.sample_children = std::max(1, k / 16);
  p.retain_children = std::max(1, k / 32);
  p.b1_slack = static_cast<int>(std::ceil(1024.0 * lg));
  p.mark_frac_denom = p.ell * p.ell * p.ell;
  p.mark_threshold_denom = std::pow(lg, 10.0);
  p.ls_addable_div = 32;
  p.ls_collapse_div = 128;
  p.ls_solution_div = 256;
  return p;
}

int rounding_congestion_bound(const ParamProfile& p, int k, int h) {
  const int g = std::max(1, p.granularity_base);
  const double rho = static_cast<double>(p.sample_children) * g / children_per_open(k, g);
  // dyadic classes t = 0 .. 1 + ceil(log2 g^(h-1))
  const int classes = (h - 1) * static_cast<int>(std::ceil(std::log2(static_cast<double>(g)))) + 2;
  double c = 2.0;
  for (int i = 0; i < h; ++i) c = 2.0 * rho * c + classes * static_cast<double>(p.b1_slack);
  return static_cast<int>(std::ceil(c));
}

ParamProfile desk_small(int k, int h) {
  ParamProfile p;
  p.name = "desk-small";
  p.ell = 2;
  p.L_local = 8;
  p.granularity_base = 2;
  p.sample_children = std::max(2, k / 4);
  p.retain_children = p.sample_children;
  p.b1_slack = 2;
  p.mark_frac_denom = 8;
  p.mark_threshold_denom = 64.0;
  p.K_global = rounding_congestion_bound(p, k, std::max(1, h));
  return p;
}

std::vector<std::string> validate_profile(const ParamProfile& p) {
  std::vector<std::string> out;
  auto positive = [&](const char* name, double v) {
    if (!(v > 0)) out.push_back(std::string(name) + " must be positive");
  };
  positive("L_local", p.L_local);
  positive("K_global", p.K_global);
  positive("granularity_base", p.granularity_base);
  positive("sample_children", p.sample_children);
  positive("retain_children", p.retain_children);
  positive("b1_slack", p.b1_slack);
  positive("mark_frac_denom", p.mark_frac_denom);
  positive("mark_threshold_denom", p.mark_threshold_denom);
  positive("c_const", p.c_const);
  if (p.ell < 2) out.push_back("ell must be >= 2");
  if (p.retain_children > p.sample_children) out.push_back("retain_children exceeds sample_children");
  if (p.sample_children > 0 && p.mark_frac_denom > 0) {
    // a window parent sees ell+1 steps, each with fewer than
    // sample/mark_frac_denom freshly marked children
    int per_step = (p.sample_children + p.mark_frac_denom - 1) / p.mark_frac_denom - 1;
    if (p.retain_children > p.sample_children - (p.ell + 1) * per_step)
      out.push_back("retain_children too large for the marked-children budget");
  }
  if (p.ls_addable_div <= 0 || p.ls_collapse_div <= 0 || p.ls_solution_div <= 0)
    out.push_back("local search divisors must be positive");
  else if (p.ls_collapse_div < 4 * p.ls_addable_div || p.ls_solution_div < p.ls_collapse_div)
    out.push_back("local search divisors break the pruning ratio");
  return out;
}

}  // namespace arbor
