#pragma once

#include <vector>

#include "arbor/forest.hpp"

namespace arbor {

struct CongestionReport {
  std::vector<int> per_vertex;  // endpoint count per vertex id
  int max_global = 0;
  std::vector<int> local_max;  // index l' = 0..ell; empty for a global-only report
};

CongestionReport global_congestion(const SolutionForest& sol, int vertex_count);

// For every node p and the virtual root (all paths of length <= l'), the max
// over v of |I_{D(p,<=l')}(v)|, for each l' <= ell.
CongestionReport local_congestion(const SolutionForest& sol, int vertex_count, int ell,
                                  Exec exec = Exec::parallel);

}  // namespace arbor
