#pragma once

#include <string>
#include <vector>

#include "arbor/forest.hpp"
#include "arbor/instance.hpp"

namespace arbor {

enum class DegreeMode { at_least, exact };

struct Verdict {
  bool ok = true;
  std::vector<std::string> reasons;
  std::vector<std::string> warnings;  // repeated vertices inside a path
};

Verdict is_valid_solution(const Instance& inst, const SolutionForest& sol, int k, int allow_congestion,
                          DegreeMode mode = DegreeMode::at_least);

// Smallest child count over open nodes (nodes not ending at a sink); -1 if none.
int min_open_degree(const Instance& inst, const SolutionForest& sol);

}  // namespace arbor
