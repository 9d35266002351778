#pragma once

#include <vector>

#include "dvrpsr/lp.hpp"
#include "dvrpsr/types.hpp"

namespace dvrpsr {

// Restricted set partitioning: pick at most `max_columns` columns covering
// every universe element exactly once, optimizing the column objective.
struct PartitionColumn {
    double objective = 0.0;          // cost (min) or score (max)
    std::vector<int> covers;         // universe element indices
};

enum class PartitionSense { kMinimize, kMaximize };

struct PartitionProblem {
    int universe = 0;
    int max_columns = 0;
    PartitionSense sense = PartitionSense::kMinimize;
    std::vector<PartitionColumn> columns;
};

struct PartitionResult {
    std::vector<int> chosen;  // column indices
    double objective = 0.0;
    long nodes = 0;
};

// Best-bound branch-and-bound on the LP relaxation, branching on the most
// fractional column (ties by lower column index). Throws Error when some
// element is uncoverable, the problem is infeasible, or the node limit hits.
PartitionResult solve_partition(const PartitionProblem& problem, long node_limit = 100000);

}  // namespace dvrpsr
