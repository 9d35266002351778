#pragma once

#include <vector>

#include "dvrpsr/graph.hpp"
#include "dvrpsr/types.hpp"

namespace dvrpsr {

struct TspTarget {
    NodeId node = kInvalidNode;
    double service = 0.0;
};

struct TspResult {
    bool solved = false;
    std::vector<int> order;  // indices into the target list
    double total_time = 0.0; // travel plus service
};

// Exact open TSP: start -> all targets -> end, minimizing travel + service
// time. Held-Karp up to dp_max targets, branch-and-bound above; `solved` is
// false when the target count exceeds hard_cap or the node budget runs out.
TspResult solve_tsp(NodeId start, const std::vector<TspTarget>& targets, NodeId end,
                    const TravelTimeOracle& oracle, int dp_max = 15, int hard_cap = 25,
                    long node_budget = 2'000'000);

}  // namespace dvrpsr
