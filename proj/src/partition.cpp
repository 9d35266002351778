#include "dvrpsr/partition.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace dvrpsr {

namespace {

struct Node {
    double bound;
    std::vector<std::pair<int, int>> fixed;  // (column, 0 or 1)
    bool operator<(const Node& o) const { return bound > o.bound; }  // min-heap by bound
};

}  // namespace

PartitionResult solve_partition(const PartitionProblem& problem, long node_limit) {
    const int nc = static_cast<int>(problem.columns.size());
    if (nc == 0) throw Error("set partitioning with no columns");
    std::vector<char> coverable(problem.universe, 0);
    for (const auto& c : problem.columns)
        for (int e : c.covers) {
            if (e < 0 || e >= problem.universe) throw Error("cover element out of range");
            coverable[e] = 1;
        }
    for (int e = 0; e < problem.universe; ++e)
        if (!coverable[e])
            throw Error("universe element " + std::to_string(e) + " is uncoverable");

    // LP relaxation; maximization is handled by negating objectives.
    const double sgn = problem.sense == PartitionSense::kMinimize ? 1.0 : -1.0;
    LinearProgram lp;
    lp.sense = LpSense::kMin;
    for (const auto& c : problem.columns) lp.add_var(sgn * c.objective, 0.0, 1.0);
    for (int e = 0; e < problem.universe; ++e) {
        std::vector<std::pair<int, double>> terms;
        for (int j = 0; j < nc; ++j)
            for (int q : problem.columns[j].covers)
                if (q == e) {
                    terms.push_back({j, 1.0});
                    break;
                }
        lp.add_row(std::move(terms), LpRel::kEq, 1.0);
    }
    {
        std::vector<std::pair<int, double>> fleet;
        for (int j = 0; j < nc; ++j) fleet.push_back({j, 1.0});
        lp.add_row(std::move(fleet), LpRel::kLe, static_cast<double>(problem.max_columns));
    }

    auto solve_node = [&](const std::vector<std::pair<int, int>>& fixed, LpSolution& out) {
        for (auto [j, v] : fixed) {
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        out = solve_lp(lp);
        for (auto [j, _] : fixed) {
            lp.lower[j] = 0.0;
            lp.upper[j] = 1.0;
        }
        return out.status;
    };

    PartitionResult best;
    double incumbent = std::numeric_limits<double>::infinity();
    bool have_incumbent = false;

    std::priority_queue<Node> open;
    {
        LpSolution root;
        LpStatus st = solve_node({}, root);
        if (st == LpStatus::kInfeasible)
            throw Error("set partitioning infeasible (cover/fleet constraints)");
        if (st != LpStatus::kOptimal) throw Error("set partitioning root LP failed");
        open.push({root.objective, {}});
    }

    long nodes = 0;
    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (have_incumbent && node.bound >= incumbent - 1e-9) break;  // best-bound proven
        if (++nodes > node_limit) throw Error("set partitioning node limit exceeded");

        LpSolution sol;
        LpStatus st = solve_node(node.fixed, sol);
        if (st == LpStatus::kInfeasible) continue;
        if (st != LpStatus::kOptimal) throw Error("set partitioning node LP failed");
        if (have_incumbent && sol.objective >= incumbent - 1e-9) continue;

        int branch_var = -1;
        double branch_frac = 1.0;  // distance from 0.5, lower is more fractional
        for (int j = 0; j < nc; ++j) {
            double z = sol.primal[j];
            if (z > 1e-6 && z < 1.0 - 1e-6) {
                double f = std::fabs(z - 0.5);
                if (f < branch_frac - 1e-12) {
                    branch_frac = f;
                    branch_var = j;
                }
            }
        }
        if (branch_var < 0) {  // integral
            incumbent = sol.objective;
            have_incumbent = true;
            best.chosen.clear();
            for (int j = 0; j < nc; ++j)
                if (sol.primal[j] > 0.5) best.chosen.push_back(j);
            continue;
        }
        for (int v : {1, 0}) {
            Node child;
            child.bound = sol.objective;
            child.fixed = node.fixed;
            child.fixed.push_back({branch_var, v});
            open.push(std::move(child));
        }
    }
    if (!have_incumbent) throw Error("set partitioning has no integer solution");
    best.objective = sgn * incumbent;
    best.nodes = nodes;
    return best;
}

}  // namespace dvrpsr
