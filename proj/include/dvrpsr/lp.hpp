#pragma once

#include <string>
#include <vector>

#include "dvrpsr/types.hpp"

namespace dvrpsr {

enum class LpSense { kMin, kMax };
enum class LpRel { kLe, kEq, kGe };

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

// Dense LP with per-variable bounds. Rows are stored sparsely as
// (variable, coefficient) pairs so column-generation masters stay cheap.
struct LinearProgram {
    LpSense sense = LpSense::kMin;
    std::vector<double> objective;
    std::vector<double> lower, upper;

    struct Row {
        std::vector<std::pair<int, double>> terms;
        LpRel rel = LpRel::kLe;
        double rhs = 0.0;
    };
    std::vector<Row> rows;

    int add_var(double obj, double lo, double hi) {
        objective.push_back(obj);
        lower.push_back(lo);
        upper.push_back(hi);
        return static_cast<int>(objective.size()) - 1;
    }
    void add_row(std::vector<std::pair<int, double>> terms, LpRel rel, double rhs) {
        rows.push_back({std::move(terms), rel, rhs});
    }
    int var_count() const { return static_cast<int>(objective.size()); }
};

struct LpSolution {
    LpStatus status = LpStatus::kIterationLimit;
    double objective = 0.0;
    std::vector<double> primal;         // structural variables
    std::vector<double> duals;          // one per row, in the problem's sense
    std::vector<double> reduced_costs;  // one per structural variable
};

// Bounded-variable primal revised simplex (two-phase, Dantzig pricing with a
// Bland fallback against cycling). Tolerance 1e-7 on the returned solution.
LpSolution solve_lp(const LinearProgram& lp);

// Plain-text dump of the instance for debugging.
void write_lp(const LinearProgram& lp, const std::string& path);
std::string format_lp(const LinearProgram& lp);

}  // namespace dvrpsr
