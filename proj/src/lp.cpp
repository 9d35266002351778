#include "dvrpsr/lp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dvrpsr/log.hpp"

namespace dvrpsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPriceTol = 1e-9;
constexpr double kPivotTol = 1e-10;
constexpr int kRefactorEvery = 64;

// Internal solver state over the extended variable set:
// [0, n)          structural variables
// [n, n+m)        row slacks (LE: [0,inf), GE: (-inf,0], EQ: [0,0])
// [n+m, ...)      phase-1 artificials, bounds [0,inf)
struct Simplex {
    int m = 0;       // rows
    int n_struct = 0;
    int n_total = 0;
    std::vector<std::vector<double>> col;  // dense columns, m each
    std::vector<double> lo, hi, cost;      // per variable (phase-2 cost)
    std::vector<double> rhs;

    std::vector<int> basis;          // variable index per row
    std::vector<char> in_basis;
    std::vector<double> val;         // current value per variable
    std::vector<std::vector<double>> binv;

    long iterations = 0;
    long bland_after = 0;
    long iter_limit = 0;

    void refactor() {
        // Gaussian elimination with partial pivoting on the basis matrix.
        std::vector<std::vector<double>> a(m, std::vector<double>(2 * m, 0.0));
        for (int c = 0; c < m; ++c) {
            const auto& column = col[basis[c]];
            for (int r = 0; r < m; ++r) a[r][c] = column[r];
            a[c][m + c] = 1.0;
        }
        for (int c = 0; c < m; ++c) {
            int piv = c;
            for (int r = c + 1; r < m; ++r)
                if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
            if (std::fabs(a[piv][c]) < 1e-13) throw Error("singular LP basis");
            std::swap(a[c], a[piv]);
            double inv = 1.0 / a[c][c];
            for (int k = c; k < 2 * m; ++k) a[c][k] *= inv;
            for (int r = 0; r < m; ++r) {
                if (r == c) continue;
                double f = a[r][c];
                if (f == 0.0) continue;
                for (int k = c; k < 2 * m; ++k) a[r][k] -= f * a[c][k];
            }
        }
        binv.assign(m, std::vector<double>(m));
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) binv[r][c] = a[r][m + c];
        recompute_basics();
    }

    void recompute_basics() {
        // x_B = Binv (b - sum over nonbasic of A_j val_j)
        std::vector<double> resid = rhs;
        for (int j = 0; j < n_total; ++j) {
            if (in_basis[j] || val[j] == 0.0) continue;
            for (int r = 0; r < m; ++r) resid[r] -= col[j][r] * val[j];
        }
        for (int r = 0; r < m; ++r) {
            double x = 0.0;
            for (int c = 0; c < m; ++c) x += binv[r][c] * resid[c];
            val[basis[r]] = x;
        }
    }

    std::vector<double> dual(const std::vector<double>& c_active) const {
        std::vector<double> y(m, 0.0);
        for (int r = 0; r < m; ++r) {
            double cb = c_active[basis[r]];
            if (cb == 0.0) continue;
            for (int k = 0; k < m; ++k) y[k] += cb * binv[r][k];
        }
        return y;
    }

    // Runs the simplex on the given cost vector. Returns kOptimal or
    // kUnbounded (phase 1 is bounded below by 0, so unbounded only in phase 2).
    LpStatus run(const std::vector<double>& c_active) {
        long stall = 0;
        while (true) {
            if (++iterations > iter_limit) return LpStatus::kIterationLimit;
            bool bland = stall > bland_after;
            std::vector<double> y = dual(c_active);
            int enter = -1;
            int dir = 0;
            double best_score = kPriceTol;
            for (int j = 0; j < n_total; ++j) {
                if (in_basis[j]) continue;
                if (lo[j] == hi[j]) continue;  // fixed
                double d = c_active[j];
                for (int r = 0; r < m; ++r) d -= y[r] * col[j][r];
                bool at_lower = val[j] <= lo[j] + 1e-12 && lo[j] != -kInf;
                bool at_upper = val[j] >= hi[j] - 1e-12 && hi[j] != kInf;
                bool is_free = !at_lower && !at_upper;
                int candidate_dir = 0;
                if ((at_lower || is_free) && d < -best_score) candidate_dir = +1;
                else if ((at_upper || is_free) && d > best_score) candidate_dir = -1;
                if (candidate_dir == 0) continue;
                if (bland) {  // first eligible index
                    enter = j;
                    dir = candidate_dir;
                    break;
                }
                if (std::fabs(d) > best_score) {
                    best_score = std::fabs(d);
                    enter = j;
                    dir = candidate_dir;
                }
            }
            if (enter < 0) return LpStatus::kOptimal;

            std::vector<double> w(m, 0.0);
            for (int r = 0; r < m; ++r) {
                double s = 0.0;
                for (int k = 0; k < m; ++k) s += binv[r][k] * col[enter][k];
                w[r] = s;
            }
            // Basic values move by -dir * w * step.
            double step = kInf;
            if (lo[enter] != -kInf && hi[enter] != kInf) step = hi[enter] - lo[enter];
            int leave_row = -1;
            double leave_bound = 0.0;
            for (int r = 0; r < m; ++r) {
                int b = basis[r];
                double g = -dir * w[r];
                double cand = kInf;
                double bound = 0.0;
                if (g > kPivotTol && hi[b] != kInf) {
                    cand = (hi[b] - val[b]) / g;
                    bound = hi[b];
                } else if (g < -kPivotTol && lo[b] != -kInf) {
                    cand = (lo[b] - val[b]) / g;
                    bound = lo[b];
                }
                if (cand == kInf) continue;
                if (cand < 0.0) cand = 0.0;
                if (cand < step - 1e-12 ||
                    (leave_row >= 0 && cand < step + 1e-12 &&
                     (bland ? b < basis[leave_row] : r < leave_row))) {
                    step = cand;
                    leave_row = r;
                    leave_bound = bound;
                }
            }
            if (step == kInf) return LpStatus::kUnbounded;
            if (step <= 1e-12) ++stall; else stall = 0;

            // Apply the move.
            for (int r = 0; r < m; ++r) val[basis[r]] -= dir * w[r] * step;
            val[enter] += dir * step;
            if (leave_row < 0) continue;  // bound flip, basis unchanged

            int leaving = basis[leave_row];
            val[leaving] = leave_bound;  // snap to the bound it hit
            in_basis[leaving] = 0;
            in_basis[enter] = 1;
            basis[leave_row] = enter;
            double piv = w[leave_row];
            if (std::fabs(piv) < 1e-13) {
                refactor();
                continue;
            }
            double inv = 1.0 / piv;
            for (int k = 0; k < m; ++k) binv[leave_row][k] *= inv;
            for (int r = 0; r < m; ++r) {
                if (r == leave_row) continue;
                double f = w[r];
                if (f == 0.0) continue;
                for (int k = 0; k < m; ++k) binv[r][k] -= f * binv[leave_row][k];
            }
            if (iterations % kRefactorEvery == 0) refactor();
        }
    }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    const int n = lp.var_count();
    const int m = static_cast<int>(lp.rows.size());
    Simplex sx;
    sx.m = m;
    sx.n_struct = n;
    // Internal sense: minimize.
    const double sgn = lp.sense == LpSense::kMin ? 1.0 : -1.0;

    sx.col.assign(n + m, std::vector<double>(m, 0.0));
    sx.lo.resize(n + m);
    sx.hi.resize(n + m);
    sx.cost.assign(n + m, 0.0);
    sx.rhs.resize(m);
    for (int j = 0; j < n; ++j) {
        if (lp.lower[j] > lp.upper[j]) throw Error("LP variable with empty bound interval");
        sx.lo[j] = lp.lower[j];
        sx.hi[j] = lp.upper[j];
        sx.cost[j] = sgn * lp.objective[j];
    }
    for (int r = 0; r < m; ++r) {
        const auto& row = lp.rows[r];
        for (auto [j, a] : row.terms) sx.col[j][r] += a;
        sx.rhs[r] = row.rhs;
        int s = n + r;
        sx.col[s][r] = 1.0;
        switch (row.rel) {
            case LpRel::kLe: sx.lo[s] = 0.0; sx.hi[s] = kInf; break;
            case LpRel::kGe: sx.lo[s] = -kInf; sx.hi[s] = 0.0; break;
            case LpRel::kEq: sx.lo[s] = 0.0; sx.hi[s] = 0.0; break;
        }
    }
    sx.n_total = n + m;
    sx.val.assign(sx.n_total, 0.0);
    for (int j = 0; j < sx.n_total; ++j) {
        if (sx.lo[j] != -kInf) sx.val[j] = sx.lo[j];
        else if (sx.hi[j] != kInf) sx.val[j] = sx.hi[j];
        else sx.val[j] = 0.0;
    }

    // Initial basis: slacks where the residual fits the slack bounds,
    // artificials elsewhere.
    sx.basis.resize(m);
    sx.in_basis.assign(sx.n_total, 0);
    std::vector<double> phase1_cost;
    std::vector<double> resid(m);
    for (int r = 0; r < m; ++r) {
        double s = sx.rhs[r];
        for (int j = 0; j < n; ++j)
            if (sx.val[j] != 0.0) s -= sx.col[j][r] * sx.val[j];
        resid[r] = s;
    }
    bool need_phase1 = false;
    for (int r = 0; r < m; ++r) {
        int s = n + r;
        if (resid[r] >= sx.lo[s] - 1e-11 && resid[r] <= sx.hi[s] + 1e-11) {
            sx.basis[r] = s;
            sx.in_basis[s] = 1;
        } else {
            double clamped = std::clamp(resid[r], sx.lo[s], sx.hi[s]);
            sx.val[s] = clamped;
            double sigma = resid[r] - clamped > 0.0 ? 1.0 : -1.0;
            int a = sx.n_total;
            sx.col.emplace_back(m, 0.0);
            sx.col[a][r] = sigma;
            sx.lo.push_back(0.0);
            sx.hi.push_back(kInf);
            sx.cost.push_back(0.0);
            sx.val.push_back(std::fabs(resid[r] - clamped));
            sx.in_basis.push_back(1);
            sx.basis[r] = a;
            ++sx.n_total;
            need_phase1 = true;
        }
    }
    sx.iter_limit = 200L * (sx.n_total + m) + 20000L;
    sx.bland_after = 2L * (sx.n_total + m) + 500L;
    sx.refactor();

    LpSolution sol;
    if (need_phase1) {
        phase1_cost.assign(sx.n_total, 0.0);
        for (int j = n + m; j < sx.n_total; ++j) phase1_cost[j] = 1.0;
        LpStatus st = sx.run(phase1_cost);
        if (st == LpStatus::kIterationLimit) {
            log::warn("LP phase 1 hit the iteration limit\n%s", format_lp(lp).c_str());
            sol.status = st;
            return sol;
        }
        double infeas = 0.0;
        for (int j = n + m; j < sx.n_total; ++j) infeas += sx.val[j];
        if (infeas > 1e-7) {
            sol.status = LpStatus::kInfeasible;
            return sol;
        }
        for (int j = n + m; j < sx.n_total; ++j) sx.hi[j] = 0.0;  // pin artificials
    }
    std::vector<double> phase2_cost(sx.cost.begin(), sx.cost.end());
    LpStatus st = sx.run(phase2_cost);
    if (st == LpStatus::kIterationLimit)
        log::warn("LP phase 2 hit the iteration limit\n%s", format_lp(lp).c_str());
    sol.status = st == LpStatus::kOptimal ? LpStatus::kOptimal
                 : st == LpStatus::kUnbounded ? LpStatus::kUnbounded
                                              : LpStatus::kIterationLimit;
    if (sol.status != LpStatus::kOptimal) return sol;

    sx.refactor();  // tighten residual drift before reporting
    sol.primal.assign(n, 0.0);
    double obj = 0.0;
    for (int j = 0; j < n; ++j) {
        sol.primal[j] = sx.val[j];
        obj += lp.objective[j] * sx.val[j];
    }
    sol.objective = obj;
    std::vector<double> y = sx.dual(phase2_cost);
    sol.duals.resize(m);
    for (int r = 0; r < m; ++r) sol.duals[r] = sgn * y[r];
    sol.reduced_costs.resize(n);
    for (int j = 0; j < n; ++j) {
        double d = sx.cost[j];
        for (int r = 0; r < m; ++r) d -= y[r] * sx.col[j][r];
        sol.reduced_costs[j] = sgn * d;
    }
    return sol;
}

std::string format_lp(const LinearProgram& lp) {
    std::ostringstream os;
    os << (lp.sense == LpSense::kMin ? "min" : "max");
    for (int j = 0; j < lp.var_count(); ++j) os << " " << lp.objective[j] << "*x" << j;
    os << "\n";
    for (const auto& row : lp.rows) {
        for (auto [j, a] : row.terms) os << a << "*x" << j << " ";
        os << (row.rel == LpRel::kLe ? "<=" : row.rel == LpRel::kGe ? ">=" : "=");
        os << " " << row.rhs << "\n";
    }
    for (int j = 0; j < lp.var_count(); ++j)
        os << lp.lower[j] << " <= x" << j << " <= " << lp.upper[j] << "\n";
    return os.str();
}

void write_lp(const LinearProgram& lp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write LP dump: " + path);
    out << format_lp(lp);
}

}  // namespace dvrpsr
