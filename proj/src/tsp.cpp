#include "dvrpsr/tsp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dvrpsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Matrix {
    int n;                              // number of targets
    std::vector<double> from_start;     // start -> target
    std::vector<double> to_end;         // target -> end
    std::vector<std::vector<double>> d; // target -> target
    double service_total = 0.0;
    double start_to_end = 0.0;
};

Matrix build_matrix(NodeId start, const std::vector<TspTarget>& targets, NodeId end,
                    const TravelTimeOracle& oracle) {
    Matrix m;
    m.n = static_cast<int>(targets.size());
    m.from_start.resize(m.n);
    m.to_end.resize(m.n);
    m.d.assign(m.n, std::vector<double>(m.n, 0.0));
    auto start_tree = oracle.tree_from(start);
    auto end_tree = oracle.tree_to(end);
    m.start_to_end = start == end ? 0.0 : start_tree->dist_min[end];
    for (int i = 0; i < m.n; ++i) {
        m.from_start[i] = start_tree->dist_min[targets[i].node];
        m.to_end[i] = end_tree->dist_min[targets[i].node];
        m.service_total += targets[i].service;
        auto ti = oracle.tree_from(targets[i].node);
        for (int j = 0; j < m.n; ++j)
            if (j != i) m.d[i][j] = ti->dist_min[targets[j].node];
    }
    return m;
}

TspResult held_karp(const Matrix& m) {
    const int n = m.n;
    const int full = 1 << n;
    std::vector<std::vector<double>> dp(full, std::vector<double>(n, kInf));
    std::vector<std::vector<int>> prev(full, std::vector<int>(n, -1));
    for (int i = 0; i < n; ++i) dp[1 << i][i] = m.from_start[i];
    for (int mask = 1; mask < full; ++mask)
        for (int last = 0; last < n; ++last) {
            double cur = dp[mask][last];
            if (!(mask & (1 << last)) || cur == kInf) continue;
            for (int next = 0; next < n; ++next) {
                if (mask & (1 << next)) continue;
                int nm = mask | (1 << next);
                double nd = cur + m.d[last][next];
                if (nd < dp[nm][next]) {
                    dp[nm][next] = nd;
                    prev[nm][next] = last;
                }
            }
        }
    double best = kInf;
    int best_last = -1;
    for (int i = 0; i < n; ++i) {
        double v = dp[full - 1][i] + m.to_end[i];
        if (v < best) {
            best = v;
            best_last = i;
        }
    }
    TspResult res;
    res.solved = true;
    res.total_time = best + m.service_total;
    int mask = full - 1, cur = best_last;
    while (cur != -1) {
        res.order.push_back(cur);
        int p = prev[mask][cur];
        mask &= ~(1 << cur);
        cur = p;
    }
    std::reverse(res.order.begin(), res.order.end());
    return res;
}

struct BnB {
    const Matrix& m;
    long budget;
    double best = kInf;
    std::vector<int> best_order;
    std::vector<int> path;
    std::vector<char> used;
    bool exhausted_budget = false;

    explicit BnB(const Matrix& mm, long b) : m(mm), budget(b), used(mm.n, 0) {}

    double greedy_upper() {
        std::vector<char> taken(m.n, 0);
        double cost = 0.0;
        int cur = -1;  // -1 = start
        std::vector<int> order;
        for (int step = 0; step < m.n; ++step) {
            int pick = -1;
            double bestd = kInf;
            for (int j = 0; j < m.n; ++j) {
                if (taken[j]) continue;
                double dd = cur < 0 ? m.from_start[j] : m.d[cur][j];
                if (dd < bestd) {
                    bestd = dd;
                    pick = j;
                }
            }
            taken[pick] = 1;
            cost += bestd;
            order.push_back(pick);
            cur = pick;
        }
        cost += m.to_end[cur];
        best = cost;
        best_order = order;
        return cost;
    }

    // Every unvisited target needs one incoming edge from {current} or another
    // unvisited target; the end node needs one from {current} or unvisited.
    double lower_bound(int cur, double cost) const {
        double lb = cost;
        double end_in = cur < 0 ? m.start_to_end : m.to_end[cur];
        for (int v = 0; v < m.n; ++v) {
            if (used[v]) continue;
            double in = cur < 0 ? m.from_start[v] : m.d[cur][v];
            for (int u = 0; u < m.n; ++u)
                if (!used[u] && u != v && m.d[u][v] < in) in = m.d[u][v];
            lb += in;
            if (m.to_end[v] < end_in) end_in = m.to_end[v];
        }
        lb += end_in;
        return lb;
    }

    void dfs(int cur, double cost) {
        if (--budget < 0) {
            exhausted_budget = true;
            return;
        }
        if (static_cast<int>(path.size()) == m.n) {
            double total = cost + m.to_end[cur];
            if (total < best) {
                best = total;
                best_order = path;
            }
            return;
        }
        if (lower_bound(cur, cost) >= best) return;
        std::vector<std::pair<double, int>> next;
        for (int j = 0; j < m.n; ++j)
            if (!used[j]) next.push_back({cur < 0 ? m.from_start[j] : m.d[cur][j], j});
        std::sort(next.begin(), next.end());
        for (auto [dd, j] : next) {
            if (exhausted_budget) return;
            if (cost + dd >= best) continue;
            used[j] = 1;
            path.push_back(j);
            dfs(j, cost + dd);
            path.pop_back();
            used[j] = 0;
        }
    }
};

}  // namespace

TspResult solve_tsp(NodeId start, const std::vector<TspTarget>& targets, NodeId end,
                    const TravelTimeOracle& oracle, int dp_max, int hard_cap,
                    long node_budget) {
    TspResult res;
    const int n = static_cast<int>(targets.size());
    if (n == 0) {
        res.solved = true;
        res.total_time = start == end ? 0.0 : oracle.travel_time(start, end);
        return res;
    }
    if (n > hard_cap) return res;  // caller falls back
    Matrix m = build_matrix(start, targets, end, oracle);
    if (n <= dp_max) return held_karp(m);
    BnB bnb(m, node_budget);
    bnb.greedy_upper();
    bnb.dfs(-1, 0.0);
    if (bnb.exhausted_budget) return res;
    res.solved = true;
    res.order = bnb.best_order;
    res.total_time = bnb.best + m.service_total;
    return res;
}

}  // namespace dvrpsr
