#pragma once

// Independent reference implementations used as test oracles. These must not
// share code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "dvrpsr/demand.hpp"
#include "dvrpsr/graph.hpp"
#include "dvrpsr/knapsack.hpp"
#include "dvrpsr/rng.hpp"
#include "dvrpsr/route.hpp"

namespace oracle {

constexpr double kInf = std::numeric_limits<double>::infinity();

// O(V^2) array-scan Dijkstra, distances in minutes.
inline std::vector<double> dijkstra_ref(const dvrpsr::StreetGraph& g, dvrpsr::NodeId source,
                                        double speed) {
    const int n = g.node_count();
    std::vector<double> dist(n, kInf);
    std::vector<char> done(n, 0);
    dist[source] = 0.0;
    for (int iter = 0; iter < n; ++iter) {
        int best = -1;
        for (int v = 0; v < n; ++v)
            if (!done[v] && dist[v] < kInf && (best < 0 || dist[v] < dist[best])) best = v;
        if (best < 0) break;
        done[best] = 1;
        for (const auto& arc : g.out_arcs(best)) {
            double nd = dist[best] + arc.length_m / speed;
            if (nd < dist[arc.head]) dist[arc.head] = nd;
        }
    }
    return dist;
}

// Exhaustive open-TSP over all permutations (n <= 9 or so).
inline double tsp_brute_force(dvrpsr::NodeId start, const std::vector<dvrpsr::TspTarget>& targets,
                              dvrpsr::NodeId end, const dvrpsr::TravelTimeOracle& o) {
    std::vector<int> perm(targets.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    double best = kInf;
    do {
        double t = 0.0;
        dvrpsr::NodeId cur = start;
        for (int i : perm) {
            t += o.travel_time(cur, targets[i].node) + targets[i].service;
            cur = targets[i].node;
        }
        t += o.travel_time(cur, end);
        best = std::min(best, t);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Exact continuous multiple-knapsack value by enumerating candidate vertices
// of the dual: min_y >= 0  sum_k b_k y_k + sum_r max(0, 1 - min_k c_kr y_k).
// The optimum lies at an intersection of the hyperplanes y_k = 0,
// c_kr y_k = 1 and c_kr y_k = c_lr y_l.
inline double mka_dual_enumeration(const std::vector<double>& caps,
                                   const std::vector<std::vector<double>>& costs) {
    const int k = static_cast<int>(caps.size());
    const int n = k > 0 ? static_cast<int>(costs[0].size()) : 0;
    if (k == 0 || n == 0) return 0.0;

    auto dual_value = [&](const std::vector<double>& y) {
        double v = 0.0;
        for (int i = 0; i < k; ++i) v += caps[i] * y[i];
        for (int r = 0; r < n; ++r) {
            double m = kInf;
            for (int i = 0; i < k; ++i)
                if (costs[i][r] != kInf) m = std::min(m, costs[i][r] * y[i]);
            if (m != kInf) v += std::max(0.0, 1.0 - m);
        }
        return v;
    };

    // Hyperplanes as (vehicle a, coeff a) [, (vehicle b, coeff b)] = rhs.
    struct Plane {
        int a;
        double ca;
        int b;       // -1 for single-variable planes
        double cb;
        double rhs;
    };
    std::vector<Plane> planes;
    for (int i = 0; i < k; ++i) planes.push_back({i, 1.0, -1, 0.0, 0.0});  // y_i = 0
    for (int i = 0; i < k; ++i)
        for (int r = 0; r < n; ++r)
            if (costs[i][r] != kInf) planes.push_back({i, costs[i][r], -1, 0.0, 1.0});
    for (int r = 0; r < n; ++r)
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                if (costs[i][r] != kInf && costs[j][r] != kInf)
                    planes.push_back({i, costs[i][r], j, -costs[j][r], 0.0});

    const int np = static_cast<int>(planes.size());
    double best = kInf;
    std::vector<int> pick(k);
    std::function<void(int, int)> rec = [&](int from, int depth) {
        if (depth == k) {
            // Solve the k x k system by Gaussian elimination.
            std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
            for (int i = 0; i < k; ++i) {
                const Plane& p = planes[pick[i]];
                a[i][p.a] += p.ca;
                if (p.b >= 0) a[i][p.b] += p.cb;
                a[i][k] = p.rhs;
            }
            for (int c = 0; c < k; ++c) {
                int piv = -1;
                for (int r = c; r < k; ++r)
                    if (std::fabs(a[r][c]) > 1e-9 && (piv < 0 || std::fabs(a[r][c]) > std::fabs(a[piv][c])))
                        piv = r;
                if (piv < 0) return;  // singular selection
                std::swap(a[c], a[piv]);
                for (int r = 0; r < k; ++r) {
                    if (r == c) continue;
                    double f = a[r][c] / a[c][c];
                    for (int cc = c; cc <= k; ++cc) a[r][cc] -= f * a[c][cc];
                }
            }
            std::vector<double> y(k);
            for (int i = 0; i < k; ++i) {
                y[i] = a[i][k] / a[i][i];
                if (y[i] < -1e-9) return;  // dual-infeasible vertex
                y[i] = std::max(0.0, y[i]);
            }
            best = std::min(best, dual_value(y));
            return;
        }
        for (int p = from; p < np; ++p) {
            pick[depth] = p;
            rec(p + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

// Exact binary multiple-knapsack by assigning each item to a vehicle or none.
inline double mka_integer_brute_force(const std::vector<double>& caps,
                                      const std::vector<std::vector<double>>& costs) {
    const int k = static_cast<int>(caps.size());
    const int n = k > 0 ? static_cast<int>(costs[0].size()) : 0;
    double best = 0.0;
    std::vector<int> assign(n, -1);
    std::function<void(int)> rec = [&](int r) {
        if (r == n) {
            std::vector<double> used(k, 0.0);
            int count = 0;
            for (int i = 0; i < n; ++i) {
                if (assign[i] < 0) continue;
                if (costs[assign[i]][i] == kInf) return;
                used[assign[i]] += costs[assign[i]][i];
                ++count;
            }
            for (int v = 0; v < k; ++v)
                if (used[v] > caps[v] + 1e-12) return;
            best = std::max(best, static_cast<double>(count));
            return;
        }
        for (int v = -1; v < k; ++v) {
            assign[r] = v;
            rec(r + 1);
        }
    };
    rec(0);
    return best;
}

// Minimum-cost exact cover over <= maxk columns by subset DP on the universe.
inline double exact_cover_min_cost(int universe, int maxk,
                                   const std::vector<std::pair<double, std::vector<int>>>& cols) {
    const int full = 1 << universe;
    std::vector<std::vector<double>> dp(maxk + 1, std::vector<double>(full, kInf));
    dp[0][0] = 0.0;
    std::vector<int> masks;
    for (const auto& [cost, covers] : cols) {
        int m = 0;
        for (int e : covers) m |= 1 << e;
        masks.push_back(m);
    }
    for (int used = 0; used < maxk; ++used)
        for (int state = 0; state < full; ++state) {
            if (dp[used][state] == kInf) continue;
            for (std::size_t j = 0; j < cols.size(); ++j) {
                if ((state & masks[j]) != 0) continue;  // exact cover: disjoint
                int ns = state | masks[j];
                double nc = dp[used][state] + cols[j].first;
                if (nc < dp[used + 1][ns]) dp[used + 1][ns] = nc;
            }
        }
    double best = kInf;
    for (int used = 0; used <= maxk; ++used) best = std::min(best, dp[used][full - 1]);
    return best;
}

// Random well-formed route fixture: start at the depot, visit a few random
// request nodes, return. Budget is guaranteed nonnegative by construction
// (horizon chosen by the caller).
struct RouteFixture {
    dvrpsr::Route route;
    double start;
    std::vector<dvrpsr::Request> requests;
};

inline RouteFixture random_route(const dvrpsr::TravelTimeOracle& o, dvrpsr::Rng& rng,
                                 double horizon, int max_stops = 5, int first_id = 1000) {
    const dvrpsr::StreetGraph& g = o.graph();
    RouteFixture fx;
    int stops = 1 + rng.uniform_int(max_stops);
    std::vector<dvrpsr::Stop> keys;
    keys.push_back({g.depot(), {}});
    for (int s = 0; s < stops; ++s) {
        dvrpsr::NodeId node = rng.uniform_int(g.node_count());
        if (node == g.depot()) node = (node + 1) % g.node_count();
        dvrpsr::Request r;
        r.id = first_id + s;
        r.arrival = 0.0;
        r.node = node;
        r.duration = 2.0 + 10.0 * rng.uniform();
        fx.requests.push_back(r);
        keys.push_back({node, {r}});
    }
    keys.push_back({g.depot(), {}});
    fx.route = dvrpsr::build_route(o, keys);
    double dur = dvrpsr::route_travel_time(fx.route, o) + dvrpsr::route_service_time(fx.route);
    double slack = horizon - dur;
    fx.start = slack > 0 ? rng.uniform() * slack * 0.5 : 0.0;
    return fx;
}

}  // namespace oracle
