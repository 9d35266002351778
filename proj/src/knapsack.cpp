#include "dvrpsr/knapsack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dvrpsr/lp.hpp"

namespace dvrpsr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double solve_ka(double capacity, std::span<const double> costs) {
    std::vector<double> sorted;
    sorted.reserve(costs.size());
    for (double c : costs)
        if (c != kInf) sorted.push_back(c);
    std::sort(sorted.begin(), sorted.end());
    double value = 0.0;
    double remaining = capacity;
    for (double c : sorted) {
        if (remaining <= 0.0) break;
        if (c <= remaining) {
            value += 1.0;
            remaining -= c;
        } else {
            value += remaining / c;
            remaining = 0.0;
        }
    }
    return value;
}

MkaSolution solve_mka(const KnapsackInstance& instance) {
    const int k = static_cast<int>(instance.capacities.size());
    const int n = static_cast<int>(instance.item_count());
    MkaSolution out;
    out.weights.assign(k, std::vector<double>(n, 0.0));
    if (k == 0 || n == 0) return out;
    if (k == 1) {  // single knapsack solved greedily, no LP required
        std::vector<int> order;
        for (int r = 0; r < n; ++r)
            if (instance.costs[0][r] != kInf) order.push_back(r);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return instance.costs[0][a] < instance.costs[0][b];
        });
        double remaining = instance.capacities[0];
        for (int r : order) {
            if (remaining <= 0.0) break;
            double c = instance.costs[0][r];
            double z = c <= remaining ? 1.0 : remaining / c;
            out.weights[0][r] = z;
            out.value += z;
            remaining -= z * c;
        }
        return out;
    }

    LinearProgram lp;
    lp.sense = LpSense::kMax;
    std::vector<std::vector<int>> var(k, std::vector<int>(n, -1));
    for (int v = 0; v < k; ++v)
        for (int r = 0; r < n; ++r)
            if (instance.costs[v][r] != kInf) var[v][r] = lp.add_var(1.0, 0.0, 1.0);
    if (lp.var_count() == 0) return out;
    for (int v = 0; v < k; ++v) {
        std::vector<std::pair<int, double>> terms;
        for (int r = 0; r < n; ++r)
            if (var[v][r] >= 0) terms.push_back({var[v][r], instance.costs[v][r]});
        if (!terms.empty()) lp.add_row(std::move(terms), LpRel::kLe, instance.capacities[v]);
        else lp.add_row({}, LpRel::kLe, instance.capacities[v]);
    }
    for (int r = 0; r < n; ++r) {
        std::vector<std::pair<int, double>> terms;
        for (int v = 0; v < k; ++v)
            if (var[v][r] >= 0) terms.push_back({var[v][r], 1.0});
        if (!terms.empty()) lp.add_row(std::move(terms), LpRel::kLe, 1.0);
    }
    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::kOptimal)
        throw Error("multiple-knapsack LP failed:\n" + format_lp(lp));
    out.value = sol.objective;
    for (int v = 0; v < k; ++v)
        for (int r = 0; r < n; ++r)
            if (var[v][r] >= 0) out.weights[v][r] = sol.primal[var[v][r]];
    return out;
}

VehicleSnapshot snapshot_vehicle(const VehicleState& v, double now, double horizon,
                                 const TravelTimeOracle& oracle) {
    VehicleSnapshot snap;
    if (v.idle()) return snap;
    OnwardPrediction pred = predict_arrivals(v, now, horizon, oracle);
    if (pred.arrivals.empty()) return snap;  // route complete: treat as inactive
    snap.active = true;
    snap.budget = std::max(0.0, budget(v.start, *v.route, horizon, oracle));
    snap.arrivals = std::move(pred.arrivals);
    return snap;
}

std::vector<VehicleSnapshot> snapshot_fleet(std::span<const VehicleState> fleet, double now,
                                            double horizon, const TravelTimeOracle& oracle) {
    std::vector<VehicleSnapshot> snaps;
    snaps.reserve(fleet.size());
    for (const VehicleState& v : fleet)
        snaps.push_back(v.idle() ? VehicleSnapshot{} : snapshot_vehicle(v, now, horizon, oracle));
    return snaps;
}

double snapshot_insertion_cost(const VehicleSnapshot& snap, const Request& r,
                               const TravelTimeOracle& oracle) {
    if (!snap.active) return kInf;
    auto to_r = oracle.tree_to(r.node);
    auto from_r = oracle.tree_from(r.node);
    auto first = std::upper_bound(
        snap.arrivals.begin(), snap.arrivals.end(), r.arrival,
        [](double t, const std::pair<NodeId, double>& a) { return t < a.second; });
    double best = kInf;
    for (auto it = first; it != snap.arrivals.end(); ++it) {
        double c = to_r->dist_min[it->first] + from_r->dist_min[it->first];
        if (c < best) best = c;
    }
    return best == kInf ? kInf : best + r.duration;
}

std::vector<double> path_costs(const VehicleSnapshot& snap, const SamplePath& path,
                               const TravelTimeOracle& oracle) {
    std::vector<double> costs;
    costs.reserve(path.requests.size());
    for (const Request& r : path.requests) costs.push_back(snapshot_insertion_cost(snap, r, oracle));
    return costs;
}

KnapsackInstance build_knapsack(std::span<const VehicleSnapshot> snaps, const SamplePath& path,
                                const TravelTimeOracle& oracle) {
    KnapsackInstance inst;
    for (const VehicleSnapshot& s : snaps) {
        if (!s.active) continue;
        inst.capacities.push_back(s.budget);
        inst.costs.push_back(path_costs(s, path, oracle));
    }
    return inst;
}

namespace {

double alpha_from_snapshots(std::span<const VehicleSnapshot> snaps, const SamplePath& path,
                            const TravelTimeOracle& oracle, std::vector<double>* ka_out) {
    KnapsackInstance inst = build_knapsack(snaps, path, oracle);
    double denom = 0.0;
    if (ka_out) ka_out->clear();
    for (std::size_t v = 0; v < inst.capacities.size(); ++v) {
        double p = solve_ka(inst.capacities[v], inst.costs[v]);
        denom += p;
        if (ka_out) ka_out->push_back(p);
    }
    if (denom <= 0.0) return 1.0;  // numerator is then zero as well
    return solve_mka(inst).value / denom;
}

}  // namespace

double alpha_ratio(std::span<const VehicleState> fleet, double now, const SamplePath& path,
                   double horizon, const TravelTimeOracle& oracle) {
    auto snaps = snapshot_fleet(fleet, now, horizon, oracle);
    bool any_active = false;
    for (const auto& s : snaps) any_active |= s.active;
    if (!any_active) throw Error("alpha ratio needs at least one non-idle vehicle");
    return alpha_from_snapshots(snaps, path, oracle, nullptr);
}

PotentialEstimate estimate_potential_mka(std::span<const VehicleState> fleet, double now,
                                         std::span<const SamplePath> paths, double horizon,
                                         const TravelTimeOracle& oracle) {
    PotentialEstimate est;
    est.path_count = static_cast<int>(paths.size());
    auto snaps = snapshot_fleet(fleet, now, horizon, oracle);
    double total = 0.0;
    for (const SamplePath& path : paths) {
        double v = solve_mka(build_knapsack(snaps, path, oracle)).value;
        est.per_path.push_back(v);
        total += v;
    }
    est.value = est.path_count > 0 ? total / est.path_count : 0.0;
    return est;
}

KaShared prepare_ka_shared(std::span<const VehicleState> fleet, double now,
                           std::span<const SamplePath> paths, double horizon,
                           const TravelTimeOracle& oracle) {
    KaShared shared;
    auto snaps = snapshot_fleet(fleet, now, horizon, oracle);
    for (const SamplePath& path : paths) {
        std::vector<double> ka;
        shared.alpha.push_back(alpha_from_snapshots(snaps, path, oracle, &ka));
        // Re-expand to fleet indexing (inactive vehicles contribute zero).
        std::vector<double> per_vehicle(fleet.size(), 0.0);
        std::size_t q = 0;
        for (std::size_t v = 0; v < snaps.size(); ++v)
            if (snaps[v].active) per_vehicle[v] = ka[q++];
        shared.pre_values.push_back(std::move(per_vehicle));
    }
    return shared;
}

PotentialEstimate estimate_potential_ka(std::span<const VehicleState> fleet, double now,
                                        int vehicle, const Route* adjusted,
                                        std::span<const SamplePath> paths, double horizon,
                                        const TravelTimeOracle& oracle, const KaShared* shared) {
    KaShared local;
    if (!shared) {
        local = prepare_ka_shared(fleet, now, paths, horizon, oracle);
        shared = &local;
    }
    VehicleSnapshot adjusted_snap;
    if (vehicle >= 0) {
        if (!adjusted) throw Error("accept decision without an adjusted route");
        VehicleState plus = fleet[vehicle];
        plus.route = *adjusted;  // same start instant, new route
        adjusted_snap = snapshot_vehicle(plus, now, horizon, oracle);
    }
    PotentialEstimate est;
    est.path_count = static_cast<int>(paths.size());
    double total = 0.0;
    for (std::size_t w = 0; w < paths.size(); ++w) {
        double sum = 0.0;
        for (std::size_t v = 0; v < fleet.size(); ++v) {
            if (static_cast<int>(v) == vehicle) continue;
            sum += shared->pre_values[w][v];
        }
        if (vehicle >= 0)
            sum += solve_ka(adjusted_snap.budget,
                            path_costs(adjusted_snap, paths[w], oracle));
        double value = shared->alpha[w] * sum;
        est.per_path.push_back(value);
        total += value;
    }
    est.value = est.path_count > 0 ? total / est.path_count : 0.0;
    return est;
}

double route_potential_coefficient(const Route& route, std::span<const SamplePath> paths,
                                   double horizon, const TravelTimeOracle& oracle) {
    VehicleState v = VehicleState::routing(0.0, route);
    if (budget(0.0, route, horizon, oracle) < 0.0)
        throw Error("potential coefficient of an infeasible route");
    VehicleSnapshot snap = snapshot_vehicle(v, 0.0, horizon, oracle);
    if (paths.empty()) return 0.0;
    double total = 0.0;
    for (const SamplePath& path : paths)
        total += solve_ka(snap.budget, path_costs(snap, path, oracle));
    return total / static_cast<double>(paths.size());
}

}  // namespace dvrpsr
