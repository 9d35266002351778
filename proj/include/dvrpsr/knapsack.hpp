#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dvrpsr/demand.hpp"
#include "dvrpsr/route.hpp"
#include "dvrpsr/types.hpp"

namespace dvrpsr {

// One knapsack per non-idle vehicle: capacity = remaining budget, item cost =
// minimum budget consumption of hosting a future request (+inf = unhostable).
struct KnapsackInstance {
    std::vector<double> capacities;
    std::vector<std::vector<double>> costs;  // costs[vehicle][item]
    std::size_t item_count() const { return costs.empty() ? 0 : costs[0].size(); }
};

// Continuous single knapsack with unit profits: greedy by ascending cost,
// fractional last item. Equals the LP optimum.
double solve_ka(double capacity, std::span<const double> costs);

struct MkaSolution {
    double value = 0.0;
    std::vector<std::vector<double>> weights;  // assignment z[vehicle][item]
};

// Continuous multiple-knapsack LP: max total assigned weight subject to
// per-vehicle capacity and <= 1 unit per item.
MkaSolution solve_mka(const KnapsackInstance& instance);

// Budget and predicted onward arrivals of a vehicle, frozen at one instant;
// the costing basis shared by every estimate at a decision epoch.
struct VehicleSnapshot {
    bool active = false;
    double budget = 0.0;
    std::vector<std::pair<NodeId, double>> arrivals;
};

VehicleSnapshot snapshot_vehicle(const VehicleState& v, double now, double horizon,
                                 const TravelTimeOracle& oracle);
std::vector<VehicleSnapshot> snapshot_fleet(std::span<const VehicleState> fleet, double now,
                                            double horizon, const TravelTimeOracle& oracle);

double snapshot_insertion_cost(const VehicleSnapshot& snap, const Request& r,
                               const TravelTimeOracle& oracle);

// Item costs of one sample path against one vehicle snapshot.
std::vector<double> path_costs(const VehicleSnapshot& snap, const SamplePath& path,
                               const TravelTimeOracle& oracle);

KnapsackInstance build_knapsack(std::span<const VehicleSnapshot> snaps, const SamplePath& path,
                                const TravelTimeOracle& oracle);

struct PotentialEstimate {
    double value = 0.0;
    std::vector<double> per_path;
    int path_count = 0;
};

// Ratio between the multiple-knapsack and the summed single-knapsack
// potential at the pre-decision state; 1 when both are zero.
double alpha_ratio(std::span<const VehicleState> fleet, double now, const SamplePath& path,
                   double horizon, const TravelTimeOracle& oracle);

// Multiple-knapsack potential of the post-decision fleet, averaged over the
// sample paths.
PotentialEstimate estimate_potential_mka(std::span<const VehicleState> fleet, double now,
                                         std::span<const SamplePath> paths, double horizon,
                                         const TravelTimeOracle& oracle);

// Precomputed pre-decision quantities shared across the candidate decisions
// of one epoch: alpha per path and single-knapsack values per (path, vehicle).
struct KaShared {
    std::vector<double> alpha;
    std::vector<std::vector<double>> pre_values;
};

KaShared prepare_ka_shared(std::span<const VehicleState> fleet, double now,
                           std::span<const SamplePath> paths, double horizon,
                           const TravelTimeOracle& oracle);

// Alpha-corrected single-knapsack potential of the decision that assigns the
// pending request to `vehicle` with `adjusted` as its new route; vehicle < 0
// evaluates the reject decision. `shared` may be null (computed on the fly).
PotentialEstimate estimate_potential_ka(std::span<const VehicleState> fleet, double now,
                                        int vehicle, const Route* adjusted,
                                        std::span<const SamplePath> paths, double horizon,
                                        const TravelTimeOracle& oracle,
                                        const KaShared* shared = nullptr);

// Mean single-knapsack potential of a planned route started at instant 0;
// the per-route objective coefficient of the potential-based planner.
double route_potential_coefficient(const Route& route, std::span<const SamplePath> paths,
                                   double horizon, const TravelTimeOracle& oracle);

}  // namespace dvrpsr
