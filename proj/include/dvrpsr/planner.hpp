#pragma once

#include <bitset>
#include <span>
#include <vector>

#include "dvrpsr/demand.hpp"
#include "dvrpsr/route.hpp"
#include "dvrpsr/types.hpp"

namespace dvrpsr {

// Auxiliary complete digraph over the depot and the distinct static-request
// nodes; arc costs are fastest street travel times, service is attached to
// the head customer.
struct AuxCustomer {
    NodeId street_node = kInvalidNode;
    std::vector<Request> requests;  // grouped by node
    double service = 0.0;
};

struct AuxGraph {
    NodeId depot = kInvalidNode;
    std::vector<AuxCustomer> customers;
    // time[0] = depot row, time[1 + c] = customer c; same for columns.
    std::vector<std::vector<double>> time;

    int size() const { return static_cast<int>(customers.size()); }
};

// Groups static requests by node and validates that each is individually
// servable within the horizon.
AuxGraph build_aux_graph(std::span<const Request> statics, const TravelTimeOracle& oracle,
                         double horizon);

// A priced route over the auxiliary graph. Cost is the full loop duration
// (travel plus service, depot to depot).
struct Column {
    std::vector<int> visits;  // customer indices in order
    double cost = 0.0;
    std::vector<int> covers;  // sorted unique customer indices
    bool elementary = true;
};

constexpr int kMaxAuxCustomers = 192;

// Labeling over the auxiliary graph with a duration resource and ng-route
// memory; returns up to max_columns columns with reduced cost below -1e-7,
// most negative first.
std::vector<Column> price_columns(const AuxGraph& aux, std::span<const double> customer_duals,
                                  double fleet_dual, double horizon, int ng_size,
                                  int max_columns);

struct ColumnGenResult {
    std::vector<Column> pool;
    double rmp_objective = 0.0;
    int rounds = 0;
};

// Column generation on the duration-constrained VRP relaxation: seeds with
// single-customer columns, alternates master LP and pricing to convergence.
ColumnGenResult generate_columns(const AuxGraph& aux, double horizon, int fleet_size,
                                 int ng_size = 8, int max_per_round = 200);

struct Plan {
    std::vector<Route> routes;  // assigned to vehicles 0..k'-1, the rest start idle
};

Route materialize_column(const AuxGraph& aux, const Column& column,
                         const TravelTimeOracle& oracle);

// Minimum total duration selection over the generated pool.
Plan plan_myopic(const AuxGraph& aux, std::span<const Column> pool, int fleet_size,
                 const TravelTimeOracle& oracle, double horizon);

// Maximum summed route potential selection over the generated pool.
Plan plan_potential(const AuxGraph& aux, std::span<const Column> pool, int fleet_size,
                    std::span<const SamplePath> paths, const TravelTimeOracle& oracle,
                    double horizon);

// Initial fleet of a plan: vehicles with a route start it at instant 0.
std::vector<VehicleState> plan_fleet(const Plan& plan, int fleet_size);

}  // namespace dvrpsr
