#pragma once

#include <optional>
#include <vector>

#include "dvrpsr/graph.hpp"
#include "dvrpsr/types.hpp"

namespace dvrpsr {

// A route is an arc-connected node sequence; each position carries the
// (possibly empty) set of requests served on arrival at that node. First and
// last node are the depot with empty serve sets.
struct Stop {
    NodeId node = kInvalidNode;
    std::vector<Request> serve;

    double dwell() const {
        double d = 0.0;
        for (const Request& r : serve) d += r.duration;
        return d;
    }
};

struct Route {
    std::vector<Stop> stops;

    bool empty() const { return stops.size() <= 1; }
    NodeId last_node() const { return stops.back().node; }
};

double route_travel_time(const Route& route, const TravelTimeOracle& oracle);
double route_service_time(const Route& route);

// Slack relative to the end of the service period: U - tau - travel - service.
// Negative values signal infeasibility.
double budget(double tau, const Route& route, double horizon, const TravelTimeOracle& oracle);

// Throws if the route violates the structural invariants (depot endpoints,
// arc-connected, serve nodes matching, duplicate requests).
void validate_route(const Route& route, const StreetGraph& graph);

// Materializes a route from key stops by connecting consecutive nodes with
// fastest paths; consecutive identical nodes are merged (serve sets unioned).
Route build_route(const TravelTimeOracle& oracle, const std::vector<Stop>& key_stops);

// Fastest depot -> r.node -> depot loop serving r.
Route out_and_back_route(const TravelTimeOracle& oracle, const Request& r);

// Idle at the depot, or executing `route` since instant `start`.
struct VehicleState {
    double start = 0.0;
    std::optional<Route> route;

    bool idle() const { return !route.has_value(); }

    static VehicleState make_idle() { return VehicleState{}; }
    static VehicleState routing(double start, Route route) {
        VehicleState v;
        v.start = start;
        v.route = std::move(route);
        return v;
    }
};

// Per-stop arrival and departure instants of a route started at tau,
// replayed at a fixed speed.
struct RouteSchedule {
    std::vector<double> arrival;
    std::vector<double> depart;

    double finish() const { return arrival.back(); }
};

RouteSchedule schedule_route(const Route& route, double tau, const StreetGraph& graph,
                             double speed_m_per_min);

struct PositionReport {
    enum class Kind { kInTransit, kInService, kAtDepotDone };
    Kind kind = Kind::kAtDepotDone;
    NodeId arc_tail = kInvalidNode;  // transit only
    NodeId arc_head = kInvalidNode;
    double fraction = 0.0;
    NodeId node = kInvalidNode;  // service only
    double elapsed = 0.0;
    std::vector<NodeId> onward;  // nodes whose arrival lies strictly after the query instant
};

PositionReport locate(const VehicleState& v, double now, const StreetGraph& graph,
                      double speed_m_per_min);

// Traveling speed at which the remaining route finishes exactly at the end of
// the service period, assuming no further insertions.
double effective_speed(const VehicleState& v, double now, double horizon,
                       const TravelTimeOracle& oracle);

// Predicted arrival instants of the remaining route nodes when the vehicle
// continues at effective speed from its current position.
struct OnwardPrediction {
    double eff_speed = 0.0;
    std::vector<std::pair<NodeId, double>> arrivals;  // route order, increasing times
};

OnwardPrediction predict_arrivals(const VehicleState& v, double now, double horizon,
                                  const TravelTimeOracle& oracle);

// Nodes of the route predicted to be visited strictly after `when`
// (deduplicated, route order).
std::vector<NodeId> predict_onward_nodes(const VehicleState& v, double now, double when,
                                         double horizon, const TravelTimeOracle& oracle);

// Minimum budget consumption of scheduling future request r along the route:
// min over predicted onward nodes j of t(j, r.node) + t(r.node, j) + r.duration.
// +infinity when the prediction set is empty.
double insertion_cost(const VehicleState& v, double now, const Request& r,
                      double horizon, const TravelTimeOracle& oracle);

struct AdjustedRoute {
    Route route;
    double budget = 0.0;
    bool tsp_fallback = false;  // reoptimize fell back to cheapest insertion
};

// Cheapest-insertion routing policy: inserts r after the current position
// without reordering unserved requests, maximizing the resulting budget.
// Ties are broken by the earliest insertion position. nullopt = infeasible.
std::optional<AdjustedRoute> insert_ci(const VehicleState& v, const Request& r,
                                       double horizon, const TravelTimeOracle& oracle);

struct TspLimits {
    int exact_dp_max = 15;   // Held-Karp up to this many targets
    int hard_cap = 25;       // beyond this, fall back to cheapest insertion
    long node_budget = 2'000'000;  // branch-and-bound expansion cap
};

// Reoptimization routing policy: re-sequences all unserved requests plus r
// optimally (exact open TSP from the current position back to the depot).
std::optional<AdjustedRoute> reoptimize(const VehicleState& v, const Request& r,
                                        double horizon, const TravelTimeOracle& oracle,
                                        const TspLimits& limits = {});

}  // namespace dvrpsr
