#include "dvrpsr/route.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "dvrpsr/tsp.hpp"

namespace dvrpsr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double route_travel_time(const Route& route, const TravelTimeOracle& oracle) {
    double t = 0.0;
    for (std::size_t i = 0; i + 1 < route.stops.size(); ++i)
        t += oracle.arc_time(route.stops[i].node, route.stops[i + 1].node);
    return t;
}

double route_service_time(const Route& route) {
    double d = 0.0;
    for (const Stop& s : route.stops) d += s.dwell();
    return d;
}

double budget(double tau, const Route& route, double horizon, const TravelTimeOracle& oracle) {
    return horizon - tau - route_travel_time(route, oracle) - route_service_time(route);
}

void validate_route(const Route& route, const StreetGraph& graph) {
    if (route.stops.empty()) throw Error("route has no stops");
    if (route.stops.front().node != graph.depot() || route.stops.back().node != graph.depot())
        throw Error("route endpoints must be the depot");
    if (!route.stops.front().serve.empty() || !route.stops.back().serve.empty())
        throw Error("depot endpoints must have empty serve sets");
    std::set<int> seen;
    for (std::size_t i = 0; i < route.stops.size(); ++i) {
        const Stop& s = route.stops[i];
        if (i + 1 < route.stops.size())
            graph.arc_length(s.node, route.stops[i + 1].node);  // throws if missing
        for (const Request& r : s.serve) {
            if (r.node != s.node) throw Error("served request node mismatch at stop");
            if (r.duration <= 0.0) throw Error("non-positive service duration");
            if (r.id >= 0 && !seen.insert(r.id).second)
                throw Error("request " + std::to_string(r.id) + " appears twice in route");
        }
    }
}

Route build_route(const TravelTimeOracle& oracle, const std::vector<Stop>& key_stops) {
    Route route;
    if (key_stops.empty()) return route;
    route.stops.push_back({key_stops.front().node, key_stops.front().serve});
    for (std::size_t k = 1; k < key_stops.size(); ++k) {
        auto path = oracle.fastest_path(route.stops.back().node, key_stops[k].node);
        for (std::size_t i = 1; i < path.size(); ++i) route.stops.push_back({path[i], {}});
        Stop& last = route.stops.back();
        last.serve.insert(last.serve.end(), key_stops[k].serve.begin(),
                          key_stops[k].serve.end());
    }
    return route;
}

Route out_and_back_route(const TravelTimeOracle& oracle, const Request& r) {
    NodeId depot = oracle.graph().depot();
    return build_route(oracle, {{depot, {}}, {r.node, {r}}, {depot, {}}});
}

RouteSchedule schedule_route(const Route& route, double tau, const StreetGraph& graph,
                             double speed_m_per_min) {
    RouteSchedule s;
    const std::size_t n = route.stops.size();
    s.arrival.resize(n);
    s.depart.resize(n);
    double clock = tau;
    for (std::size_t i = 0; i < n; ++i) {
        s.arrival[i] = clock;
        clock += route.stops[i].dwell();
        s.depart[i] = clock;
        if (i + 1 < n)
            clock += graph.arc_length(route.stops[i].node, route.stops[i + 1].node) /
                     speed_m_per_min;
    }
    return s;
}

PositionReport locate(const VehicleState& v, double now, const StreetGraph& graph,
                      double speed_m_per_min) {
    if (v.idle()) throw Error("locate called on an idle vehicle");
    if (now < v.start) throw Error("locate before route start");
    const Route& route = *v.route;
    RouteSchedule sched = schedule_route(route, v.start, graph, speed_m_per_min);
    PositionReport rep;
    auto fill_onward = [&](std::size_t first) {
        for (std::size_t i = first; i < route.stops.size(); ++i)
            rep.onward.push_back(route.stops[i].node);
    };
    if (now >= sched.finish()) {
        rep.kind = PositionReport::Kind::kAtDepotDone;
        rep.node = route.last_node();
        return rep;
    }
    for (std::size_t i = 0; i < route.stops.size(); ++i) {
        if (now < sched.depart[i]) {  // dwelling at stop i (arrival[i] <= now)
            rep.kind = PositionReport::Kind::kInService;
            rep.node = route.stops[i].node;
            rep.elapsed = now - sched.arrival[i];
            fill_onward(i + 1);
            return rep;
        }
        if (i + 1 < route.stops.size() && now < sched.arrival[i + 1]) {
            rep.kind = PositionReport::Kind::kInTransit;
            rep.arc_tail = route.stops[i].node;
            rep.arc_head = route.stops[i + 1].node;
            rep.fraction = (now - sched.depart[i]) / (sched.arrival[i + 1] - sched.depart[i]);
            fill_onward(i + 1);
            return rep;
        }
    }
    rep.kind = PositionReport::Kind::kAtDepotDone;  // unreachable
    rep.node = route.last_node();
    return rep;
}

namespace {

// Replay position expressed against stop indices: the vehicle is either
// dwelling at stop `index`, or in transit toward stop `index` with
// `remaining_m` meters left on the incoming arc.
struct ReplayPos {
    bool done = false;
    bool in_service = false;
    std::size_t index = 0;
    double elapsed_service = 0.0;  // in_service only
    double remaining_m = 0.0;      // in transit only
};

ReplayPos replay_position(const Route& route, const RouteSchedule& sched, double now,
                          const StreetGraph& graph) {
    ReplayPos pos;
    if (now >= sched.finish()) {
        pos.done = true;
        return pos;
    }
    for (std::size_t i = 0; i < route.stops.size(); ++i) {
        if (now < sched.depart[i]) {
            pos.in_service = true;
            pos.index = i;
            pos.elapsed_service = now - sched.arrival[i];
            return pos;
        }
        if (i + 1 < route.stops.size() && now < sched.arrival[i + 1]) {
            pos.index = i + 1;
            double span = sched.arrival[i + 1] - sched.depart[i];
            double frac = (now - sched.depart[i]) / span;
            pos.remaining_m =
                (1.0 - frac) * graph.arc_length(route.stops[i].node, route.stops[i + 1].node);
            return pos;
        }
    }
    pos.done = true;
    return pos;
}

double remaining_distance(const Route& route, const ReplayPos& pos, const StreetGraph& graph) {
    if (pos.done) return 0.0;
    double d = pos.in_service ? 0.0 : pos.remaining_m;
    for (std::size_t i = pos.index; i + 1 < route.stops.size(); ++i)
        d += graph.arc_length(route.stops[i].node, route.stops[i + 1].node);
    return d;
}

}  // namespace

double effective_speed(const VehicleState& v, double now, double horizon,
                       const TravelTimeOracle& oracle) {
    if (v.idle()) throw Error("effective speed undefined for an idle vehicle");
    const StreetGraph& graph = oracle.graph();
    RouteSchedule sched = schedule_route(*v.route, v.start, graph, oracle.speed());
    ReplayPos pos = replay_position(*v.route, sched, now, graph);
    double d_rem = remaining_distance(*v.route, pos, graph);
    if (d_rem <= 0.0) throw Error("effective speed undefined with no remaining distance");
    double b = budget(v.start, *v.route, horizon, oracle);
    return d_rem * oracle.speed() / (d_rem + b * oracle.speed());
}

OnwardPrediction predict_arrivals(const VehicleState& v, double now, double horizon,
                                  const TravelTimeOracle& oracle) {
    if (v.idle()) throw Error("prediction undefined for an idle vehicle");
    const StreetGraph& graph = oracle.graph();
    const Route& route = *v.route;
    RouteSchedule sched = schedule_route(route, v.start, graph, oracle.speed());
    OnwardPrediction out;
    ReplayPos pos = replay_position(route, sched, now, graph);
    if (pos.done) return out;
    double d_rem = remaining_distance(route, pos, graph);
    if (d_rem <= 0.0) return out;
    double b = budget(v.start, route, horizon, oracle);
    double s_eff = d_rem * oracle.speed() / (d_rem + b * oracle.speed());
    out.eff_speed = s_eff;

    // Simulate the remaining route at effective speed with unchanged service
    // times, from the current position.
    double clock = now;
    std::size_t i = pos.index;
    if (pos.in_service) {
        out.arrivals.push_back({route.stops[i].node, now - pos.elapsed_service});
        clock += route.stops[i].dwell() - pos.elapsed_service;
        ++i;
        if (i < route.stops.size())
            clock += graph.arc_length(route.stops[i - 1].node, route.stops[i].node) / s_eff;
    } else {
        clock += pos.remaining_m / s_eff;
    }
    for (; i < route.stops.size(); ++i) {
        out.arrivals.push_back({route.stops[i].node, clock});
        clock += route.stops[i].dwell();
        if (i + 1 < route.stops.size())
            clock += graph.arc_length(route.stops[i].node, route.stops[i + 1].node) / s_eff;
    }
    return out;
}

std::vector<NodeId> predict_onward_nodes(const VehicleState& v, double now, double when,
                                         double horizon, const TravelTimeOracle& oracle) {
    if (when < now) throw Error("prediction instant precedes the current instant");
    OnwardPrediction pred = predict_arrivals(v, now, horizon, oracle);
    std::vector<NodeId> nodes;
    std::set<NodeId> seen;
    for (const auto& [node, arr] : pred.arrivals) {
        if (arr <= when) continue;
        if (seen.insert(node).second) nodes.push_back(node);
    }
    return nodes;
}

double insertion_cost(const VehicleState& v, double now, const Request& r, double horizon,
                      const TravelTimeOracle& oracle) {
    OnwardPrediction pred = predict_arrivals(v, now, horizon, oracle);
    auto to_r = oracle.tree_to(r.node);
    auto from_r = oracle.tree_from(r.node);
    double best = kInf;
    for (const auto& [node, arr] : pred.arrivals) {
        if (arr <= r.arrival) continue;
        double c = to_r->dist_min[node] + from_r->dist_min[node];
        if (c < best) best = c;
    }
    return best == kInf ? kInf : best + r.duration;
}

namespace {

// Committed part of a running route at instant `now`: everything up to and
// including the anchor stop cannot be changed. The anchor is the stop being
// served (service in progress) or the head of the arc in transit.
struct SplitRoute {
    std::size_t anchor = 0;
    std::vector<std::size_t> future_stops;  // indices past the anchor with nonempty serve
};

std::optional<SplitRoute> split_at(const Route& route, const RouteSchedule& sched, double now,
                                   const StreetGraph& graph) {
    ReplayPos pos = replay_position(route, sched, now, graph);
    if (pos.done) return std::nullopt;
    SplitRoute split;
    split.anchor = pos.index;
    for (std::size_t i = pos.index + 1; i < route.stops.size(); ++i)
        if (!route.stops[i].serve.empty()) split.future_stops.push_back(i);
    return split;
}

// Merge consecutive stops at the same node (zero-length legs from trivial
// fastest paths), unioning their serve sets.
Route normalize_stops(std::vector<Stop> raw) {
    Route out;
    for (Stop& s : raw) {
        if (!out.stops.empty() && out.stops.back().node == s.node) {
            Stop& back = out.stops.back();
            back.serve.insert(back.serve.end(), s.serve.begin(), s.serve.end());
        } else {
            out.stops.push_back(std::move(s));
        }
    }
    return out;
}

Route splice_route(const Route& route, std::size_t seg_from, std::size_t seg_to,
                   const Request& r, const TravelTimeOracle& oracle) {
    std::vector<Stop> raw(route.stops.begin(), route.stops.begin() + seg_from + 1);
    auto leg_out = oracle.fastest_path(route.stops[seg_from].node, r.node);
    for (std::size_t i = 1; i < leg_out.size(); ++i) raw.push_back({leg_out[i], {}});
    raw.back().serve.push_back(r);  // raw ends at r.node either way
    auto leg_back = oracle.fastest_path(r.node, route.stops[seg_to].node);
    for (std::size_t i = 1; i < leg_back.size(); ++i) raw.push_back({leg_back[i], {}});
    raw.insert(raw.end(), route.stops.begin() + seg_to, route.stops.end());
    return normalize_stops(std::move(raw));
}

}  // namespace

std::optional<AdjustedRoute> insert_ci(const VehicleState& v, const Request& r, double horizon,
                                       const TravelTimeOracle& oracle) {
    if (v.idle()) throw Error("cheapest insertion requires a routing state");
    const StreetGraph& graph = oracle.graph();
    const Route& route = *v.route;
    RouteSchedule sched = schedule_route(route, v.start, graph, oracle.speed());
    auto split = split_at(route, sched, r.arrival, graph);
    if (!split) return std::nullopt;  // route already completed

    // Insertion slots: after the anchor and after each remaining service stop.
    std::vector<std::size_t> keys;
    keys.push_back(split->anchor);
    keys.insert(keys.end(), split->future_stops.begin(), split->future_stops.end());
    keys.push_back(route.stops.size() - 1);

    auto to_r = oracle.tree_to(r.node);
    auto from_r = oracle.tree_from(r.node);
    double best_delta = kInf;
    std::size_t best_slot = 0;
    for (std::size_t s = 0; s + 1 < keys.size(); ++s) {
        NodeId a = route.stops[keys[s]].node;
        NodeId b = route.stops[keys[s + 1]].node;
        double orig = 0.0;
        for (std::size_t i = keys[s]; i < keys[s + 1]; ++i)
            orig += oracle.arc_time(route.stops[i].node, route.stops[i + 1].node);
        double detour = to_r->dist_min[a] + from_r->dist_min[b] - orig;
        if (detour + r.duration < best_delta - 1e-12) {
            best_delta = detour + r.duration;
            best_slot = s;
        }
    }
    if (best_delta == kInf) return std::nullopt;
    AdjustedRoute adj;
    adj.route = splice_route(route, keys[best_slot], keys[best_slot + 1], r, oracle);
    adj.budget = budget(v.start, adj.route, horizon, oracle);
    if (adj.budget < 0.0) return std::nullopt;
    return adj;
}

std::optional<AdjustedRoute> reoptimize(const VehicleState& v, const Request& r, double horizon,
                                        const TravelTimeOracle& oracle, const TspLimits& limits) {
    if (v.idle()) throw Error("reoptimization requires a routing state");
    const StreetGraph& graph = oracle.graph();
    const Route& route = *v.route;
    RouteSchedule sched = schedule_route(route, v.start, graph, oracle.speed());
    auto split = split_at(route, sched, r.arrival, graph);
    if (!split) return std::nullopt;

    // Unserved requests grouped by node; the anchor's own pending serve stays
    // attached to the anchor (the vehicle is already committed to arrive there).
    std::map<NodeId, std::vector<Request>> groups;
    groups[r.node].push_back(r);
    for (std::size_t i : split->future_stops)
        for (const Request& q : route.stops[i].serve) groups[q.node].push_back(q);

    std::vector<TspTarget> targets;
    std::vector<const std::vector<Request>*> target_serve;
    for (const auto& [node, reqs] : groups) {
        double service = 0.0;
        for (const Request& q : reqs) service += q.duration;
        targets.push_back({node, service});
        target_serve.push_back(&reqs);
    }

    auto fall_back = [&]() -> std::optional<AdjustedRoute> {
        auto ci = insert_ci(v, r, horizon, oracle);
        if (ci) ci->tsp_fallback = true;
        return ci;
    };
    if (static_cast<int>(targets.size()) > limits.hard_cap) return fall_back();
    NodeId anchor_node = route.stops[split->anchor].node;
    TspResult tsp = solve_tsp(anchor_node, targets, graph.depot(), oracle, limits.exact_dp_max,
                              limits.hard_cap, limits.node_budget);
    if (!tsp.solved) return fall_back();

    std::vector<Stop> keys;
    keys.reserve(tsp.order.size() + 2);
    keys.push_back(route.stops[split->anchor]);
    for (int idx : tsp.order) keys.push_back({targets[idx].node, *target_serve[idx]});
    keys.push_back({graph.depot(), {}});
    Route tail = build_route(oracle, keys);

    Route out;
    out.stops.assign(route.stops.begin(), route.stops.begin() + split->anchor);
    out.stops.insert(out.stops.end(), tail.stops.begin(), tail.stops.end());
    double b = budget(v.start, out, horizon, oracle);
    if (b < 0.0) return std::nullopt;
    AdjustedRoute adj;
    adj.route = std::move(out);
    adj.budget = b;
    return adj;
}

}  // namespace dvrpsr
