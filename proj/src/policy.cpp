#include "dvrpsr/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dvrpsr/rng.hpp"

namespace dvrpsr {

namespace {
constexpr uint64_t kSaltPaths = 0x70617468u;    // potential sampling
constexpr uint64_t kSaltRollout = 0x726f6c6cu;  // rollout sampling
}

const char* policy_kind_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::kGreedy: return "gp";
        case PolicyKind::kPfa: return "pfa";
        case PolicyKind::kRolloutGreedy: return "rollout-gp";
        case PolicyKind::kRolloutPfa: return "rollout-pfa";
        case PolicyKind::kSPbP: return "spbp";
        case PolicyKind::kPbP: return "pbp";
    }
    return "?";
}

CandidateSet candidate_decisions(const SystemState& state, RoutingKind routing,
                                 const PolicyContext& ctx) {
    const TravelTimeOracle& oracle = *ctx.oracle;
    const Request& r = state.pending;
    CandidateSet out;

    // Step (i): an idle vehicle that can serve the request is dispatched
    // directly on the fastest out-and-back loop.
    for (std::size_t k = 0; k < state.vehicles.size(); ++k) {
        if (!state.vehicles[k].idle()) continue;
        NodeId depot = oracle.graph().depot();
        double loop = oracle.travel_time(depot, r.node) + r.duration +
                      oracle.travel_time(r.node, depot);
        if (state.clock + loop <= ctx.horizon) {
            Decision d;
            d.accept = true;
            d.vehicle = static_cast<int>(k);
            d.route = out_and_back_route(oracle, r);
            d.forced_dispatch = true;
            out.forced = true;
            out.decisions.push_back(std::move(d));
            return out;
        }
        break;  // only the lowest-id idle vehicle is considered
    }

    out.decisions.push_back(Decision{});  // reject
    for (std::size_t k = 0; k < state.vehicles.size(); ++k) {
        const VehicleState& v = state.vehicles[k];
        if (v.idle()) continue;
        std::optional<AdjustedRoute> adjusted =
            routing == RoutingKind::kCheapestInsertion
                ? insert_ci(v, r, ctx.horizon, oracle)
                : reoptimize(v, r, ctx.horizon, oracle, PolicyConfig{}.tsp);
        if (!adjusted) continue;
        if (adjusted->tsp_fallback && ctx.tsp_fallbacks) ++*ctx.tsp_fallbacks;
        Decision d;
        d.accept = true;
        d.vehicle = static_cast<int>(k);
        d.route = std::move(adjusted->route);
        d.tsp_fallback = adjusted->tsp_fallback;
        out.decisions.push_back(std::move(d));
    }
    return out;
}

const Decision* apply_decision_rules(const CandidateSet& candidates,
                                     std::span<const double> values) {
    if (candidates.forced) return &candidates.decisions.front();
    const Decision* best = nullptr;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < candidates.decisions.size(); ++i) {
        if (values[i] > best_value) {  // strict: ties keep the lowest vehicle id
            best_value = values[i];
            best = &candidates.decisions[i];
        }
    }
    if (!best) return &candidates.decisions.front();
    return 1.0 + best_value >= values[0] ? best : &candidates.decisions.front();
}

double pfa_value(std::span<const VehicleState> fleet, double gamma, double horizon,
                 const TravelTimeOracle& oracle) {
    double total = 0.0;
    for (const VehicleState& v : fleet)
        if (!v.idle()) total += budget(v.start, *v.route, horizon, oracle);
    return gamma * total;
}

namespace {

std::vector<VehicleState> fleet_after(const SystemState& state, const Decision& d) {
    std::vector<VehicleState> fleet = state.vehicles;
    apply_decision(fleet, d, state.clock);
    return fleet;
}

std::vector<SamplePath> draw_paths(const SystemState& state, const PolicyContext& ctx,
                                   int count, uint64_t salt) {
    Rng rng(mix_seed(ctx.epoch_seed, salt));
    std::vector<SamplePath> paths;
    paths.reserve(count);
    for (int i = 0; i < count; ++i)
        paths.push_back(sample_path(*ctx.demand, ctx.oracle->graph(), state.clock,
                                    ctx.horizon, rng));
    return paths;
}

}  // namespace

Decision decide_gp(const SystemState& state, RoutingKind routing, const PolicyContext& ctx) {
    CandidateSet cands = candidate_decisions(state, routing, ctx);
    if (cands.forced) return cands.decisions.front();
    const Decision* best = nullptr;
    double best_consumption = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < cands.decisions.size(); ++i) {
        const Decision& d = cands.decisions[i];
        const VehicleState& v = state.vehicles[d.vehicle];
        double consumption = budget(v.start, *v.route, ctx.horizon, *ctx.oracle) -
                             budget(v.start, d.route, ctx.horizon, *ctx.oracle);
        if (consumption < best_consumption) {
            best_consumption = consumption;
            best = &d;
        }
    }
    return best ? *best : cands.decisions.front();
}

Decision decide_pfa(const SystemState& state, RoutingKind routing, double gamma,
                    const PolicyContext& ctx) {
    if (gamma <= 0.0) throw Error("PFA requires a positive gamma");
    CandidateSet cands = candidate_decisions(state, routing, ctx);
    if (cands.forced) return cands.decisions.front();
    std::vector<double> values;
    values.reserve(cands.decisions.size());
    for (const Decision& d : cands.decisions)
        values.push_back(pfa_value(fleet_after(state, d), gamma, ctx.horizon, *ctx.oracle));
    return *apply_decision_rules(cands, values);
}

Decision decide_pbp(const SystemState& state, RoutingKind routing, int paths,
                    const PolicyContext& ctx) {
    CandidateSet cands = candidate_decisions(state, routing, ctx);
    if (cands.forced || cands.decisions.size() == 1) return cands.decisions.front();
    auto omega = draw_paths(state, ctx, paths, kSaltPaths);
    std::vector<double> values;
    values.reserve(cands.decisions.size());
    for (const Decision& d : cands.decisions) {
        auto fleet = fleet_after(state, d);
        values.push_back(
            estimate_potential_mka(fleet, state.clock, omega, ctx.horizon, *ctx.oracle).value);
    }
    return *apply_decision_rules(cands, values);
}

Decision decide_spbp(const SystemState& state, RoutingKind routing, int paths,
                     const PolicyContext& ctx) {
    CandidateSet cands = candidate_decisions(state, routing, ctx);
    if (cands.forced || cands.decisions.size() == 1) return cands.decisions.front();
    auto omega = draw_paths(state, ctx, paths, kSaltPaths);
    KaShared shared =
        prepare_ka_shared(state.vehicles, state.clock, omega, ctx.horizon, *ctx.oracle);
    std::vector<double> values;
    values.reserve(cands.decisions.size());
    for (const Decision& d : cands.decisions) {
        const Route* adjusted = d.accept ? &d.route : nullptr;
        values.push_back(estimate_potential_ka(state.vehicles, state.clock,
                                               d.accept ? d.vehicle : -1, adjusted, omega,
                                               ctx.horizon, *ctx.oracle, &shared)
                             .value);
    }
    return *apply_decision_rules(cands, values);
}

Decision decide_rollout(const SystemState& state, const PolicyConfig& base, RoutingKind routing,
                        int paths, const PolicyContext& ctx) {
    if (base.kind != PolicyKind::kGreedy && base.kind != PolicyKind::kPfa)
        throw Error("rollout base policy must be greedy or PFA");
    CandidateSet cands = candidate_decisions(state, routing, ctx);
    if (cands.forced || cands.decisions.size() == 1) return cands.decisions.front();
    auto omega = draw_paths(state, ctx, paths, kSaltRollout);
    const Decision* best = nullptr;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const Decision& d : cands.decisions) {
        auto fleet = fleet_after(state, d);
        double future = 0.0;
        for (const SamplePath& w : omega)
            future += simulate_tail(fleet, state.clock, w.requests, base, ctx);
        if (!omega.empty()) future /= static_cast<double>(omega.size());
        double score = (d.accept ? 1.0 : 0.0) + future;
        // Ties: accepts beat reject, then the lowest vehicle id (iteration order).
        bool better = score > best_score + 1e-12 ||
                      (score > best_score - 1e-12 && best && !best->accept && d.accept);
        if (!best || better) {
            best_score = std::max(best_score, score);
            best = &d;
        }
    }
    return *best;
}

Decision decide(const PolicyConfig& config, const SystemState& state, const PolicyContext& ctx) {
    switch (config.kind) {
        case PolicyKind::kGreedy:
            return decide_gp(state, config.routing, ctx);
        case PolicyKind::kPfa:
            return decide_pfa(state, config.routing, config.gamma, ctx);
        case PolicyKind::kPbP:
            return decide_pbp(state, config.routing, config.paths, ctx);
        case PolicyKind::kSPbP:
            return decide_spbp(state, config.routing, config.paths, ctx);
        case PolicyKind::kRolloutGreedy: {
            PolicyConfig base;
            base.kind = PolicyKind::kGreedy;
            base.routing = RoutingKind::kCheapestInsertion;
            return decide_rollout(state, base, config.routing, config.paths, ctx);
        }
        case PolicyKind::kRolloutPfa: {
            PolicyConfig base;
            base.kind = PolicyKind::kPfa;
            base.routing = RoutingKind::kCheapestInsertion;
            base.gamma = config.gamma;
            return decide_rollout(state, base, config.routing, config.paths, ctx);
        }
    }
    throw Error("unknown policy kind");
}

void apply_decision(std::vector<VehicleState>& fleet, const Decision& d, double clock) {
    if (!d.accept) return;
    VehicleState& v = fleet[d.vehicle];
    if (v.idle()) {
        v = VehicleState::routing(clock, d.route);
    } else {
        v.route = d.route;  // start instant unchanged
    }
}

void advance_fleet(std::vector<VehicleState>& fleet, double now, const TravelTimeOracle& oracle,
                   std::vector<std::pair<int, VehicleState>>* completed) {
    for (std::size_t k = 0; k < fleet.size(); ++k) {
        VehicleState& v = fleet[k];
        if (v.idle()) continue;
        RouteSchedule sched = schedule_route(*v.route, v.start, oracle.graph(), oracle.speed());
        if (sched.finish() <= now) {
            if (completed) completed->push_back({static_cast<int>(k), v});
            v = VehicleState::make_idle();
        }
    }
}

int simulate_tail(std::vector<VehicleState> fleet, double from, std::span<const Request> future,
                  const PolicyConfig& base, const PolicyContext& ctx) {
    if (base.kind != PolicyKind::kGreedy && base.kind != PolicyKind::kPfa)
        throw Error("tail simulation requires a deterministic base policy");
    int accepted = 0;
    double clock = from;
    for (const Request& r : future) {
        clock = r.arrival;
        advance_fleet(fleet, clock, *ctx.oracle);
        SystemState s;
        s.clock = clock;
        s.vehicles = fleet;
        s.pending = r;
        Decision d = decide(base, s, ctx);
        apply_decision(fleet, d, clock);
        if (d.accept) ++accepted;
    }
    return accepted;
}

double maximize_unimodal(const std::function<double(double)>& eval, const GammaSearch& search) {
    if (search.lo >= search.hi) return search.lo;
    // Multiplicative coarse pass.
    std::vector<double> grid;
    for (int i = 0; i < search.coarse_points; ++i) {
        double t = static_cast<double>(i) / (search.coarse_points - 1);
        grid.push_back(search.lo * std::pow(search.hi / search.lo, t));
    }
    std::size_t best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double v = eval(grid[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    // Additive refinement around the best coarse point.
    double a = grid[best == 0 ? 0 : best - 1];
    double b = grid[std::min(grid.size() - 1, best + 1)];
    double arg = grid[best];
    while ((b - a) / 8.0 > search.refine_step) {
        double step = (b - a) / 8.0;
        for (int i = 0; i <= 8; ++i) {
            double g = a + i * step;
            double v = eval(g);
            if (v > best_val) {
                best_val = v;
                arg = g;
            }
        }
        a = std::max(a, arg - step);
        b = std::min(b, arg + step);
    }
    return arg;
}

double tune_gamma(std::span<const VehicleState> plan_fleet, const DemandSpec& demand,
                  const StreetGraph& graph, const TravelTimeOracle& oracle, double horizon,
                  int paths, uint64_t seed, const GammaSearch& search) {
    Rng rng(mix_seed(seed, 0x67616d6du));
    std::vector<SamplePath> omega;
    omega.reserve(paths);
    for (int i = 0; i < paths; ++i)
        omega.push_back(sample_path(demand, graph, 0.0, horizon, rng));

    PolicyContext ctx;
    ctx.oracle = &oracle;
    ctx.demand = &demand;
    ctx.horizon = horizon;
    std::vector<VehicleState> fleet(plan_fleet.begin(), plan_fleet.end());
    auto evaluate = [&](double gamma) {
        PolicyConfig base;
        base.kind = PolicyKind::kPfa;
        base.routing = RoutingKind::kCheapestInsertion;
        base.gamma = gamma;
        double total = 0.0;
        for (const SamplePath& w : omega)
            total += simulate_tail(fleet, 0.0, w.requests, base, ctx);
        return omega.empty() ? 0.0 : total / static_cast<double>(omega.size());
    };
    return maximize_unimodal(evaluate, search);
}

}  // namespace dvrpsr
