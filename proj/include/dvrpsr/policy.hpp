#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dvrpsr/demand.hpp"
#include "dvrpsr/knapsack.hpp"
#include "dvrpsr/route.hpp"
#include "dvrpsr/types.hpp"

namespace dvrpsr {

enum class RoutingKind { kCheapestInsertion, kReoptimize };
enum class PolicyKind { kGreedy, kPfa, kRolloutGreedy, kRolloutPfa, kSPbP, kPbP };

struct PolicyConfig {
    PolicyKind kind = PolicyKind::kGreedy;
    RoutingKind routing = RoutingKind::kCheapestInsertion;
    int paths = 50;       // H, sample paths per estimate
    double gamma = 0.0;   // PFA weight
    TspLimits tsp;
};

const char* policy_kind_name(PolicyKind k);

// State at a decision epoch: the pending request has just arrived.
struct SystemState {
    double clock = 0.0;
    std::vector<VehicleState> vehicles;
    Request pending;
};

struct Decision {
    bool accept = false;
    int vehicle = -1;
    Route route;
    bool forced_dispatch = false;  // step (i): idle vehicle dispatched directly
    bool tsp_fallback = false;
};

struct PolicyContext {
    const TravelTimeOracle* oracle = nullptr;
    const DemandSpec* demand = nullptr;
    double horizon = 0.0;
    uint64_t epoch_seed = 0;       // derives all sampling inside one decision
    long* tsp_fallbacks = nullptr; // optional metric sink
};

struct CandidateSet {
    bool forced = false;
    std::vector<Decision> decisions;  // [0] = reject unless forced
};

// Steps (i)-(iii) shared by all policies: dispatch an idle vehicle when one
// can serve the request, otherwise collect the reject decision plus every
// feasible accept under the configured routing policy.
CandidateSet candidate_decisions(const SystemState& state, RoutingKind routing,
                                 const PolicyContext& ctx);

// Acceptance and assignment decision rules over candidate values: accept iff
// the immediate reward offsets the potential loss (1 + best accept value >=
// reject value, ties accept), assigning to the value-maximizing vehicle
// (ties to the lowest vehicle id).
const Decision* apply_decision_rules(const CandidateSet& candidates,
                                     std::span<const double> values);

// Total remaining budget of the non-idle fleet scaled by gamma.
double pfa_value(std::span<const VehicleState> fleet, double gamma, double horizon,
                 const TravelTimeOracle& oracle);

Decision decide_gp(const SystemState& state, RoutingKind routing, const PolicyContext& ctx);
Decision decide_pfa(const SystemState& state, RoutingKind routing, double gamma,
                    const PolicyContext& ctx);
Decision decide_pbp(const SystemState& state, RoutingKind routing, int paths,
                    const PolicyContext& ctx);
Decision decide_spbp(const SystemState& state, RoutingKind routing, int paths,
                     const PolicyContext& ctx);
Decision decide_rollout(const SystemState& state, const PolicyConfig& base, RoutingKind routing,
                        int paths, const PolicyContext& ctx);

Decision decide(const PolicyConfig& config, const SystemState& state, const PolicyContext& ctx);

// Applies a decision to the fleet in place (route replacement, or idle
// dispatch starting at `clock`).
void apply_decision(std::vector<VehicleState>& fleet, const Decision& d, double clock);

// Moves vehicles whose route completed by `now` back to idle; completed
// states are appended to `completed` when given.
void advance_fleet(std::vector<VehicleState>& fleet, double now, const TravelTimeOracle& oracle,
                   std::vector<std::pair<int, VehicleState>>* completed = nullptr);

// Replays a request trajectory from `from` under a deterministic base policy
// (greedy or PFA); returns the number of accepted requests.
int simulate_tail(std::vector<VehicleState> fleet, double from, std::span<const Request> future,
                  const PolicyConfig& base, const PolicyContext& ctx);

struct GammaSearch {
    double lo = 1e-6;
    double hi = 1e-1;
    int coarse_points = 11;      // multiplicative first pass
    double refine_step = 1e-4;   // additive refinement resolution
};

// Variable-step search assuming a unimodal objective: geometric coarse pass,
// then additive refinement around the best point.
double maximize_unimodal(const std::function<double(double)>& eval, const GammaSearch& search);

// Tunes the PFA weight for a fixed initial plan by simulating the PFA policy
// (CI routing) over `paths` full-horizon sample paths.
double tune_gamma(std::span<const VehicleState> plan_fleet, const DemandSpec& demand,
                  const StreetGraph& graph, const TravelTimeOracle& oracle, double horizon,
                  int paths, uint64_t seed, const GammaSearch& search = {});

}  // namespace dvrpsr
