#pragma once

#include <span>
#include <string>
#include <vector>

#include "dvrpsr/instance.hpp"
#include "dvrpsr/planner.hpp"
#include "dvrpsr/policy.hpp"

namespace dvrpsr {

// Pure MDP transition: applies the decision, advances the clock to the next
// request's arrival (completed vehicles turn idle) and installs it as
// pending. Throws std::logic_error on an infeasible decision.
SystemState transition(const SystemState& state, const Decision& decision, const Request& next,
                       double horizon, const TravelTimeOracle& oracle);

struct EpochRecord {
    int epoch = 0;
    double clock = 0.0;
    int request_id = -1;
    NodeId node = kInvalidNode;
    bool accepted = false;
    int vehicle = -1;
    bool forced = false;
    double wall_ms = 0.0;
};

struct TraceEntry {
    double start = 0.0;
    Route route;
};

struct RunRecord {
    std::vector<EpochRecord> epochs;
    int accepted = 0;
    int rejected = 0;
    bool rate_defined = true;
    double acceptance_rate = 0.0;
    double mean_decision_ms = 0.0;
    double max_decision_ms = 0.0;
    long tsp_fallbacks = 0;
    std::vector<std::vector<TraceEntry>> traces;  // executed routes per vehicle
};

struct SnapshotOptions {
    std::string dir;  // empty = disabled
    bool enabled() const { return !dir.empty(); }
};

RunRecord run_scenario(const Instance& instance, const TravelTimeOracle& oracle,
                       const Plan& plan, const PolicyConfig& policy, const Scenario& scenario,
                       uint64_t run_seed, bool measure_time = true,
                       const SnapshotOptions& snapshots = {});

enum class PlannerKind { kMyopic, kPotential };
const char* planner_kind_name(PlannerKind k);

struct ExperimentPolicy {
    std::string name;
    PolicyConfig config;
};

struct ExperimentSpec {
    PlannerKind planner = PlannerKind::kPotential;
    std::vector<ExperimentPolicy> policies;
    int scenario_count = 1;
    int reps = 1;
    uint64_t seed = 0;
    int workers = 1;
    bool measure_time = true;
    int planner_paths = 50;  // H for the potential planner and gamma tuning
};

struct RunRow {
    std::string instance;
    std::string planner;
    std::string policy;
    int scenario = 0;
    int rep = 0;
    int accepted = 0;
    int total_dynamic = 0;
    double acceptance_rate = 0.0;
    double mean_decision_ms = 0.0;
    double max_decision_ms = 0.0;
    uint64_t seed = 0;
    bool failed = false;
    std::string error;
};

struct ExperimentResult {
    Plan plan;
    double gamma = 0.0;  // tuned PFA weight, 0 when unused
    std::vector<RunRow> rows;
};

ExperimentResult run_experiment(const Instance& instance, const ExperimentSpec& spec);

std::string results_csv(std::span<const RunRow> rows);
std::vector<RunRow> parse_results_csv(const std::string& text);

// Visual-state dump: vehicle positions, remaining routes, request markers.
void export_snapshot(std::span<const VehicleState> fleet,
                     std::span<const std::vector<TraceEntry>> traces, double clock,
                     const TravelTimeOracle& oracle, const std::string& path);

}  // namespace dvrpsr
