#pragma once

#include <span>
#include <string>
#include <vector>

#include "dvrpsr/demand.hpp"
#include "dvrpsr/graph.hpp"
#include "dvrpsr/route.hpp"
#include "dvrpsr/types.hpp"

namespace dvrpsr {

// A test instance: street network, fleet, horizon and demand model. The
// static request set is a deterministic function of the instance seed; the
// dynamic trajectories vary per scenario.
struct Instance {
    std::string name;
    StreetGraph graph;
    double speed = kmh_to_m_per_min(20.0);  // meters per minute
    double horizon = 600.0;
    int vehicles = 2;
    DemandSpec demand;
    uint64_t seed = 0;
    std::size_t cache_capacity = 1024;

    TravelTimeOracle make_oracle() const { return {graph, speed, cache_capacity}; }
};

Instance load_instance(const std::string& path);
void save_instance(const Instance& instance, const std::string& path);

std::vector<Request> instance_statics(const Instance& instance);

struct Scenario {
    int index = 0;
    uint64_t seed = 0;
    std::vector<Request> statics;
    std::vector<Request> dynamics;  // strictly increasing arrivals
};

Scenario make_scenario(const Instance& instance, const std::vector<Request>& statics, int index,
                       uint64_t experiment_seed);

void save_scenarios(const std::vector<Scenario>& scenarios, const std::string& path);
std::vector<Scenario> load_scenarios(const std::string& path);

// Plan files reference requests by id; resolution needs the static set.
struct Plan;
void save_plan(const Plan& plan, const std::string& path);
Plan load_plan(const std::string& path, std::span<const Request> statics,
               const TravelTimeOracle& oracle);

}  // namespace dvrpsr
