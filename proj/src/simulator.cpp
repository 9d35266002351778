#include "dvrpsr/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "dvrpsr/log.hpp"
#include "dvrpsr/rng.hpp"
#include "json.hpp"

namespace dvrpsr {

namespace {
constexpr uint64_t kSaltGamma = 0x67743067u;
constexpr double kDeadlineTol = 1e-6;
}

const char* planner_kind_name(PlannerKind k) {
    return k == PlannerKind::kMyopic ? "myopic" : "potential";
}

SystemState transition(const SystemState& state, const Decision& decision, const Request& next,
                       double horizon, const TravelTimeOracle& oracle) {
    SystemState out = state;
    if (decision.accept) {
        const VehicleState& v = out.vehicles[decision.vehicle];
        double start = v.idle() ? state.clock : v.start;
        if (budget(start, decision.route, horizon, oracle) < -1e-9)
            throw std::logic_error("policy produced an infeasible route (negative budget)");
        apply_decision(out.vehicles, decision, state.clock);
    }
    if (next.arrival < state.clock) throw std::logic_error("clock must advance between epochs");
    out.clock = next.arrival;
    advance_fleet(out.vehicles, out.clock, oracle);
    out.pending = next;
    return out;
}

namespace {

struct ServedCheck {
    std::map<int, int> count;  // request id -> times served

    void add_route(const Route& route) {
        for (const Stop& s : route.stops)
            for (const Request& r : s.serve) ++count[r.id];
    }
};

void verify_terminal(const Instance& instance, const Scenario& scenario,
                     const RunRecord& record, const TravelTimeOracle& oracle) {
    ServedCheck served;
    for (const auto& trace : record.traces) {
        for (const TraceEntry& entry : trace) {
            served.add_route(entry.route);
            RouteSchedule sched =
                schedule_route(entry.route, entry.start, instance.graph, oracle.speed());
            if (sched.finish() > instance.horizon + kDeadlineTol)
                throw std::logic_error("vehicle returned after the end of the service period");
        }
    }
    for (const Request& r : scenario.statics) {
        auto it = served.count.find(r.id);
        if (it == served.count.end() || it->second != 1)
            throw std::logic_error("static request " + std::to_string(r.id) +
                                   " not served exactly once");
    }
    std::map<int, const EpochRecord*> accepted;
    for (const EpochRecord& e : record.epochs)
        if (e.accepted) accepted[e.request_id] = &e;
    for (const auto& [id, epoch] : accepted) {
        auto it = served.count.find(id);
        if (it == served.count.end() || it->second != 1)
            throw std::logic_error("accepted request " + std::to_string(id) +
                                   " not served exactly once");
    }
    for (const auto& [id, times] : served.count) {
        if (times != 1)
            throw std::logic_error("request " + std::to_string(id) + " served multiple times");
        if (!accepted.count(id)) {
            bool is_static = false;
            for (const Request& r : scenario.statics) is_static |= r.id == id;
            if (!is_static)
                throw std::logic_error("served request " + std::to_string(id) +
                                       " was never accepted");
        }
    }
}

}  // namespace

RunRecord run_scenario(const Instance& instance, const TravelTimeOracle& oracle,
                       const Plan& plan, const PolicyConfig& policy, const Scenario& scenario,
                       uint64_t run_seed, bool measure_time, const SnapshotOptions& snapshots) {
    RunRecord record;
    record.traces.assign(instance.vehicles, {});
    std::vector<VehicleState> fleet = plan_fleet(plan, instance.vehicles);
    for (std::size_t k = 0; k < plan.routes.size(); ++k) {
        record.traces[k].push_back({0.0, plan.routes[k]});
        if (budget(0.0, plan.routes[k], instance.horizon, oracle) < 0.0)
            throw std::logic_error("plan route with negative budget");
    }

    PolicyContext ctx;
    ctx.oracle = &oracle;
    ctx.demand = &instance.demand;
    ctx.horizon = instance.horizon;
    ctx.tsp_fallbacks = &record.tsp_fallbacks;

    auto snap_path = [&](const std::string& tag) {
        return snapshots.dir + "/snapshot_s" + std::to_string(scenario.index) + "_" + tag +
               ".json";
    };
    if (snapshots.enabled())
        export_snapshot(fleet, record.traces, 0.0, oracle, snap_path("initial"));

    double total_ms = 0.0;
    for (std::size_t t = 0; t < scenario.dynamics.size(); ++t) {
        const Request& r = scenario.dynamics[t];
        advance_fleet(fleet, r.arrival, oracle, nullptr);

        SystemState state;
        state.clock = r.arrival;
        state.vehicles = fleet;
        state.pending = r;
        ctx.epoch_seed = mix_seed(run_seed, static_cast<uint64_t>(t));

        double ms = 0.0;
        Decision decision;
        if (measure_time) {
            auto t0 = std::chrono::steady_clock::now();
            decision = decide(policy, state, ctx);
            auto t1 = std::chrono::steady_clock::now();
            ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        } else {
            decision = decide(policy, state, ctx);
        }
        total_ms += ms;
        record.max_decision_ms = std::max(record.max_decision_ms, ms);

        if (decision.accept) {
            const VehicleState& v = fleet[decision.vehicle];
            double start = v.idle() ? r.arrival : v.start;
            if (budget(start, decision.route, instance.horizon, oracle) < -1e-9)
                throw std::logic_error("policy produced an infeasible route");
            if (v.idle()) {
                record.traces[decision.vehicle].push_back({r.arrival, decision.route});
            } else {
                record.traces[decision.vehicle].back().route = decision.route;
            }
            apply_decision(fleet, decision, r.arrival);
            ++record.accepted;
        } else {
            ++record.rejected;
        }
        record.epochs.push_back({static_cast<int>(t) + 1, r.arrival, r.id, r.node,
                                 decision.accept, decision.accept ? decision.vehicle : -1,
                                 decision.forced_dispatch, ms});
        if (snapshots.enabled())
            export_snapshot(fleet, record.traces, r.arrival, oracle,
                            snap_path("e" + std::to_string(t + 1)));
    }
    advance_fleet(fleet, instance.horizon, oracle, nullptr);
    for (const VehicleState& v : fleet)
        if (!v.idle())
            throw std::logic_error("vehicle still routing at the end of the service period");
    if (snapshots.enabled())
        export_snapshot(fleet, record.traces, instance.horizon, oracle, snap_path("terminal"));

    const int total = static_cast<int>(scenario.dynamics.size());
    record.rate_defined = total > 0;
    record.acceptance_rate =
        total > 0 ? static_cast<double>(record.accepted) / total : 1.0;
    record.mean_decision_ms = total > 0 ? total_ms / total : 0.0;
    verify_terminal(instance, scenario, record, oracle);
    return record;
}

ExperimentResult run_experiment(const Instance& instance, const ExperimentSpec& spec) {
    ExperimentResult result;
    TravelTimeOracle oracle = instance.make_oracle();
    std::vector<Request> statics = instance_statics(instance);
    AuxGraph aux = build_aux_graph(statics, oracle, instance.horizon);
    ColumnGenResult cg = generate_columns(aux, instance.horizon, instance.vehicles);
    if (spec.planner == PlannerKind::kMyopic) {
        result.plan = plan_myopic(aux, cg.pool, instance.vehicles, oracle, instance.horizon);
    } else {
        Rng rng(mix_seed(spec.seed, kSaltGamma, 1));
        std::vector<SamplePath> omega;
        for (int i = 0; i < spec.planner_paths; ++i)
            omega.push_back(sample_path(instance.demand, instance.graph, 0.0, instance.horizon,
                                        rng));
        result.plan = plan_potential(aux, cg.pool, instance.vehicles, omega, oracle,
                                     instance.horizon);
    }
    log::info("plan (%s): %zu routes over %zu static requests",
              planner_kind_name(spec.planner), result.plan.routes.size(), statics.size());

    // One gamma per (instance, plan), tuned with CI routing.
    bool needs_gamma = false;
    for (const auto& p : spec.policies)
        needs_gamma |= (p.config.kind == PolicyKind::kPfa ||
                        p.config.kind == PolicyKind::kRolloutPfa) &&
                       p.config.gamma <= 0.0;
    if (needs_gamma) {
        auto fleet = plan_fleet(result.plan, instance.vehicles);
        result.gamma = tune_gamma(fleet, instance.demand, instance.graph, oracle,
                                  instance.horizon, spec.planner_paths,
                                  mix_seed(spec.seed, kSaltGamma));
        log::info("tuned gamma = %g", result.gamma);
    }

    std::vector<Scenario> scenarios;
    for (int s = 0; s < spec.scenario_count; ++s)
        scenarios.push_back(make_scenario(instance, statics, s, spec.seed));

    struct Job {
        int policy, scenario, rep;
    };
    std::vector<Job> jobs;
    for (int p = 0; p < static_cast<int>(spec.policies.size()); ++p)
        for (int s = 0; s < spec.scenario_count; ++s)
            for (int r = 0; r < spec.reps; ++r) jobs.push_back({p, s, r});
    result.rows.resize(jobs.size());

    auto run_job = [&](const Job& job, RunRow& row) {
        const ExperimentPolicy& policy = spec.policies[job.policy];
        PolicyConfig config = policy.config;
        if ((config.kind == PolicyKind::kPfa || config.kind == PolicyKind::kRolloutPfa) &&
            config.gamma <= 0.0)
            config.gamma = result.gamma;
        uint64_t run_seed = mix_seed(spec.seed, static_cast<uint64_t>(job.scenario),
                                     static_cast<uint64_t>(job.rep));
        row.instance = instance.name;
        row.planner = planner_kind_name(spec.planner);
        row.policy = policy.name;
        row.scenario = job.scenario;
        row.rep = job.rep;
        row.seed = run_seed;
        try {
            RunRecord record = run_scenario(instance, oracle, result.plan, config,
                                            scenarios[job.scenario], run_seed,
                                            spec.measure_time);
            row.accepted = record.accepted;
            row.total_dynamic = record.accepted + record.rejected;
            row.acceptance_rate = record.acceptance_rate;
            row.mean_decision_ms = record.mean_decision_ms;
            row.max_decision_ms = record.max_decision_ms;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
            row.accepted = -1;
            row.total_dynamic = -1;
            row.acceptance_rate = -1.0;
            log::warn("run %s/s%d/r%d failed: %s", policy.name.c_str(), job.scenario, job.rep,
                      e.what());
        }
    };

    int workers = std::max(1, spec.workers);
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) run_job(jobs[i], result.rows[i]);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                run_job(jobs[i], result.rows[i]);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return result;
}

std::string results_csv(std::span<const RunRow> rows) {
    std::ostringstream os;
    os << "instance,planner,policy,scenario,rep,accepted,total_dynamic,acceptance_rate,"
          "mean_decision_ms,max_decision_ms,seed\n";
    char buf[64];
    for (const RunRow& r : rows) {
        os << r.instance << ',' << r.planner << ',' << r.policy << ',' << r.scenario << ','
           << r.rep << ',' << r.accepted << ',' << r.total_dynamic << ',';
        std::snprintf(buf, sizeof buf, "%.6f", r.acceptance_rate);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.3f", r.mean_decision_ms);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.3f", r.max_decision_ms);
        os << buf << ',' << r.seed << '\n';
    }
    return os.str();
}

std::vector<RunRow> parse_results_csv(const std::string& text) {
    std::vector<RunRow> rows;
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        RunRow r;
        std::getline(ls, r.instance, ',');
        std::getline(ls, r.planner, ',');
        std::getline(ls, r.policy, ',');
        auto next_field = [&]() {
            std::getline(ls, field, ',');
            return field;
        };
        r.scenario = std::stoi(next_field());
        r.rep = std::stoi(next_field());
        r.accepted = std::stoi(next_field());
        r.total_dynamic = std::stoi(next_field());
        r.acceptance_rate = std::stod(next_field());
        r.mean_decision_ms = std::stod(next_field());
        r.max_decision_ms = std::stod(next_field());
        r.seed = std::stoull(next_field());
        rows.push_back(std::move(r));
    }
    return rows;
}

void export_snapshot(std::span<const VehicleState> fleet,
                     std::span<const std::vector<TraceEntry>> traces, double clock,
                     const TravelTimeOracle& oracle, const std::string& path) {
    using nlohmann::json;
    const StreetGraph& graph = oracle.graph();
    json j;
    j["clock"] = clock;
    auto& vehicles = j["vehicles"] = json::array();
    for (std::size_t k = 0; k < fleet.size(); ++k) {
        json v;
        v["vehicle"] = k;
        if (fleet[k].idle()) {
            v["status"] = "idle";
            v["node"] = graph.depot();
            v["x"] = graph.x(graph.depot());
            v["y"] = graph.y(graph.depot());
            v["onward"] = json::array();
        } else {
            PositionReport rep = locate(fleet[k], clock, graph, oracle.speed());
            switch (rep.kind) {
                case PositionReport::Kind::kInTransit: {
                    v["status"] = "transit";
                    v["arc"] = {rep.arc_tail, rep.arc_head};
                    v["fraction"] = rep.fraction;
                    double x0 = graph.x(rep.arc_tail), y0 = graph.y(rep.arc_tail);
                    double x1 = graph.x(rep.arc_head), y1 = graph.y(rep.arc_head);
                    v["x"] = x0 + rep.fraction * (x1 - x0);
                    v["y"] = y0 + rep.fraction * (y1 - y0);
                    break;
                }
                case PositionReport::Kind::kInService:
                    v["status"] = "service";
                    v["node"] = rep.node;
                    v["elapsed"] = rep.elapsed;
                    v["x"] = graph.x(rep.node);
                    v["y"] = graph.y(rep.node);
                    break;
                case PositionReport::Kind::kAtDepotDone:
                    v["status"] = "done";
                    v["node"] = graph.depot();
                    v["x"] = graph.x(graph.depot());
                    v["y"] = graph.y(graph.depot());
                    break;
            }
            v["onward"] = rep.onward;
        }
        vehicles.push_back(std::move(v));
    }
    // Request markers: served when service started by `clock`.
    auto& requests = j["requests"] = json::array();
    for (std::size_t k = 0; k < traces.size(); ++k) {
        for (const TraceEntry& entry : traces[k]) {
            RouteSchedule sched = schedule_route(entry.route, entry.start, graph, oracle.speed());
            for (std::size_t i = 0; i < entry.route.stops.size(); ++i)
                for (const Request& r : entry.route.stops[i].serve)
                    requests.push_back({{"id", r.id},
                                        {"node", r.node},
                                        {"vehicle", k},
                                        {"status", sched.arrival[i] <= clock ? "served"
                                                                             : "accepted"}});
        }
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write snapshot: " + path);
    out << j.dump(1) << "\n";
}

}  // namespace dvrpsr
