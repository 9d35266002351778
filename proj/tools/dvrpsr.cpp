#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "dvrpsr/instance.hpp"
#include "dvrpsr/log.hpp"
#include "dvrpsr/planner.hpp"
#include "dvrpsr/simulator.hpp"
#include "dvrpsr/stats.hpp"

namespace {

using namespace dvrpsr;

PolicyConfig parse_policy(const std::string& name, int paths, double gamma) {
    PolicyConfig c;
    c.paths = paths;
    c.gamma = gamma;
    if (name == "gp-ci") {
        c.kind = PolicyKind::kGreedy;
        c.routing = RoutingKind::kCheapestInsertion;
    } else if (name == "gp-r") {
        c.kind = PolicyKind::kGreedy;
        c.routing = RoutingKind::kReoptimize;
    } else if (name == "pfa-ci") {
        c.kind = PolicyKind::kPfa;
        c.routing = RoutingKind::kCheapestInsertion;
    } else if (name == "pfa-r") {
        c.kind = PolicyKind::kPfa;
        c.routing = RoutingKind::kReoptimize;
    } else if (name == "rollout-gp") {
        c.kind = PolicyKind::kRolloutGreedy;
        c.routing = RoutingKind::kCheapestInsertion;
    } else if (name == "rollout-pfa") {
        c.kind = PolicyKind::kRolloutPfa;
        c.routing = RoutingKind::kCheapestInsertion;
    } else if (name == "spbp") {
        c.kind = PolicyKind::kSPbP;
        c.routing = RoutingKind::kReoptimize;
    } else if (name == "pbp") {
        c.kind = PolicyKind::kPbP;
        c.routing = RoutingKind::kReoptimize;
    } else {
        throw Error("unknown policy: " + name +
                    " (expected gp-ci, gp-r, pfa-ci, pfa-r, rollout-gp, rollout-pfa, spbp, pbp)");
    }
    return c;
}

int cmd_gen_instance(const std::string& out, int rows, int cols, double spacing, double jitter,
                     const std::string& depot, double rate, const std::string& pattern,
                     double dynamism, int vehicles, double horizon, double speed_kmh,
                     uint64_t seed, const std::string& name) {
    Instance inst;
    inst.name = name.empty() ? "grid" + std::to_string(rows) + "x" + std::to_string(cols) : name;
    GridSpec grid;
    grid.rows = rows;
    grid.cols = cols;
    grid.spacing_m = spacing;
    grid.jitter_frac = jitter;
    grid.depot = depot == "center" ? DepotPlacement::kCenter : DepotPlacement::kCorner;
    grid.seed = seed;
    inst.graph = generate_grid(grid);
    inst.graph.check_strongly_connected();
    inst.horizon = horizon;
    inst.speed = kmh_to_m_per_min(speed_kmh);
    inst.vehicles = vehicles;
    inst.seed = seed;
    DemandSpec d;
    d.rate_per_min = rate;
    d.horizon = horizon;
    d.pattern = pattern_from_name(pattern);
    if (d.pattern != DemandPattern::kUti) {
        // Clusters at opposite quadrant centers, radius a quarter of the grid.
        NodeId ne = (3 * rows / 4) * cols + 3 * cols / 4;
        NodeId sw = (rows / 4) * cols + cols / 4;
        double radius = 0.25 * spacing * std::max(rows, cols);
        d.clusters = {{ne, radius, 0.25}, {sw, radius, 0.25}};
    }
    if (dynamism <= 0.0 || dynamism > 1.0) throw Error("dynamism must lie in (0, 1]");
    d.static_count_mean = rate * horizon * (1.0 - dynamism) / dynamism;
    d.validate();
    inst.demand = d;
    save_instance(inst, out);
    std::printf("wrote %s (%d nodes, %d arcs, |S| mean %.1f)\n", out.c_str(),
                inst.graph.node_count(), inst.graph.arc_count(), d.static_count_mean);
    return 0;
}

int cmd_gen_scenarios(const std::string& instance_path, int count, uint64_t seed,
                      const std::string& out) {
    Instance inst = load_instance(instance_path);
    std::vector<Request> statics = instance_statics(inst);
    std::vector<Scenario> scenarios;
    for (int i = 0; i < count; ++i) scenarios.push_back(make_scenario(inst, statics, i, seed));
    save_scenarios(scenarios, out);
    std::printf("wrote %s (%d scenarios, %zu static requests)\n", out.c_str(), count,
                statics.size());
    return 0;
}

int cmd_plan(const std::string& instance_path, const std::string& planner, int paths,
             uint64_t seed, const std::string& out) {
    Instance inst = load_instance(instance_path);
    TravelTimeOracle oracle = inst.make_oracle();
    std::vector<Request> statics = instance_statics(inst);
    AuxGraph aux = build_aux_graph(statics, oracle, inst.horizon);
    ColumnGenResult cg = generate_columns(aux, inst.horizon, inst.vehicles);
    Plan plan;
    if (planner == "myopic") {
        plan = plan_myopic(aux, cg.pool, inst.vehicles, oracle, inst.horizon);
    } else if (planner == "potential") {
        Rng rng(mix_seed(seed, 0x706c616eu));
        std::vector<SamplePath> omega;
        for (int i = 0; i < paths; ++i)
            omega.push_back(sample_path(inst.demand, inst.graph, 0.0, inst.horizon, rng));
        plan = plan_potential(aux, cg.pool, inst.vehicles, omega, oracle, inst.horizon);
    } else {
        throw Error("unknown planner: " + planner + " (expected myopic or potential)");
    }
    save_plan(plan, out);
    double total = 0.0;
    for (const Route& r : plan.routes) total += inst.horizon - budget(0.0, r, inst.horizon, oracle);
    std::printf("wrote %s (%zu routes, pool %zu columns, RMP bound %.3f, total duration %.1f)\n",
                out.c_str(), plan.routes.size(), cg.pool.size(), cg.rmp_objective, total);
    return 0;
}

int cmd_simulate(const std::string& instance_path, const std::string& plan_path,
                 std::vector<std::string> policies, const std::string& planner, int scenarios,
                 int reps, uint64_t seed, int workers, int paths, double gamma,
                 const std::string& out, bool timing, const std::string& snapshot_dir) {
    Instance inst = load_instance(instance_path);
    ExperimentSpec spec;
    spec.planner = planner == "myopic" ? PlannerKind::kMyopic : PlannerKind::kPotential;
    spec.scenario_count = scenarios;
    spec.reps = reps;
    spec.seed = seed;
    spec.workers = workers;
    spec.measure_time = timing;
    spec.planner_paths = paths;
    for (const std::string& name : policies)
        spec.policies.push_back({name, parse_policy(name, paths, gamma)});
    if (spec.policies.empty()) throw Error("simulate needs at least one --policy");

    if (!plan_path.empty()) {
        // Pre-planned runs bypass the planner stage but share the machinery.
        TravelTimeOracle oracle = inst.make_oracle();
        std::vector<Request> statics = instance_statics(inst);
        Plan plan = load_plan(plan_path, statics, oracle);
        double gamma_tuned = gamma;
        bool needs_gamma = false;
        for (const auto& p : spec.policies)
            needs_gamma |= (p.config.kind == PolicyKind::kPfa ||
                            p.config.kind == PolicyKind::kRolloutPfa) &&
                           p.config.gamma <= 0.0;
        if (needs_gamma) {
            auto fleet = plan_fleet(plan, inst.vehicles);
            gamma_tuned = tune_gamma(fleet, inst.demand, inst.graph, oracle, inst.horizon,
                                     paths, mix_seed(seed, 0x67743067u));
        }
        std::vector<RunRow> rows;
        for (const auto& policy : spec.policies) {
            PolicyConfig config = policy.config;
            if ((config.kind == PolicyKind::kPfa || config.kind == PolicyKind::kRolloutPfa) &&
                config.gamma <= 0.0)
                config.gamma = gamma_tuned;
            for (int s = 0; s < scenarios; ++s) {
                Scenario scenario = make_scenario(inst, statics, s, seed);
                for (int r = 0; r < reps; ++r) {
                    uint64_t run_seed = mix_seed(seed, s, r);
                    SnapshotOptions snaps;
                    if (!snapshot_dir.empty() && s == 0 && r == 0) snaps.dir = snapshot_dir;
                    RunRow row;
                    row.instance = inst.name;
                    row.planner = "file";
                    row.policy = policy.name;
                    row.scenario = s;
                    row.rep = r;
                    row.seed = run_seed;
                    RunRecord rec = run_scenario(inst, oracle, plan, config, scenario, run_seed,
                                                 timing, snaps);
                    row.accepted = rec.accepted;
                    row.total_dynamic = rec.accepted + rec.rejected;
                    row.acceptance_rate = rec.acceptance_rate;
                    row.mean_decision_ms = rec.mean_decision_ms;
                    row.max_decision_ms = rec.max_decision_ms;
                    rows.push_back(std::move(row));
                }
            }
        }
        std::ofstream f(out);
        if (!f) throw Error("cannot write results: " + out);
        f << results_csv(rows);
        std::printf("wrote %s (%zu runs)\n", out.c_str(), rows.size());
        return 0;
    }

    ExperimentResult result = run_experiment(inst, spec);
    std::ofstream f(out);
    if (!f) throw Error("cannot write results: " + out);
    f << results_csv(result.rows);
    int failed = 0;
    for (const RunRow& r : result.rows) failed += r.failed;
    std::printf("wrote %s (%zu runs, %d failed, plan routes %zu, gamma %g)\n", out.c_str(),
                result.rows.size(), failed, result.plan.routes.size(), result.gamma);
    return failed == 0 ? 0 : 1;
}

int cmd_report(const std::string& in_path) {
    std::ifstream f(in_path);
    if (!f) throw Error("cannot open results: " + in_path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    std::vector<RunRow> rows = parse_results_csv(text);
    if (rows.empty()) throw Error("no result rows in " + in_path);

    std::map<std::string, std::map<std::pair<int, int>, const RunRow*>> groups;
    for (const RunRow& r : rows)
        if (r.accepted >= 0) groups[r.planner + "/" + r.policy][{r.scenario, r.rep}] = &r;

    std::printf("%-28s %8s %12s %14s %14s\n", "planner/policy", "runs", "mean_rate",
                "mean_dec_ms", "max_dec_ms");
    for (const auto& [name, runs] : groups) {
        std::vector<double> rates;
        double mean_ms = 0.0, max_ms = 0.0;
        for (const auto& [key, r] : runs) {
            rates.push_back(r->acceptance_rate);
            mean_ms += r->mean_decision_ms;
            max_ms = std::max(max_ms, r->max_decision_ms);
        }
        std::printf("%-28s %8zu %12.4f %14.3f %14.3f\n", name.c_str(), runs.size(),
                    mean(rates), mean_ms / runs.size(), max_ms);
    }

    std::printf("\npaired t-tests (two-sided, paired on scenario and rep):\n");
    std::printf("%-28s %-28s %8s %10s %10s\n", "A", "B", "n", "t", "p");
    for (auto ia = groups.begin(); ia != groups.end(); ++ia) {
        for (auto ib = std::next(ia); ib != groups.end(); ++ib) {
            std::vector<double> a, b;
            for (const auto& [key, ra] : ia->second) {
                auto it = ib->second.find(key);
                if (it == ib->second.end()) continue;
                a.push_back(ra->acceptance_rate);
                b.push_back(it->second->acceptance_rate);
            }
            if (a.size() < 2) continue;
            TTestResult t = paired_t_test(a, b);
            std::printf("%-28s %-28s %8d %10.3f %10.5f\n", ia->first.c_str(),
                        ib->first.c_str(), t.n, t.t, t.p);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic vehicle routing with stochastic requests"};
    app.require_subcommand(1);

    // gen-instance
    std::string out = "instance.json", name, depot = "corner", pattern = "UTI";
    int rows = 20, cols = 20, vehicles = 3, scenarios = 5, reps = 1, workers = 1, paths = 50;
    double spacing = 500.0, jitter = 0.0, rate = 0.1, dynamism = 0.75, horizon = 600.0,
           speed_kmh = 20.0, gamma = 0.0;
    uint64_t seed = 1;
    auto* gi = app.add_subcommand("gen-instance", "generate a grid instance file");
    gi->add_option("--out", out)->required();
    gi->add_option("--name", name);
    gi->add_option("--rows", rows);
    gi->add_option("--cols", cols);
    gi->add_option("--spacing", spacing, "grid spacing in meters");
    gi->add_option("--jitter", jitter, "arc length jitter fraction");
    gi->add_option("--depot", depot)->check(CLI::IsMember({"corner", "center"}));
    gi->add_option("--rate", rate, "dynamic request rate per minute");
    gi->add_option("--pattern", pattern)->check(CLI::IsMember({"UTI", "CTI", "CTD"}));
    gi->add_option("--dynamism", dynamism, "expected dynamic share eta");
    gi->add_option("--vehicles", vehicles);
    gi->add_option("--horizon", horizon, "service period in minutes");
    gi->add_option("--speed-kmh", speed_kmh);
    gi->add_option("--seed", seed);

    // gen-scenarios
    std::string instance_path, scen_out = "scenarios.json";
    int scen_count = 5;
    uint64_t scen_seed = 1;
    auto* gs = app.add_subcommand("gen-scenarios", "sample request scenarios for an instance");
    gs->add_option("--instance", instance_path)->required();
    gs->add_option("--scenarios", scen_count);
    gs->add_option("--seed", scen_seed);
    gs->add_option("--out", scen_out);

    // plan
    std::string plan_instance, planner = "potential", plan_out = "plan.json";
    int plan_paths = 50;
    uint64_t plan_seed = 1;
    auto* pl = app.add_subcommand("plan", "compute an offline route plan");
    pl->add_option("--instance", plan_instance)->required();
    pl->add_option("--planner", planner)->check(CLI::IsMember({"myopic", "potential"}));
    pl->add_option("--H", plan_paths, "sample paths for the potential planner");
    pl->add_option("--seed", plan_seed);
    pl->add_option("--out", plan_out);

    // simulate
    std::string sim_instance, sim_plan, sim_out = "results.csv", sim_planner = "potential",
                snapshot_dir, timing = "on";
    std::vector<std::string> sim_policies;
    uint64_t sim_seed = 1;
    auto* sim = app.add_subcommand("simulate", "run policies over sampled scenarios");
    sim->add_option("--instance", sim_instance)->required();
    sim->add_option("--plan", sim_plan, "plan file; omit to plan in-process");
    sim->add_option("--planner", sim_planner)->check(CLI::IsMember({"myopic", "potential"}));
    sim->add_option("--policy", sim_policies, "policy name, repeatable")->required();
    sim->add_option("--scenarios", scenarios);
    sim->add_option("--reps", reps);
    sim->add_option("--seed", sim_seed);
    sim->add_option("--workers", workers, "parallel runs");
    sim->add_option("--H", paths, "sample paths per decision");
    sim->add_option("--gamma", gamma, "PFA weight; 0 = tune offline");
    sim->add_option("--out", sim_out);
    sim->add_option("--timing", timing, "on|off decision wall-time measurement")
        ->check(CLI::IsMember({"on", "off"}));
    sim->add_option("--snapshot-dir", snapshot_dir, "dump state snapshots for the first run");

    // report
    std::string report_in;
    auto* rep = app.add_subcommand("report", "aggregate a results CSV with paired t-tests");
    rep->add_option("--in", report_in)->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (gi->parsed())
            return cmd_gen_instance(out, rows, cols, spacing, jitter, depot, rate, pattern,
                                    dynamism, vehicles, horizon, speed_kmh, seed, name);
        if (gs->parsed()) return cmd_gen_scenarios(instance_path, scen_count, scen_seed, scen_out);
        if (pl->parsed()) return cmd_plan(plan_instance, planner, plan_paths, plan_seed, plan_out);
        if (sim->parsed())
            return cmd_simulate(sim_instance, sim_plan, sim_policies, sim_planner, scenarios,
                                reps, sim_seed, workers, paths, gamma, sim_out, timing == "on",
                                snapshot_dir);
        if (rep->parsed()) return cmd_report(report_in);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
