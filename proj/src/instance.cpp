#include "dvrpsr/instance.hpp"

#include <fstream>
#include <map>

#include "dvrpsr/log.hpp"
#include "dvrpsr/planner.hpp"
#include "dvrpsr/rng.hpp"
#include "json.hpp"

namespace dvrpsr {

namespace {

constexpr uint64_t kSaltStatics = 0x57415443u;
constexpr uint64_t kSaltScenario = 0xD15C0u;

using nlohmann::json;

json request_to_json(const Request& r) {
    return {{"id", r.id}, {"arrival", r.arrival}, {"node", r.node}, {"duration", r.duration}};
}

Request request_from_json(const json& j) {
    Request r;
    r.id = j.at("id").get<int>();
    r.arrival = j.at("arrival").get<double>();
    r.node = j.at("node").get<NodeId>();
    r.duration = j.at("duration").get<double>();
    return r;
}

DemandSpec demand_from_json(const json& j, double horizon) {
    DemandSpec d;
    d.rate_per_min = j.at("rate_per_min").get<double>();
    d.horizon = horizon;
    d.pattern = pattern_from_name(j.value("pattern", "UTI"));
    if (j.contains("clusters"))
        for (const auto& c : j["clusters"])
            d.clusters.push_back({c.at("center").get<NodeId>(), c.at("radius_m").get<double>(),
                                  c.at("share").get<double>()});
    d.duration_mean = j.value("duration_mean_min", 10.0);
    d.duration_stddev = j.value("duration_stddev_min", 2.5);
    d.duration_floor = j.value("duration_floor_min", 0.5);
    if (j.contains("static_count")) {
        d.static_count_mean = j["static_count"].get<double>();
    } else {
        // |S| = E[T] (1 - eta) / eta with E[T] = rate * U.
        double eta = j.value("dynamism", 0.75);
        if (eta <= 0.0 || eta > 1.0) throw Error("dynamism must lie in (0, 1]");
        d.static_count_mean = d.rate_per_min * horizon * (1.0 - eta) / eta;
    }
    d.validate();
    return d;
}

json demand_to_json(const DemandSpec& d) {
    json j;
    j["rate_per_min"] = d.rate_per_min;
    j["pattern"] = pattern_name(d.pattern);
    auto& cl = j["clusters"] = json::array();
    for (const auto& c : d.clusters)
        cl.push_back({{"center", c.center}, {"radius_m", c.radius_m}, {"share", c.share}});
    j["duration_mean_min"] = d.duration_mean;
    j["duration_stddev_min"] = d.duration_stddev;
    j["duration_floor_min"] = d.duration_floor;
    j["static_count"] = d.static_count_mean;
    return j;
}

}  // namespace

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open instance file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("instance parse error in " + path + ": " + e.what());
    }
    Instance inst;
    inst.name = j.value("name", "instance");
    inst.horizon = j.value("horizon_min", 600.0);
    inst.speed = kmh_to_m_per_min(j.value("speed_kmh", 20.0));
    inst.vehicles = j.value("vehicles", 2);
    inst.seed = j.value("seed", 0ull);
    inst.cache_capacity = j.value("cache_capacity", 1024u);
    if (inst.vehicles < 1) throw Error("instance needs at least one vehicle");
    const auto& g = j.at("graph");
    if (g.contains("file")) {
        std::string gpath = g["file"].get<std::string>();
        if (!gpath.empty() && gpath[0] != '/') {
            auto slash = path.find_last_of('/');
            if (slash != std::string::npos) gpath = path.substr(0, slash + 1) + gpath;
        }
        inst.graph = load_graph(gpath);
    } else if (g.contains("grid")) {
        const auto& spec = g["grid"];
        GridSpec grid;
        grid.rows = spec.at("rows").get<int>();
        grid.cols = spec.at("cols").get<int>();
        grid.spacing_m = spec.value("spacing_m", 500.0);
        grid.jitter_frac = spec.value("jitter", 0.0);
        grid.depot = spec.value("depot", "corner") == std::string("center")
                         ? DepotPlacement::kCenter
                         : DepotPlacement::kCorner;
        grid.seed = spec.value("seed", inst.seed);
        inst.graph = generate_grid(grid);
    } else {
        throw Error("instance graph must name a file or a grid spec");
    }
    inst.demand = demand_from_json(j.at("demand"), inst.horizon);
    return inst;
}

void save_instance(const Instance& instance, const std::string& path) {
    // The graph is materialized next to the instance to keep the file pair
    // self-contained.
    std::string gpath = path + ".graph.json";
    save_graph(instance.graph, gpath);
    json j;
    j["name"] = instance.name;
    j["horizon_min"] = instance.horizon;
    j["speed_kmh"] = instance.speed * 60.0 / 1000.0;
    j["vehicles"] = instance.vehicles;
    j["seed"] = instance.seed;
    auto slash = gpath.find_last_of('/');
    j["graph"] = {{"file", slash == std::string::npos ? gpath : gpath.substr(slash + 1)}};
    j["demand"] = demand_to_json(instance.demand);
    std::ofstream out(path);
    if (!out) throw Error("cannot write instance file: " + path);
    out << j.dump(1) << "\n";
}

std::vector<Request> instance_statics(const Instance& instance) {
    Rng rng(mix_seed(instance.seed, kSaltStatics));
    return sample_static(instance.demand, instance.graph, rng);
}

Scenario make_scenario(const Instance& instance, const std::vector<Request>& statics, int index,
                       uint64_t experiment_seed) {
    Scenario s;
    s.index = index;
    s.seed = mix_seed(experiment_seed, kSaltScenario, static_cast<uint64_t>(index));
    s.statics = statics;
    Rng rng(s.seed);
    s.dynamics = sample_path(instance.demand, instance.graph, 0.0, instance.horizon, rng,
                             static_cast<int>(statics.size()))
                     .requests;
    return s;
}

void save_scenarios(const std::vector<Scenario>& scenarios, const std::string& path) {
    json arr = json::array();
    for (const Scenario& s : scenarios) {
        json j;
        j["index"] = s.index;
        j["seed"] = s.seed;
        auto& st = j["static"] = json::array();
        for (const Request& r : s.statics) st.push_back(request_to_json(r));
        auto& dy = j["dynamic"] = json::array();
        for (const Request& r : s.dynamics) dy.push_back(request_to_json(r));
        arr.push_back(std::move(j));
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write scenarios file: " + path);
    out << arr.dump(1) << "\n";
}

std::vector<Scenario> load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenarios file: " + path);
    json arr;
    in >> arr;
    std::vector<Scenario> out;
    for (const auto& j : arr) {
        Scenario s;
        s.index = j.at("index").get<int>();
        s.seed = j.value("seed", 0ull);
        for (const auto& r : j.at("static")) s.statics.push_back(request_from_json(r));
        double last = -1.0;
        for (const auto& r : j.at("dynamic")) {
            Request req = request_from_json(r);
            if (req.arrival <= last) {  // equal-time collisions from file input
                req.arrival = std::nextafter(last, std::numeric_limits<double>::infinity());
                log::warn("perturbed duplicate arrival of request %d", req.id);
            }
            last = req.arrival;
            s.dynamics.push_back(req);
        }
        out.push_back(std::move(s));
    }
    return out;
}

void save_plan(const Plan& plan, const std::string& path) {
    json j;
    auto& routes = j["routes"] = json::array();
    for (std::size_t k = 0; k < plan.routes.size(); ++k) {
        json r;
        r["vehicle"] = k;
        auto& stops = r["stops"] = json::array();
        for (const Stop& s : plan.routes[k].stops) {
            json st;
            st["node"] = s.node;
            auto& serve = st["serve"] = json::array();
            for (const Request& q : s.serve) serve.push_back(q.id);
            stops.push_back(std::move(st));
        }
        routes.push_back(std::move(r));
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write plan file: " + path);
    out << j.dump(1) << "\n";
}

Plan load_plan(const std::string& path, std::span<const Request> statics,
               const TravelTimeOracle& oracle) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open plan file: " + path);
    json j;
    in >> j;
    std::map<int, Request> by_id;
    for (const Request& r : statics) by_id[r.id] = r;
    Plan plan;
    for (const auto& r : j.at("routes")) {
        Route route;
        for (const auto& st : r.at("stops")) {
            Stop stop;
            stop.node = st.at("node").get<NodeId>();
            for (const auto& id : st.at("serve")) {
                auto it = by_id.find(id.get<int>());
                if (it == by_id.end())
                    throw Error("plan references unknown request " + id.dump());
                stop.serve.push_back(it->second);
            }
            route.stops.push_back(std::move(stop));
        }
        validate_route(route, oracle.graph());
        plan.routes.push_back(std::move(route));
    }
    return plan;
}

}  // namespace dvrpsr
