#include "dvrpsr/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>

#include "dvrpsr/rng.hpp"
#include "json.hpp"

namespace dvrpsr {

StreetGraph::StreetGraph(int node_count, NodeId depot)
    : out_(node_count), in_(node_count), xs_(node_count, 0.0), ys_(node_count, 0.0),
      depot_(depot) {
    if (depot < 0 || depot >= node_count) throw Error("depot id out of range");
}

void StreetGraph::set_coords(NodeId n, double x, double y) {
    xs_[n] = x;
    ys_[n] = y;
}

void StreetGraph::add_arc(NodeId tail, NodeId head, double length_m) {
    if (length_m <= 0.0)
        throw Error("non-positive arc length on arc " + std::to_string(tail) + "->" +
                    std::to_string(head));
    out_[tail].push_back({head, length_m});
    in_[head].push_back({tail, length_m});
    ++arc_count_;
}

double StreetGraph::arc_length(NodeId tail, NodeId head) const {
    for (const Arc& a : out_[tail])
        if (a.head == head) return a.length_m;
    throw Error("no arc " + std::to_string(tail) + "->" + std::to_string(head));
}

void StreetGraph::check_strongly_connected() const {
    const int n = node_count();
    auto sweep = [&](const std::vector<std::vector<Arc>>& adj) {
        std::vector<char> seen(n, 0);
        std::queue<NodeId> q;
        q.push(depot_);
        seen[depot_] = 1;
        while (!q.empty()) {
            NodeId v = q.front();
            q.pop();
            for (const Arc& a : adj[v])
                if (!seen[a.head]) {
                    seen[a.head] = 1;
                    q.push(a.head);
                }
        }
        return seen;
    };
    auto fwd = sweep(out_);
    for (NodeId v = 0; v < n; ++v)
        if (!fwd[v]) throw Error("node " + std::to_string(v) + " not reachable from depot");
    auto bwd = sweep(in_);
    for (NodeId v = 0; v < n; ++v)
        if (!bwd[v]) throw Error("node " + std::to_string(v) + " cannot reach depot");
}

StreetGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open graph file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("graph parse error in " + path + ": " + e.what());
    }
    if (!j.contains("nodes") || !j.contains("arcs") || !j.contains("depot"))
        throw Error("graph file missing nodes/arcs/depot: " + path);

    const auto& nodes = j["nodes"];
    const int n = static_cast<int>(nodes.size());
    std::vector<char> present(n, 0);
    StreetGraph g(n, j["depot"].get<NodeId>());
    for (const auto& nd : nodes) {
        NodeId id = nd.at("id").get<NodeId>();
        if (id < 0 || id >= n) throw Error("node ids not dense in [0, V): id " + std::to_string(id));
        if (present[id]) throw Error("duplicate node id " + std::to_string(id));
        present[id] = 1;
        g.set_coords(id, nd.at("x").get<double>(), nd.at("y").get<double>());
    }
    for (const auto& arc : j["arcs"]) {
        NodeId from = arc.at("from").get<NodeId>();
        NodeId to = arc.at("to").get<NodeId>();
        if (from < 0 || from >= n || to < 0 || to >= n)
            throw Error("arc endpoint out of range");
        g.add_arc(from, to, arc.at("len_m").get<double>());
    }
    g.check_strongly_connected();
    return g;
}

void save_graph(const StreetGraph& g, const std::string& path) {
    nlohmann::json j;
    j["depot"] = g.depot();
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (NodeId v = 0; v < g.node_count(); ++v)
        nodes.push_back({{"id", v}, {"x", g.x(v)}, {"y", g.y(v)}});
    auto& arcs = j["arcs"] = nlohmann::json::array();
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (const auto& a : g.out_arcs(v))
            arcs.push_back({{"from", v}, {"to", a.head}, {"len_m", a.length_m}});
    std::ofstream out(path);
    if (!out) throw Error("cannot write graph file: " + path);
    out << j.dump(1) << "\n";
}

StreetGraph generate_grid(const GridSpec& spec) {
    if (spec.rows < 2 || spec.cols < 2) throw Error("grid needs rows, cols >= 2");
    const int n = spec.rows * spec.cols;
    NodeId depot = 0;
    if (spec.depot == DepotPlacement::kCenter)
        depot = (spec.rows / 2) * spec.cols + spec.cols / 2;
    StreetGraph g(n, depot);
    auto id = [&](int r, int c) { return r * spec.cols + c; };
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c)
            g.set_coords(id(r, c), c * spec.spacing_m, r * spec.spacing_m);
    Rng rng(spec.seed);
    auto edge = [&](NodeId a, NodeId b) {
        double len = spec.spacing_m;
        if (spec.jitter_frac > 0.0)
            len *= 1.0 + spec.jitter_frac * (2.0 * rng.uniform() - 1.0);
        g.add_arc(a, b, len);
        g.add_arc(b, a, len);
    };
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) {
            if (c + 1 < spec.cols) edge(id(r, c), id(r, c + 1));
            if (r + 1 < spec.rows) edge(id(r, c), id(r + 1, c));
        }
    return g;
}

TravelTimeOracle::TravelTimeOracle(const StreetGraph& g, double speed_m_per_min,
                                   std::size_t cache_capacity)
    : graph_(&g), speed_(speed_m_per_min) {
    if (speed_ <= 0.0) throw Error("vehicle speed must be positive");
    fwd_.capacity = cache_capacity;
    rev_.capacity = cache_capacity;
}

std::shared_ptr<const SsspTree> TravelTimeOracle::run_dijkstra(NodeId source, bool reverse) const {
    const int n = graph_->node_count();
    auto tree = std::make_shared<SsspTree>();
    tree->source = source;
    tree->dist_min.assign(n, std::numeric_limits<double>::infinity());
    tree->parent.assign(n, kInvalidNode);
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    tree->dist_min[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > tree->dist_min[v]) continue;
        const auto& adj = reverse ? graph_->in_arcs(v) : graph_->out_arcs(v);
        for (const auto& a : adj) {
            double nd = d + a.length_m / speed_;
            if (nd < tree->dist_min[a.head]) {
                tree->dist_min[a.head] = nd;
                tree->parent[a.head] = v;
                heap.push({nd, a.head});
            }
        }
    }
    return tree;
}

std::shared_ptr<const SsspTree> TravelTimeOracle::lookup(Cache& cache, NodeId key,
                                                         bool reverse) const {
    if (cache.capacity == 0) return run_dijkstra(key, reverse);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache.map.find(key);
        if (it != cache.map.end()) {
            cache.order.splice(cache.order.begin(), cache.order, it->second.first);
            return it->second.second;
        }
    }
    auto tree = run_dijkstra(key, reverse);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache.map.find(key);
    if (it != cache.map.end()) return it->second.second;  // raced; keep first
    cache.order.push_front(key);
    cache.map.emplace(key, std::make_pair(cache.order.begin(), tree));
    if (cache.map.size() > cache.capacity) {
        cache.map.erase(cache.order.back());
        cache.order.pop_back();
    }
    return tree;
}

std::shared_ptr<const SsspTree> TravelTimeOracle::tree_from(NodeId source) const {
    return lookup(fwd_, source, false);
}

std::shared_ptr<const SsspTree> TravelTimeOracle::tree_to(NodeId sink) const {
    return lookup(rev_, sink, true);
}

double TravelTimeOracle::travel_time(NodeId i, NodeId j) const {
    if (i == j) return 0.0;
    return tree_from(i)->dist_min[j];
}

std::vector<NodeId> TravelTimeOracle::fastest_path(NodeId i, NodeId j) const {
    std::vector<NodeId> path;
    if (i == j) {
        path.push_back(i);
        return path;
    }
    auto tree = tree_from(i);
    for (NodeId v = j; v != kInvalidNode; v = tree->parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace dvrpsr
