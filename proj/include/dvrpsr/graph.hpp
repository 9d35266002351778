#pragma once

#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "dvrpsr/types.hpp"

namespace dvrpsr {

// Street network: strongly connected digraph with positive arc lengths.
// Node ids are dense in [0, V); coordinates are used only for instance
// generation and plotting, never for routing.
class StreetGraph {
  public:
    struct Arc {
        NodeId head;
        double length_m;
    };

    StreetGraph() = default;
    StreetGraph(int node_count, NodeId depot);

    void set_coords(NodeId n, double x, double y);
    void add_arc(NodeId tail, NodeId head, double length_m);

    int node_count() const { return static_cast<int>(out_.size()); }
    NodeId depot() const { return depot_; }
    double x(NodeId n) const { return xs_[n]; }
    double y(NodeId n) const { return ys_[n]; }
    const std::vector<Arc>& out_arcs(NodeId n) const { return out_[n]; }
    const std::vector<Arc>& in_arcs(NodeId n) const { return in_[n]; }
    int arc_count() const { return arc_count_; }

    // Length of the arc (tail, head); throws if no such arc exists.
    double arc_length(NodeId tail, NodeId head) const;

    // Throws Error naming the offending node if some node cannot reach or
    // be reached from the depot.
    void check_strongly_connected() const;

  private:
    std::vector<std::vector<Arc>> out_;
    std::vector<std::vector<Arc>> in_;
    std::vector<double> xs_, ys_;
    NodeId depot_ = 0;
    int arc_count_ = 0;
};

StreetGraph load_graph(const std::string& path);
void save_graph(const StreetGraph& g, const std::string& path);

enum class DepotPlacement { kCorner, kCenter };

struct GridSpec {
    int rows = 2;
    int cols = 2;
    double spacing_m = 500.0;
    double jitter_frac = 0.0;  // per-edge symmetric length jitter, e.g. 0.1 for +-10%
    DepotPlacement depot = DepotPlacement::kCorner;
    uint64_t seed = 0;
};

StreetGraph generate_grid(const GridSpec& spec);

// Single-source shortest path tree in minutes.
struct SsspTree {
    NodeId source = kInvalidNode;
    std::vector<double> dist_min;  // travel time from/to the source
    std::vector<NodeId> parent;    // predecessor on fastest path (forward trees)
                                   // or successor toward the sink (reverse trees)
};

// Fastest-path travel times at constant vehicle speed, with an LRU cache of
// full Dijkstra trees per query source (and, for reverse queries, per sink).
// Read-only after construction; queries are internally synchronized and
// return the same values as a serial execution.
class TravelTimeOracle {
  public:
    TravelTimeOracle(const StreetGraph& g, double speed_m_per_min,
                     std::size_t cache_capacity = 1024);

    double speed() const { return speed_; }
    const StreetGraph& graph() const { return *graph_; }

    // Minutes along a fastest path; t(i,i) = 0.
    double travel_time(NodeId i, NodeId j) const;

    // Arc travel time (tail, head) must be an arc of the graph.
    double arc_time(NodeId tail, NodeId head) const {
        return graph_->arc_length(tail, head) / speed_;
    }

    // Node sequence realizing travel_time(i, j); first i, last j.
    std::vector<NodeId> fastest_path(NodeId i, NodeId j) const;

    // Bulk access: full tree of times from `source` to every node.
    std::shared_ptr<const SsspTree> tree_from(NodeId source) const;
    // Full tree of times from every node to `sink`.
    std::shared_ptr<const SsspTree> tree_to(NodeId sink) const;

  private:
    struct Cache {
        std::size_t capacity;
        std::list<NodeId> order;  // most recent first
        std::unordered_map<NodeId, std::pair<std::list<NodeId>::iterator,
                                             std::shared_ptr<const SsspTree>>> map;
    };

    std::shared_ptr<const SsspTree> lookup(Cache& cache, NodeId key, bool reverse) const;
    std::shared_ptr<const SsspTree> run_dijkstra(NodeId source, bool reverse) const;

    const StreetGraph* graph_;
    double speed_;
    mutable std::mutex mutex_;
    mutable Cache fwd_;
    mutable Cache rev_;
};

}  // namespace dvrpsr
