#pragma once

#include <vector>

#include "dvrpsr/graph.hpp"
#include "dvrpsr/rng.hpp"
#include "dvrpsr/types.hpp"

namespace dvrpsr {

enum class DemandPattern { kUti, kCti, kCtd };

const char* pattern_name(DemandPattern p);
DemandPattern pattern_from_name(const std::string& name);

struct Cluster {
    NodeId center = kInvalidNode;
    double radius_m = 0.0;
    double share = 0.0;  // fraction of the total rate carried by this cluster
};

// Spatiotemporal request distribution. The total rate is constant over time;
// only the split between clusters may drift (CTD).
struct DemandSpec {
    double rate_per_min = 0.0;  // overall arrival rate
    double horizon = 0.0;       // service period end U, minutes
    DemandPattern pattern = DemandPattern::kUti;
    std::vector<Cluster> clusters;  // exactly 2 for CTI/CTD
    double duration_mean = 10.0;
    double duration_stddev = 2.5;
    double duration_floor = 0.5;      // resample durations <= floor
    double static_count_mean = 0.0;   // expected number of static requests

    void validate() const;
};

// Time-ordered realization of the arrival process on an interval (lo, hi].
struct SamplePath {
    double lo = 0.0, hi = 0.0;
    std::vector<Request> requests;
};

// Node-specific arrival rate at instant u; sums to rate_per_min over all
// non-depot nodes for every u.
double node_rate(const DemandSpec& spec, const StreetGraph& graph, NodeId i, double u);

SamplePath sample_path(const DemandSpec& spec, const StreetGraph& graph, double u_lo,
                       double u_hi, Rng& rng, int first_id = 0);

// Static requests: arrival 0, nodes uniform over non-depot nodes.
std::vector<Request> sample_static(const DemandSpec& spec, const StreetGraph& graph, Rng& rng,
                                   int first_id = 0);

double sample_duration(const DemandSpec& spec, Rng& rng);

// Precomputed node groups for categorical node sampling; rebuild only when
// the graph or cluster definitions change.
class NodeSampler {
  public:
    NodeSampler(const DemandSpec& spec, const StreetGraph& graph);

    NodeId draw(double u, Rng& rng) const;
    double rate(NodeId i, double u) const;
    const std::vector<NodeId>& cluster_members(std::size_t c) const { return members_[c]; }

  private:
    // group 0 = all non-depot nodes (uniform mass), groups 1.. = clusters
    std::vector<double> group_mass(double u) const;

    const DemandSpec* spec_;
    std::vector<NodeId> non_depot_;
    std::vector<std::vector<NodeId>> members_;
    std::vector<std::vector<char>> member_flags_;
};

}  // namespace dvrpsr
