#include "dvrpsr/demand.hpp"

#include <algorithm>
#include <cmath>

namespace dvrpsr {

const char* pattern_name(DemandPattern p) {
    switch (p) {
        case DemandPattern::kUti: return "UTI";
        case DemandPattern::kCti: return "CTI";
        case DemandPattern::kCtd: return "CTD";
    }
    return "?";
}

DemandPattern pattern_from_name(const std::string& name) {
    if (name == "UTI" || name == "uti") return DemandPattern::kUti;
    if (name == "CTI" || name == "cti") return DemandPattern::kCti;
    if (name == "CTD" || name == "ctd") return DemandPattern::kCtd;
    throw Error("unknown demand pattern: " + name);
}

void DemandSpec::validate() const {
    if (rate_per_min <= 0.0) throw Error("demand rate must be positive");
    if (horizon <= 0.0) throw Error("demand horizon must be positive");
    if (duration_mean <= duration_floor || duration_floor < 0.0)
        throw Error("duration law requires mean > floor >= 0");
    if (pattern != DemandPattern::kUti) {
        if (clusters.size() != 2) throw Error("CTI/CTD need exactly two clusters");
        double total = 0.0;
        for (const auto& c : clusters) {
            if (c.share < 0.0 || c.share > 1.0) throw Error("cluster share outside [0,1]");
            total += c.share;
        }
        if (total > 1.0 + 1e-12) throw Error("cluster shares exceed 1");
    }
}

NodeSampler::NodeSampler(const DemandSpec& spec, const StreetGraph& graph) : spec_(&spec) {
    for (NodeId v = 0; v < graph.node_count(); ++v)
        if (v != graph.depot()) non_depot_.push_back(v);
    for (const auto& c : spec.clusters) {
        std::vector<NodeId> m;
        std::vector<char> flags(graph.node_count(), 0);
        double cx = graph.x(c.center), cy = graph.y(c.center);
        for (NodeId v : non_depot_) {
            double dx = graph.x(v) - cx, dy = graph.y(v) - cy;
            if (std::sqrt(dx * dx + dy * dy) <= c.radius_m) {
                m.push_back(v);
                flags[v] = 1;
            }
        }
        if (m.empty()) throw Error("cluster around node " + std::to_string(c.center) +
                                   " has no member nodes");
        members_.push_back(std::move(m));
        member_flags_.push_back(std::move(flags));
    }
}

std::vector<double> NodeSampler::group_mass(double u) const {
    const DemandSpec& s = *spec_;
    std::vector<double> mass(1 + s.clusters.size(), 0.0);
    double clustered = 0.0;
    for (const auto& c : s.clusters) clustered += c.share;
    mass[0] = s.rate_per_min * (1.0 - clustered);
    if (s.clusters.empty()) return mass;
    if (s.pattern == DemandPattern::kCti) {
        for (std::size_t c = 0; c < s.clusters.size(); ++c)
            mass[1 + c] = s.rate_per_min * s.clusters[c].share;
    } else {
        // CTD: the first cluster's share of the clustered mass drops linearly
        // from 0.8 at u = 0 to 0.2 at u = U; the second mirrors it.
        double w = 0.8 - 0.6 * (u / s.horizon);
        mass[1] = s.rate_per_min * clustered * w;
        mass[2] = s.rate_per_min * clustered * (1.0 - w);
    }
    return mass;
}

double NodeSampler::rate(NodeId i, double u) const {
    const DemandSpec& s = *spec_;
    if (u < 0.0 || u > s.horizon) throw Error("instant outside the service period");
    auto mass = group_mass(u);
    double r = mass[0] / static_cast<double>(non_depot_.size());
    for (std::size_t c = 0; c < members_.size(); ++c)
        if (member_flags_[c][i]) r += mass[1 + c] / static_cast<double>(members_[c].size());
    return r;
}

NodeId NodeSampler::draw(double u, Rng& rng) const {
    auto mass = group_mass(u);
    double total = 0.0;
    for (double m : mass) total += m;
    double pick = rng.uniform() * total;
    std::size_t g = 0;
    for (; g + 1 < mass.size(); ++g) {
        if (pick < mass[g]) break;
        pick -= mass[g];
    }
    const std::vector<NodeId>& pool = (g == 0) ? non_depot_ : members_[g - 1];
    return pool[rng.uniform_int(static_cast<int>(pool.size()))];
}

double node_rate(const DemandSpec& spec, const StreetGraph& graph, NodeId i, double u) {
    if (i == graph.depot()) return 0.0;
    return NodeSampler(spec, graph).rate(i, u);
}

double sample_duration(const DemandSpec& spec, Rng& rng) {
    if (spec.duration_stddev == 0.0) return spec.duration_mean;
    double d;
    do {
        d = rng.normal(spec.duration_mean, spec.duration_stddev);
    } while (d <= spec.duration_floor);
    return d;
}

SamplePath sample_path(const DemandSpec& spec, const StreetGraph& graph, double u_lo,
                       double u_hi, Rng& rng, int first_id) {
    if (u_lo > u_hi || u_hi > spec.horizon + 1e-9)
        throw Error("invalid sample interval");
    SamplePath path;
    path.lo = u_lo;
    path.hi = u_hi;
    if (u_hi <= u_lo) return path;

    // Constant total rate: arrival times are i.i.d. uniform order statistics.
    int count = rng.poisson(spec.rate_per_min * (u_hi - u_lo));
    std::vector<double> times(count);
    for (int i = 0; i < count; ++i) times[i] = rng.uniform(u_lo, u_hi);
    std::sort(times.begin(), times.end());
    for (int i = 1; i < count; ++i)  // break exact ties (double collisions)
        if (times[i] <= times[i - 1])
            times[i] = std::nextafter(times[i - 1], std::numeric_limits<double>::infinity());

    NodeSampler sampler(spec, graph);
    path.requests.reserve(count);
    for (int i = 0; i < count; ++i) {
        Request r;
        r.id = first_id + i;
        r.arrival = times[i];
        r.node = sampler.draw(times[i], rng);
        r.duration = sample_duration(spec, rng);
        path.requests.push_back(r);
    }
    return path;
}

std::vector<Request> sample_static(const DemandSpec& spec, const StreetGraph& graph, Rng& rng,
                                   int first_id) {
    std::vector<Request> out;
    if (spec.static_count_mean <= 0.0) return out;
    int count = rng.poisson(spec.static_count_mean);
    std::vector<NodeId> non_depot;
    for (NodeId v = 0; v < graph.node_count(); ++v)
        if (v != graph.depot()) non_depot.push_back(v);
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        Request r;
        r.id = first_id + i;
        r.arrival = 0.0;
        r.node = non_depot[rng.uniform_int(static_cast<int>(non_depot.size()))];
        r.duration = sample_duration(spec, rng);
        out.push_back(r);
    }
    return out;
}

}  // namespace dvrpsr
