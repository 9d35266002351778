#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

// Canonical units across the whole library: minutes, meters, meters/minute.
// File inputs in other units (e.g. km/h) are converted on load.

namespace dvrpsr {

using NodeId = int;

constexpr NodeId kInvalidNode = -1;

inline double kmh_to_m_per_min(double kmh) { return kmh * 1000.0 / 60.0; }

// A customer request: arrival time, customer node and service duration.
struct Request {
    int id = -1;
    double arrival = 0.0;  // minutes
    NodeId node = kInvalidNode;
    double duration = 0.0;  // minutes, > 0
};

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dvrpsr
