#pragma once

#include <string>

#include "xyep/graph.hpp"

namespace xyep {

inline constexpr int kNetworkSchemaVersion = 1;

/// Versioned JSON form of a Network (topology + parameters). Serialization
/// is deterministic: the same network always produces identical bytes.
std::string network_to_json(const Network& net, int epoch = -1);

struct LoadedNetwork {
    Network net;
    int epoch = -1;  // epoch stamp carried by checkpoints, -1 if absent
};

LoadedNetwork network_from_json(const std::string& json_text);

void save_network(const Network& net, const std::string& path, int epoch = -1);
LoadedNetwork load_network(const std::string& path);

}  // namespace xyep
