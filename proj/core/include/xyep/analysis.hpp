#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xyep/ep.hpp"

namespace xyep {

/// Per-node squared spin displacement caused by flipping one input,
/// averaged over restart pairs. Each entry lies in [0, 4].
struct ResponseField {
    std::vector<double> r;
    int epoch = -1;
    int flip_node = -1;
    int paired_runs = 0;  // restart pairs where both relaxations converged
};

struct CouplingSnapshot {
    int epoch = -1;
    std::vector<double> weights;  // one per coupling, in coupling order
};

/// Relaxes the network with the base input and with `flip_node` clamped to
/// `flipped_phase` instead, sharing initial conditions per restart index,
/// and averages |S_base - S_flipped|^2 per node over the converged pairs.
ResponseField response_probe(const Network& net, const Sample& base,
                             int flip_node, double flipped_phase,
                             const RelaxConfig& cfg, std::uint64_t seed,
                             int epoch = -1);

double total_response(const ResponseField& field);

CouplingSnapshot snapshot_couplings(const Network& net, int epoch);

/// b - a per coupling; throws on coupling-count mismatch.
std::vector<double> diff_snapshots(const CouplingSnapshot& a, const CouplingSnapshot& b);

/// CSV: node, layer, channel, x, y, response
void write_response_csv(const ResponseField& field, const Network& net,
                        const std::string& path);

/// CSV: i, j, layer_i, xi, yi, layer_j, xj, yj, weight
void write_snapshot_csv(const CouplingSnapshot& snap, const Network& net,
                        const std::string& path);

}  // namespace xyep
