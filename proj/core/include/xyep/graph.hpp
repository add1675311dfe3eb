#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace xyep {

enum class NodeRole : std::uint8_t { Input = 0, Hidden = 1, Output = 2 };

/// Position of a node. Flat lattices use (x, y) with layer = channel = 0;
/// layered networks use all four fields. For 1-D layers y stays 0.
struct NodeCoord {
    int layer = 0;
    int channel = 0;
    int x = 0;
    int y = 0;

    bool operator==(const NodeCoord&) const = default;
};

/// Undirected coupling between nodes i < j. The weight lives in
/// Network::weights[weight_index]; couplings in the same share group point at
/// the same slot, so shared weights are equal by construction.
struct Coupling {
    int i = 0;
    int j = 0;
    int weight_index = 0;
    int group = -1;  // -1: unshared
};

class Network {
public:
    std::vector<NodeRole> roles;
    std::vector<NodeCoord> coords;
    std::vector<Coupling> couplings;
    std::vector<double> weights;  // one entry per distinct weight slot
    std::vector<double> bias_a;   // per-node Cartesian bias, a_i cos(phi) + b_i sin(phi)
    std::vector<double> bias_b;

    int node_count() const { return static_cast<int>(roles.size()); }
    int coupling_count() const { return static_cast<int>(couplings.size()); }

    /// Trainable parameter count: weight slots + both bias components.
    int parameter_count() const {
        return static_cast<int>(weights.size()) + 2 * node_count();
    }

    double coupling_weight(int c) const { return weights[couplings[c].weight_index]; }

    /// Polar view of the bias field: (h, psi) with h cos(phi - psi).
    std::pair<double, double> bias_polar(int node) const;

    std::vector<int> nodes_with_role(NodeRole role) const;
    std::vector<int> input_nodes() const { return nodes_with_role(NodeRole::Input); }
    std::vector<int> output_nodes() const { return nodes_with_role(NodeRole::Output); }

    /// Share groups reconstructed from coupling group ids: group -> member
    /// coupling indices.
    std::map<int, std::vector<int>> share_groups() const;

    /// Node id at a flat lattice coordinate; throws if absent.
    int node_at(int x, int y) const;

    void set_role(int node, NodeRole role) { roles.at(node) = role; }

    /// Flattened parameter vector [weights..., bias_a..., bias_b...].
    std::vector<double> parameters() const;
    void set_parameters(const std::vector<double>& theta);
    /// theta -= eta * grad, applied through the shared-slot layout.
    void apply_gradient(const std::vector<double>& grad, double learning_rate);
};

/// Shell presets from least to most connected. Values are squared lattice
/// distances: SQ couples nearest neighbours only, 3NSQ adds diagonals, P3NSQ
/// adds straight skips of length 2, 4NSQ additionally couples knight-move
/// neighbours.
std::set<int> shell_preset(const std::string& name);

Network build_lattice(int rows, int cols, const std::set<int>& shells);
Network build_all_to_all(int n);
Network build_dense_layered(const std::vector<int>& layer_sizes);

struct LclSpec {
    int input_rows = 28;
    int input_cols = 28;
    int window = 6;
    int stride = 1;
    int channels = 1;
    bool weight_shared = false;
    std::set<int> intra_shells;  // empty: no intra-layer couplings
    int output_size = 10;
};

/// Stacked-lattice network: a grid input layer, one hidden layer of
/// `channels` lattices coupled to the input through a sliding window, and a
/// dense output layer. With weight_shared, couplings at the same window
/// offset within a channel collapse to one trainable weight.
Network build_lcl(const LclSpec& spec);

/// Draws all weight slots i.i.d. uniform on [-scale, scale] from a seeded
/// generator and zeroes the bias fields.
void init_parameters(Network& net, std::uint64_t seed, double coupling_scale);

}  // namespace xyep
