#include "xyep/analysis.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace xyep {

namespace {

// Shortest round-trip formatting, locale independent.
std::string fmt(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

}  // namespace

ResponseField response_probe(const Network& net, const Sample& base, int flip_node,
                             double flipped_phase, const RelaxConfig& cfg,
                             std::uint64_t seed, int epoch) {
    if (net.roles.at(flip_node) != NodeRole::Input)
        throw std::invalid_argument("flip node must be an input node");

    Sample flipped = base;
    bool found = false;
    for (auto& [node, phase] : flipped.inputs)
        if (node == flip_node) {
            phase = flipped_phase;
            found = true;
        }
    if (!found) throw std::invalid_argument("flip node is not clamped by the base input");

    // Same seed on both sides: restart r starts from identical phases apart
    // from the flipped input.
    auto base_set = relax_multistart(net, base.inputs, nullptr, 0.0, NudgeMode::Free,
                                     cfg, seed);
    auto flip_set = relax_multistart(net, flipped.inputs, nullptr, 0.0, NudgeMode::Free,
                                     cfg, seed);

    ResponseField field;
    field.epoch = epoch;
    field.flip_node = flip_node;
    field.r.assign(net.node_count(), 0.0);

    for (int r = 0; r < cfg.m_init; ++r) {
        const auto& a = base_set.runs[r];
        const auto& b = flip_set.runs[r];
        if (!a.converged || !b.converged) continue;
        ++field.paired_runs;
        for (int j = 0; j < net.node_count(); ++j) {
            const double dx = std::cos(a.state[j]) - std::cos(b.state[j]);
            const double dy = std::sin(a.state[j]) - std::sin(b.state[j]);
            field.r[j] += dx * dx + dy * dy;
        }
    }
    if (field.paired_runs > 0)
        for (double& v : field.r) v /= field.paired_runs;
    return field;
}

double total_response(const ResponseField& field) {
    double sum = 0.0;
    for (double v : field.r) sum += v;
    return sum;
}

CouplingSnapshot snapshot_couplings(const Network& net, int epoch) {
    CouplingSnapshot snap;
    snap.epoch = epoch;
    snap.weights.reserve(net.coupling_count());
    for (int c = 0; c < net.coupling_count(); ++c)
        snap.weights.push_back(net.coupling_weight(c));
    return snap;
}

std::vector<double> diff_snapshots(const CouplingSnapshot& a, const CouplingSnapshot& b) {
    if (a.weights.size() != b.weights.size())
        throw std::invalid_argument("snapshot topologies differ");
    std::vector<double> d(a.weights.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = b.weights[k] - a.weights[k];
    return d;
}

void write_response_csv(const ResponseField& field, const Network& net,
                        const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "node,layer,channel,x,y,response\n";
    for (int j = 0; j < net.node_count(); ++j) {
        const auto& c = net.coords[j];
        out << j << ',' << c.layer << ',' << c.channel << ',' << c.x << ',' << c.y
            << ',' << fmt(field.r[j]) << '\n';
    }
}

void write_snapshot_csv(const CouplingSnapshot& snap, const Network& net,
                        const std::string& path) {
    if (snap.weights.size() != static_cast<std::size_t>(net.coupling_count()))
        throw std::invalid_argument("snapshot does not match network");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "i,j,layer_i,xi,yi,layer_j,xj,yj,weight\n";
    for (int k = 0; k < net.coupling_count(); ++k) {
        const auto& cp = net.couplings[k];
        const auto& a = net.coords[cp.i];
        const auto& b = net.coords[cp.j];
        out << cp.i << ',' << cp.j << ',' << a.layer << ',' << a.x << ',' << a.y << ','
            << b.layer << ',' << b.x << ',' << b.y << ',' << fmt(snap.weights[k])
            << '\n';
    }
}

}  // namespace xyep
