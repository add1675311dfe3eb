#include "xyep/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xyep/rng.hpp"

namespace xyep {

std::pair<double, double> Network::bias_polar(int node) const {
    const double a = bias_a.at(node);
    const double b = bias_b.at(node);
    return {std::hypot(a, b), std::atan2(b, a)};
}

std::vector<int> Network::nodes_with_role(NodeRole role) const {
    std::vector<int> out;
    for (int i = 0; i < node_count(); ++i)
        if (roles[i] == role) out.push_back(i);
    return out;
}

std::map<int, std::vector<int>> Network::share_groups() const {
    std::map<int, std::vector<int>> groups;
    for (int c = 0; c < coupling_count(); ++c)
        if (couplings[c].group >= 0) groups[couplings[c].group].push_back(c);
    return groups;
}

int Network::node_at(int x, int y) const {
    for (int i = 0; i < node_count(); ++i)
        if (coords[i].layer == 0 && coords[i].channel == 0 && coords[i].x == x &&
            coords[i].y == y)
            return i;
    throw std::out_of_range("no node at requested lattice coordinate");
}

std::vector<double> Network::parameters() const {
    std::vector<double> theta;
    theta.reserve(parameter_count());
    theta.insert(theta.end(), weights.begin(), weights.end());
    theta.insert(theta.end(), bias_a.begin(), bias_a.end());
    theta.insert(theta.end(), bias_b.begin(), bias_b.end());
    return theta;
}

void Network::set_parameters(const std::vector<double>& theta) {
    if (static_cast<int>(theta.size()) != parameter_count())
        throw std::invalid_argument("parameter vector length mismatch");
    const int nw = static_cast<int>(weights.size());
    const int n = node_count();
    std::copy_n(theta.begin(), nw, weights.begin());
    std::copy_n(theta.begin() + nw, n, bias_a.begin());
    std::copy_n(theta.begin() + nw + n, n, bias_b.begin());
}

void Network::apply_gradient(const std::vector<double>& grad, double learning_rate) {
    if (static_cast<int>(grad.size()) != parameter_count())
        throw std::invalid_argument("gradient length mismatch");
    const int nw = static_cast<int>(weights.size());
    const int n = node_count();
    for (int k = 0; k < nw; ++k) weights[k] -= learning_rate * grad[k];
    for (int i = 0; i < n; ++i) bias_a[i] -= learning_rate * grad[nw + i];
    for (int i = 0; i < n; ++i) bias_b[i] -= learning_rate * grad[nw + n + i];
}

std::set<int> shell_preset(const std::string& name) {
    if (name == "SQ") return {1};
    if (name == "3NSQ") return {1, 2};
    if (name == "P3NSQ") return {1, 2, 4};
    if (name == "4NSQ") return {1, 2, 4, 5};
    throw std::invalid_argument("unknown shell preset: " + name);
}

namespace {

// Fresh unshared weight slot.
int add_coupling(Network& net, int i, int j) {
    if (i == j) throw std::logic_error("self-coupling");
    if (i > j) std::swap(i, j);
    const int widx = static_cast<int>(net.weights.size());
    net.weights.push_back(0.0);
    net.couplings.push_back({i, j, widx, -1});
    return widx;
}

void finish_nodes(Network& net, int n) {
    net.roles.assign(n, NodeRole::Hidden);
    net.bias_a.assign(n, 0.0);
    net.bias_b.assign(n, 0.0);
}

}  // namespace

Network build_lattice(int rows, int cols, const std::set<int>& shells) {
    if (rows < 2 || cols < 2) throw std::invalid_argument("lattice dimensions must be >= 2");
    if (shells.empty()) throw std::invalid_argument("shell set must be nonempty");

    Network net;
    const int n = rows * cols;
    finish_nodes(net, n);
    net.coords.resize(n);
    for (int x = 0; x < rows; ++x)
        for (int y = 0; y < cols; ++y) net.coords[x * cols + y] = {0, 0, x, y};

    // Offsets with dx^2 + dy^2 in the shell set; (dx, dy) > (0,0) lexicographically
    // so each unordered pair is visited once.
    const int rmax = static_cast<int>(std::sqrt(static_cast<double>(*shells.rbegin()))) + 1;
    std::vector<std::pair<int, int>> offsets;
    for (int dx = 0; dx <= rmax; ++dx)
        for (int dy = -rmax; dy <= rmax; ++dy) {
            if (dx == 0 && dy <= 0) continue;
            if (shells.count(dx * dx + dy * dy)) offsets.emplace_back(dx, dy);
        }

    for (int x = 0; x < rows; ++x)
        for (int y = 0; y < cols; ++y)
            for (auto [dx, dy] : offsets) {
                const int xx = x + dx, yy = y + dy;
                if (xx < 0 || xx >= rows || yy < 0 || yy >= cols) continue;
                add_coupling(net, x * cols + y, xx * cols + yy);
            }
    return net;
}

Network build_all_to_all(int n) {
    if (n < 2) throw std::invalid_argument("all-to-all needs n >= 2");
    Network net;
    finish_nodes(net, n);
    net.coords.resize(n);
    for (int i = 0; i < n; ++i) net.coords[i] = {0, 0, i, 0};
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) add_coupling(net, i, j);
    return net;
}

Network build_dense_layered(const std::vector<int>& layer_sizes) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("need at least 2 layers");
    for (int s : layer_sizes)
        if (s < 1) throw std::invalid_argument("layer sizes must be >= 1");

    Network net;
    int n = 0;
    for (int s : layer_sizes) n += s;
    finish_nodes(net, n);
    net.coords.resize(n);

    std::vector<int> layer_start(layer_sizes.size());
    int base = 0;
    for (std::size_t l = 0; l < layer_sizes.size(); ++l) {
        layer_start[l] = base;
        for (int k = 0; k < layer_sizes[l]; ++k)
            net.coords[base + k] = {static_cast<int>(l), 0, k, 0};
        base += layer_sizes[l];
    }
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
        for (int a = 0; a < layer_sizes[l]; ++a)
            for (int b = 0; b < layer_sizes[l + 1]; ++b)
                add_coupling(net, layer_start[l] + a, layer_start[l + 1] + b);

    for (int k = 0; k < layer_sizes.front(); ++k) net.roles[k] = NodeRole::Input;
    for (int k = 0; k < layer_sizes.back(); ++k)
        net.roles[layer_start.back() + k] = NodeRole::Output;
    return net;
}

Network build_lcl(const LclSpec& spec) {
    if (spec.window < 1 || spec.stride < 1 || spec.channels < 1)
        throw std::invalid_argument("window, stride and channels must be >= 1");
    if (spec.window > spec.input_rows || spec.window > spec.input_cols)
        throw std::invalid_argument("window larger than input extent");
    const int hr = (spec.input_rows - spec.window) / spec.stride + 1;
    const int hc = (spec.input_cols - spec.window) / spec.stride + 1;
    if (hr < 1 || hc < 1) throw std::invalid_argument("stride produces empty hidden layer");
    if (spec.output_size < 1) throw std::invalid_argument("output size must be >= 1");

    Network net;
    const int n_in = spec.input_rows * spec.input_cols;
    const int n_hidden = hr * hc * spec.channels;
    const int n = n_in + n_hidden + spec.output_size;
    finish_nodes(net, n);
    net.coords.resize(n);

    for (int x = 0; x < spec.input_rows; ++x)
        for (int y = 0; y < spec.input_cols; ++y) {
            net.coords[x * spec.input_cols + y] = {0, 0, x, y};
            net.roles[x * spec.input_cols + y] = NodeRole::Input;
        }
    auto hidden_id = [&](int ch, int x, int y) {
        return n_in + (ch * hr + x) * hc + y;
    };
    for (int ch = 0; ch < spec.channels; ++ch)
        for (int x = 0; x < hr; ++x)
            for (int y = 0; y < hc; ++y) net.coords[hidden_id(ch, x, y)] = {1, ch, x, y};
    const int out_base = n_in + n_hidden;
    for (int k = 0; k < spec.output_size; ++k) {
        net.coords[out_base + k] = {2, 0, k, 0};
        net.roles[out_base + k] = NodeRole::Output;
    }

    // Window couplings. With weight sharing, one slot per (channel, offset).
    int next_group = 0;
    for (int ch = 0; ch < spec.channels; ++ch) {
        std::vector<int> shared_slot(spec.window * spec.window, -1);
        std::vector<int> shared_group(spec.window * spec.window, -1);
        for (int x = 0; x < hr; ++x)
            for (int y = 0; y < hc; ++y)
                for (int wx = 0; wx < spec.window; ++wx)
                    for (int wy = 0; wy < spec.window; ++wy) {
                        const int ix = x * spec.stride + wx;
                        const int iy = y * spec.stride + wy;
                        const int in_id = ix * spec.input_cols + iy;
                        const int hid = hidden_id(ch, x, y);
                        if (!spec.weight_shared) {
                            add_coupling(net, in_id, hid);
                            continue;
                        }
                        const int off = wx * spec.window + wy;
                        if (shared_slot[off] < 0) {
                            shared_slot[off] = static_cast<int>(net.weights.size());
                            net.weights.push_back(0.0);
                            shared_group[off] = next_group++;
                        }
                        int i = in_id, j = hid;
                        if (i > j) std::swap(i, j);
                        net.couplings.push_back({i, j, shared_slot[off], shared_group[off]});
                    }
    }

    // Optional intra-layer lattice couplings within each hidden channel.
    if (!spec.intra_shells.empty() && hr >= 2 && hc >= 2) {
        const int rmax =
            static_cast<int>(std::sqrt(static_cast<double>(*spec.intra_shells.rbegin()))) + 1;
        for (int ch = 0; ch < spec.channels; ++ch)
            for (int x = 0; x < hr; ++x)
                for (int y = 0; y < hc; ++y)
                    for (int dx = 0; dx <= rmax; ++dx)
                        for (int dy = -rmax; dy <= rmax; ++dy) {
                            if (dx == 0 && dy <= 0) continue;
                            if (!spec.intra_shells.count(dx * dx + dy * dy)) continue;
                            const int xx = x + dx, yy = y + dy;
                            if (xx < 0 || xx >= hr || yy < 0 || yy >= hc) continue;
                            add_coupling(net, hidden_id(ch, x, y), hidden_id(ch, xx, yy));
                        }
    }

    // Dense output couplings over all channels.
    for (int k = 0; k < spec.output_size; ++k)
        for (int h = 0; h < n_hidden; ++h) add_coupling(net, n_in + h, out_base + k);

    return net;
}

void init_parameters(Network& net, std::uint64_t seed, double coupling_scale) {
    if (coupling_scale <= 0) throw std::invalid_argument("coupling scale must be > 0");
    Rng rng(mix_seed(seed, 0x778a));
    for (auto& w : net.weights) w = rng.uniform(-coupling_scale, coupling_scale);
    std::fill(net.bias_a.begin(), net.bias_a.end(), 0.0);
    std::fill(net.bias_b.begin(), net.bias_b.end(), 0.0);
}

}  // namespace xyep
