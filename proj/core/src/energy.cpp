#include "xyep/energy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace xyep {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_state(const Network& net, const State& s) {
    if (static_cast<int>(s.size()) != net.node_count())
        throw std::invalid_argument("state length does not match node count");
}

// Gradient magnitude of the clamped cost at the clamp boundary.
const double kMaxCostGrad =
    std::sqrt(kCostClampEps * (2.0 - kCostClampEps)) / kCostClampEps;

double clamped_cost_grad(double delta) {
    const double denom = 1.0 + std::cos(delta);
    double g = std::sin(delta) / std::max(denom, kCostClampEps);
    if (g > kMaxCostGrad) g = kMaxCostGrad;
    if (g < -kMaxCostGrad) g = -kMaxCostGrad;
    return g;
}

// Largest internal force the couplings and bias can exert on `node`. A
// constant nudge beyond this bound has no stationary point.
double pinning_bound(const Network& net, int node) {
    double b = std::hypot(net.bias_a[node], net.bias_b[node]);
    for (const auto& c : net.couplings)
        if (c.i == node || c.j == node) b += std::abs(net.weights[c.weight_index]);
    return b;
}

// The tangent nudge is constant during the nudged relaxation, so near the
// cost pole the raw gradient would tilt the washboard past the last minimum
// and the ODE would never settle. Capping at a fraction of the pinning bound
// keeps a strong constant force that still admits a steady state; callers
// lower the fraction further when the coupled system still runs away.
double tangent_nudge(const Network& net, const State& free_ref, int node, double tau,
                     double beta, double cap_scale) {
    double f = beta * clamped_cost_grad(free_ref[node] - tau);
    const double cap = cap_scale * pinning_bound(net, node);
    if (f > cap) f = cap;
    if (f < -cap) f = -cap;
    return f;
}

}  // namespace

double canonical_phase(double phi) {
    if (phi > -kPi && phi <= kPi) return phi;
    phi = std::remainder(phi, kTwoPi);  // [-pi, pi]
    if (phi <= -kPi) phi += kTwoPi;
    return phi;
}

double internal_energy(const Network& net, const State& s) {
    check_state(net, s);
    double e = 0.0;
    for (const auto& c : net.couplings)
        e -= net.weights[c.weight_index] * std::cos(s[c.i] - s[c.j]);
    for (int i = 0; i < net.node_count(); ++i)
        e -= net.bias_a[i] * std::cos(s[i]) + net.bias_b[i] * std::sin(s[i]);
    return e;
}

double external_cost(const Network& net, const State& s, const Target& t) {
    check_state(net, s);
    double c = 0.0;
    for (const auto& [node, tau] : t.phases)
        c -= std::log(std::max(1.0 + std::cos(s[node] - tau), kCostClampEps));
    return c;
}

void cost_phase_gradient(const Network& net, const State& s, const Target& t,
                         std::span<double> out) {
    check_state(net, s);
    if (out.size() != t.phases.size())
        throw std::invalid_argument("cost gradient output length mismatch");
    for (std::size_t k = 0; k < t.phases.size(); ++k)
        out[k] = clamped_cost_grad(s[t.phases[k].first] - t.phases[k].second);
}

void phase_force(const Network& net, const State& s, const Target* t, double beta,
                 NudgeMode mode, const State* free_ref, std::span<double> out,
                 double tangent_cap) {
    check_state(net, s);
    if (out.size() != s.size()) throw std::invalid_argument("force output length mismatch");

    for (int i = 0; i < net.node_count(); ++i)
        out[i] = -(net.bias_a[i] * std::sin(s[i]) - net.bias_b[i] * std::cos(s[i]));
    for (const auto& c : net.couplings) {
        const double f = net.weights[c.weight_index] * std::sin(s[c.i] - s[c.j]);
        out[c.i] -= f;
        out[c.j] += f;
    }

    if (mode != NudgeMode::Free) {
        if (t == nullptr) throw std::invalid_argument("nudged force requires a target");
        if (mode == NudgeMode::Tangent) {
            if (free_ref == nullptr)
                throw std::invalid_argument("tangent mode requires the free equilibrium");
            for (const auto& [node, tau] : t->phases)
                out[node] -= tangent_nudge(net, *free_ref, node, tau, beta, tangent_cap);
        } else {
            for (const auto& [node, tau] : t->phases)
                out[node] -= beta * clamped_cost_grad(s[node] - tau);
        }
    }

    for (int i = 0; i < net.node_count(); ++i)
        if (net.roles[i] == NodeRole::Input) out[i] = 0.0;
}

double relaxation_objective(const Network& net, const State& s, const Target* t,
                            double beta, NudgeMode mode, const State* free_ref,
                            double tangent_cap) {
    double f = internal_energy(net, s);
    if (mode == NudgeMode::StandardEP) {
        f += beta * external_cost(net, s, *t);
    } else if (mode == NudgeMode::Tangent) {
        for (const auto& [node, tau] : t->phases)
            f += tangent_nudge(net, *free_ref, node, tau, beta, tangent_cap) * s[node];
    }
    return f;
}

void parameter_gradient(const Network& net, const State& s, std::span<double> out) {
    check_state(net, s);
    if (static_cast<int>(out.size()) != net.parameter_count())
        throw std::invalid_argument("parameter gradient length mismatch");
    const int nw = static_cast<int>(net.weights.size());
    const int n = net.node_count();
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& c : net.couplings)
        out[c.weight_index] -= std::cos(s[c.i] - s[c.j]);
    for (int i = 0; i < n; ++i) {
        out[nw + i] = -std::cos(s[i]);
        out[nw + n + i] = -std::sin(s[i]);
    }
}

}  // namespace xyep
