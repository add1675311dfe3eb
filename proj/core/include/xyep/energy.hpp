#pragma once

#include <span>
#include <vector>

#include "xyep/graph.hpp"

namespace xyep {

/// One phase per node, radians. Internally values may be unwrapped; results
/// returned across module boundaries are canonicalized to (-pi, pi].
using State = std::vector<double>;

/// Target phases on output nodes.
struct Target {
    std::vector<std::pair<int, double>> phases;  // (node id, target phase)
};

enum class NudgeMode { Free, StandardEP, Tangent };

/// Floor for 1 + cos(delta) in the output cost; keeps the log and its
/// gradient finite at delta = pi.
inline constexpr double kCostClampEps = 1e-9;

/// Phase in (-pi, pi]. Values already in range pass through bit-exactly.
double canonical_phase(double phi);

/// E = -sum_<ij> W_ij cos(phi_i - phi_j) - sum_i (a_i cos phi_i + b_i sin phi_i)
double internal_energy(const Network& net, const State& s);

/// C = sum_{i in O} -log(max(1 + cos(phi_i - phi_tau_i), eps))
double external_cost(const Network& net, const State& s, const Target& t);

/// dC/dphi_i for each target entry, clamped to its value at the clamp
/// boundary near delta = pi. Order matches t.phases.
void cost_phase_gradient(const Network& net, const State& s, const Target& t,
                         std::span<double> out);

/// phi_dot for the relaxation ODE. Free: -dE/dphi. StandardEP adds
/// -beta dC/dphi at the current state. Tangent adds a constant force from the
/// cost gradient at `free_ref` (the free equilibrium), capped at tangent_cap
/// times the node's pinning bound so the tilted landscape keeps a stationary
/// point. Input-node forces are zeroed: inputs are clamped.
void phase_force(const Network& net, const State& s, const Target* t, double beta,
                 NudgeMode mode, const State* free_ref, std::span<double> out,
                 double tangent_cap = 0.9);

/// Objective minimized by the relaxation: E (Free), E + beta C (StandardEP),
/// or E + beta sum_i g_i phi_i with g the capped constant nudge fixed at
/// free_ref (Tangent). Used for descent checks during integration.
double relaxation_objective(const Network& net, const State& s, const Target* t,
                            double beta, NudgeMode mode, const State* free_ref,
                            double tangent_cap = 0.9);

/// dE/dtheta laid out as [weight slots..., bias_a..., bias_b...]. Shared
/// slots accumulate the sum of their member couplings.
void parameter_gradient(const Network& net, const State& s, std::span<double> out);

}  // namespace xyep
