#pragma once

#include <cstdint>
#include <vector>

#include "xyep/energy.hpp"

namespace xyep {

struct RelaxConfig {
    double dt = 0.1;
    double tolerance = 1e-6;  // on max |phi_dot| over free nodes
    int max_steps = 50000;
    int m_init = 1;            // random restarts per multistart call
    bool backtracking = true;  // halve dt whenever the objective would rise
    double tangent_cap = 0.9;  // tangent nudge cap, fraction of the pinning bound
};

struct RelaxResult {
    State state;
    double residual = 0.0;
    bool converged = false;
    int steps = 0;
    double energy = 0.0;  // internal energy E at the final state
};

struct SteadyStateSet {
    std::vector<RelaxResult> runs;  // in restart-index order

    int converged_count() const {
        int n = 0;
        for (const auto& r : runs) n += r.converged;
        return n;
    }
};

using InputClamp = std::vector<std::pair<int, double>>;  // (input node, phase)

/// Integrates phi_dot = -dF/dphi by explicit Euler until the residual drops
/// below tolerance or max_steps is hit. Clamped phases are written into the
/// initial state and never move. Non-convergence is reported through the
/// flag, not an exception.
RelaxResult relax(const Network& net, State init, const InputClamp& clamp,
                  const Target* target, double beta, NudgeMode mode,
                  const RelaxConfig& cfg, const State* free_ref = nullptr);

/// m_init independent relaxations from uniform(-pi, pi] phases on all
/// non-input nodes, seeded per restart index.
SteadyStateSet relax_multistart(const Network& net, const InputClamp& clamp,
                                const Target* target, double beta, NudgeMode mode,
                                const RelaxConfig& cfg, std::uint64_t seed,
                                const State* free_ref = nullptr);

/// Random initial state used by relax_multistart for restart `index`.
State random_initial_state(const Network& net, const InputClamp& clamp,
                           std::uint64_t seed, int index);

}  // namespace xyep
