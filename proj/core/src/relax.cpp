#include "xyep/relax.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xyep/rng.hpp"

namespace xyep {

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

RelaxResult relax(const Network& net, State init, const InputClamp& clamp,
                  const Target* target, double beta, NudgeMode mode,
                  const RelaxConfig& cfg, const State* free_ref) {
    if (cfg.dt <= 0 || cfg.tolerance <= 0)
        throw std::invalid_argument("relaxation dt and tolerance must be > 0");
    for (const auto& [node, phase] : clamp) init.at(node) = phase;

    State state = std::move(init);
    const int n = net.node_count();
    std::vector<double> force(n), trial(n);

    double dt = cfg.dt;
    double obj = cfg.backtracking
                     ? relaxation_objective(net, state, target, beta, mode, free_ref,
                                            cfg.tangent_cap)
                     : 0.0;

    RelaxResult res;
    int step = 0;
    for (; step < cfg.max_steps; ++step) {
        phase_force(net, state, target, beta, mode, free_ref, force, cfg.tangent_cap);
        res.residual = max_abs(force);
        if (res.residual <= cfg.tolerance) {
            res.converged = true;
            break;
        }
        if (!cfg.backtracking) {
            for (int i = 0; i < n; ++i) state[i] += dt * force[i];
            continue;
        }
        // Backtracking line search along the gradient-flow step.
        for (;;) {
            for (int i = 0; i < n; ++i) trial[i] = state[i] + dt * force[i];
            const double trial_obj = relaxation_objective(net, trial, target, beta,
                                                          mode, free_ref, cfg.tangent_cap);
            if (trial_obj <= obj || dt < 1e-12) {
                state.swap(trial);
                obj = trial_obj;
                dt = std::min(dt * 2.0, cfg.dt);
                break;
            }
            dt *= 0.5;
        }
    }
    res.steps = step;

    for (double& phi : state) phi = canonical_phase(phi);
    for (const auto& [node, phase] : clamp) state[node] = phase;  // bit-exact
    res.energy = internal_energy(net, state);
    res.state = std::move(state);
    return res;
}

State random_initial_state(const Network& net, const InputClamp& clamp,
                           std::uint64_t seed, int index) {
    Rng rng(mix_seed(seed, 0x1217, static_cast<std::uint64_t>(index)));
    State init(net.node_count());
    for (double& phi : init) phi = rng.uniform_phase();
    for (const auto& [node, phase] : clamp) init.at(node) = phase;
    return init;
}

SteadyStateSet relax_multistart(const Network& net, const InputClamp& clamp,
                                const Target* target, double beta, NudgeMode mode,
                                const RelaxConfig& cfg, std::uint64_t seed,
                                const State* free_ref) {
    if (cfg.m_init < 1) throw std::invalid_argument("m_init must be >= 1");
    SteadyStateSet set;
    set.runs.reserve(cfg.m_init);
    for (int r = 0; r < cfg.m_init; ++r)
        set.runs.push_back(relax(net, random_initial_state(net, clamp, seed, r), clamp,
                                 target, beta, mode, cfg, free_ref));
    return set;
}

}  // namespace xyep
