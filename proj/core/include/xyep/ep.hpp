#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xyep/relax.hpp"
#include "xyep/tasks.hpp"

namespace xyep {

struct EPConfig {
    double beta = 0.1;
    NudgeMode nudge_mode = NudgeMode::StandardEP;
    bool symmetric_nudging = false;
    double learning_rate = 0.01;
    int epochs = 1000;
    int batch_size = 1;
    int eval_interval = 50;
    int threads = 1;  // batch fan-out; 0 = hardware concurrency
    RelaxConfig relax;
};

struct GradientEstimate {
    std::vector<double> grad;  // layout matches Network::parameters()
    int restarts = 0;
    int converged = 0;  // restarts whose free and nudged phases both converged
};

/// All relaxation restarts failed to converge; carries the counts.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(std::string msg, int restarts)
        : std::runtime_error(std::move(msg)), restarts(restarts) {}
    int restarts;
};

/// A parameter became NaN during training.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two-phase gradient estimate for one sample: relax free from a random
/// init, relax nudged starting from the free equilibrium, accumulate
/// (dE/dtheta(nudged) - dE/dtheta(free)) / beta, averaged over converged
/// restarts. Symmetric nudging uses both +beta and -beta states, each seeded
/// from the free equilibrium, divided by 2 beta.
GradientEstimate ep_gradient(const Network& net, const Sample& sample,
                             const EPConfig& cfg, std::uint64_t seed);

struct Metrics {
    double mean_distance = 0.0;     // D averaged over samples and restarts
    double accuracy = -1.0;         // -1 when no sample carries a label
    double converged_fraction = 1.0;
};

/// D = 1/2 sum_{i in O} (1 - cos(phi_i - phi_tau_i)) per sample, free-phase
/// relaxation with cfg.relax.m_init restarts. Accuracy decodes class
/// probabilities averaged over converged restarts.
Metrics evaluate(const Network& net, const Dataset& data, const EPConfig& cfg,
                 std::uint64_t seed);

double sample_distance(const Sample& sample, const State& state);

struct TrainRecord {
    int epoch = 0;
    std::string split;
    double mean_distance = 0.0;
    double accuracy = -1.0;
    double converged_fraction = 1.0;
    double wall_ms = 0.0;
};

struct TrainHooks {
    std::function<void(const TrainRecord&)> record;              // optional
    std::function<void(int epoch, const Network&)> checkpoint;   // optional
    std::function<bool(const TrainRecord&)> stop;                // optional early stop
};

/// SGD training loop: one uniformly-with-replacement mini-batch per epoch,
/// batch-averaged EP gradient, theta -= eta * grad. Evaluation runs on
/// `eval_train` / `eval_test` every cfg.eval_interval epochs and after the
/// final epoch; training ends early when hooks.stop returns true for a
/// record. Samples whose restarts all fail to converge are dropped from the
/// batch (the average renormalizes over the rest). Throws DivergenceError on
/// NaN parameters.
void train(Network& net, const Dataset& train_set, const Dataset& eval_train,
           const Dataset& eval_test, const EPConfig& cfg, std::uint64_t seed,
           const TrainHooks& hooks = {});

}  // namespace xyep
