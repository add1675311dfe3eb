#include "xyep/ep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "xyep/rng.hpp"

namespace xyep {

namespace {

// Nudged relaxation continuing from the free equilibrium. The tangent nudge
// is constant, and even capped at the single-node pinning bound it can
// depin a co-rotating cluster; retry with a halved cap until the tilted
// landscape keeps a minimum.
RelaxResult relax_nudged(const Network& net, const State& free_state,
                         const Sample& sample, double beta, const EPConfig& cfg) {
    RelaxConfig rc = cfg.relax;
    for (;;) {
        auto res = relax(net, free_state, sample.inputs, &sample.target, beta,
                         cfg.nudge_mode, rc, &free_state);
        if (res.converged || cfg.nudge_mode != NudgeMode::Tangent ||
            rc.tangent_cap < 0.05)
            return res;
        rc.tangent_cap *= 0.5;
    }
}

}  // namespace

GradientEstimate ep_gradient(const Network& net, const Sample& sample,
                             const EPConfig& cfg, std::uint64_t seed) {
    if (cfg.beta == 0.0) throw std::invalid_argument("ep_gradient needs beta != 0");
    const int np = net.parameter_count();
    GradientEstimate est;
    est.grad.assign(np, 0.0);
    est.restarts = cfg.relax.m_init;

    std::vector<double> g_free(np), g_nudged(np), g_minus(np);
    for (int r = 0; r < cfg.relax.m_init; ++r) {
        auto init = random_initial_state(net, sample.inputs, seed, r);
        auto free_run = relax(net, std::move(init), sample.inputs, nullptr, 0.0,
                              NudgeMode::Free, cfg.relax);
        if (!free_run.converged) continue;

        auto nudged = relax_nudged(net, free_run.state, sample, cfg.beta, cfg);
        if (!nudged.converged) continue;
        parameter_gradient(net, nudged.state, g_nudged);

        if (cfg.symmetric_nudging) {
            auto anti = relax_nudged(net, free_run.state, sample, -cfg.beta, cfg);
            if (!anti.converged) continue;
            parameter_gradient(net, anti.state, g_minus);
            const double inv = 1.0 / (2.0 * cfg.beta);
            for (int k = 0; k < np; ++k)
                est.grad[k] += (g_nudged[k] - g_minus[k]) * inv;
        } else {
            parameter_gradient(net, free_run.state, g_free);
            const double inv = 1.0 / cfg.beta;
            for (int k = 0; k < np; ++k)
                est.grad[k] += (g_nudged[k] - g_free[k]) * inv;
        }
        ++est.converged;
    }

    if (est.converged == 0)
        throw ConvergenceError("all " + std::to_string(est.restarts) +
                                   " restarts failed to converge",
                               est.restarts);
    const double inv = 1.0 / est.converged;
    for (double& g : est.grad) g *= inv;
    return est;
}

double sample_distance(const Sample& sample, const State& state) {
    double d = 0.0;
    for (const auto& [node, tau] : sample.target.phases)
        d += 0.5 * (1.0 - std::cos(state[node] - tau));
    return d;
}

Metrics evaluate(const Network& net, const Dataset& data, const EPConfig& cfg,
                 std::uint64_t seed) {
    Metrics m;
    if (data.empty()) return m;

    double distance_sum = 0.0;
    long distance_count = 0;
    int correct = 0, labeled = 0;
    long converged = 0, total_runs = 0;

    for (std::size_t s = 0; s < data.size(); ++s) {
        const Sample& sample = data[s];
        auto set = relax_multistart(net, sample.inputs, nullptr, 0.0, NudgeMode::Free,
                                    cfg.relax, mix_seed(seed, 0xe7a1, s));
        total_runs += static_cast<long>(set.runs.size());

        std::vector<double> mean_p;
        for (const auto& run : set.runs) {
            if (!run.converged) continue;
            ++converged;
            distance_sum += sample_distance(sample, run.state);
            ++distance_count;
            if (sample.label >= 0) {
                std::vector<double> phases;
                for (const auto& [node, tau] : sample.target.phases)
                    phases.push_back(run.state[node]);
                auto p = decode_probabilities(phases);
                if (mean_p.empty()) mean_p.assign(p.size(), 0.0);
                for (std::size_t k = 0; k < p.size(); ++k) mean_p[k] += p[k];
            }
        }
        if (sample.label >= 0 && !mean_p.empty()) {
            ++labeled;
            if (classify(mean_p) == sample.label) ++correct;
        }
    }

    m.mean_distance = distance_count ? distance_sum / distance_count : 0.0;
    if (labeled > 0) m.accuracy = static_cast<double>(correct) / labeled;
    m.converged_fraction =
        total_runs ? static_cast<double>(converged) / total_runs : 1.0;
    return m;
}

void train(Network& net, const Dataset& train_set, const Dataset& eval_train,
           const Dataset& eval_test, const EPConfig& cfg, std::uint64_t seed,
           const TrainHooks& hooks) {
    if (train_set.empty()) throw std::invalid_argument("empty training set");
    if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (cfg.learning_rate < 0) throw std::invalid_argument("negative learning rate");

    const auto t0 = std::chrono::steady_clock::now();
    auto wall_ms = [&] {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    };
    bool stop_requested = false;
    auto emit = [&](int epoch) {
        if (!hooks.record && !hooks.stop) return;
        const std::pair<const char*, const Dataset*> splits[] = {
            {"train", &eval_train}, {"test", &eval_test}};
        for (const auto& [split, set] : splits) {
            if (set->empty()) continue;
            auto m = evaluate(net, *set, cfg, mix_seed(seed, 0xeba1, epoch));
            TrainRecord rec{epoch, split, m.mean_distance, m.accuracy,
                            m.converged_fraction, wall_ms()};
            if (hooks.record) hooks.record(rec);
            if (hooks.stop && hooks.stop(rec)) stop_requested = true;
        }
    };

    const int np = net.parameter_count();
    std::vector<double> batch_grad(np);
    Rng batch_rng(mix_seed(seed, 0xba7c));

    for (int epoch = 0; epoch < cfg.epochs && !stop_requested; ++epoch) {
        if (cfg.eval_interval > 0 && epoch % cfg.eval_interval == 0) emit(epoch);
        if (stop_requested) break;

        // Draw the whole batch first so the sampling stream is independent of
        // the execution schedule.
        std::vector<std::size_t> batch(cfg.batch_size);
        for (auto& idx : batch) idx = batch_rng.next_below(train_set.size());

        std::vector<GradientEstimate> estimates(cfg.batch_size);
        std::vector<std::exception_ptr> errors(cfg.batch_size);
        auto worker = [&](int b) {
            try {
                estimates[b] = ep_gradient(net, train_set[batch[b]], cfg,
                                           mix_seed(seed, 0x96ad, epoch, b));
            } catch (...) {
                errors[b] = std::current_exception();
            }
        };
        int n_threads = cfg.threads == 0
                            ? static_cast<int>(std::thread::hardware_concurrency())
                            : cfg.threads;
        n_threads = std::max(1, std::min(n_threads, cfg.batch_size));
        if (n_threads == 1) {
            for (int b = 0; b < cfg.batch_size; ++b) worker(b);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < n_threads; ++t)
                pool.emplace_back([&, t] {
                    for (int b = t; b < cfg.batch_size; b += n_threads) worker(b);
                });
            for (auto& th : pool) th.join();
        }
        // Reduce in sample order for bitwise reproducibility. A sample whose
        // restarts all failed carries no estimate and is dropped.
        std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
        int used = 0;
        for (int b = 0; b < cfg.batch_size; ++b) {
            if (errors[b]) {
                try {
                    std::rethrow_exception(errors[b]);
                } catch (const ConvergenceError&) {
                    continue;
                }
            }
            for (int k = 0; k < np; ++k) batch_grad[k] += estimates[b].grad[k];
            ++used;
        }
        if (used == 0) continue;
        const double scale = cfg.learning_rate / used;
        net.apply_gradient(batch_grad, scale);

        for (double w : net.weights)
            if (std::isnan(w))
                throw DivergenceError("NaN parameter at epoch " + std::to_string(epoch));

        if (hooks.checkpoint) hooks.checkpoint(epoch + 1, net);
    }
    emit(cfg.epochs);
}

}  // namespace xyep
