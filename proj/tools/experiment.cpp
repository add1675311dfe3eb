#include "experiment.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "xyep/rng.hpp"
#include "xyep/serialize.hpp"

namespace xyep::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

std::set<int> parse_shells(const json& j) {
    if (j.is_string()) return shell_preset(j.get<std::string>());
    std::set<int> shells;
    for (const auto& v : j) shells.insert(v.get<int>());
    return shells;
}

NudgeMode parse_nudge_mode(const std::string& s) {
    if (s == "standard") return NudgeMode::StandardEP;
    if (s == "tangent") return NudgeMode::Tangent;
    throw ConfigError("unknown nudge_mode: " + s);
}

Task parse_task(const std::string& s) {
    if (s == "xor") return Task::Xor;
    if (s == "iris") return Task::Iris;
    if (s == "mnist") return Task::Mnist;
    if (s == "teacher-toy" || s == "teacher") return Task::Teacher;
    throw ConfigError("unknown task: " + s);
}

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw DataError(std::string(what) + " path not set in config");
    if (!fs::exists(path))
        throw DataError(std::string(what) + " not found: " + path);
}

std::vector<std::vector<int>> parse_placement(const json& j) {
    std::vector<std::vector<int>> out;
    for (const auto& entry : j) {
        if (entry.is_array())
            out.push_back(entry.get<std::vector<int>>());
        else
            out.push_back({entry.get<int>()});
    }
    return out;
}

/// Placement entry -> node id; coordinate pairs resolve through the flat
/// lattice grid.
int resolve_node(const Network& net, const std::vector<int>& entry) {
    try {
        if (entry.size() == 1) {
            if (entry[0] < 0 || entry[0] >= net.node_count())
                throw ConfigError("placement node id out of range");
            return entry[0];
        }
        if (entry.size() == 2) return net.node_at(entry[0], entry[1]);
    } catch (const std::out_of_range&) {
        throw ConfigError("placement coordinate not on the lattice");
    }
    throw ConfigError("placement entries must be an id or an [x, y] pair");
}

}  // namespace

std::string config_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    ExperimentConfig cfg;
    cfg.raw_text = std::move(text);
    try {
        if (j.value("schema_version", -1) != kConfigSchemaVersion)
            throw ConfigError("config schema_version must be 1");
        cfg.task = parse_task(j.at("task").get<std::string>());

        const json& a = j.at("architecture");
        cfg.arch.family = a.at("family").get<std::string>();
        if (cfg.arch.family == "lattice") {
            cfg.arch.rows = a.at("rows").get<int>();
            cfg.arch.cols = a.at("cols").get<int>();
            cfg.arch.shells = parse_shells(a.at("shells"));
        } else if (cfg.arch.family == "all_to_all") {
            cfg.arch.n = a.at("n").get<int>();
        } else if (cfg.arch.family == "dense_layered") {
            cfg.arch.layer_sizes = a.at("layer_sizes").get<std::vector<int>>();
        } else if (cfg.arch.family == "lcl") {
            LclSpec& l = cfg.arch.lcl;
            l.input_rows = a.value("input_rows", 28);
            l.input_cols = a.value("input_cols", 28);
            l.window = a.at("window").get<int>();
            l.stride = a.value("stride", 1);
            l.channels = a.value("channels", 1);
            l.weight_shared = a.value("weight_shared", false);
            if (a.contains("intra_shells")) l.intra_shells = parse_shells(a["intra_shells"]);
            l.output_size = a.value("output_size", 10);
        } else {
            throw ConfigError("unknown architecture family: " + cfg.arch.family);
        }

        if (j.contains("placement")) {
            const json& p = j["placement"];
            if (p.contains("inputs")) cfg.input_placement = parse_placement(p["inputs"]);
            if (p.contains("outputs"))
                cfg.output_placement = parse_placement(p["outputs"]);
        }

        const json& e = j.at("ep");
        cfg.ep.beta = e.value("beta", 0.1);
        cfg.ep.nudge_mode = parse_nudge_mode(e.value("nudge_mode", std::string("standard")));
        cfg.ep.symmetric_nudging = e.value("symmetric_nudging", false);
        cfg.ep.learning_rate = e.at("learning_rate").get<double>();
        cfg.ep.epochs = e.at("epochs").get<int>();
        cfg.ep.batch_size = e.value("batch_size", 1);
        cfg.ep.eval_interval = e.value("eval_interval", 50);
        cfg.ep.threads = j.value("threads", 1);
        if (cfg.ep.beta == 0.0) throw ConfigError("ep.beta must be nonzero");
        if (std::abs(cfg.ep.beta) > 1.0) throw ConfigError("|ep.beta| must be <= 1");
        if (cfg.ep.learning_rate < 0) throw ConfigError("ep.learning_rate must be >= 0");

        if (j.contains("relax")) {
            const json& r = j["relax"];
            cfg.ep.relax.dt = r.value("dt", 0.1);
            cfg.ep.relax.tolerance = r.value("tolerance", 1e-6);
            cfg.ep.relax.max_steps = r.value("max_steps", 50000);
            cfg.ep.relax.m_init = r.value("m_init", 1);
            cfg.ep.relax.backtracking = r.value("backtracking", true);
        }

        const json& s = j.at("seeds");  // explicit seeds, no wall-clock defaults
        cfg.seed_network_init = s.at("network_init").get<std::uint64_t>();
        cfg.seed_training = s.at("training").get<std::uint64_t>();
        cfg.seed_split = s.at("split").get<std::uint64_t>();

        cfg.coupling_scale = j.value("coupling_scale", 0.5);
        cfg.output_dir = j.value("output_dir", std::string("out"));
        cfg.checkpoint_interval = j.value("checkpoint_interval", 0);
        if (j.contains("probe_epochs"))
            cfg.probe_epochs = j["probe_epochs"].get<std::vector<int>>();
        cfg.eval_split = j.value("eval_split", std::string("test"));
        if (cfg.eval_split != "train" && cfg.eval_split != "test")
            throw ConfigError("eval_split must be 'train' or 'test'");

        if (j.contains("data")) {
            const json& d = j["data"];
            cfg.iris_csv = d.value("iris_csv", std::string());
            cfg.mnist_train_images = d.value("mnist_train_images", std::string());
            cfg.mnist_train_labels = d.value("mnist_train_labels", std::string());
            cfg.mnist_test_images = d.value("mnist_test_images", std::string());
            cfg.mnist_test_labels = d.value("mnist_test_labels", std::string());
            cfg.train_limit = d.value("train_limit", 0);
            cfg.test_limit = d.value("test_limit", 0);
            cfg.teacher_samples = d.value("teacher_samples", 16);
        }

        if (j.contains("probe")) {
            const json& p = j["probe"];
            cfg.probe.flip_input_index = p.value("flip_input_index", 1);
            cfg.probe.flipped_phase = p.value("flipped_phase", kPhaseUp);
            cfg.probe.base_sample = p.value("base_sample", 0);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }

    if (const char* env = std::getenv("XYEP_OUTPUT_DIR")) cfg.output_dir = env;
    return cfg;
}

Network build_network(const ExperimentConfig& cfg) {
    Network net;
    try {
        if (cfg.arch.family == "lattice")
            net = build_lattice(cfg.arch.rows, cfg.arch.cols, cfg.arch.shells);
        else if (cfg.arch.family == "all_to_all")
            net = build_all_to_all(cfg.arch.n);
        else if (cfg.arch.family == "dense_layered")
            net = build_dense_layered(cfg.arch.layer_sizes);
        else
            net = build_lcl(cfg.arch.lcl);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("architecture: ") + e.what());
    }

    // Layered families carry roles already; flat families take them from the
    // placement lists.
    if (cfg.arch.family == "lattice" || cfg.arch.family == "all_to_all") {
        if (cfg.input_placement.empty() || cfg.output_placement.empty())
            throw ConfigError("lattice/all_to_all configs need placement.inputs/outputs");
        for (const auto& entry : cfg.input_placement)
            net.set_role(resolve_node(net, entry), NodeRole::Input);
        for (const auto& entry : cfg.output_placement)
            net.set_role(resolve_node(net, entry), NodeRole::Output);
    }
    return net;
}

namespace {

std::vector<int> placed_nodes(const Network& net,
                              const std::vector<std::vector<int>>& placement,
                              NodeRole role) {
    std::vector<int> ids;
    if (!placement.empty()) {
        for (const auto& entry : placement) ids.push_back(resolve_node(net, entry));
    } else {
        ids = net.nodes_with_role(role);
    }
    return ids;
}

}  // namespace

TaskData build_datasets(const ExperimentConfig& cfg, const Network& net) {
    const auto inputs = placed_nodes(net, cfg.input_placement, NodeRole::Input);
    const auto outputs = placed_nodes(net, cfg.output_placement, NodeRole::Output);
    TaskData data;

    switch (cfg.task) {
        case Task::Xor: {
            if (inputs.size() != 2 || outputs.size() != 1)
                throw ConfigError("xor needs 2 input nodes and 1 output node");
            data.train = xor_dataset(net, inputs[0], inputs[1], outputs[0]);
            data.test = data.train;
            break;
        }
        case Task::Iris: {
            require_file(cfg.iris_csv, "iris_csv");
            auto records = load_iris(cfg.iris_csv);
            auto split = encode_iris(records, net, inputs, outputs, cfg.seed_split);
            data.train = std::move(split.train);
            data.test = std::move(split.test);
            break;
        }
        case Task::Mnist: {
            require_file(cfg.mnist_train_images, "mnist_train_images");
            require_file(cfg.mnist_train_labels, "mnist_train_labels");
            require_file(cfg.mnist_test_images, "mnist_test_images");
            require_file(cfg.mnist_test_labels, "mnist_test_labels");
            auto encode_set = [&](const MnistData& m, int limit) {
                Dataset out;
                const std::size_t n =
                    limit > 0 ? std::min<std::size_t>(limit, m.images.size())
                              : m.images.size();
                for (std::size_t k = 0; k < n; ++k)
                    out.push_back(encode_mnist_sample(m.images[k], m.labels[k], net,
                                                      inputs, outputs));
                return out;
            };
            try {
                data.train = encode_set(
                    load_mnist(cfg.mnist_train_images, cfg.mnist_train_labels),
                    cfg.train_limit);
                data.test = encode_set(
                    load_mnist(cfg.mnist_test_images, cfg.mnist_test_labels),
                    cfg.test_limit);
            } catch (const std::runtime_error& e) {
                throw DataError(e.what());
            }
            break;
        }
        case Task::Teacher: {
            // Teacher shares the topology, with parameters drawn from the
            // split seed so student and teacher start differently.
            Network teacher = net;
            init_parameters(teacher, mix_seed(cfg.seed_split, 0x7eac), 1.0);
            RelaxConfig rc = cfg.ep.relax;
            data.train = make_teacher_dataset(teacher, inputs, outputs,
                                              cfg.teacher_samples, cfg.seed_split, rc);
            data.test = make_teacher_dataset(teacher, inputs, outputs,
                                             std::max(1, cfg.teacher_samples / 4),
                                             mix_seed(cfg.seed_split, 0x7e57), rc);
            break;
        }
    }
    if (data.train.empty()) throw DataError("empty training dataset");
    return data;
}

namespace {

void write_manifest(const ExperimentConfig& cfg, double wall_ms) {
    json m;
    m["schema_version"] = kConfigSchemaVersion;
    m["config_hash"] = config_hash(cfg.raw_text);
    m["library_version"] = "0.1.0";
    m["wall_ms"] = wall_ms;
    std::ofstream out(fs::path(cfg.output_dir) / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
}

std::string record_header() {
    return "epoch,split,mean_distance,accuracy,converged_fraction,wall_ms\n";
}

void append_record(std::ofstream& out, const TrainRecord& r) {
    out << r.epoch << ',' << r.split << ',' << fmt(r.mean_distance) << ','
        << fmt(r.accuracy) << ',' << fmt(r.converged_fraction) << ','
        << fmt(r.wall_ms) << '\n';
    out.flush();
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "training aborted: %s\n", e.what());
        return 3;
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "training aborted: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

/// Checkpoint must match the configured architecture.
Network load_checkpoint_matching(const std::string& ckpt_path,
                                 const ExperimentConfig& cfg, int* epoch_out) {
    LoadedNetwork loaded;
    try {
        loaded = load_network(ckpt_path);
    } catch (const std::runtime_error& e) {
        throw ConfigError(std::string("checkpoint: ") + e.what());
    }
    Network expected = build_network(cfg);
    if (loaded.net.node_count() != expected.node_count() ||
        loaded.net.coupling_count() != expected.coupling_count())
        throw ConfigError("checkpoint topology does not match the config architecture");
    if (epoch_out) *epoch_out = loaded.epoch;
    return std::move(loaded.net);
}

}  // namespace

int cmd_train(const std::string& config_path) {
    return run_guarded([&] {
        auto cfg = load_config(config_path);
        Network net = build_network(cfg);
        init_parameters(net, cfg.seed_network_init, cfg.coupling_scale);
        auto data = build_datasets(cfg, net);

        fs::create_directories(cfg.output_dir);
        std::ofstream records(fs::path(cfg.output_dir) / "records.csv",
                              std::ios::binary);
        records << record_header();

        TrainHooks hooks;
        hooks.record = [&](const TrainRecord& r) { append_record(records, r); };
        auto save_ckpt = [&](int epoch, const Network& n) {
            save_network(n, (fs::path(cfg.output_dir) /
                             ("ckpt_epoch" + std::to_string(epoch) + ".json"))
                                .string(),
                         epoch);
        };
        hooks.checkpoint = [&](int epoch, const Network& n) {
            const bool scheduled =
                cfg.checkpoint_interval > 0 && epoch % cfg.checkpoint_interval == 0;
            const bool probed = std::find(cfg.probe_epochs.begin(),
                                          cfg.probe_epochs.end(),
                                          epoch) != cfg.probe_epochs.end();
            if (scheduled || probed) save_ckpt(epoch, n);
        };
        if (std::find(cfg.probe_epochs.begin(), cfg.probe_epochs.end(), 0) !=
            cfg.probe_epochs.end())
            save_ckpt(0, net);

        const auto t0 = std::chrono::steady_clock::now();
        train(net, data.train, data.train, data.test, cfg.ep, cfg.seed_training, hooks);
        const double wall_ms = std::chrono::duration<double, std::milli>(
                                   std::chrono::steady_clock::now() - t0)
                                   .count();

        save_network(net, (fs::path(cfg.output_dir) / "checkpoint.json").string(),
                     cfg.ep.epochs);
        write_manifest(cfg, wall_ms);
        return 0;
    });
}

int cmd_eval(const std::string& ckpt_path, const std::string& config_path) {
    return run_guarded([&] {
        auto cfg = load_config(config_path);
        Network net = load_checkpoint_matching(ckpt_path, cfg, nullptr);
        auto data = build_datasets(cfg, net);
        const Dataset& set = cfg.eval_split == "train" ? data.train : data.test;

        auto m = evaluate(net, set, cfg.ep, mix_seed(cfg.seed_training, 0xe7a1));
        std::printf("split=%s mean_distance=%s accuracy=%s converged_fraction=%s\n",
                    cfg.eval_split.c_str(), fmt(m.mean_distance).c_str(),
                    fmt(m.accuracy).c_str(), fmt(m.converged_fraction).c_str());

        fs::create_directories(cfg.output_dir);
        std::ofstream out(fs::path(cfg.output_dir) / "metrics.csv", std::ios::binary);
        out << "split,mean_distance,accuracy,converged_fraction\n"
            << cfg.eval_split << ',' << fmt(m.mean_distance) << ',' << fmt(m.accuracy)
            << ',' << fmt(m.converged_fraction) << '\n';
        return 0;
    });
}

int cmd_probe(const std::vector<std::string>& ckpt_paths,
              const std::string& config_path) {
    return run_guarded([&] {
        auto cfg = load_config(config_path);
        fs::create_directories(cfg.output_dir);

        for (const auto& ckpt_path : ckpt_paths) {
            int epoch = -1;
            Network net = load_checkpoint_matching(ckpt_path, cfg, &epoch);
            if (epoch < 0) epoch = 0;
            auto data = build_datasets(cfg, net);

            if (cfg.probe.base_sample < 0 ||
                cfg.probe.base_sample >= static_cast<int>(data.train.size()))
                throw ConfigError("probe.base_sample out of range");
            const Sample& base = data.train[cfg.probe.base_sample];
            if (cfg.probe.flip_input_index < 0 ||
                cfg.probe.flip_input_index >= static_cast<int>(base.inputs.size()))
                throw ConfigError("probe.flip_input_index out of range");
            const auto [flip_node, base_phase] =
                base.inputs[cfg.probe.flip_input_index];
            // Toggle to the other encoding phase when the configured flip
            // equals the base value.
            double flipped = cfg.probe.flipped_phase;
            if (std::abs(flipped - base_phase) < 1e-12)
                flipped = base_phase > 0 ? kPhaseDown : kPhaseUp;

            auto field = response_probe(net, base, flip_node, flipped, cfg.ep.relax,
                                        mix_seed(cfg.seed_training, 0x9b0e), epoch);
            const auto tag = std::to_string(epoch);
            write_response_csv(field, net,
                               (fs::path(cfg.output_dir) /
                                ("response_epoch" + tag + ".csv"))
                                   .string());
            write_snapshot_csv(snapshot_couplings(net, epoch), net,
                               (fs::path(cfg.output_dir) /
                                ("couplings_epoch" + tag + ".csv"))
                                   .string());
        }
        return 0;
    });
}

}  // namespace xyep::cli
