#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xyep/analysis.hpp"
#include "xyep/ep.hpp"
#include "xyep/graph.hpp"
#include "xyep/tasks.hpp"

namespace xyep::cli {

/// Raised on config-file problems (exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised on dataset problems (exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchemaVersion = 1;

enum class Task { Xor, Iris, Mnist, Teacher };

struct ArchitectureConfig {
    std::string family;  // lattice | all_to_all | dense_layered | lcl
    // lattice
    int rows = 0, cols = 0;
    std::set<int> shells;
    // all_to_all
    int n = 0;
    // dense_layered
    std::vector<int> layer_sizes;
    // lcl
    LclSpec lcl;
};

struct ProbeConfig {
    int flip_input_index = 1;       // which clamped input of the base sample to flip
    double flipped_phase = kPhaseUp;
    int base_sample = 0;
};

struct ExperimentConfig {
    Task task = Task::Teacher;
    ArchitectureConfig arch;
    // Placement on lattice / all-to-all families: [x, y] pairs for lattices,
    // plain node ids otherwise. Layered families carry their roles already.
    std::vector<std::vector<int>> input_placement;
    std::vector<std::vector<int>> output_placement;

    EPConfig ep;
    double coupling_scale = 0.5;

    std::uint64_t seed_network_init = 1;
    std::uint64_t seed_training = 2;
    std::uint64_t seed_split = 3;

    std::string output_dir = "out";
    int checkpoint_interval = 0;          // 0: only the final checkpoint
    std::vector<int> probe_epochs;        // checkpoints also written here
    std::string eval_split = "test";

    // Dataset paths and limits.
    std::string iris_csv;
    std::string mnist_train_images, mnist_train_labels;
    std::string mnist_test_images, mnist_test_labels;
    int train_limit = 0, test_limit = 0;  // 0: use everything
    int teacher_samples = 16;

    ProbeConfig probe;

    std::string raw_text;  // config file bytes, hashed into the manifest
};

ExperimentConfig load_config(const std::string& path);

/// Architecture construction plus role assignment from the placement lists.
Network build_network(const ExperimentConfig& cfg);

struct TaskData {
    Dataset train;
    Dataset test;
};

/// Builds the train/test datasets for the configured task against `net`.
TaskData build_datasets(const ExperimentConfig& cfg, const Network& net);

/// FNV-1a 64 over the raw config bytes, hex encoded.
std::string config_hash(const std::string& text);

int cmd_train(const std::string& config_path);
int cmd_eval(const std::string& ckpt_path, const std::string& config_path);
int cmd_probe(const std::vector<std::string>& ckpt_paths, const std::string& config_path);

}  // namespace xyep::cli
