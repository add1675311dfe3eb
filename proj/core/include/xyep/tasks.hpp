#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "xyep/energy.hpp"
#include "xyep/relax.hpp"

namespace xyep {

/// One training example: clamped input phases plus target output phases.
/// Classification samples additionally carry the class label.
struct Sample {
    InputClamp inputs;
    Target target;
    int label = -1;
};

using Dataset = std::vector<Sample>;

// XOR: false is phase -pi/2 (spin down), true is +pi/2 (spin up).
inline constexpr double kPhaseDown = -1.5707963267948966;
inline constexpr double kPhaseUp = +1.5707963267948966;

/// Four-sample XOR truth table on the given input/output nodes.
Dataset xor_dataset(const Network& net, int in1, int in2, int out);

struct IrisRecord {
    std::array<double, 4> features;
    int label;  // 0..2
};

/// Reads the 5-column iris CSV (4 numeric features, string or integer label).
std::vector<IrisRecord> load_iris(const std::string& path);

struct IrisSplit {
    Dataset train;  // 120 samples, 40 per class
    Dataset test;   // 30 samples, 10 per class
};

/// Stratified 40/10-per-class split; features min-max normalized over the
/// train split and mapped to [-pi/2, pi/2]. Targets are +pi/2 on the true
/// class output and -pi/2 elsewhere.
IrisSplit encode_iris(const std::vector<IrisRecord>& records, const Network& net,
                      const std::vector<int>& input_ids,
                      const std::vector<int>& output_ids, std::uint64_t seed);

struct MnistData {
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<std::uint8_t>> images;
    std::vector<std::uint8_t> labels;
};

/// IDX3/IDX1 loader (big-endian, magics 2051/2049).
MnistData load_mnist(const std::string& images_path, const std::string& labels_path);

/// Writes images and labels back out in IDX format (test fixtures, subsets).
void save_mnist(const MnistData& data, const std::string& images_path,
                const std::string& labels_path);

/// Pixel x in [0,1] maps to phase pi*x - pi/2; label to a one-up target over
/// the output nodes.
Sample encode_mnist_sample(const std::vector<std::uint8_t>& image, int label,
                           const Network& net, const std::vector<int>& input_ids,
                           const std::vector<int>& output_ids);

/// p_i = (1 + sin phi_i) / sum_j (1 + sin phi_j); an all-zero sum decodes to
/// the uniform distribution.
std::vector<double> decode_probabilities(const std::vector<double>& output_phases);

/// argmax with lowest-index tie break.
int classify(const std::vector<double>& probabilities);

/// Targets produced by free-relaxing a fixed teacher network on random input
/// phases. Used as a small self-contained regression task.
Dataset make_teacher_dataset(const Network& teacher, const std::vector<int>& input_ids,
                             const std::vector<int>& output_ids, int n_samples,
                             std::uint64_t seed, const RelaxConfig& cfg);

}  // namespace xyep
