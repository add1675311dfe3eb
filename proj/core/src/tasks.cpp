#include "xyep/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "xyep/rng.hpp"

namespace xyep {

namespace {

constexpr double kPi = std::numbers::pi;

void require_role(const Network& net, int node, NodeRole role, const char* what) {
    if (net.roles.at(node) != role)
        throw std::invalid_argument(std::string(what) + ": node role mismatch");
}

Target one_up_target(const std::vector<int>& output_ids, int label) {
    Target t;
    for (std::size_t k = 0; k < output_ids.size(); ++k)
        t.phases.emplace_back(output_ids[k],
                              static_cast<int>(k) == label ? kPhaseUp : kPhaseDown);
    return t;
}

std::uint32_t read_be32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("truncated IDX file");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace

Dataset xor_dataset(const Network& net, int in1, int in2, int out) {
    require_role(net, in1, NodeRole::Input, "xor in1");
    require_role(net, in2, NodeRole::Input, "xor in2");
    require_role(net, out, NodeRole::Output, "xor out");

    Dataset data;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            Sample s;
            s.inputs = {{in1, a ? kPhaseUp : kPhaseDown}, {in2, b ? kPhaseUp : kPhaseDown}};
            const bool result = (a != b);
            s.target.phases = {{out, result ? kPhaseUp : kPhaseDown}};
            s.label = result ? 1 : 0;
            data.push_back(std::move(s));
        }
    return data;
}

std::vector<IrisRecord> load_iris(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open iris CSV: " + path);

    std::map<std::string, int> label_ids;
    std::vector<IrisRecord> records;
    std::string line;
    bool first_line = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        // An optional header line is recognized by a non-numeric first field.
        if (first_line) {
            first_line = false;
            char* end = nullptr;
            std::strtod(line.c_str(), &end);
            if (end == line.c_str()) continue;
        }
        std::stringstream ss(line);
        std::string field;
        IrisRecord rec{};
        for (int k = 0; k < 4; ++k) {
            if (!std::getline(ss, field, ','))
                throw std::runtime_error("malformed iris CSV line: " + line);
            try {
                rec.features[k] = std::stod(field);
            } catch (const std::exception&) {
                throw std::runtime_error("non-numeric iris feature: " + field);
            }
        }
        if (!std::getline(ss, field))
            throw std::runtime_error("missing iris label in line: " + line);
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        if (field.size() == 1 && std::isdigit(static_cast<unsigned char>(field[0]))) {
            rec.label = field[0] - '0';
        } else {
            auto [it, inserted] =
                label_ids.emplace(field, static_cast<int>(label_ids.size()));
            rec.label = it->second;
        }
        if (rec.label < 0 || rec.label > 2)
            throw std::runtime_error("iris label out of range: " + field);
        records.push_back(rec);
    }
    if (records.size() != 150)
        throw std::runtime_error("expected 150 iris records, got " +
                                 std::to_string(records.size()));
    return records;
}

IrisSplit encode_iris(const std::vector<IrisRecord>& records, const Network& net,
                      const std::vector<int>& input_ids,
                      const std::vector<int>& output_ids, std::uint64_t seed) {
    if (input_ids.size() != 4 || output_ids.size() != 3)
        throw std::invalid_argument("iris needs 4 input and 3 output nodes");
    for (int id : input_ids) require_role(net, id, NodeRole::Input, "iris input");
    for (int id : output_ids) require_role(net, id, NodeRole::Output, "iris output");

    // Stratified 40/10 split per class.
    std::vector<std::size_t> train_idx, test_idx;
    Rng rng(mix_seed(seed, 0x5b17));
    for (int cls = 0; cls < 3; ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < records.size(); ++i)
            if (records[i].label == cls) members.push_back(i);
        if (members.size() != 50)
            throw std::runtime_error("iris class does not have 50 members");
        for (std::size_t k = members.size(); k > 1; --k)
            std::swap(members[k - 1], members[rng.next_below(k)]);
        train_idx.insert(train_idx.end(), members.begin(), members.begin() + 40);
        test_idx.insert(test_idx.end(), members.begin() + 40, members.end());
    }

    // Min-max bounds from the train split only.
    std::array<double, 4> lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (std::size_t i : train_idx)
        for (int k = 0; k < 4; ++k) {
            lo[k] = std::min(lo[k], records[i].features[k]);
            hi[k] = std::max(hi[k], records[i].features[k]);
        }

    auto encode = [&](std::size_t i) {
        Sample s;
        for (int k = 0; k < 4; ++k) {
            const double span = hi[k] - lo[k];
            const double unit =
                span > 0 ? (records[i].features[k] - lo[k]) / span : 0.5;
            s.inputs.emplace_back(input_ids[k], kPi * unit - kPi / 2.0);
        }
        s.target = one_up_target(output_ids, records[i].label);
        s.label = records[i].label;
        return s;
    };

    IrisSplit split;
    for (std::size_t i : train_idx) split.train.push_back(encode(i));
    for (std::size_t i : test_idx) split.test.push_back(encode(i));
    return split;
}

MnistData load_mnist(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open MNIST images: " + images_path);
    if (read_be32(img) != 2051)
        throw std::runtime_error("bad IDX image magic in " + images_path);
    const std::uint32_t count = read_be32(img);
    MnistData data;
    data.rows = static_cast<int>(read_be32(img));
    data.cols = static_cast<int>(read_be32(img));
    const std::size_t pixels = std::size_t(data.rows) * data.cols;
    data.images.resize(count);
    for (auto& image : data.images) {
        image.resize(pixels);
        img.read(reinterpret_cast<char*>(image.data()), std::streamsize(pixels));
        if (!img) throw std::runtime_error("truncated IDX image file: " + images_path);
    }

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open MNIST labels: " + labels_path);
    if (read_be32(lab) != 2049)
        throw std::runtime_error("bad IDX label magic in " + labels_path);
    if (read_be32(lab) != count)
        throw std::runtime_error("IDX image/label count mismatch");
    data.labels.resize(count);
    lab.read(reinterpret_cast<char*>(data.labels.data()), std::streamsize(count));
    if (!lab) throw std::runtime_error("truncated IDX label file: " + labels_path);
    return data;
}

void save_mnist(const MnistData& data, const std::string& images_path,
                const std::string& labels_path) {
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot write " + images_path);
    write_be32(img, 2051);
    write_be32(img, static_cast<std::uint32_t>(data.images.size()));
    write_be32(img, static_cast<std::uint32_t>(data.rows));
    write_be32(img, static_cast<std::uint32_t>(data.cols));
    for (const auto& image : data.images)
        img.write(reinterpret_cast<const char*>(image.data()),
                  std::streamsize(image.size()));

    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot write " + labels_path);
    write_be32(lab, 2049);
    write_be32(lab, static_cast<std::uint32_t>(data.labels.size()));
    lab.write(reinterpret_cast<const char*>(data.labels.data()),
              std::streamsize(data.labels.size()));
}

Sample encode_mnist_sample(const std::vector<std::uint8_t>& image, int label,
                           const Network& net, const std::vector<int>& input_ids,
                           const std::vector<int>& output_ids) {
    if (image.size() != input_ids.size())
        throw std::invalid_argument("image size does not match input node count");
    Sample s;
    s.inputs.reserve(image.size());
    for (std::size_t k = 0; k < image.size(); ++k) {
        const double unit = image[k] / 255.0;
        s.inputs.emplace_back(input_ids[k], kPi * unit - kPi / 2.0);
    }
    s.target = one_up_target(output_ids, label);
    s.label = label;
    (void)net;
    return s;
}

std::vector<double> decode_probabilities(const std::vector<double>& output_phases) {
    if (output_phases.empty())
        throw std::invalid_argument("need at least one output phase");
    std::vector<double> p(output_phases.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        p[k] = 1.0 + std::sin(output_phases[k]);
        sum += p[k];
    }
    if (sum <= 1e-300) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
        return p;
    }
    for (double& x : p) x /= sum;
    return p;
}

int classify(const std::vector<double>& probabilities) {
    return static_cast<int>(std::max_element(probabilities.begin(), probabilities.end()) -
                            probabilities.begin());
}

Dataset make_teacher_dataset(const Network& teacher, const std::vector<int>& input_ids,
                             const std::vector<int>& output_ids, int n_samples,
                             std::uint64_t seed, const RelaxConfig& cfg) {
    Dataset data;
    Rng rng(mix_seed(seed, 0x7ea5));
    for (int s = 0; s < n_samples; ++s) {
        Sample sample;
        for (int id : input_ids) sample.inputs.emplace_back(id, rng.uniform_phase());
        RelaxConfig free_cfg = cfg;
        free_cfg.m_init = 1;
        auto result = relax_multistart(teacher, sample.inputs, nullptr, 0.0,
                                       NudgeMode::Free, free_cfg,
                                       mix_seed(seed, 0x7ea6, s))
                          .runs.front();
        for (int id : output_ids) sample.target.phases.emplace_back(id, result.state[id]);
        data.push_back(std::move(sample));
    }
    return data;
}

}  // namespace xyep
