#include "xyep/serialize.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace xyep {

using nlohmann::json;

std::string network_to_json(const Network& net, int epoch) {
    json j;
    j["schema_version"] = kNetworkSchemaVersion;
    if (epoch >= 0) j["epoch"] = epoch;

    json nodes = json::array();
    for (int i = 0; i < net.node_count(); ++i) {
        const auto& c = net.coords[i];
        nodes.push_back({static_cast<int>(net.roles[i]), c.layer, c.channel, c.x, c.y});
    }
    j["nodes"] = std::move(nodes);

    json couplings = json::array();
    for (const auto& c : net.couplings)
        couplings.push_back({c.i, c.j, c.weight_index, c.group});
    j["couplings"] = std::move(couplings);

    j["weights"] = net.weights;
    j["bias_a"] = net.bias_a;
    j["bias_b"] = net.bias_b;
    return j.dump();
}

LoadedNetwork network_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("network JSON parse error: ") + e.what());
    }
    if (!j.contains("schema_version") ||
        j["schema_version"].get<int>() != kNetworkSchemaVersion)
        throw std::runtime_error("unsupported network schema version");

    LoadedNetwork loaded;
    Network& net = loaded.net;
    loaded.epoch = j.value("epoch", -1);

    for (const auto& row : j.at("nodes")) {
        const int role = row.at(0).get<int>();
        if (role < 0 || role > 2) throw std::runtime_error("bad node role in JSON");
        net.roles.push_back(static_cast<NodeRole>(role));
        net.coords.push_back({row.at(1).get<int>(), row.at(2).get<int>(),
                              row.at(3).get<int>(), row.at(4).get<int>()});
    }
    for (const auto& row : j.at("couplings"))
        net.couplings.push_back({row.at(0).get<int>(), row.at(1).get<int>(),
                                 row.at(2).get<int>(), row.at(3).get<int>()});
    net.weights = j.at("weights").get<std::vector<double>>();
    net.bias_a = j.at("bias_a").get<std::vector<double>>();
    net.bias_b = j.at("bias_b").get<std::vector<double>>();

    if (net.bias_a.size() != net.roles.size() || net.bias_b.size() != net.roles.size())
        throw std::runtime_error("bias length does not match node count");
    for (const auto& c : net.couplings) {
        if (c.i < 0 || c.j < 0 || c.i >= net.node_count() || c.j >= net.node_count() ||
            c.i == c.j)
            throw std::runtime_error("coupling endpoints out of range");
        if (c.weight_index < 0 || c.weight_index >= static_cast<int>(net.weights.size()))
            throw std::runtime_error("coupling weight index out of range");
    }
    return loaded;
}

void save_network(const Network& net, const std::string& path, int epoch) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << network_to_json(net, epoch);
}

LoadedNetwork load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return network_from_json(text);
}

}  // namespace xyep
