#pragma once

// JSON form of an Mlp: {"layer_dims": [...], "activation": "...", "params": [...]}.
// Doubles are written with shortest round-trip formatting, so reading back
// gives bit-identical parameters.

#include "precml/net/mlp.hpp"

#include "json.hpp"

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace precml {

inline nlohmann::json to_json(const Mlp& net) {
    nlohmann::json j;
    j["layer_dims"] = net.layer_dims();
    j["activation"] = to_string(net.activation());
    j["params"] = std::vector<double>(net.params().data(), net.params().data() + net.params().size());
    return j;
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("layer_dims") || !j.contains("activation") || !j.contains("params"))
        throw std::invalid_argument("model JSON needs layer_dims, activation and params");
    const auto dims = j.at("layer_dims").get<std::vector<int>>();
    const auto act = parse_activation(j.at("activation").get<std::string>());
    const auto p = j.at("params").get<std::vector<double>>();
    return Mlp(dims, act, Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())));
}

inline void save_mlp(const Mlp& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json(net).dump(1) << '\n';
}

inline Mlp load_mlp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return mlp_from_json(nlohmann::json::parse(in));
}

} // namespace precml
