#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "whittle/model.hpp"

namespace whittle {

/// Parses a model description: a JSON object with keys n_states, p0, p1
/// (row-major probability lists) and rewards (row-major n_states x 2).
/// Probabilities are validated before the model is returned.
inline MdpModel parse_model(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("model file: ") + e.what());
    }
    for (const char* key : {"n_states", "p0", "p1", "rewards"})
        if (!j.contains(key))
            throw std::invalid_argument(std::string("model file: missing key '") + key + "'");

    MdpModel m;
    m.n_states = j.at("n_states").get<int>();
    if (m.n_states < 1) throw std::invalid_argument("model file: n_states must be positive");
    auto fill = [&](const char* key, Matrix& dst, int cols) {
        const auto& arr = j.at(key);
        if (!arr.is_array() || arr.size() != static_cast<std::size_t>(m.n_states) * cols)
            throw std::invalid_argument(std::string("model file: '") + key + "' must be a row-major list of " +
                                        std::to_string(m.n_states * cols) + " numbers");
        dst = Matrix(m.n_states, cols);
        std::size_t i = 0;
        for (const auto& v : arr) dst.data()[i++] = v.get<double>();
    };
    fill("p0", m.p0, m.n_states);
    fill("p1", m.p1, m.n_states);
    fill("rewards", m.rewards, 2);
    validate(m);
    return m;
}

inline MdpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_model(text);
}

inline std::string model_to_json(const MdpModel& m) {
    nlohmann::json j;
    j["n_states"] = m.n_states;
    j["p0"] = m.p0.data();
    j["p1"] = m.p1.data();
    j["rewards"] = m.rewards.data();
    return j.dump(2);
}

inline void save_model(const MdpModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << model_to_json(m) << "\n";
}

}  // namespace whittle
