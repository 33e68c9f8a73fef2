#include "reader/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "reader/errors.hpp"

namespace reader::rl {

void Checkpoint::save(const std::string& path) const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["level"] = level;
    j["tag"] = tag;
    j["feature_dim"] = feature_dim;
    j["action_count"] = action_count;
    j["hidden"] = hidden;
    j["params"] = net.params();
    std::ofstream out(path);
    if (!out) throw ReaderError("cannot write checkpoint: " + path);
    out << j.dump();
}

Checkpoint Checkpoint::load(const std::string& path, const std::string& expected_level,
                            int expected_feature_dim, int expected_actions) {
    std::ifstream in(path);
    if (!in) throw DependencyMissing("checkpoint not found: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IncompatibleCheckpoint("unparseable checkpoint " + path + ": " + e.what());
    }
    Checkpoint ck;
    ck.level = j.at("level").get<std::string>();
    ck.tag = j.value("tag", std::string());
    ck.feature_dim = j.at("feature_dim").get<int>();
    ck.action_count = j.at("action_count").get<int>();
    ck.hidden = j.at("hidden").get<int>();
    if (ck.level != expected_level)
        throw IncompatibleCheckpoint("checkpoint level '" + ck.level + "' does not match '" +
                                     expected_level + "'");
    if (ck.feature_dim != expected_feature_dim || ck.action_count != expected_actions)
        throw IncompatibleCheckpoint("checkpoint featurization mismatch in " + path);
    Rng dummy(0);
    ck.net = PolicyNet(ck.feature_dim, ck.hidden, ck.action_count, dummy);
    std::vector<double> params = j.at("params").get<std::vector<double>>();
    if (params.size() != ck.net.param_count())
        throw IncompatibleCheckpoint("checkpoint parameter count mismatch in " + path);
    ck.net.params() = std::move(params);
    return ck;
}

}  // namespace reader::rl
