#include "poselift/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "poselift/base64.hpp"

namespace poselift {

namespace {

using nlohmann::ordered_json;

std::string tensor_to_b64(const Tensor& t) {
    std::vector<std::uint8_t> bytes(t.size() * 8);
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint64_t u;
        double v = t.at_flat(i);
        std::memcpy(&u, &v, 8);
        for (int k = 0; k < 8; ++k) bytes[8 * i + k] = static_cast<std::uint8_t>(u >> (8 * k));
    }
    return base64_encode(bytes.data(), bytes.size());
}

void b64_to_tensor(const std::string& b64, Tensor& t, const std::string& name) {
    std::vector<std::uint8_t> bytes = base64_decode(b64);
    if (bytes.size() != t.size() * 8)
        throw std::runtime_error("checkpoint: corrupt payload for '" + name + "': expected " +
                                 std::to_string(t.size() * 8) + " bytes, got " +
                                 std::to_string(bytes.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint64_t u = 0;
        for (int k = 0; k < 8; ++k) u |= static_cast<std::uint64_t>(bytes[8 * i + k]) << (8 * k);
        double v;
        std::memcpy(&v, &u, 8);
        t.at_flat(i) = v;
    }
}

ordered_json config_to_json(const LifterConfig& c) {
    return {{"num_joints", c.num_joints},
            {"linear_size", c.linear_size},
            {"num_blocks", c.num_blocks},
            {"extra_layer", c.extra_layer},
            {"activation", activation_name(c.activation)},
            {"dropout_rate", c.dropout_rate},
            {"variant", variant_name(c.variant_label)}};
}

LifterConfig config_from_json(const ordered_json& j) {
    LifterConfig c;
    c.num_joints = j.at("num_joints").get<int>();
    c.linear_size = j.at("linear_size").get<int>();
    c.num_blocks = j.at("num_blocks").get<int>();
    c.extra_layer = j.at("extra_layer").get<bool>();
    c.activation = activation_from_string(j.at("activation").get<std::string>());
    c.dropout_rate = j.at("dropout_rate").get<double>();
    c.variant_label = variant_from_string(j.at("variant").get<std::string>());
    c.validate();
    return c;
}

ordered_json stats_to_json(const NormStats& s) {
    return {{"mean2d", s.mean2d},     {"std2d", s.std2d},       {"mean3d", s.mean3d},
            {"std3d", s.std3d},       {"floored2d", s.floored2d}, {"floored3d", s.floored3d},
            {"source_split", s.source_split}};
}

NormStats stats_from_json(const ordered_json& j) {
    NormStats s;
    s.mean2d = j.at("mean2d").get<std::vector<double>>();
    s.std2d = j.at("std2d").get<std::vector<double>>();
    s.mean3d = j.at("mean3d").get<std::vector<double>>();
    s.std3d = j.at("std3d").get<std::vector<double>>();
    s.floored2d = j.at("floored2d").get<std::vector<int>>();
    s.floored3d = j.at("floored3d").get<std::vector<int>>();
    s.source_split = j.at("source_split").get<std::string>();
    return s;
}

} // namespace

void save_checkpoint(const std::string& path, Lifter& model, const NormStats& stats,
                     const CheckpointMeta& meta) {
    ordered_json params = ordered_json::array();
    for (const auto& [name, tensor] : model.state_entries())
        params.push_back({{"name", name},
                          {"shape", {tensor->rows(), tensor->cols()}},
                          {"data_b64", tensor_to_b64(*tensor)}});
    ordered_json j{{"format_version", kCheckpointFormatVersion},
                   {"config", config_to_json(model.config())},
                   {"norm_stats", stats_to_json(stats)},
                   {"params", std::move(params)},
                   {"meta",
                    {{"epoch", meta.epoch},
                     {"seed", meta.seed},
                     {"loss_kind", meta.loss_kind},
                     {"joint_weights", meta.joint_weights},
                     {"final_train_loss", meta.final_train_loss}}}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
    out << j.dump(1) << "\n";
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("checkpoint: invalid JSON in " + path + ": " + e.what());
    }
    int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
        throw std::runtime_error("checkpoint: unsupported format_version " +
                                 std::to_string(version) + " (supported: " +
                                 std::to_string(kCheckpointFormatVersion) + ")");

    LifterConfig config = config_from_json(j.at("config"));
    const auto& jm = j.at("meta");
    CheckpointMeta meta;
    meta.epoch = jm.at("epoch").get<long>();
    meta.seed = jm.at("seed").get<std::uint64_t>();
    meta.loss_kind = jm.at("loss_kind").get<std::string>();
    meta.joint_weights = jm.at("joint_weights").get<std::vector<double>>();
    meta.final_train_loss = jm.at("final_train_loss").get<double>();

    Lifter model(config, meta.seed);
    auto entries = model.state_entries();
    const auto& jp = j.at("params");
    if (jp.size() != entries.size())
        throw std::runtime_error("checkpoint: tensor count " + std::to_string(jp.size()) +
                                 " disagrees with config (expected " +
                                 std::to_string(entries.size()) + ")");
    for (const auto& entry : jp) {
        const auto name = entry.at("name").get<std::string>();
        Tensor* target = nullptr;
        for (auto& [ename, tensor] : entries)
            if (ename == name) {
                target = tensor;
                break;
            }
        if (!target) throw std::runtime_error("checkpoint: unknown tensor '" + name + "'");
        auto shape = entry.at("shape").get<std::vector<std::size_t>>();
        if (shape.size() != 2 || shape[0] != target->rows() || shape[1] != target->cols())
            throw std::runtime_error("checkpoint: shape disagreement for '" + name + "'");
        b64_to_tensor(entry.at("data_b64").get<std::string>(), *target, name);
    }
    return {std::move(model), stats_from_json(j.at("norm_stats")), std::move(meta)};
}

} // namespace poselift
