#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "poselift/checkpoint.hpp"
#include "poselift/lifter.hpp"
#include "poselift/pose_data.hpp"
#include "poselift/rng.hpp"

using namespace poselift;

namespace {

std::string temp_path(const char* name) { return std::string("/tmp/poselift_test_") + name; }

Tensor random_tensor(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t.at_flat(i) = rng.uniform(lo, hi);
    return t;
}

struct Fixture {
    LifterConfig config;
    Lifter model;
    NormStats stats;
    CheckpointMeta meta;

    Fixture()
        : config([] {
              LifterConfig c = LifterConfig::for_variant(Variant::V2);
              c.num_joints = 2;
              c.linear_size = 8;
              return c;
          }()),
          model(config, 21) {
        // Warm the running statistics so they carry non-default values.
        Rng rng(22);
        for (int i = 0; i < 3; ++i)
            model.forward(random_tensor(rng, 4, 4, -1.0, 1.0), LayerMode::Train);

        CameraModel cam;
        stats = compute_norm_stats(synth_generate(16, 23, cam, 1.0), "fixture");
        meta.epoch = 42;
        meta.seed = 777;
        meta.loss_kind = "wmse";
        meta.joint_weights = {4.0, 1.0};
        meta.final_train_loss = 0.015625;
    }
};

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    out << j.dump(1) << "\n";
}

} // namespace

TEST_CASE("checkpoints round trip bit for bit") {
    Fixture fx;
    const std::string path = temp_path("ckpt_roundtrip.json");
    save_checkpoint(path, fx.model, fx.stats, fx.meta);
    LoadedCheckpoint loaded = load_checkpoint(path);

    auto before = fx.model.state_entries();
    auto after = loaded.model.state_entries();
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(before[i].first == after[i].first);
        CHECK(*before[i].second == *after[i].second);
    }

    CHECK(loaded.stats.mean2d == fx.stats.mean2d);
    CHECK(loaded.stats.std2d == fx.stats.std2d);
    CHECK(loaded.stats.mean3d == fx.stats.mean3d);
    CHECK(loaded.stats.std3d == fx.stats.std3d);
    CHECK(loaded.stats.floored3d == fx.stats.floored3d);
    CHECK(loaded.stats.source_split == fx.stats.source_split);

    CHECK(loaded.meta.epoch == 42);
    CHECK(loaded.meta.seed == 777);
    CHECK(loaded.meta.loss_kind == "wmse");
    CHECK(loaded.meta.joint_weights == fx.meta.joint_weights);
    CHECK(loaded.meta.final_train_loss == 0.015625);

    // The restored model computes the identical function.
    Rng rng(29);
    Tensor x = random_tensor(rng, 5, 4, -1.0, 1.0);
    CHECK(fx.model.forward(x, LayerMode::Eval) == loaded.model.forward(x, LayerMode::Eval));

    // Saving the loaded model reproduces the identical file.
    const std::string path2 = temp_path("ckpt_roundtrip2.json");
    save_checkpoint(path2, loaded.model, loaded.stats, loaded.meta);
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    std::ostringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());

    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("the envelope carries the documented top-level keys") {
    Fixture fx;
    const std::string path = temp_path("ckpt_envelope.json");
    save_checkpoint(path, fx.model, fx.stats, fx.meta);
    nlohmann::json j = read_json(path);
    CHECK(j.contains("format_version"));
    CHECK(j["format_version"] == 1);
    CHECK(j.contains("config"));
    CHECK(j.contains("norm_stats"));
    CHECK(j.contains("params"));
    CHECK(j.contains("meta"));
    CHECK(j["params"].is_array());
    REQUIRE(!j["params"].empty());
    const auto& first = j["params"][0];
    CHECK(first.contains("name"));
    CHECK(first.contains("shape"));
    CHECK(first.contains("data_b64"));
    std::remove(path.c_str());
}

TEST_CASE("tampered checkpoints are rejected with specific errors") {
    Fixture fx;
    const std::string path = temp_path("ckpt_tamper.json");
    save_checkpoint(path, fx.model, fx.stats, fx.meta);
    nlohmann::json j = read_json(path);

    SUBCASE("unsupported format version") {
        j["format_version"] = 2;
        write_json(path, j);
        CHECK_THROWS_WITH_AS(load_checkpoint(path),
                             doctest::Contains("unsupported format_version 2"),
                             std::runtime_error);
    }
    SUBCASE("missing tensor") {
        j["params"].erase(0);
        write_json(path, j);
        CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("tensor count"),
                             std::runtime_error);
    }
    SUBCASE("renamed tensor") {
        j["params"][0]["name"] = "no.such.tensor";
        write_json(path, j);
        CHECK_THROWS_WITH_AS(load_checkpoint(path),
                             doctest::Contains("unknown tensor 'no.such.tensor'"),
                             std::runtime_error);
    }
    SUBCASE("reshaped tensor") {
        j["params"][0]["shape"] = {2, 2};
        write_json(path, j);
        CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("shape disagreement"),
                             std::runtime_error);
    }
    SUBCASE("truncated payload") {
        std::string b64 = j["params"][0]["data_b64"].get<std::string>();
        j["params"][0]["data_b64"] = b64.substr(0, b64.size() / 2);
        write_json(path, j);
        CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("corrupt payload"),
                             std::runtime_error);
    }
    SUBCASE("invalid json") {
        std::ofstream out(path);
        out << "{ not json";
        out.close();
        CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("invalid JSON"),
                             std::runtime_error);
    }
    std::remove(path.c_str());
}

TEST_CASE("loading a missing checkpoint names the path") {
    CHECK_THROWS_WITH_AS(load_checkpoint("/nonexistent/model.json"),
                         doctest::Contains("checkpoint: cannot open"), std::runtime_error);
}
