#include <filesystem>
#include <string>

#include "doctest.h"
#include "qdrive/model_io.hpp"
#include "qdrive/report.hpp"

using namespace qdrive;

namespace {

const std::filesystem::path kFixtures{QDRIVE_FIXTURE_DIR};

ModelFile trained_like(ModelKind kind, std::uint64_t seed) {
    ModelFile m;
    m.kind = kind;
    m.net = kind == ModelKind::Braking ? make_braking_net() : make_driving_net();
    Rng rng(seed);
    init_glorot(m.net, rng);
    for (auto& l : m.net.layers) {
        for (double& b : l.bias) b = uniform(rng, -1.0, 1.0) / 3.0;
    }
    if (kind == ModelKind::Braking) {
        m.brake_reward = RewardParamsBrake{};
    } else {
        m.drive_reward = RewardParamsDrive{};
    }
    m.scaling.phi = 90.0;
    return m;
}

}  // namespace

TEST_CASE("model json round trip is exact") {
    for (ModelKind k : {ModelKind::Braking, ModelKind::Driving}) {
        const ModelFile m = trained_like(k, 17);
        const std::string text = model_to_json(m);
        const ModelFile back = model_from_json(text);
        CHECK(back == m);
        CHECK(model_to_json(back) == text);
    }
}

TEST_CASE("model files save and load") {
    const auto path = std::filesystem::temp_directory_path() / "qdrive_model_test.json";
    const ModelFile m = trained_like(ModelKind::Driving, 5);
    save_model(m, path);
    CHECK(load_model(path) == m);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model(path), ModelError);
}

TEST_CASE("valid fixture loads") {
    const ModelFile m = load_model(kFixtures / "valid_braking.json");
    CHECK(m.kind == ModelKind::Braking);
    CHECK(m.net.layers[0].weights[1] == -0.25);
    CHECK(m.brake_reward.has_value());
}

TEST_CASE("corrupt fixtures are rejected") {
    for (std::string name : {"truncated.json", "wrong_version.json", "mismatched_dims.json", "wrong_kind.json",
                             "kind_shape_mismatch.json", "non_numeric_weight.json", "unknown_key.json"}) {
        CAPTURE(name);
        CHECK_THROWS_AS(load_model(kFixtures / name), ModelError);
    }
    CHECK_THROWS_AS(model_from_json(""), ModelError);
    CHECK_THROWS_AS(model_from_json("[]"), ModelError);
}
