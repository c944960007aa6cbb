#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "qdrive/qnet.hpp"
#include "qdrive/rewards.hpp"
#include "qdrive/state_rep.hpp"

namespace qdrive {

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ModelKind { Braking, Driving };

struct ModelFile {
    ModelKind kind = ModelKind::Braking;
    QNet net;
    InputScaling scaling;
    std::optional<RewardParamsBrake> brake_reward;
    std::optional<RewardParamsDrive> drive_reward;

    bool operator==(const ModelFile&) const = default;
};

inline constexpr int kModelSchemaVersion = 1;

// Doubles are written in shortest round-trip form, so load(save(m)) == m bit for bit.
std::string model_to_json(const ModelFile& m);
ModelFile model_from_json(const std::string& text);

void save_model(const ModelFile& m, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace qdrive
