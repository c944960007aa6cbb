#include "qdrive/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace qdrive {

using nlohmann::ordered_json;

namespace {

const char* kind_name(ModelKind k) { return k == ModelKind::Braking ? "braking" : "driving"; }

const char* gate_name(BrakeGate g) {
    return g == BrakeGate::SpeedBelowDistance ? "speed_below_distance" : "distance_below_speed";
}

BrakeGate gate_from(const std::string& s) {
    if (s == "speed_below_distance") return BrakeGate::SpeedBelowDistance;
    if (s == "distance_below_speed") return BrakeGate::DistanceBelowSpeed;
    throw ModelError("unknown brake gate " + s);
}

ordered_json brake_json(const RewardParamsBrake& p) {
    ordered_json j;
    j["gate"] = gate_name(p.gate);
    j["slope"] = p.slope;
    j["intercept"] = p.intercept;
    j["alt_slope"] = p.alt_slope;
    j["alt_intercept"] = p.alt_intercept;
    j["slow_v"] = p.slow_v;
    j["far_d"] = p.far_d;
    j["stop_bonus"] = p.stop_bonus;
    j["stop_d"] = p.stop_d;
    j["far_penalty"] = p.far_penalty;
    j["collision_penalty"] = p.collision_penalty;
    j["v_stop_eps"] = p.v_stop_eps;
    j["speed_in_kmh"] = p.speed_in_kmh;
    return j;
}

RewardParamsBrake brake_from(const ordered_json& j) {
    RewardParamsBrake p;
    p.gate = gate_from(j.at("gate").get<std::string>());
    p.slope = j.at("slope").get<double>();
    p.intercept = j.at("intercept").get<double>();
    p.alt_slope = j.at("alt_slope").get<double>();
    p.alt_intercept = j.at("alt_intercept").get<double>();
    p.slow_v = j.at("slow_v").get<double>();
    p.far_d = j.at("far_d").get<double>();
    p.stop_bonus = j.at("stop_bonus").get<double>();
    p.stop_d = j.at("stop_d").get<double>();
    p.far_penalty = j.at("far_penalty").get<double>();
    p.collision_penalty = j.at("collision_penalty").get<double>();
    p.v_stop_eps = j.at("v_stop_eps").get<double>();
    p.speed_in_kmh = j.at("speed_in_kmh").get<bool>();
    return p;
}

ordered_json drive_json(const RewardParamsDrive& p) {
    ordered_json j;
    j["match_bonus"] = p.match_bonus;
    j["d_soft"] = p.d_soft;
    j["d_hard"] = p.d_hard;
    j["phi_hard"] = p.phi_hard;
    j["soft_penalty"] = p.soft_penalty;
    j["hard_penalty"] = p.hard_penalty;
    j["collision_penalty"] = p.collision_penalty;
    return j;
}

RewardParamsDrive drive_from(const ordered_json& j) {
    RewardParamsDrive p;
    p.match_bonus = j.at("match_bonus").get<double>();
    p.d_soft = j.at("d_soft").get<double>();
    p.d_hard = j.at("d_hard").get<double>();
    p.phi_hard = j.at("phi_hard").get<double>();
    p.soft_penalty = j.at("soft_penalty").get<double>();
    p.hard_penalty = j.at("hard_penalty").get<double>();
    p.collision_penalty = j.at("collision_penalty").get<double>();
    return p;
}

std::vector<double> finite_array(const ordered_json& j, std::size_t expected, const char* what) {
    if (!j.is_array()) throw ModelError(std::string(what) + " must be an array");
    if (j.size() != expected) {
        throw ModelError(std::string(what) + " has " + std::to_string(j.size()) + " entries, expected " +
                         std::to_string(expected));
    }
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& v : j) {
        if (!v.is_number()) throw ModelError(std::string(what) + " holds a non-number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ModelError(std::string(what) + " holds a non-finite value");
        out.push_back(x);
    }
    return out;
}

void only_keys(const ordered_json& j, std::initializer_list<const char*> keys, const char* where) {
    if (!j.is_object()) throw ModelError(std::string(where) + " is not an object");
    for (const auto& [k, v] : j.items()) {
        if (std::find_if(keys.begin(), keys.end(), [&](const char* a) { return k == a; }) == keys.end()) {
            throw ModelError("unknown key " + k + " in " + where);
        }
    }
}

}  // namespace

std::string model_to_json(const ModelFile& m) {
    m.net.validate();
    ordered_json doc;
    doc["schema_version"] = kModelSchemaVersion;
    doc["kind"] = kind_name(m.kind);
    doc["layers"] = ordered_json::array();
    for (const DenseLayer& l : m.net.layers) {
        ordered_json j;
        j["input_dim"] = l.input_dim;
        j["output_dim"] = l.output_dim;
        j["activation"] = to_string(l.activation);
        j["weights"] = l.weights;
        j["bias"] = l.bias;
        doc["layers"].push_back(j);
    }
    doc["input_scaling"] = {{"d", m.scaling.d}, {"phi", m.scaling.phi}, {"d_obs", m.scaling.d_obs}, {"v", m.scaling.v}};
    ordered_json rp = ordered_json::object();
    if (m.brake_reward) rp["braking"] = brake_json(*m.brake_reward);
    if (m.drive_reward) rp["driving"] = drive_json(*m.drive_reward);
    doc["reward_params"] = rp;
    return doc.dump(1) + "\n";
}

ModelFile model_from_json(const std::string& text) {
    ModelFile m;
    try {
        const ordered_json doc = ordered_json::parse(text);
        if (!doc.is_object()) throw ModelError("model file is not a JSON object");
        only_keys(doc, {"schema_version", "kind", "layers", "input_scaling", "reward_params"}, "model");
        if (doc.at("schema_version").get<int>() != kModelSchemaVersion) throw ModelError("unsupported model schema_version");
        const auto kind = doc.at("kind").get<std::string>();
        if (kind == "braking") {
            m.kind = ModelKind::Braking;
        } else if (kind == "driving") {
            m.kind = ModelKind::Driving;
        } else {
            throw ModelError("unknown model kind " + kind);
        }
        const auto& layers = doc.at("layers");
        if (!layers.is_array() || layers.empty()) throw ModelError("model has no layers");
        for (const auto& j : layers) {
            only_keys(j, {"input_dim", "output_dim", "activation", "weights", "bias"}, "layer");
            const auto in = j.at("input_dim").get<std::size_t>();
            const auto out = j.at("output_dim").get<std::size_t>();
            if (in == 0 || out == 0) throw ModelError("layer dimensions must be positive");
            DenseLayer l(in, out, activation_from_string(j.at("activation").get<std::string>()));
            l.weights = finite_array(j.at("weights"), in * out, "weights");
            l.bias = finite_array(j.at("bias"), out, "bias");
            m.net.layers.push_back(std::move(l));
        }
        const auto& s = doc.at("input_scaling");
        only_keys(s, {"d", "phi", "d_obs", "v"}, "input_scaling");
        m.scaling = {s.at("d").get<double>(), s.at("phi").get<double>(), s.at("d_obs").get<double>(),
                     s.at("v").get<double>()};
        if (!(m.scaling.d > 0 && m.scaling.phi > 0 && m.scaling.d_obs > 0 && m.scaling.v > 0)) {
            throw ModelError("input scaling constants must be positive");
        }
        const auto& rp = doc.at("reward_params");
        only_keys(rp, {"braking", "driving"}, "reward_params");
        if (rp.contains("braking")) m.brake_reward = brake_from(rp.at("braking"));
        if (rp.contains("driving")) m.drive_reward = drive_from(rp.at("driving"));
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed model file: ") + e.what());
    } catch (const NetError& e) {
        throw ModelError(std::string("invalid network: ") + e.what());
    }
    try {
        m.net.validate();
    } catch (const NetError& e) {
        throw ModelError(std::string("invalid network: ") + e.what());
    }
    const std::size_t want_out = m.kind == ModelKind::Braking ? 2 : 5;
    if (m.net.input_dim() != 2 || m.net.output_dim() != want_out) {
        throw ModelError(std::string("layer dims do not fit a ") + kind_name(m.kind) + " model");
    }
    return m;
}

void save_model(const ModelFile& m, const std::filesystem::path& path) {
    const std::string text = model_to_json(m);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write model " + path.string());
    out << text;
    if (!out) throw ModelError("failed writing model " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot read model " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace qdrive
