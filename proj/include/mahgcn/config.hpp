#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mahgcn/common.hpp"
#include "mahgcn/model.hpp"
#include "mahgcn/training.hpp"

namespace mahgcn::config {

struct ExplainConfig {
    int target_class = 1;        // disorder class
    bool use_probability = false;  // gradient on softmax output instead of logit
};

enum class EmitMode { fcn, timeseries, both };

struct AppConfig {
    model::ModelConfig model;
    training::TrainConfig train;
    training::SynthConfig synth;
    ExplainConfig explain;
    EmitMode emit = EmitMode::fcn;
};

// Strict parse: unknown keys anywhere are ConfigErrors naming the key.
// Defaults reproduce the standard experiment settings with an empty object.
AppConfig parse_config(const nlohmann::json& j);

// parse_config over the file contents plus invariant validation
AppConfig load_config(const std::filesystem::path& path);

// resolved configuration (all defaults filled) for manifests and metrics
nlohmann::json to_json(const AppConfig& cfg);

}  // namespace mahgcn::config
