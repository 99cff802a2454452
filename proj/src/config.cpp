#include "mahgcn/config.hpp"

#include <fstream>
#include <sstream>

#include "mahgcn/io.hpp"

namespace mahgcn::config {

namespace {

template <typename T>
T get_as(const nlohmann::json& v, const std::string& where) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(where + ": wrong value type");
    }
}

void parse_train(const nlohmann::json& j, training::TrainConfig& t) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const nlohmann::json& v = it.value();
        std::string where = "train." + key;
        if (key == "epochs")
            t.epochs = get_as<int>(v, where);
        else if (key == "learning_rate")
            t.learning_rate = get_as<double>(v, where);
        else if (key == "batch_size")
            t.batch_size = get_as<int>(v, where);
        else if (key == "weight_decay")
            t.weight_decay = get_as<double>(v, where);
        else if (key == "adam_beta1")
            t.adam_beta1 = get_as<double>(v, where);
        else if (key == "adam_beta2")
            t.adam_beta2 = get_as<double>(v, where);
        else if (key == "adam_eps")
            t.adam_eps = get_as<double>(v, where);
        else if (key == "seed")
            t.seed = get_as<std::uint64_t>(v, where);
        else if (key == "repeats")
            t.repeats = get_as<int>(v, where);
        else if (key == "test_fraction")
            t.test_fraction = get_as<double>(v, where);
        else if (key == "decoupled_weight_decay")
            t.decoupled_weight_decay = get_as<bool>(v, where);
        else
            throw ConfigError("train: unknown key \"" + key + "\"");
    }
}

void parse_synth(const nlohmann::json& j, training::SynthConfig& s, EmitMode& emit) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const nlohmann::json& v = it.value();
        std::string where = "synth." + key;
        if (key == "scales")
            s.scales = get_as<std::vector<int>>(v, where);
        else if (key == "modules")
            s.modules = get_as<int>(v, where);
        else if (key == "timepoints")
            s.timepoints = get_as<int>(v, where);
        else if (key == "samples_per_class")
            s.samples_per_class = get_as<int>(v, where);
        else if (key == "delta")
            s.delta = get_as<double>(v, where);
        else if (key == "sigma")
            s.sigma = get_as<double>(v, where);
        else if (key == "seed")
            s.seed = get_as<std::uint64_t>(v, where);
        else if (key == "voxels_per_roi")
            s.voxels_per_roi = get_as<int>(v, where);
        else if (key == "emit") {
            std::string mode = get_as<std::string>(v, where);
            if (mode == "fcn")
                emit = EmitMode::fcn;
            else if (mode == "timeseries")
                emit = EmitMode::timeseries;
            else if (mode == "both")
                emit = EmitMode::both;
            else
                throw ConfigError("synth.emit: unknown mode '" + mode + "'");
        } else
            throw ConfigError("synth: unknown key \"" + key + "\"");
    }
}

void parse_explain(const nlohmann::json& j, ExplainConfig& e) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        std::string where = "explain." + key;
        if (key == "target_class")
            e.target_class = get_as<int>(it.value(), where);
        else if (key == "use_probability")
            e.use_probability = get_as<bool>(it.value(), where);
        else
            throw ConfigError("explain: unknown key \"" + key + "\"");
    }
}

}  // namespace

AppConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    AppConfig cfg;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (!it.value().is_object())
            throw ConfigError("config: section \"" + key + "\" must be an object");
        if (key == "model")
            cfg.model = io::model_config_from_json(it.value());
        else if (key == "train")
            parse_train(it.value(), cfg.train);
        else if (key == "synth")
            parse_synth(it.value(), cfg.synth, cfg.emit);
        else if (key == "explain")
            parse_explain(it.value(), cfg.explain);
        else
            throw ConfigError("config: unknown section \"" + key + "\"");
    }
    return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(path));
    } catch (const DataError&) {
        throw ConfigError("config: cannot open " + path.string());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    AppConfig cfg = parse_config(j);
    cfg.model.validate();
    cfg.train.validate();
    cfg.synth.validate();
    if (cfg.explain.target_class < 0 || cfg.explain.target_class >= cfg.model.num_classes)
        throw ConfigError("explain.target_class: outside class range");
    return cfg;
}

nlohmann::json to_json(const AppConfig& cfg) {
    const char* emit = cfg.emit == EmitMode::fcn          ? "fcn"
                       : cfg.emit == EmitMode::timeseries ? "timeseries"
                                                          : "both";
    return nlohmann::json{
        {"model", io::model_config_to_json(cfg.model)},
        {"train",
         {{"epochs", cfg.train.epochs},
          {"learning_rate", cfg.train.learning_rate},
          {"batch_size", cfg.train.batch_size},
          {"weight_decay", cfg.train.weight_decay},
          {"adam_beta1", cfg.train.adam_beta1},
          {"adam_beta2", cfg.train.adam_beta2},
          {"adam_eps", cfg.train.adam_eps},
          {"seed", cfg.train.seed},
          {"repeats", cfg.train.repeats},
          {"test_fraction", cfg.train.test_fraction},
          {"decoupled_weight_decay", cfg.train.decoupled_weight_decay}}},
        {"synth",
         {{"scales", cfg.synth.scales},
          {"modules", cfg.synth.modules},
          {"timepoints", cfg.synth.timepoints},
          {"samples_per_class", cfg.synth.samples_per_class},
          {"delta", cfg.synth.delta},
          {"sigma", cfg.synth.sigma},
          {"seed", cfg.synth.seed},
          {"voxels_per_roi", cfg.synth.voxels_per_roi},
          {"emit", emit}}},
        {"explain",
         {{"target_class", cfg.explain.target_class},
          {"use_probability", cfg.explain.use_probability}}},
    };
}

}  // namespace mahgcn::config
