#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mahgcn/atlas.hpp"
#include "mahgcn/connectome.hpp"
#include "mahgcn/model.hpp"
#include "mahgcn/stats.hpp"
#include "mahgcn/training.hpp"

namespace mahgcn::io {

// All floating text goes through this: %.12g.
std::string fmt_double(double v);

// JSON serializer with %.12g doubles (nlohmann's dump would use shortest
// round-trip formatting, which breaks the byte-stability contract).
std::string dump_json(const nlohmann::json& j, int indent = 2);

// temp-and-rename so readers never observe a half-written file
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// FNV-1a 64-bit digest of a file's bytes, hex-encoded.
std::string fnv1a64_hex(const std::filesystem::path& path);

// ---- matrix / time-series CSV ----
void write_matrix_csv(const std::filesystem::path& path, const Tensor2D& m);
Tensor2D read_matrix_csv(const std::filesystem::path& path);

void write_timeseries_csv(const std::filesystem::path& path, const Tensor2D& values);
connectome::RoiTimeSeries read_timeseries_csv(const std::filesystem::path& path);

// ---- atlas files ----
void write_label_volume(const std::filesystem::path& path, const atlas::LabelVolume& v);
atlas::LabelVolume read_label_volume(const std::filesystem::path& path);

void write_rsn_table(const std::filesystem::path& path, const atlas::RsnTable& t);
atlas::RsnTable read_rsn_table(const std::filesystem::path& path);

void write_overlap_table(const std::filesystem::path& path, const atlas::OverlapTable& t);
void write_mapping_csv(const std::filesystem::path& path, const atlas::MappingMatrix& m);

// ---- model config / checkpoint ----
nlohmann::json model_config_to_json(const model::ModelConfig& cfg);
// `strict` rejects unknown keys (config files); checkpoints parse strictly too.
model::ModelConfig model_config_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const model::ModelConfig& cfg,
                     const model::MahgcnParams& params);

struct Checkpoint {
    model::ModelConfig config;
    model::MahgcnParams params;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

// ---- metrics ----
nlohmann::json metrics_to_json(const std::vector<training::RepeatResult>& repeats,
                               const nlohmann::json& resolved_config, std::uint64_t seed);

struct LoadedRepeat {
    stats::MetricRecord metrics;
    std::vector<std::string> test_ids;
};
struct LoadedMetrics {
    std::vector<LoadedRepeat> repeats;
    nlohmann::json config;
    std::uint64_t seed = 0;
};
LoadedMetrics load_metrics(const std::filesystem::path& path);

// ---- dataset directory ----
// layout: subjects.tsv, labels_<R>.tsv / rsn_<R>.tsv, one directory per
// subject holding fcn_<R>.csv and/or ts_<R>.csv
void save_dataset(const std::filesystem::path& dir, const training::SynthOutput& synth,
                  bool emit_fcn, bool emit_timeseries);

training::Dataset load_dataset(const std::filesystem::path& dir, const std::vector<int>& scales);
std::vector<atlas::LabelVolume> load_atlas_volumes(const std::filesystem::path& dir);
std::vector<atlas::RsnTable> load_rsn_tables(const std::filesystem::path& dir);
std::vector<std::pair<std::string, int>> read_subjects(const std::filesystem::path& dir);

// ---- run manifest ----
struct RunManifest {
    std::string command;
    nlohmann::json resolved_config;
    std::uint64_t base_seed = 0;
    std::vector<std::string> input_files;   // digested at write time
    std::vector<std::string> output_files;
    double wall_seconds = 0.0;
};
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);

}  // namespace mahgcn::io
