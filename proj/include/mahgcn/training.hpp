#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mahgcn/atlas.hpp"
#include "mahgcn/common.hpp"
#include "mahgcn/connectome.hpp"
#include "mahgcn/model.hpp"
#include "mahgcn/stats.hpp"

namespace mahgcn::training {

struct TrainConfig {
    int epochs = 100;
    double learning_rate = 0.001;
    int batch_size = 30;
    double weight_decay = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    int repeats = 5;
    double test_fraction = 0.2;
    bool decoupled_weight_decay = false;  // default: L2 coupled into the raw gradient

    void validate() const;
};

struct LabeledSample {
    std::string id;
    int label = 0;  // 0 control, 1 patient
    connectome::ScaleStack stack;
};

struct Dataset {
    std::vector<LabeledSample> samples;
};

// Synthetic hierarchical-connectome task: C latent modules drive nested ROI
// signals; class 1 adds a shared component to two designated modules, raising
// their inter-module correlation at every scale.
struct SynthConfig {
    std::vector<int> scales = {100, 80, 60, 40, 20};
    int modules = 10;
    int timepoints = 120;
    int samples_per_class = 100;
    double delta = 0.8;   // class-effect strength
    double sigma = 1.0;   // per-ROI noise level
    std::uint64_t seed = 0;
    int voxels_per_roi = 1;  // synthetic voxels per finest-scale ROI

    void validate() const;
};

struct SynthOutput {
    Dataset dataset;
    std::vector<atlas::LabelVolume> volumes;  // one per scale, descending
    std::vector<atlas::RsnTable> rsn_tables;  // one per scale
    // per sample, per scale: ROI time series (only when requested)
    std::vector<std::vector<Tensor2D>> timeseries;
};

SynthOutput synth_generate(const SynthConfig& sc, bool keep_timeseries = false);

// w_c = N / N_c over the training labels; both classes must be present.
std::array<double, 2> class_weights(const std::vector<int>& labels);

// Value-level weighted cross entropy (log-sum-exp form), for callers that do
// not need the tape.
double weighted_cross_entropy(const Tensor2D& logits, const std::vector<int>& labels,
                              const std::array<double, 2>& weights);

struct AdamState {
    Tensor2D m, v;
};

// One Adam update for a parameter tensor. Weight decay is coupled L2 by
// default (added to the raw gradient); the decoupled form subtracts
// lr*wd*theta separately when configured.
void adam_step(Tensor2D& theta, const Tensor2D& grad, AdamState& state, int t,
               const TrainConfig& cfg);

// Subject with its per-configured-scale normalized graph operators, computed
// once and shared read-only across folds.
struct PreparedSample {
    const LabeledSample* sample = nullptr;
    std::vector<Tensor2D> snorms;
};

std::vector<PreparedSample> prepare(const Dataset& data, const model::ModelConfig& cfg);

// Mapping matrices for each consecutive configured scale pair, derived from
// the atlas volumes at cfg.th.
std::vector<atlas::MappingMatrix> build_maps(const std::vector<atlas::LabelVolume>& volumes,
                                             const model::ModelConfig& cfg);

struct FoldResult {
    model::MahgcnParams params;
    std::vector<double> epoch_loss;  // per-epoch mean training loss
};

FoldResult train_fold(const model::ModelConfig& mcfg, const TrainConfig& tcfg,
                      const std::vector<const PreparedSample*>& train_samples,
                      const std::vector<atlas::MappingMatrix>& maps, std::uint64_t fold_seed);

struct EvalOutcome {
    std::vector<double> scores;  // P(class 1)
    std::vector<int> labels;
    std::vector<std::string> ids;
};

EvalOutcome evaluate(const model::ModelConfig& mcfg, const model::MahgcnParams& params,
                     const std::vector<const PreparedSample*>& samples,
                     const std::vector<atlas::MappingMatrix>& maps);

struct Split {
    std::vector<int> train_idx, test_idx;
};

// Stratified split: round(test_fraction * N_c) per class into the test set,
// at least one sample of each class on both sides.
Split stratified_split(const std::vector<int>& labels, double test_fraction, Rng& rng);

struct RepeatResult {
    stats::MetricRecord metrics;
    model::MahgcnParams checkpoint;
    std::vector<double> epoch_loss;
    std::vector<std::string> test_ids;
};

// Five (by default) independent stratified 80-20 holdouts. Repeats may run in
// parallel; every repeat derives its own seed streams, so results are
// bit-identical for any jobs count.
std::vector<RepeatResult> holdout_cv(const Dataset& data, const model::ModelConfig& mcfg,
                                     const TrainConfig& tcfg,
                                     const std::vector<atlas::MappingMatrix>& maps,
                                     int jobs = 1);

}  // namespace mahgcn::training
