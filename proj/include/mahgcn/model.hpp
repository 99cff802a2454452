#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mahgcn/atlas.hpp"
#include "mahgcn/common.hpp"
#include "mahgcn/connectome.hpp"
#include "mahgcn/rng.hpp"
#include "mahgcn/tape.hpp"

namespace mahgcn::model {

enum class Variant { mahgcn, magcn, gcn };

struct ModelConfig {
    std::vector<int> scales = {500, 400, 300, 200, 100};
    atlas::PoolScheme pooling_scheme = atlas::PoolScheme::sum;
    double th = 0.0;
    double dropout_rate = 0.3;
    bool skip_connections = true;
    int hidden_units = 64;
    int num_classes = 2;
    connectome::DegreeMode degree_mode = connectome::DegreeMode::raw;
    Variant variant = Variant::mahgcn;

    void validate() const;
    // length of the classifier head input: all scales with skip connections,
    // only the coarsest without
    int fused_length() const;
};

// All trainable weights plus the batch-norm running stats. Theta shapes by
// variant: mahgcn uses scales[0]x1 for the first layer and 1x1 afterwards
// (pooled features are single-channel); magcn uses scales[k]x1 per scale
// (one-hot input at every scale); gcn is the single-scale case.
struct MahgcnParams {
    std::vector<Tensor2D> gcn_theta;
    Tensor2D fl1_w, fl1_b;
    Tensor2D bn_gamma, bn_beta, bn_run_mean, bn_run_var;
    Tensor2D fl2_w, fl2_b;

    void validate(const ModelConfig& cfg) const;
};

// Per-scale input channel count for the GCN kernel.
int theta_in_channels(const ModelConfig& cfg, int scale_index);

// Glorot-uniform weights (b = sqrt(6/(fan_in+fan_out))), zero biases,
// gamma=1/beta=0, running stats (0, 1). Bit-deterministic per seed.
MahgcnParams init_params(const ModelConfig& cfg, std::uint64_t seed);

// Forward pass of one subject with every intermediate the explainability
// pass needs still alive on the tape.
struct ForwardTrace {
    GradTape tape;
    Mode mode = Mode::eval;
    std::vector<ValueId> h_ids;  // per scale, post-ReLU GCN output (R_k x 1)
    ValueId fused_id{}, logits_id{}, probs_id{};
    std::vector<Tensor2D> h;
    Tensor2D fused, logits, probs;
};

// One graph convolution: relu(s_norm * h * theta), recorded on the tape.
ValueId gcn_forward(GradTape& tape, ValueId s_norm, ValueId h, ValueId theta);

// Hierarchical stack across all configured scales, atlas-guided pooling
// between them, head over the (optionally skip-concatenated) outputs.
// `maps` carries one mapping matrix per consecutive configured scale pair.
ForwardTrace mahgcn_forward(const ModelConfig& cfg, const MahgcnParams& params,
                            const connectome::ScaleStack& stack,
                            const std::vector<atlas::MappingMatrix>& maps, Mode mode,
                            Rng* dropout_rng = nullptr);

// Independent per-scale GCNs, no pooling, same head.
ForwardTrace magcn_forward(const ModelConfig& cfg, const MahgcnParams& params,
                           const connectome::ScaleStack& stack, Mode mode,
                           Rng* dropout_rng = nullptr);

// Single-scale baseline: one GCN then the two-layer head.
ForwardTrace single_gcn_forward(const ModelConfig& cfg, const MahgcnParams& params,
                                const connectome::FcnMatrix& fcn, Mode mode,
                                Rng* dropout_rng = nullptr);

namespace detail {

struct ParamLeaves {
    std::vector<ValueId> theta;
    ValueId fl1_w{}, fl1_b{}, bn_gamma{}, bn_beta{}, fl2_w{}, fl2_b{};
};

ParamLeaves register_leaves(GradTape& tape, const MahgcnParams& params);

// Per-subject stack through all configured scales; returns the per-scale
// post-ReLU outputs and the head input column vector.
struct StackOutput {
    std::vector<ValueId> h_ids;
    ValueId head_input{};
};
StackOutput subject_stack(GradTape& tape, const ModelConfig& cfg, const ParamLeaves& leaves,
                          const std::vector<ValueId>& onehots,
                          const std::vector<Tensor2D>& snorms,
                          const std::vector<atlas::MappingMatrix>* maps, Mode mode,
                          Rng* dropout_rng);

// Identity feature constants for whichever scales the variant consumes.
std::vector<ValueId> make_onehots(GradTape& tape, const ModelConfig& cfg);

struct HeadOutput {
    ValueId logits{}, probs{};
};
HeadOutput head_forward(GradTape& tape, const ModelConfig& cfg, const ParamLeaves& leaves,
                        Tensor2D& bn_run_mean, Tensor2D& bn_run_var, ValueId fused_rows,
                        Mode mode);

// Normalized graph operators for the configured scales of one subject.
std::vector<Tensor2D> normalized_operators(const ModelConfig& cfg,
                                           const connectome::ScaleStack& stack);

// Shared engine behind the public forwards; no variant arity guard so tests
// can cross-check variants against each other.
ForwardTrace forward_single(const ModelConfig& cfg, const MahgcnParams& params,
                            const std::vector<Tensor2D>& snorms,
                            const std::vector<atlas::MappingMatrix>* maps, Mode mode,
                            Rng* dropout_rng);

void check_maps(const ModelConfig& cfg, const std::vector<atlas::MappingMatrix>& maps);

}  // namespace detail

}  // namespace mahgcn::model
