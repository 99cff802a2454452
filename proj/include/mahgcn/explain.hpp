#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mahgcn/atlas.hpp"
#include "mahgcn/common.hpp"
#include "mahgcn/model.hpp"

namespace mahgcn::explain {

// ReLU-filtered class activation per ROI at one scale.
struct CamVector {
    int scale = 0;
    std::vector<double> values;  // all >= 0
};

// Mean activation per resting-state network at one scale; networks with no
// member ROI are absent rather than zero.
struct RsnProfile {
    int scale = 0;
    std::array<std::optional<double>, 7> mean_activation;  // kRsnNames order
};

// cam_k = relu(d logit[target]/d h_k  ⊙  h_k), one vector per scale. The
// trace must come from an eval-mode forward with its tape still alive. When
// `use_probability` is set the gradient is taken on the softmax output
// instead of the pre-softmax logit.
std::vector<CamVector> grad_cam(model::ForwardTrace& trace, const model::ModelConfig& cfg,
                                int target_class, bool use_probability = false);

// Arithmetic mean of per-subject CAMs, scale by scale.
std::vector<CamVector> group_cam(const std::vector<std::vector<CamVector>>& cams);

// Weighted mean across cross-validation models, weights proportional to each
// model's AUC (normalized to sum 1).
std::vector<CamVector> auc_weighted_cam(const std::vector<std::vector<CamVector>>& group_cams,
                                        const std::vector<double>& aucs);

RsnProfile rsn_profile(const CamVector& cam, const atlas::RsnTable& rsn);

}  // namespace mahgcn::explain
