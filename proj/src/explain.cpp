#include "mahgcn/explain.hpp"

#include <cmath>

namespace mahgcn::explain {

std::vector<CamVector> grad_cam(model::ForwardTrace& trace, const model::ModelConfig& cfg,
                                int target_class, bool use_probability) {
    if (trace.mode != Mode::eval)
        throw UsageError("grad_cam: trace must come from an eval-mode forward");
    if (trace.h_ids.empty() || trace.tape.node_count() == 0)
        throw UsageError("grad_cam: trace has no retained features");
    if (target_class < 0 || target_class >= cfg.num_classes)
        throw ConfigError("grad_cam: target class " + std::to_string(target_class) +
                          " outside 0.." + std::to_string(cfg.num_classes - 1));

    ValueId root = trace.tape.pick(use_probability ? trace.probs_id : trace.logits_id, 0,
                                   target_class);
    trace.tape.backward(root);

    std::vector<CamVector> cams;
    for (std::size_t k = 0; k < trace.h_ids.size(); ++k) {
        const Tensor2D& grad = trace.tape.grad(trace.h_ids[k]);
        const Tensor2D& feat = trace.tape.value(trace.h_ids[k]);
        CamVector cam;
        cam.scale = cfg.scales[k];
        cam.values.resize(static_cast<std::size_t>(feat.rows()));
        for (int i = 0; i < feat.rows(); ++i) {
            double v = grad(i, 0) * feat(i, 0);
            cam.values[static_cast<std::size_t>(i)] = v > 0.0 ? v : 0.0;
        }
        cams.push_back(std::move(cam));
    }
    return cams;
}

namespace {

void check_aligned(const std::vector<std::vector<CamVector>>& cams, const char* who) {
    for (const auto& subject : cams) {
        if (subject.size() != cams.front().size())
            throw DataError(std::string(who) + ": CAM scale counts differ across inputs");
        for (std::size_t k = 0; k < subject.size(); ++k)
            if (subject[k].scale != cams.front()[k].scale ||
                subject[k].values.size() != cams.front()[k].values.size())
                throw DataError(std::string(who) + ": CAM shapes differ at scale index " +
                                std::to_string(k));
    }
}

}  // namespace

std::vector<CamVector> group_cam(const std::vector<std::vector<CamVector>>& cams) {
    if (cams.empty()) throw DataError("group_cam: empty group");
    check_aligned(cams, "group_cam");
    std::vector<CamVector> out = cams.front();
    for (std::size_t s = 1; s < cams.size(); ++s)
        for (std::size_t k = 0; k < out.size(); ++k)
            for (std::size_t i = 0; i < out[k].values.size(); ++i)
                out[k].values[i] += cams[s][k].values[i];
    for (auto& cam : out)
        for (double& v : cam.values) v /= static_cast<double>(cams.size());
    return out;
}

std::vector<CamVector> auc_weighted_cam(const std::vector<std::vector<CamVector>>& group_cams,
                                        const std::vector<double>& aucs) {
    if (group_cams.empty()) throw DataError("auc_weighted_cam: no models");
    if (group_cams.size() != aucs.size())
        throw DataError("auc_weighted_cam: " + std::to_string(aucs.size()) + " AUCs for " +
                        std::to_string(group_cams.size()) + " models");
    check_aligned(group_cams, "auc_weighted_cam");
    double total = 0.0;
    for (double a : aucs) {
        if (a < 0.0 || a > 1.0)
            throw DataError("auc_weighted_cam: AUC " + std::to_string(a) + " outside [0, 1]");
        total += a;
    }
    if (total <= 0.0) throw DataError("auc_weighted_cam: AUC weights sum to zero");

    std::vector<CamVector> out = group_cams.front();
    for (auto& cam : out)
        for (double& v : cam.values) v = 0.0;
    for (std::size_t m = 0; m < group_cams.size(); ++m) {
        double w = aucs[m] / total;
        for (std::size_t k = 0; k < out.size(); ++k)
            for (std::size_t i = 0; i < out[k].values.size(); ++i)
                out[k].values[i] += w * group_cams[m][k].values[i];
    }
    return out;
}

RsnProfile rsn_profile(const CamVector& cam, const atlas::RsnTable& rsn) {
    if (rsn.scale != cam.scale)
        throw DataError("rsn_profile: RSN table scale " + std::to_string(rsn.scale) +
                        " does not match CAM scale " + std::to_string(cam.scale));
    if (rsn.roi_to_rsn.size() != cam.values.size())
        throw DataError("rsn_profile: RSN table covers " +
                        std::to_string(rsn.roi_to_rsn.size()) + " ROIs, CAM has " +
                        std::to_string(cam.values.size()));

    std::array<double, 7> sums{};
    std::array<long, 7> counts{};
    for (std::size_t i = 0; i < cam.values.size(); ++i) {
        int id = rsn.roi_to_rsn[i];
        if (id < 1 || id > 7)
            throw DataError("rsn_profile: ROI " + std::to_string(i + 1) +
                            " has RSN id " + std::to_string(id) + " outside 1..7");
        sums[static_cast<std::size_t>(id - 1)] += cam.values[i];
        ++counts[static_cast<std::size_t>(id - 1)];
    }
    RsnProfile prof;
    prof.scale = cam.scale;
    for (std::size_t r = 0; r < 7; ++r)
        if (counts[r] > 0) prof.mean_activation[r] = sums[r] / static_cast<double>(counts[r]);
    return prof;
}

}  // namespace mahgcn::explain
