#include "mahgcn/model.hpp"

#include <cmath>
#include <numeric>

namespace mahgcn::model {

void ModelConfig::validate() const {
    if (scales.empty()) throw ConfigError("model.scales: need at least one scale");
    for (std::size_t k = 0; k < scales.size(); ++k) {
        if (scales[k] <= 0) throw ConfigError("model.scales: scales must be positive");
        if (k > 0 && scales[k] >= scales[k - 1])
            throw ConfigError("model.scales: scales must be strictly descending");
    }
    if (variant == Variant::mahgcn && scales.size() < 2)
        throw ConfigError("model.variant: mahgcn needs at least two scales");
    if (variant == Variant::gcn && scales.size() != 1)
        throw ConfigError("model.variant: gcn is single-scale; configure exactly one scale");
    if (hidden_units < 1) throw ConfigError("model.hidden_units: must be >= 1");
    if (num_classes != 2) throw ConfigError("model.num_classes: only binary heads are supported");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ConfigError("model.dropout_rate: must lie in [0, 1)");
    if (th < 0.0 || th >= 1.0) throw ConfigError("model.th: must lie in [0, 1)");
}

int ModelConfig::fused_length() const {
    if (!skip_connections) return scales.back();
    return std::accumulate(scales.begin(), scales.end(), 0);
}

int theta_in_channels(const ModelConfig& cfg, int scale_index) {
    if (cfg.variant == Variant::magcn) return cfg.scales[static_cast<std::size_t>(scale_index)];
    return scale_index == 0 ? cfg.scales.front() : 1;
}

void MahgcnParams::validate(const ModelConfig& cfg) const {
    if (gcn_theta.size() != cfg.scales.size())
        throw ShapeError("params: " + std::to_string(gcn_theta.size()) + " theta kernels for " +
                         std::to_string(cfg.scales.size()) + " scales");
    for (std::size_t k = 0; k < gcn_theta.size(); ++k) {
        int ch = theta_in_channels(cfg, static_cast<int>(k));
        if (gcn_theta[k].rows() != ch || gcn_theta[k].cols() != 1)
            throw ShapeError("params: gcn." + std::to_string(k) + ".theta must be " +
                             std::to_string(ch) + "x1, got " + gcn_theta[k].shape_str());
    }
    int fused = cfg.fused_length();
    if (fl1_w.rows() != fused || fl1_w.cols() != cfg.hidden_units)
        throw ShapeError("params: fl1.w must be " + std::to_string(fused) + "x" +
                         std::to_string(cfg.hidden_units) + ", got " + fl1_w.shape_str());
    auto want_row = [&](const Tensor2D& t, int n, const char* name) {
        if (t.rows() != 1 || t.cols() != n)
            throw ShapeError(std::string("params: ") + name + " must be 1x" + std::to_string(n) +
                             ", got " + t.shape_str());
    };
    want_row(fl1_b, cfg.hidden_units, "fl1.b");
    want_row(bn_gamma, cfg.hidden_units, "bn1.gamma");
    want_row(bn_beta, cfg.hidden_units, "bn1.beta");
    want_row(bn_run_mean, cfg.hidden_units, "bn1.run_mean");
    want_row(bn_run_var, cfg.hidden_units, "bn1.run_var");
    if (fl2_w.rows() != cfg.hidden_units || fl2_w.cols() != cfg.num_classes)
        throw ShapeError("params: fl2.w must be " + std::to_string(cfg.hidden_units) + "x" +
                         std::to_string(cfg.num_classes) + ", got " + fl2_w.shape_str());
    want_row(fl2_b, cfg.num_classes, "fl2.b");
}

namespace {

Tensor2D glorot_uniform(int fan_in, int fan_out, int rows, int cols, Rng& rng) {
    double b = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor2D t(rows, cols);
    for (double& v : t.data()) v = rng.uniform(-b, b);
    return t;
}

}  // namespace

MahgcnParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng = derive_stream(seed, seed_role::init);
    MahgcnParams p;
    for (std::size_t k = 0; k < cfg.scales.size(); ++k) {
        int ch = theta_in_channels(cfg, static_cast<int>(k));
        p.gcn_theta.push_back(glorot_uniform(ch, 1, ch, 1, rng));
    }
    int fused = cfg.fused_length();
    p.fl1_w = glorot_uniform(fused, cfg.hidden_units, fused, cfg.hidden_units, rng);
    p.fl1_b = Tensor2D(1, cfg.hidden_units, 0.0);
    p.bn_gamma = Tensor2D(1, cfg.hidden_units, 1.0);
    p.bn_beta = Tensor2D(1, cfg.hidden_units, 0.0);
    p.bn_run_mean = Tensor2D(1, cfg.hidden_units, 0.0);
    p.bn_run_var = Tensor2D(1, cfg.hidden_units, 1.0);
    p.fl2_w = glorot_uniform(cfg.hidden_units, cfg.num_classes, cfg.hidden_units, cfg.num_classes, rng);
    p.fl2_b = Tensor2D(1, cfg.num_classes, 0.0);
    return p;
}

ValueId gcn_forward(GradTape& tape, ValueId s_norm, ValueId h, ValueId theta) {
    // relu(S (h theta)); right-to-left association keeps the one-hot case cheap
    return tape.relu(tape.matmul(s_norm, tape.matmul(h, theta)));
}

namespace detail {

ParamLeaves register_leaves(GradTape& tape, const MahgcnParams& params) {
    ParamLeaves l;
    for (const Tensor2D& th : params.gcn_theta) l.theta.push_back(tape.leaf(th));
    l.fl1_w = tape.leaf(params.fl1_w);
    l.fl1_b = tape.leaf(params.fl1_b);
    l.bn_gamma = tape.leaf(params.bn_gamma);
    l.bn_beta = tape.leaf(params.bn_beta);
    l.fl2_w = tape.leaf(params.fl2_w);
    l.fl2_b = tape.leaf(params.fl2_b);
    return l;
}

std::vector<ValueId> make_onehots(GradTape& tape, const ModelConfig& cfg) {
    std::vector<ValueId> ids(cfg.scales.size());
    if (cfg.variant == Variant::magcn) {
        for (std::size_t k = 0; k < cfg.scales.size(); ++k)
            ids[k] = tape.constant(Tensor2D::identity(cfg.scales[k]));
    } else {
        ids[0] = tape.constant(Tensor2D::identity(cfg.scales.front()));
    }
    return ids;
}

void check_maps(const ModelConfig& cfg, const std::vector<atlas::MappingMatrix>& maps) {
    if (cfg.scales.size() < 2) return;
    if (maps.size() != cfg.scales.size() - 1)
        throw ConfigError("forward: need " + std::to_string(cfg.scales.size() - 1) +
                          " mapping matrices, got " + std::to_string(maps.size()));
    for (std::size_t k = 0; k + 1 < cfg.scales.size(); ++k)
        if (maps[k].fine_scale != cfg.scales[k] || maps[k].coarse_scale != cfg.scales[k + 1])
            throw ConfigError("forward: missing mapping matrix for pair " +
                              std::to_string(cfg.scales[k]) + "->" +
                              std::to_string(cfg.scales[k + 1]));
}

StackOutput subject_stack(GradTape& tape, const ModelConfig& cfg, const ParamLeaves& leaves,
                          const std::vector<ValueId>& onehots,
                          const std::vector<Tensor2D>& snorms,
                          const std::vector<atlas::MappingMatrix>* maps, Mode mode,
                          Rng* dropout_rng) {
    std::size_t n = cfg.scales.size();
    if (snorms.size() != n)
        throw ShapeError("forward: expected " + std::to_string(n) + " graph operators, got " +
                         std::to_string(snorms.size()));

    if (cfg.variant != Variant::magcn && n > 1 &&
        (maps == nullptr || maps->size() != n - 1))
        throw ConfigError("forward: hierarchical stack needs one mapping matrix per "
                          "consecutive scale pair");

    StackOutput out;
    std::vector<ValueId> dropped(n);
    for (std::size_t k = 0; k < n; ++k) {
        ValueId s = tape.constant(snorms[k]);
        ValueId input;
        if (cfg.variant == Variant::magcn || k == 0) {
            input = onehots[cfg.variant == Variant::magcn ? k : 0];
        } else {
            input = atlas::pool(tape, (*maps)[k - 1], dropped[k - 1], cfg.pooling_scheme);
        }
        ValueId h = gcn_forward(tape, s, input, leaves.theta[k]);
        out.h_ids.push_back(h);
        dropped[k] = tape.dropout(h, cfg.dropout_rate, mode, dropout_rng);
    }
    if (cfg.skip_connections) {
        std::vector<ValueId> parts(dropped.begin(), dropped.end());
        out.head_input = tape.concat_cols_as_stack(parts);
    } else {
        out.head_input = dropped.back();
    }
    return out;
}

HeadOutput head_forward(GradTape& tape, const ModelConfig& cfg, const ParamLeaves& leaves,
                        Tensor2D& bn_run_mean, Tensor2D& bn_run_var, ValueId fused_rows,
                        Mode mode) {
    ValueId a = tape.add_row(tape.matmul(fused_rows, leaves.fl1_w), leaves.fl1_b);
    ValueId bn = tape.batchnorm(a, leaves.bn_gamma, leaves.bn_beta, bn_run_mean, bn_run_var, mode);
    ValueId act = tape.relu(bn);
    HeadOutput h;
    h.logits = tape.add_row(tape.matmul(act, leaves.fl2_w), leaves.fl2_b);
    if (tape.value(h.logits).cols() != cfg.num_classes)
        throw ShapeError("head_forward: logits have " +
                         std::to_string(tape.value(h.logits).cols()) + " columns for " +
                         std::to_string(cfg.num_classes) + " classes");
    h.probs = tape.softmax_row(h.logits);
    return h;
}

std::vector<Tensor2D> normalized_operators(const ModelConfig& cfg,
                                           const connectome::ScaleStack& stack) {
    stack.validate();
    if (stack.scales != cfg.scales)
        throw ConfigError("forward: stack scales do not match the configured scales");
    std::vector<Tensor2D> snorms;
    snorms.reserve(stack.fcns.size());
    for (const auto& fcn : stack.fcns)
        snorms.push_back(connectome::normalize_adjacency(fcn, cfg.degree_mode));
    return snorms;
}

ForwardTrace forward_single(const ModelConfig& cfg, const MahgcnParams& params,
                            const std::vector<Tensor2D>& snorms,
                            const std::vector<atlas::MappingMatrix>* maps, Mode mode,
                            Rng* dropout_rng) {
    params.validate(cfg);
    ForwardTrace trace;
    trace.mode = mode;
    ParamLeaves leaves = register_leaves(trace.tape, params);
    std::vector<ValueId> onehots = make_onehots(trace.tape, cfg);
    StackOutput stack =
        subject_stack(trace.tape, cfg, leaves, onehots, snorms, maps, mode, dropout_rng);

    // eval mode never touches the running stats; train mode on one subject is
    // rejected by batchnorm itself
    Tensor2D rm = params.bn_run_mean;
    Tensor2D rv = params.bn_run_var;
    ValueId row = trace.tape.transpose(stack.head_input);
    HeadOutput head = head_forward(trace.tape, cfg, leaves, rm, rv, row, mode);

    trace.h_ids = stack.h_ids;
    trace.fused_id = stack.head_input;
    trace.logits_id = head.logits;
    trace.probs_id = head.probs;
    for (ValueId h : trace.h_ids) trace.h.push_back(trace.tape.value(h));
    trace.fused = trace.tape.value(trace.fused_id);
    trace.logits = trace.tape.value(trace.logits_id);
    trace.probs = trace.tape.value(trace.probs_id);
    return trace;
}

}  // namespace detail

ForwardTrace mahgcn_forward(const ModelConfig& cfg, const MahgcnParams& params,
                            const connectome::ScaleStack& stack,
                            const std::vector<atlas::MappingMatrix>& maps, Mode mode,
                            Rng* dropout_rng) {
    cfg.validate();
    if (cfg.variant != Variant::mahgcn)
        throw ConfigError("mahgcn_forward: config variant is not mahgcn");
    detail::check_maps(cfg, maps);
    return detail::forward_single(cfg, params, detail::normalized_operators(cfg, stack), &maps,
                                  mode, dropout_rng);
}

ForwardTrace magcn_forward(const ModelConfig& cfg, const MahgcnParams& params,
                           const connectome::ScaleStack& stack, Mode mode, Rng* dropout_rng) {
    cfg.validate();
    if (cfg.variant != Variant::magcn)
        throw ConfigError("magcn_forward: config variant is not magcn");
    return detail::forward_single(cfg, params, detail::normalized_operators(cfg, stack), nullptr,
                                  mode, dropout_rng);
}

ForwardTrace single_gcn_forward(const ModelConfig& cfg, const MahgcnParams& params,
                                const connectome::FcnMatrix& fcn, Mode mode, Rng* dropout_rng) {
    cfg.validate();
    if (cfg.variant != Variant::gcn)
        throw ConfigError("single_gcn_forward: config variant is not gcn");
    connectome::ScaleStack stack;
    stack.scales = cfg.scales;
    stack.fcns = {fcn};
    return detail::forward_single(cfg, params, detail::normalized_operators(cfg, stack), nullptr,
                                  mode, dropout_rng);
}

}  // namespace mahgcn::model
