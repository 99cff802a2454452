#pragma once

#include <functional>
#include <vector>

#include "mahgcn/common.hpp"
#include "mahgcn/rng.hpp"
#include "mahgcn/tensor.hpp"

namespace mahgcn {

// Handle into a GradTape. Only valid for the tape that produced it.
struct ValueId {
    int idx = -1;
    bool valid() const { return idx >= 0; }
};

// Reverse-mode tape over Tensor2D values. Records each primitive with its
// local gradient rule; backward() replays the recorded order in reverse, so
// two runs over the same tape give bit-identical gradients. Gradients are
// accumulated for every node whose subtree contains a leaf; everything else
// is skipped. A tape is confined to one thread.
class GradTape {
public:
    // Trainable parameter; its gradient is readable after backward().
    ValueId leaf(Tensor2D v);
    // Non-trainable input (FCN operators, one-hot features, ...).
    ValueId constant(Tensor2D v);

    ValueId matmul(ValueId a, ValueId b);
    ValueId add(ValueId a, ValueId b);
    // Broadcast a 1xC row over every row of an RxC matrix (bias add).
    ValueId add_row(ValueId m, ValueId row);
    ValueId scale(ValueId x, double alpha);
    ValueId relu(ValueId x);
    ValueId softmax_row(ValueId x);
    ValueId transpose(ValueId x);
    ValueId sum(ValueId x);                  // 1x1
    ValueId pick(ValueId x, int r, int c);   // 1x1

    // Row gather per channel: out(j, c) = x(row_indices[j*cols + c], c), with
    // out_rows rows. Backward scatters into exactly the gathered cells.
    ValueId gather(ValueId x, int out_rows, const std::vector<int>& row_indices);

    // Group accumulation with a caller-computed forward value: row j of the
    // output collects the listed member rows of x; backward scatters the
    // output gradient back to the members, divided by the group size when
    // `average` is set. Used by the pooling layers.
    ValueId linear_pool(ValueId x, Tensor2D forward_value,
                        const std::vector<std::vector<int>>& groups, bool average);

    // Inverted dropout. Train mode zeroes each element with probability
    // `rate` and scales survivors by 1/(1-rate); eval mode is the identity
    // (returns x itself, no node recorded). rate in [0, 1).
    ValueId dropout(ValueId x, double rate, Mode mode, Rng* rng);

    // Per-feature batch normalization over the batch axis (x is batch x
    // features). Train mode standardizes by batch mean and variance (floored
    // at eps), applies gamma/beta and updates the running stats in place with
    // momentum 0.1; it requires batch >= 2. Eval mode uses the running stats
    // and mutates nothing.
    ValueId batchnorm(ValueId x, ValueId gamma, ValueId beta,
                      Tensor2D& run_mean, Tensor2D& run_var, Mode mode);

    // Stack column vectors into one long column, parts in order.
    ValueId concat_cols_as_stack(const std::vector<ValueId>& parts);
    // Stack row vectors (1xC each) into a single matrix, one part per row.
    ValueId concat_rows(const std::vector<ValueId>& parts);

    // Class-weighted cross-entropy of a batch of logits (batch x classes),
    // evaluated in the log-sum-exp form: (1/B) sum_b w[y_b] * (lse(z_b) - z_b[y_b]).
    ValueId weighted_cross_entropy(ValueId logits, const std::vector<int>& labels,
                                   const std::vector<double>& class_weights);

    const Tensor2D& value(ValueId id) const { return node(id).value; }
    const Tensor2D& grad(ValueId id) const;

    // Reverse-mode sweep from a 1x1 root. Clears all gradients first, so the
    // tape can be swept repeatedly (e.g. once per CAM target class).
    void backward(ValueId root);

    std::size_t node_count() const { return nodes_.size(); }

    GradTape() = default;
    GradTape(GradTape&&) = default;
    GradTape& operator=(GradTape&&) = default;
    GradTape(const GradTape&) = delete;
    GradTape& operator=(const GradTape&) = delete;

private:
    struct Node {
        Tensor2D value;
        Tensor2D grad;  // sized lazily on first accumulation
        bool requires_grad = false;
        bool is_leaf = false;
        std::function<void(GradTape&)> backfn;  // pushes this node's grad to parents
    };

    friend struct TapeAccess;

    Node& node(ValueId id);
    const Node& node(ValueId id) const;
    ValueId push(Tensor2D value, bool requires_grad, std::function<void(GradTape&)> backfn);
    void accumulate(ValueId id, int r, int c, double v);
    Tensor2D& grad_buffer(ValueId id);

    std::vector<Node> nodes_;
};

// Central finite-difference check of an analytic gradient. Returns
// max_k |analytic_k - fd_k| / max(1, |analytic_k|, |fd_k|).
double grad_check(const std::function<double(const std::vector<double>&)>& f,
                  const std::vector<double>& point,
                  const std::vector<double>& analytic_grad, double step);

}  // namespace mahgcn
