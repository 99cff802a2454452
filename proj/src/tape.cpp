#include "mahgcn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace mahgcn {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

void add_into(Tensor2D& dst, const Tensor2D& src) {
    auto d = dst.data();
    auto s = src.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

GradTape::Node& GradTape::node(ValueId id) {
    if (id.idx < 0 || id.idx >= static_cast<int>(nodes_.size()))
        throw UsageError("GradTape: value id does not belong to this tape");
    return nodes_[static_cast<std::size_t>(id.idx)];
}

const GradTape::Node& GradTape::node(ValueId id) const {
    if (id.idx < 0 || id.idx >= static_cast<int>(nodes_.size()))
        throw UsageError("GradTape: value id does not belong to this tape");
    return nodes_[static_cast<std::size_t>(id.idx)];
}

Tensor2D& GradTape::grad_buffer(ValueId id) { return node(id).grad; }

ValueId GradTape::push(Tensor2D value, bool requires_grad, std::function<void(GradTape&)> backfn) {
    ensure_finite(value, "tape");
    Node n;
    if (requires_grad) n.grad = Tensor2D(value.rows(), value.cols(), 0.0);
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.backfn = std::move(backfn);
    nodes_.push_back(std::move(n));
    return ValueId{static_cast<int>(nodes_.size()) - 1};
}

ValueId GradTape::leaf(Tensor2D v) {
    ValueId id = push(std::move(v), true, nullptr);
    node(id).is_leaf = true;
    return id;
}

ValueId GradTape::constant(Tensor2D v) { return push(std::move(v), false, nullptr); }

const Tensor2D& GradTape::grad(ValueId id) const {
    const Node& n = node(id);
    if (!n.requires_grad)
        throw UsageError("GradTape::grad: gradient not tracked for this node");
    return n.grad;
}

ValueId GradTape::matmul(ValueId a, ValueId b) {
    const Tensor2D& av = value(a);
    const Tensor2D& bv = value(b);
    Tensor2D out = mahgcn::matmul(av, bv);  // shape-checked there
    bool rg = node(a).requires_grad || node(b).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [a, b, self](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        const Tensor2D& av = t.value(a);
        const Tensor2D& bv = t.value(b);
        if (t.node(a).requires_grad) {
            // ga += g * b^T
            Tensor2D& ga = t.grad_buffer(a);
            for (int i = 0; i < ga.rows(); ++i)
                for (int k = 0; k < ga.cols(); ++k) {
                    double acc = 0.0;
                    for (int j = 0; j < g.cols(); ++j) acc += g(i, j) * bv(k, j);
                    ga(i, k) += acc;
                }
        }
        if (t.node(b).requires_grad) {
            // gb += a^T * g
            Tensor2D& gb = t.grad_buffer(b);
            for (int i = 0; i < av.rows(); ++i)
                for (int k = 0; k < gb.rows(); ++k) {
                    double aik = av(i, k);
                    if (aik == 0.0) continue;
                    for (int j = 0; j < g.cols(); ++j) gb(k, j) += aik * g(i, j);
                }
        }
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::add(ValueId a, ValueId b) {
    const Tensor2D& av = value(a);
    const Tensor2D& bv = value(b);
    if (!av.same_shape(bv))
        throw ShapeError("add: shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
    Tensor2D out = av;
    add_into(out, bv);
    bool rg = node(a).requires_grad || node(b).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [a, b, self](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        if (t.node(a).requires_grad) add_into(t.grad_buffer(a), g);
        if (t.node(b).requires_grad) add_into(t.grad_buffer(b), g);
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::add_row(ValueId m, ValueId row) {
    const Tensor2D& mv = value(m);
    const Tensor2D& rv = value(row);
    if (rv.rows() != 1 || rv.cols() != mv.cols())
        throw ShapeError("add_row: bias must be 1x" + std::to_string(mv.cols()) + ", got " +
                         rv.shape_str());
    Tensor2D out = mv;
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out(i, j) += rv(0, j);
    bool rg = node(m).requires_grad || node(row).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [m, row, self](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        if (t.node(m).requires_grad) add_into(t.grad_buffer(m), g);
        if (t.node(row).requires_grad) {
            Tensor2D& gr = t.grad_buffer(row);
            for (int i = 0; i < g.rows(); ++i)
                for (int j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
        }
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::scale(ValueId x, double alpha) {
    Tensor2D out = value(x);
    for (double& v : out.data()) v *= alpha;
    bool rg = node(x).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [x, alpha, self](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        Tensor2D& gx = t.grad_buffer(x);
        auto gd = g.data();
        auto xd = gx.data();
        for (std::size_t i = 0; i < gd.size(); ++i) xd[i] += alpha * gd[i];
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::relu(ValueId x) {
    Tensor2D out = value(x);
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    bool rg = node(x).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [x, self](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        const Tensor2D& xv = t.value(x);
        Tensor2D& gx = t.grad_buffer(x);
        auto gd = g.data();
        auto xd = xv.data();
        auto od = gx.data();
        // subgradient at 0 fixed to 0
        for (std::size_t i = 0; i < gd.size(); ++i)
            if (xd[i] > 0.0) od[i] += gd[i];
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::softmax_row(ValueId x) {
    const Tensor2D& xv = value(x);
    Tensor2D out(xv.rows(), xv.cols());
    for (int i = 0; i < xv.rows(); ++i) {
        double mx = xv(i, 0);
        for (int j = 1; j < xv.cols(); ++j) mx = std::max(mx, xv(i, j));
        double denom = 0.0;
        for (int j = 0; j < xv.cols(); ++j) denom += std::exp(xv(i, j) - mx);
        for (int j = 0; j < xv.cols(); ++j) out(i, j) = std::exp(xv(i, j) - mx) / denom;
    }
    bool rg = node(x).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [x, self](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        const Tensor2D& p = t.node(self).value;
        Tensor2D& gx = t.grad_buffer(x);
        for (int i = 0; i < p.rows(); ++i) {
            double dot = 0.0;
            for (int j = 0; j < p.cols(); ++j) dot += g(i, j) * p(i, j);
            for (int j = 0; j < p.cols(); ++j) gx(i, j) += p(i, j) * (g(i, j) - dot);
        }
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::transpose(ValueId x) {
    Tensor2D out = mahgcn::transpose(value(x));
    bool rg = node(x).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [x, self](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        Tensor2D& gx = t.grad_buffer(x);
        for (int i = 0; i < g.rows(); ++i)
            for (int j = 0; j < g.cols(); ++j) gx(j, i) += g(i, j);
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::sum(ValueId x) {
    const Tensor2D& xv = value(x);
    double total = 0.0;
    for (double v : xv.data()) total += v;
    Tensor2D out(1, 1, total);
    bool rg = node(x).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [x, self](GradTape& t) {
        double g = t.node(self).grad(0, 0);
        Tensor2D& gx = t.grad_buffer(x);
        for (double& v : gx.data()) v += g;
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::pick(ValueId x, int r, int c) {
    const Tensor2D& xv = value(x);
    if (r < 0 || r >= xv.rows() || c < 0 || c >= xv.cols())
        throw ShapeError("pick: index (" + std::to_string(r) + "," + std::to_string(c) +
                         ") out of range for " + xv.shape_str());
    Tensor2D out(1, 1, xv(r, c));
    bool rg = node(x).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [x, r, c, self](GradTape& t) {
        t.grad_buffer(x)(r, c) += t.node(self).grad(0, 0);
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::gather(ValueId x, int out_rows, const std::vector<int>& row_indices) {
    const Tensor2D& xv = value(x);
    int cols = xv.cols();
    if (out_rows <= 0 || static_cast<int>(row_indices.size()) != out_rows * cols)
        throw ShapeError("gather: need out_rows*cols row indices");
    Tensor2D out(out_rows, cols);
    for (int j = 0; j < out_rows; ++j)
        for (int c = 0; c < cols; ++c) {
            int src = row_indices[static_cast<std::size_t>(j) * cols + c];
            if (src < 0 || src >= xv.rows())
                throw ShapeError("gather: row index " + std::to_string(src) + " out of range");
            out(j, c) = xv(src, c);
        }
    bool rg = node(x).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [x, row_indices, self](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        Tensor2D& gx = t.grad_buffer(x);
        for (int j = 0; j < g.rows(); ++j)
            for (int c = 0; c < g.cols(); ++c)
                gx(row_indices[static_cast<std::size_t>(j) * g.cols() + c], c) += g(j, c);
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::linear_pool(ValueId x, Tensor2D forward_value,
                              const std::vector<std::vector<int>>& groups, bool average) {
    if (forward_value.rows() != static_cast<int>(groups.size()) ||
        forward_value.cols() != value(x).cols())
        throw ShapeError("linear_pool: forward value shape does not match groups");
    bool rg = node(x).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [x, groups, average, self](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        Tensor2D& gx = t.grad_buffer(x);
        for (int j = 0; j < g.rows(); ++j) {
            const auto& members = groups[static_cast<std::size_t>(j)];
            if (members.empty()) continue;
            double w = average ? 1.0 / static_cast<double>(members.size()) : 1.0;
            for (int c = 0; c < g.cols(); ++c) {
                double gv = g(j, c) * w;
                for (int i : members) gx(i, c) += gv;
            }
        }
    };
    return push(std::move(forward_value), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::dropout(ValueId x, double rate, Mode mode, Rng* rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw ConfigError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
    if (mode == Mode::eval || rate == 0.0) return x;
    if (rng == nullptr) throw UsageError("dropout: train mode needs an rng stream");
    const Tensor2D& xv = value(x);
    double keep_scale = 1.0 / (1.0 - rate);
    std::vector<double> mask(xv.size());
    for (double& m : mask) m = rng->uniform() >= rate ? keep_scale : 0.0;
    Tensor2D out = xv;
    {
        auto od = out.data();
        for (std::size_t i = 0; i < od.size(); ++i) od[i] *= mask[i];
    }
    bool rg = node(x).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [x, mask = std::move(mask), self](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        Tensor2D& gx = t.grad_buffer(x);
        auto gd = g.data();
        auto od = gx.data();
        for (std::size_t i = 0; i < gd.size(); ++i) od[i] += gd[i] * mask[i];
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::batchnorm(ValueId x, ValueId gamma, ValueId beta,
                            Tensor2D& run_mean, Tensor2D& run_var, Mode mode) {
    const Tensor2D& xv = value(x);
    const Tensor2D& gv = value(gamma);
    const Tensor2D& bv = value(beta);
    int batch = xv.rows();
    int feats = xv.cols();
    if (gv.rows() != 1 || gv.cols() != feats || bv.rows() != 1 || bv.cols() != feats)
        throw ShapeError("batchnorm: gamma/beta must be 1x" + std::to_string(feats));
    if (run_mean.cols() != feats || run_var.cols() != feats)
        throw ShapeError("batchnorm: running stats must be 1x" + std::to_string(feats));

    std::vector<double> mean(feats), istd(feats);
    std::vector<bool> floored(feats, false);
    if (mode == Mode::train) {
        if (batch < 2)
            throw DataError("batchnorm: train mode needs batch >= 2, got " + std::to_string(batch));
        for (int j = 0; j < feats; ++j) {
            double m = 0.0;
            for (int i = 0; i < batch; ++i) m += xv(i, j);
            m /= batch;
            double var = 0.0;
            for (int i = 0; i < batch; ++i) {
                double d = xv(i, j) - m;
                var += d * d;
            }
            var /= batch;
            double used = var;
            if (var < kBnEps) {
                used = kBnEps;
                floored[j] = true;
            }
            mean[j] = m;
            istd[j] = 1.0 / std::sqrt(used);
            // running stats: unbiased variance, momentum 0.1
            double unbiased = batch > 1 ? var * batch / (batch - 1) : var;
            run_mean(0, j) = (1.0 - kBnMomentum) * run_mean(0, j) + kBnMomentum * m;
            run_var(0, j) = (1.0 - kBnMomentum) * run_var(0, j) + kBnMomentum * unbiased;
        }
    } else {
        for (int j = 0; j < feats; ++j) {
            mean[j] = run_mean(0, j);
            istd[j] = 1.0 / std::sqrt(std::max(run_var(0, j), kBnEps));
        }
    }

    Tensor2D xhat(batch, feats);
    Tensor2D out(batch, feats);
    for (int i = 0; i < batch; ++i)
        for (int j = 0; j < feats; ++j) {
            xhat(i, j) = (xv(i, j) - mean[j]) * istd[j];
            out(i, j) = gv(0, j) * xhat(i, j) + bv(0, j);
        }

    bool rg = node(x).requires_grad || node(gamma).requires_grad || node(beta).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    bool train = mode == Mode::train;
    auto back = [x, gamma, beta, self, xhat = std::move(xhat), istd = std::move(istd),
                 floored = std::move(floored), train](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        const Tensor2D& gv = t.value(gamma);
        int batch = g.rows();
        int feats = g.cols();
        if (t.node(beta).requires_grad) {
            Tensor2D& gb = t.grad_buffer(beta);
            for (int j = 0; j < feats; ++j)
                for (int i = 0; i < batch; ++i) gb(0, j) += g(i, j);
        }
        if (t.node(gamma).requires_grad) {
            Tensor2D& gg = t.grad_buffer(gamma);
            for (int j = 0; j < feats; ++j)
                for (int i = 0; i < batch; ++i) gg(0, j) += g(i, j) * xhat(i, j);
        }
        if (t.node(x).requires_grad) {
            Tensor2D& gx = t.grad_buffer(x);
            for (int j = 0; j < feats; ++j) {
                double gm = 0.0, gxh = 0.0;
                for (int i = 0; i < batch; ++i) {
                    gm += g(i, j);
                    gxh += g(i, j) * xhat(i, j);
                }
                gm /= batch;
                gxh /= batch;
                double c = gv(0, j) * istd[j];
                if (!train) {
                    // running stats are constants w.r.t. x
                    for (int i = 0; i < batch; ++i) gx(i, j) += c * g(i, j);
                } else if (floored[j]) {
                    // variance pinned at the floor: only the mean depends on x
                    for (int i = 0; i < batch; ++i) gx(i, j) += c * (g(i, j) - gm);
                } else {
                    for (int i = 0; i < batch; ++i)
                        gx(i, j) += c * (g(i, j) - gm - xhat(i, j) * gxh);
                }
            }
        }
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::concat_cols_as_stack(const std::vector<ValueId>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols_as_stack: no parts");
    int total = 0;
    bool rg = false;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const Tensor2D& p = value(parts[k]);
        if (p.cols() != 1)
            throw ShapeError("concat_cols_as_stack: part " + std::to_string(k) +
                             " must be a column vector, got " + p.shape_str());
        total += p.rows();
        rg = rg || node(parts[k]).requires_grad;
    }
    Tensor2D out(total, 1);
    int off = 0;
    for (ValueId p : parts) {
        const Tensor2D& pv = value(p);
        for (int i = 0; i < pv.rows(); ++i) out(off + i, 0) = pv(i, 0);
        off += pv.rows();
    }
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [parts, self](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        int off = 0;
        for (ValueId p : parts) {
            int n = t.value(p).rows();
            if (t.node(p).requires_grad) {
                Tensor2D& gp = t.grad_buffer(p);
                for (int i = 0; i < n; ++i) gp(i, 0) += g(off + i, 0);
            }
            off += n;
        }
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::concat_rows(const std::vector<ValueId>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no parts");
    int cols = value(parts[0]).cols();
    bool rg = false;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const Tensor2D& p = value(parts[k]);
        if (p.rows() != 1 || p.cols() != cols)
            throw ShapeError("concat_rows: part " + std::to_string(k) + " must be 1x" +
                             std::to_string(cols) + ", got " + p.shape_str());
        rg = rg || node(parts[k]).requires_grad;
    }
    Tensor2D out(static_cast<int>(parts.size()), cols);
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const Tensor2D& pv = value(parts[k]);
        for (int j = 0; j < cols; ++j) out(static_cast<int>(k), j) = pv(0, j);
    }
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [parts, self](GradTape& t) {
        const Tensor2D& g = t.node(self).grad;
        for (std::size_t k = 0; k < parts.size(); ++k) {
            if (!t.node(parts[k]).requires_grad) continue;
            Tensor2D& gp = t.grad_buffer(parts[k]);
            for (int j = 0; j < g.cols(); ++j) gp(0, j) += g(static_cast<int>(k), j);
        }
    };
    return push(std::move(out), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

ValueId GradTape::weighted_cross_entropy(ValueId logits, const std::vector<int>& labels,
                                         const std::vector<double>& class_weights) {
    const Tensor2D& z = value(logits);
    int batch = z.rows();
    int classes = z.cols();
    if (static_cast<int>(labels.size()) != batch)
        throw ShapeError("weighted_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for batch of " + std::to_string(batch));
    for (int y : labels)
        if (y < 0 || y >= classes)
            throw DataError("weighted_cross_entropy: label " + std::to_string(y) +
                            " outside class range");
    if (static_cast<int>(class_weights.size()) != classes)
        throw ShapeError("weighted_cross_entropy: need one weight per class");

    // log-sum-exp form, max-shifted
    Tensor2D probs(batch, classes);
    double loss = 0.0;
    for (int i = 0; i < batch; ++i) {
        double mx = z(i, 0);
        for (int j = 1; j < classes; ++j) mx = std::max(mx, z(i, j));
        double denom = 0.0;
        for (int j = 0; j < classes; ++j) denom += std::exp(z(i, j) - mx);
        double lse = mx + std::log(denom);
        for (int j = 0; j < classes; ++j) probs(i, j) = std::exp(z(i, j) - mx) / denom;
        loss += class_weights[static_cast<std::size_t>(labels[i])] * (lse - z(i, labels[i]));
    }
    loss /= batch;

    bool rg = node(logits).requires_grad;
    ValueId self{static_cast<int>(nodes_.size())};
    auto back = [logits, labels, class_weights, probs = std::move(probs), self](GradTape& t) {
        double g = t.node(self).grad(0, 0);
        Tensor2D& gz = t.grad_buffer(logits);
        int batch = gz.rows();
        int classes = gz.cols();
        for (int i = 0; i < batch; ++i) {
            double w = class_weights[static_cast<std::size_t>(labels[i])] / batch;
            for (int j = 0; j < classes; ++j) {
                double ind = j == labels[i] ? 1.0 : 0.0;
                gz(i, j) += g * w * (probs(i, j) - ind);
            }
        }
    };
    return push(Tensor2D(1, 1, loss), rg, rg ? std::function<void(GradTape&)>(back) : nullptr);
}

void GradTape::backward(ValueId root) {
    const Tensor2D& rv = value(root);
    if (rv.rows() != 1 || rv.cols() != 1)
        throw ShapeError("backward: root must be a 1x1 scalar, got " + rv.shape_str());
    for (Node& n : nodes_)
        if (!n.grad.empty())
            for (double& v : n.grad.data()) v = 0.0;
    Node& r = node(root);
    if (!r.requires_grad) return;  // loss independent of every leaf
    r.grad(0, 0) = 1.0;
    for (int i = root.idx; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.backfn) n.backfn(*this);
    }
}

double grad_check(const std::function<double(const std::vector<double>&)>& f,
                  const std::vector<double>& point,
                  const std::vector<double>& analytic_grad, double step) {
    if (step <= 0.0) throw ConfigError("grad_check: step must be positive");
    if (analytic_grad.size() != point.size())
        throw ShapeError("grad_check: gradient size does not match point size");
    double worst = 0.0;
    std::vector<double> p = point;
    for (std::size_t k = 0; k < p.size(); ++k) {
        double orig = p[k];
        p[k] = orig + step;
        double fp = f(p);
        p[k] = orig - step;
        double fm = f(p);
        p[k] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericError("grad_check: non-finite evaluation at parameter " +
                               std::to_string(k));
        double fd = (fp - fm) / (2.0 * step);
        double a = analytic_grad[k];
        double denom = std::max({1.0, std::fabs(a), std::fabs(fd)});
        worst = std::max(worst, std::fabs(a - fd) / denom);
    }
    return worst;
}

}  // namespace mahgcn
