#include "mahgcn/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <cstdio>
#include <numeric>
#include <thread>

namespace mahgcn::training {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train.epochs: must be >= 1");
    if (learning_rate < 0.0) throw ConfigError("train.learning_rate: must be >= 0");
    if (batch_size < 2) throw ConfigError("train.batch_size: must be >= 2");
    if (weight_decay < 0.0) throw ConfigError("train.weight_decay: must be >= 0");
    if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0)
        throw ConfigError("train.adam betas must lie in [0, 1)");
    if (adam_eps <= 0.0) throw ConfigError("train.adam_eps: must be > 0");
    if (repeats < 1) throw ConfigError("train.repeats: must be >= 1");
    if (test_fraction <= 0.0 || test_fraction >= 1.0)
        throw ConfigError("train.test_fraction: must lie in (0, 1)");
}

void SynthConfig::validate() const {
    if (scales.empty()) throw ConfigError("synth.scales: need at least one scale");
    for (std::size_t k = 0; k < scales.size(); ++k) {
        if (scales[k] <= 0) throw ConfigError("synth.scales: scales must be positive");
        if (k > 0 && scales[k] >= scales[k - 1])
            throw ConfigError("synth.scales: scales must be strictly descending");
    }
    if (modules < 2) throw ConfigError("synth.modules: need at least two modules");
    // every scale must group into whole modules so the nesting stays aligned
    for (int s : scales)
        if (s % modules != 0)
            throw ConfigError("synth.scales: scale " + std::to_string(s) +
                              " is not divisible by modules=" + std::to_string(modules));
    if (timepoints < 3) throw ConfigError("synth.timepoints: need at least 3");
    if (samples_per_class < 1) throw ConfigError("synth.samples_per_class: must be >= 1");
    if (sigma < 0.0) throw ConfigError("synth.sigma: must be >= 0");
    if (voxels_per_roi < 1) throw ConfigError("synth.voxels_per_roi: must be >= 1");
}

std::array<double, 2> class_weights(const std::vector<int>& labels) {
    long n0 = 0, n1 = 0;
    for (int y : labels) {
        if (y == 0)
            ++n0;
        else if (y == 1)
            ++n1;
        else
            throw DataError("class_weights: labels must be 0 or 1");
    }
    if (n0 == 0 || n1 == 0) throw DataError("class_weights: both classes must be present");
    double n = static_cast<double>(n0 + n1);
    return {n / static_cast<double>(n0), n / static_cast<double>(n1)};
}

double weighted_cross_entropy(const Tensor2D& logits, const std::vector<int>& labels,
                              const std::array<double, 2>& weights) {
    GradTape tape;
    ValueId z = tape.constant(logits);
    ValueId loss = tape.weighted_cross_entropy(z, labels, {weights[0], weights[1]});
    return tape.value(loss)(0, 0);
}

void adam_step(Tensor2D& theta, const Tensor2D& grad, AdamState& state, int t,
               const TrainConfig& cfg) {
    if (t < 1) throw ConfigError("adam_step: step index starts at 1");
    if (!theta.same_shape(grad))
        throw ShapeError("adam_step: gradient shape " + grad.shape_str() +
                         " does not match parameter " + theta.shape_str());
    if (!grad.all_finite()) throw NumericError("adam_step: non-finite gradient");
    if (state.m.empty()) {
        state.m = Tensor2D(theta.rows(), theta.cols(), 0.0);
        state.v = Tensor2D(theta.rows(), theta.cols(), 0.0);
    }
    double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    double bc1 = 1.0 - std::pow(b1, t);
    double bc2 = 1.0 - std::pow(b2, t);
    auto th = theta.data();
    auto g = grad.data();
    auto m = state.m.data();
    auto v = state.v.data();
    for (std::size_t i = 0; i < th.size(); ++i) {
        double gi = g[i];
        if (!cfg.decoupled_weight_decay) gi += cfg.weight_decay * th[i];
        m[i] = b1 * m[i] + (1.0 - b1) * gi;
        v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        th[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        if (cfg.decoupled_weight_decay) th[i] -= cfg.learning_rate * cfg.weight_decay * th[i];
    }
}

std::vector<PreparedSample> prepare(const Dataset& data, const model::ModelConfig& cfg) {
    std::vector<PreparedSample> out;
    out.reserve(data.samples.size());
    for (const LabeledSample& s : data.samples) {
        PreparedSample p;
        p.sample = &s;
        for (int scale : cfg.scales) {
            auto it = std::find(s.stack.scales.begin(), s.stack.scales.end(), scale);
            if (it == s.stack.scales.end())
                throw DataError("prepare: subject " + s.id + " has no FCN at scale " +
                                std::to_string(scale));
            std::size_t k = static_cast<std::size_t>(it - s.stack.scales.begin());
            p.snorms.push_back(connectome::normalize_adjacency(s.stack.fcns[k], cfg.degree_mode));
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<atlas::MappingMatrix> build_maps(const std::vector<atlas::LabelVolume>& volumes,
                                             const model::ModelConfig& cfg) {
    std::vector<atlas::MappingMatrix> maps;
    auto volume_at = [&](int scale) -> const atlas::LabelVolume& {
        for (const auto& v : volumes)
            if (v.scale == scale) return v;
        throw DataError("build_maps: no atlas volume at scale " + std::to_string(scale));
    };
    for (std::size_t k = 0; k + 1 < cfg.scales.size(); ++k) {
        atlas::OverlapTable t =
            atlas::compute_overlap(volume_at(cfg.scales[k]), volume_at(cfg.scales[k + 1]));
        maps.push_back(atlas::mapping_matrix(t, cfg.th));
    }
    return maps;
}

namespace {

// trainable tensors in canonical checkpoint order
struct ParamRef {
    std::string name;
    Tensor2D* tensor;
};

std::vector<ParamRef> trainable_refs(model::MahgcnParams& p) {
    std::vector<ParamRef> refs;
    for (std::size_t k = 0; k < p.gcn_theta.size(); ++k)
        refs.push_back({"gcn." + std::to_string(k) + ".theta", &p.gcn_theta[k]});
    refs.push_back({"fl1.w", &p.fl1_w});
    refs.push_back({"fl1.b", &p.fl1_b});
    refs.push_back({"bn1.gamma", &p.bn_gamma});
    refs.push_back({"bn1.beta", &p.bn_beta});
    refs.push_back({"fl2.w", &p.fl2_w});
    refs.push_back({"fl2.b", &p.fl2_b});
    return refs;
}

std::vector<ValueId> leaf_ids(const model::detail::ParamLeaves& l) {
    std::vector<ValueId> ids(l.theta.begin(), l.theta.end());
    ids.insert(ids.end(), {l.fl1_w, l.fl1_b, l.bn_gamma, l.bn_beta, l.fl2_w, l.fl2_b});
    return ids;
}

}  // namespace

FoldResult train_fold(const model::ModelConfig& mcfg, const TrainConfig& tcfg,
                      const std::vector<const PreparedSample*>& train_samples,
                      const std::vector<atlas::MappingMatrix>& maps, std::uint64_t fold_seed) {
    mcfg.validate();
    tcfg.validate();
    if (mcfg.variant == model::Variant::mahgcn) model::detail::check_maps(mcfg, maps);

    std::vector<int> labels;
    labels.reserve(train_samples.size());
    for (const PreparedSample* s : train_samples) labels.push_back(s->sample->label);
    long n1 = std::count(labels.begin(), labels.end(), 1);
    long n0 = static_cast<long>(labels.size()) - n1;
    if (n0 < 2 || n1 < 2)
        throw DataError("train_fold: need at least two samples per class, got " +
                        std::to_string(n0) + "/" + std::to_string(n1));
    std::array<double, 2> weights = class_weights(labels);
    std::vector<double> weight_vec = {weights[0], weights[1]};

    FoldResult out;
    out.params = model::init_params(mcfg, fold_seed);
    Rng shuffle_rng = derive_stream(fold_seed, seed_role::shuffle);
    Rng dropout_rng = derive_stream(fold_seed, seed_role::dropout);

    auto refs = trainable_refs(out.params);
    std::vector<AdamState> adam(refs.size());
    int step = 0;

    std::vector<int> order(train_samples.size());
    std::iota(order.begin(), order.end(), 0);
    int n = static_cast<int>(train_samples.size());

    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        // batch boundaries; a trailing singleton joins the previous batch
        std::vector<std::pair<int, int>> batches;
        for (int off = 0; off < n; off += tcfg.batch_size)
            batches.emplace_back(off, std::min(off + tcfg.batch_size, n));
        if (batches.size() > 1 && batches.back().second - batches.back().first == 1) {
            batches[batches.size() - 2].second = n;
            batches.pop_back();
        }

        double epoch_loss = 0.0;
        for (auto [lo, hi] : batches) {
            GradTape tape;
            auto leaves = model::detail::register_leaves(tape, out.params);
            auto onehots = model::detail::make_onehots(tape, mcfg);

            std::vector<ValueId> rows;
            std::vector<int> batch_labels;
            for (int bi = lo; bi < hi; ++bi) {
                const PreparedSample& s = *train_samples[static_cast<std::size_t>(order[static_cast<std::size_t>(bi)])];
                auto stack = model::detail::subject_stack(tape, mcfg, leaves, onehots, s.snorms,
                                                          maps.empty() ? nullptr : &maps,
                                                          Mode::train, &dropout_rng);
                rows.push_back(tape.transpose(stack.head_input));
                batch_labels.push_back(s.sample->label);
            }
            ValueId batch_rows = tape.concat_rows(rows);
            auto head = model::detail::head_forward(tape, mcfg, leaves, out.params.bn_run_mean,
                                                    out.params.bn_run_var, batch_rows,
                                                    Mode::train);
            ValueId loss = tape.weighted_cross_entropy(head.logits, batch_labels, weight_vec);
            double loss_value = tape.value(loss)(0, 0);
            tape.backward(loss);

            auto ids = leaf_ids(leaves);
            ++step;
            for (std::size_t k = 0; k < refs.size(); ++k) {
                const Tensor2D& g = tape.grad(ids[k]);
                if (!g.all_finite())
                    throw NumericError("train_fold: non-finite gradient for " + refs[k].name +
                                       " at epoch " + std::to_string(epoch) + ", step " +
                                       std::to_string(step));
                adam_step(*refs[k].tensor, g, adam[k], step, tcfg);
            }
            epoch_loss += loss_value * static_cast<double>(hi - lo);
        }
        out.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
    }
    return out;
}

EvalOutcome evaluate(const model::ModelConfig& mcfg, const model::MahgcnParams& params,
                     const std::vector<const PreparedSample*>& samples,
                     const std::vector<atlas::MappingMatrix>& maps) {
    EvalOutcome out;
    for (const PreparedSample* s : samples) {
        model::ForwardTrace t = model::detail::forward_single(
            mcfg, params, s->snorms, maps.empty() ? nullptr : &maps, Mode::eval, nullptr);
        out.scores.push_back(t.probs(0, 1));
        out.labels.push_back(s->sample->label);
        out.ids.push_back(s->sample->id);
    }
    return out;
}

Split stratified_split(const std::vector<int>& labels, double test_fraction, Rng& rng) {
    std::vector<int> idx0, idx1;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (labels[i] == 1 ? idx1 : idx0).push_back(static_cast<int>(i));
    if (idx0.empty() || idx1.empty())
        throw DataError("stratified_split: both classes must be present");

    Split split;
    for (auto* cls : {&idx0, &idx1}) {
        if (cls->size() < 2)
            throw DataError("stratified_split: need at least two samples of each class");
        rng.shuffle(*cls);
        long want = std::lround(test_fraction * static_cast<double>(cls->size()));
        want = std::clamp(want, 1L, static_cast<long>(cls->size()) - 1);
        for (std::size_t i = 0; i < cls->size(); ++i)
            (static_cast<long>(i) < want ? split.test_idx : split.train_idx).push_back((*cls)[i]);
    }
    std::sort(split.train_idx.begin(), split.train_idx.end());
    std::sort(split.test_idx.begin(), split.test_idx.end());
    return split;
}

std::vector<RepeatResult> holdout_cv(const Dataset& data, const model::ModelConfig& mcfg,
                                     const TrainConfig& tcfg,
                                     const std::vector<atlas::MappingMatrix>& maps, int jobs) {
    mcfg.validate();
    tcfg.validate();
    if (jobs < 1) throw ConfigError("holdout_cv: jobs must be >= 1");

    std::vector<int> labels;
    for (const auto& s : data.samples) labels.push_back(s.label);
    std::vector<PreparedSample> prepared = prepare(data, mcfg);

    std::vector<RepeatResult> results(static_cast<std::size_t>(tcfg.repeats));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tcfg.repeats));

    auto run_repeat = [&](int r) {
        Rng split_rng = derive_stream(tcfg.seed, seed_role::split, static_cast<std::uint64_t>(r));
        Split split = stratified_split(labels, tcfg.test_fraction, split_rng);
        // stratification guarantees both classes in both halves
        for (const auto* part : {&split.train_idx, &split.test_idx}) {
            bool has0 = false, has1 = false;
            for (int i : *part) (labels[static_cast<std::size_t>(i)] == 1 ? has1 : has0) = true;
            if (!has0 || !has1)
                throw std::logic_error("holdout_cv: class missing from a stratified split");
        }

        std::vector<const PreparedSample*> train_set, test_set;
        for (int i : split.train_idx) train_set.push_back(&prepared[static_cast<std::size_t>(i)]);
        for (int i : split.test_idx) test_set.push_back(&prepared[static_cast<std::size_t>(i)]);

        std::uint64_t fold_seed =
            splitmix64(tcfg.seed ^ seed_role::fold ^ static_cast<std::uint64_t>(r));
        FoldResult fold = train_fold(mcfg, tcfg, train_set, maps, fold_seed);
        EvalOutcome eval = evaluate(mcfg, fold.params, test_set, maps);

        RepeatResult& out = results[static_cast<std::size_t>(r)];
        out.metrics = stats::metrics_from_scores(eval.scores, eval.labels);
        out.checkpoint = std::move(fold.params);
        out.epoch_loss = std::move(fold.epoch_loss);
        out.test_ids = std::move(eval.ids);
    };

    if (jobs == 1) {
        for (int r = 0; r < tcfg.repeats; ++r) run_repeat(r);
    } else {
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                int r = next.fetch_add(1);
                if (r >= tcfg.repeats) break;
                try {
                    run_repeat(r);
                } catch (...) {
                    errors[static_cast<std::size_t>(r)] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        int workers = std::min(jobs, tcfg.repeats);
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return results;
}

SynthOutput synth_generate(const SynthConfig& sc, bool keep_timeseries) {
    sc.validate();
    int n_scales = static_cast<int>(sc.scales.size());
    int finest = sc.scales.front();
    int c = sc.modules;

    // proportional nesting between adjacent scales, chained down from the
    // finest so every pair of scales stays hierarchically consistent
    std::vector<std::vector<int>> parent(static_cast<std::size_t>(n_scales) - 1);
    for (int k = 0; k + 1 < n_scales; ++k) {
        parent[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(sc.scales[static_cast<std::size_t>(k)]));
        for (int i = 0; i < sc.scales[static_cast<std::size_t>(k)]; ++i)
            parent[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = static_cast<int>(
                static_cast<long long>(i) * sc.scales[static_cast<std::size_t>(k) + 1] /
                sc.scales[static_cast<std::size_t>(k)]);
    }
    // label of each finest ROI at every scale
    std::vector<std::vector<int>> roi_at_scale(static_cast<std::size_t>(n_scales),
                                               std::vector<int>(static_cast<std::size_t>(finest)));
    for (int f = 0; f < finest; ++f) roi_at_scale[0][static_cast<std::size_t>(f)] = f;
    for (int k = 0; k + 1 < n_scales; ++k)
        for (int f = 0; f < finest; ++f)
            roi_at_scale[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(f)] =
                parent[static_cast<std::size_t>(k)][static_cast<std::size_t>(
                    roi_at_scale[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)])];

    SynthOutput out;
    int grid_x = finest * sc.voxels_per_roi;
    for (int k = 0; k < n_scales; ++k) {
        atlas::LabelVolume vol;
        vol.scale = sc.scales[static_cast<std::size_t>(k)];
        vol.dims = {grid_x, 1, 1};
        for (int x = 0; x < grid_x; ++x)
            vol.voxels.push_back(
                {x, 0, 0, roi_at_scale[static_cast<std::size_t>(k)][static_cast<std::size_t>(x / sc.voxels_per_roi)] + 1});
        vol.validate();
        out.volumes.push_back(std::move(vol));

        atlas::RsnTable rsn;
        rsn.scale = sc.scales[static_cast<std::size_t>(k)];
        int per_module = rsn.scale / c;
        for (int roi = 0; roi < rsn.scale; ++roi)
            rsn.roi_to_rsn.push_back((roi / per_module) % 7 + 1);
        out.rsn_tables.push_back(std::move(rsn));
    }

    int t = sc.timepoints;
    int per_module_fine = finest / c;
    int total = 2 * sc.samples_per_class;
    for (int idx = 0; idx < total; ++idx) {
        int label = idx < sc.samples_per_class ? 0 : 1;
        Rng rng = derive_stream(sc.seed, seed_role::sample, static_cast<std::uint64_t>(idx));

        // module latents, per-ROI noise, optional shared class component
        Tensor2D z(t, c);
        for (double& v : z.data()) v = rng.normal();
        Tensor2D noise(t, finest);
        for (double& v : noise.data()) v = rng.normal();
        std::vector<double> shared;
        if (label == 1) {
            shared.resize(static_cast<std::size_t>(t));
            for (double& v : shared) v = rng.normal();
        }

        std::vector<Tensor2D> ts(static_cast<std::size_t>(n_scales));
        ts[0] = Tensor2D(t, finest);
        for (int i = 0; i < finest; ++i) {
            int module = i / per_module_fine;
            bool affected = label == 1 && module < 2;  // two designated modules
            for (int tt = 0; tt < t; ++tt) {
                double v = z(tt, module) + sc.sigma * noise(tt, i);
                if (affected) v += sc.delta * shared[static_cast<std::size_t>(tt)];
                ts[0](tt, i) = v;
            }
        }
        // coarser series: mean of the child series at the previous scale
        for (int k = 0; k + 1 < n_scales; ++k) {
            int coarse = sc.scales[static_cast<std::size_t>(k) + 1];
            int fine = sc.scales[static_cast<std::size_t>(k)];
            Tensor2D next(t, coarse, 0.0);
            std::vector<int> counts(static_cast<std::size_t>(coarse), 0);
            for (int i = 0; i < fine; ++i) {
                int j = parent[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
                ++counts[static_cast<std::size_t>(j)];
                for (int tt = 0; tt < t; ++tt) next(tt, j) += ts[static_cast<std::size_t>(k)](tt, i);
            }
            for (int j = 0; j < coarse; ++j)
                for (int tt = 0; tt < t; ++tt) next(tt, j) /= static_cast<double>(counts[static_cast<std::size_t>(j)]);
            ts[static_cast<std::size_t>(k) + 1] = std::move(next);
        }

        LabeledSample sample;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "sub_%04d", idx);
        sample.id = buf;
        sample.label = label;
        sample.stack.scales = sc.scales;
        for (int k = 0; k < n_scales; ++k) {
            connectome::RoiTimeSeries rts;
            rts.values = ts[static_cast<std::size_t>(k)];
            sample.stack.fcns.push_back(connectome::pearson_fcn(rts).fcn);
        }
        out.dataset.samples.push_back(std::move(sample));
        if (keep_timeseries) out.timeseries.push_back(std::move(ts));
    }
    return out;
}

}  // namespace mahgcn::training
