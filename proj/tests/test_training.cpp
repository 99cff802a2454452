#include <cmath>

#include "doctest.h"
#include "mahgcn/training.hpp"
#include "support/train_probe.hpp"

using namespace mahgcn;
using namespace mahgcn::training;

namespace {

SynthConfig small_synth() {
    SynthConfig sc;
    sc.scales = {20, 10, 5};
    sc.modules = 5;
    sc.timepoints = 40;
    sc.samples_per_class = 8;
    sc.delta = 1.5;
    sc.sigma = 0.5;
    sc.seed = 77;
    return sc;
}

model::ModelConfig small_model() {
    model::ModelConfig m;
    m.scales = {20, 10, 5};
    m.hidden_units = 16;
    return m;
}

std::vector<double> flat(const Tensor2D& t) {
    return std::vector<double>(t.data().begin(), t.data().end());
}

}  // namespace

TEST_CASE("class_weights formula") {
    std::vector<int> balanced(100, 0);
    for (int i = 50; i < 100; ++i) balanced[static_cast<std::size_t>(i)] = 1;
    auto w = class_weights(balanced);
    CHECK(w[0] == 2.0);
    CHECK(w[1] == 2.0);

    std::vector<int> skew(100, 0);
    for (int i = 80; i < 100; ++i) skew[static_cast<std::size_t>(i)] = 1;
    auto w2 = class_weights(skew);
    CHECK(w2[0] == doctest::Approx(1.25));
    CHECK(w2[1] == doctest::Approx(5.0));

    // 364 controls vs 50 patients
    std::vector<int> clinical(414, 0);
    for (int i = 364; i < 414; ++i) clinical[static_cast<std::size_t>(i)] = 1;
    auto w3 = class_weights(clinical);
    CHECK(w3[0] == doctest::Approx(414.0 / 364.0).epsilon(1e-12));
    CHECK(w3[1] == doctest::Approx(8.28).epsilon(1e-12));
    // w0*N0 == w1*N1 (both equal N; division round-trip costs at most an ulp)
    CHECK(w3[0] * 364.0 == doctest::Approx(w3[1] * 50.0).epsilon(1e-15));

    CHECK_THROWS_AS((void)class_weights(std::vector<int>(5, 0)), DataError);
}

TEST_CASE("value-level weighted cross entropy") {
    Tensor2D logits = Tensor2D::from_rows({{0, 0}});
    CHECK(weighted_cross_entropy(logits, {0}, {1.0, 1.0}) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(weighted_cross_entropy(logits, {1}, {1.0, 3.0}) ==
          doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("adam single-step hand check") {
    TrainConfig cfg;
    cfg.weight_decay = 0.0;
    Tensor2D theta(1, 1, 0.0);
    Tensor2D grad(1, 1, 1.0);
    AdamState st;
    adam_step(theta, grad, st, 1, cfg);
    CHECK(theta(0, 0) == doctest::Approx(-0.001).epsilon(1e-6));

    // zero gradient, zero decay: parameters untouched
    Tensor2D theta2(2, 2, 0.7);
    AdamState st2;
    adam_step(theta2, Tensor2D(2, 2, 0.0), st2, 1, cfg);
    for (double v : theta2.data()) CHECK(v == 0.7);

    // coupled decay pulls toward zero without crossing it
    TrainConfig wd_cfg;
    wd_cfg.weight_decay = 0.01;
    Tensor2D theta3(1, 1, 0.5);
    AdamState st3;
    for (int t = 1; t <= 50; ++t) {
        double before = theta3(0, 0);
        adam_step(theta3, Tensor2D(1, 1, 0.0), st3, t, wd_cfg);
        CHECK(theta3(0, 0) < before);
        CHECK(theta3(0, 0) > 0.0);
    }

    CHECK_THROWS_AS(adam_step(theta3, Tensor2D(1, 1, 0.0), st3, 0, cfg), ConfigError);
    Tensor2D bad(1, 1, 1.0);
    bad(0, 0) = std::nan("");
    // non-finite gradients abort
    AdamState st4;
    Tensor2D theta4(1, 1, 0.0);
    CHECK_THROWS_AS(adam_step(theta4, bad, st4, 1, cfg), NumericError);
}

TEST_CASE("adam descends a convex quadratic") {
    TrainConfig cfg;
    cfg.weight_decay = 0.0;
    Tensor2D theta(1, 1, 1.0);
    AdamState st;
    double prev_loss = 1.0;
    for (int t = 1; t <= 300; ++t) {
        Tensor2D grad(1, 1, 2.0 * theta(0, 0));
        adam_step(theta, grad, st, t, cfg);
        double loss = theta(0, 0) * theta(0, 0);
        if (t > 10) CHECK(loss < prev_loss);
        prev_loss = loss;
    }
}

TEST_CASE("stratified split arithmetic") {
    std::vector<int> labels(100, 0);
    for (int i = 60; i < 100; ++i) labels[static_cast<std::size_t>(i)] = 1;
    Rng rng(501);
    Split s = stratified_split(labels, 0.2, rng);
    CHECK(s.test_idx.size() == 20);
    CHECK(s.train_idx.size() == 80);
    int pos = 0;
    for (int i : s.test_idx) pos += labels[static_cast<std::size_t>(i)];
    CHECK(pos == 8);

    // disjoint, union covers everything
    std::vector<bool> seen(100, false);
    for (int i : s.train_idx) seen[static_cast<std::size_t>(i)] = true;
    for (int i : s.test_idx) {
        CHECK(!seen[static_cast<std::size_t>(i)]);
        seen[static_cast<std::size_t>(i)] = true;
    }
    for (bool b : seen) CHECK(b);
}

TEST_CASE("synth_generate structure") {
    SynthConfig sc = small_synth();
    SynthOutput out = synth_generate(sc);
    CHECK(out.dataset.samples.size() == 16);
    CHECK(out.volumes.size() == 3);
    CHECK(out.rsn_tables.size() == 3);

    // nested construction: every mapping row has exactly one parent at th=0
    for (std::size_t k = 0; k + 1 < out.volumes.size(); ++k) {
        auto t = atlas::compute_overlap(out.volumes[k], out.volumes[k + 1]);
        auto m = atlas::mapping_matrix(t, 0.0);
        for (int i = 0; i < m.fine_scale; ++i) {
            int ones = 0;
            for (int j = 0; j < m.coarse_scale; ++j)
                if (m.m(i, j) == 1.0) ++ones;
            CHECK(ones == 1);
        }
    }

    for (const auto& rsn : out.rsn_tables)
        for (int id : rsn.roi_to_rsn) {
            CHECK(id >= 1);
            CHECK(id <= 7);
        }

    // stacks carry valid FCNs at every scale
    for (const auto& s : out.dataset.samples) CHECK_NOTHROW(s.stack.validate());

    // divisibility guard
    SynthConfig bad = sc;
    bad.scales = {21, 10, 5};
    CHECK_THROWS_AS((void)synth_generate(bad), ConfigError);

    // determinism
    SynthOutput again = synth_generate(sc);
    CHECK(flat(again.dataset.samples[3].stack.fcns[0].values) ==
          flat(out.dataset.samples[3].stack.fcns[0].values));
}

TEST_CASE("synth keeps per-scale series consistent with child means") {
    SynthConfig sc = small_synth();
    sc.samples_per_class = 1;
    SynthOutput out = synth_generate(sc, true);
    REQUIRE(out.timeseries.size() == 2);
    const auto& ts = out.timeseries[0];
    // scale 10 column j = mean of its scale-20 children
    for (int j = 0; j < 10; ++j) {
        for (int tt = 0; tt < sc.timepoints; ++tt) {
            double mean = (ts[0](tt, 2 * j) + ts[0](tt, 2 * j + 1)) / 2.0;
            CHECK(ts[1](tt, j) == doctest::Approx(mean).epsilon(1e-12));
        }
    }
}

TEST_CASE("full training loss gradient matches finite differences") {
    SynthConfig sc = small_synth();
    sc.samples_per_class = 2;
    SynthOutput data = synth_generate(sc);
    model::ModelConfig mcfg = small_model();
    mcfg.hidden_units = 4;  // keep the FD sweep small
    auto prepared = prepare(data.dataset, mcfg);
    auto maps = build_maps(data.volumes, mcfg);
    std::vector<const PreparedSample*> batch;
    for (const auto& p : prepared) batch.push_back(&p);

    model::MahgcnParams params = model::init_params(mcfg, 99);
    std::array<double, 2> weights = {2.0, 2.0};
    std::uint64_t dropout_seed = 1234;

    std::vector<double> analytic =
        train_probe::batch_gradient(mcfg, params, batch, maps, weights, dropout_seed);
    std::vector<double> point = train_probe::flatten_params(params);
    auto f = [&](const std::vector<double>& vals) {
        model::MahgcnParams p = params;
        train_probe::unflatten_params(vals, p);
        return train_probe::batch_loss_value(mcfg, p, batch, maps, weights, dropout_seed);
    };
    CHECK(grad_check(f, point, analytic, 1e-5) <= 1e-4);
}

TEST_CASE("train_fold learns a separable synthetic task") {
    SynthConfig sc = small_synth();
    SynthOutput data = synth_generate(sc);
    model::ModelConfig mcfg = small_model();
    TrainConfig tcfg;
    tcfg.epochs = 15;
    tcfg.batch_size = 8;
    auto prepared = prepare(data.dataset, mcfg);
    auto maps = build_maps(data.volumes, mcfg);
    std::vector<const PreparedSample*> all;
    for (const auto& p : prepared) all.push_back(&p);

    FoldResult fold = train_fold(mcfg, tcfg, all, maps, 4242);
    CHECK(fold.epoch_loss.size() == 15);
    CHECK(fold.epoch_loss.back() < fold.epoch_loss.front());
}

TEST_CASE("train_fold with zero learning rate keeps the init") {
    SynthConfig sc = small_synth();
    sc.samples_per_class = 4;
    SynthOutput data = synth_generate(sc);
    model::ModelConfig mcfg = small_model();
    TrainConfig tcfg;
    tcfg.epochs = 3;
    tcfg.batch_size = 4;
    tcfg.learning_rate = 0.0;
    auto prepared = prepare(data.dataset, mcfg);
    auto maps = build_maps(data.volumes, mcfg);
    std::vector<const PreparedSample*> all;
    for (const auto& p : prepared) all.push_back(&p);

    FoldResult fold = train_fold(mcfg, tcfg, all, maps, 777);
    model::MahgcnParams init = model::init_params(mcfg, 777);
    CHECK(flat(fold.params.fl1_w) == flat(init.fl1_w));
    CHECK(flat(fold.params.gcn_theta[0]) == flat(init.gcn_theta[0]));
    CHECK(flat(fold.params.bn_gamma) == flat(init.bn_gamma));
    // running stats did move
    CHECK(flat(fold.params.bn_run_mean) != flat(init.bn_run_mean));
}

TEST_CASE("train_fold is bit-deterministic per seed") {
    SynthConfig sc = small_synth();
    sc.samples_per_class = 4;
    SynthOutput data = synth_generate(sc);
    model::ModelConfig mcfg = small_model();
    TrainConfig tcfg;
    tcfg.epochs = 4;
    tcfg.batch_size = 4;
    auto prepared = prepare(data.dataset, mcfg);
    auto maps = build_maps(data.volumes, mcfg);
    std::vector<const PreparedSample*> all;
    for (const auto& p : prepared) all.push_back(&p);

    FoldResult a = train_fold(mcfg, tcfg, all, maps, 31337);
    FoldResult b = train_fold(mcfg, tcfg, all, maps, 31337);
    CHECK(flat(a.params.fl1_w) == flat(b.params.fl1_w));
    CHECK(flat(a.params.fl2_w) == flat(b.params.fl2_w));
    CHECK(flat(a.params.bn_run_var) == flat(b.params.bn_run_var));
    CHECK(a.epoch_loss == b.epoch_loss);

    FoldResult c = train_fold(mcfg, tcfg, all, maps, 31338);
    CHECK(flat(a.params.fl1_w) != flat(c.params.fl1_w));
}

TEST_CASE("train_fold refuses single-class and tiny-class folds") {
    SynthConfig sc = small_synth();
    sc.samples_per_class = 4;
    SynthOutput data = synth_generate(sc);
    model::ModelConfig mcfg = small_model();
    TrainConfig tcfg;
    auto prepared = prepare(data.dataset, mcfg);
    auto maps = build_maps(data.volumes, mcfg);
    std::vector<const PreparedSample*> controls_only;
    for (const auto& p : prepared)
        if (p.sample->label == 0) controls_only.push_back(&p);
    CHECK_THROWS_AS((void)train_fold(mcfg, tcfg, controls_only, maps, 1), DataError);
}

TEST_CASE("holdout_cv yields identical records for any jobs count") {
    SynthConfig sc = small_synth();
    SynthOutput data = synth_generate(sc);
    model::ModelConfig mcfg = small_model();
    TrainConfig tcfg;
    tcfg.epochs = 3;
    tcfg.batch_size = 6;
    tcfg.repeats = 3;
    tcfg.seed = 2024;
    auto maps = build_maps(data.volumes, mcfg);

    auto serial = holdout_cv(data.dataset, mcfg, tcfg, maps, 1);
    auto parallel = holdout_cv(data.dataset, mcfg, tcfg, maps, 3);
    REQUIRE(serial.size() == 3);
    REQUIRE(parallel.size() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(serial[r].metrics.scores == parallel[r].metrics.scores);
        CHECK(serial[r].metrics.labels == parallel[r].metrics.labels);
        CHECK(serial[r].metrics.acc == parallel[r].metrics.acc);
        CHECK(serial[r].metrics.auc == parallel[r].metrics.auc);
        CHECK(serial[r].test_ids == parallel[r].test_ids);
        CHECK(flat(serial[r].checkpoint.fl1_w) == flat(parallel[r].checkpoint.fl1_w));
    }

    // records are complete: 4 metrics plus aligned score/label vectors
    for (const auto& r : serial) {
        CHECK(r.metrics.scores.size() == r.metrics.labels.size());
        CHECK(r.metrics.scores.size() == r.test_ids.size());
        CHECK(r.metrics.auc >= 0.0);
        CHECK(r.metrics.auc <= 1.0);
    }
}
