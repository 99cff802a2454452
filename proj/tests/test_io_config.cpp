#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "mahgcn/config.hpp"
#include "mahgcn/io.hpp"
#include "mahgcn/training.hpp"

namespace fs = std::filesystem;
using namespace mahgcn;

namespace {

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("mahgcn_io_test_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("fmt_double and json emission") {
    CHECK(io::fmt_double(0.5) == "0.5");
    CHECK(io::fmt_double(1.0 / 3.0) == "0.333333333333");
    CHECK(io::fmt_double(100000.0) == "100000");

    nlohmann::json j{{"x", 1.0 / 3.0}, {"n", 5}, {"s", "hi"}, {"b", true},
                     {"bad", std::nan("")}};
    std::string text = io::dump_json(j, 0);
    CHECK(text.find("0.333333333333") != std::string::npos);
    CHECK(text.find("null") != std::string::npos);  // NaN becomes null
    CHECK(nlohmann::json::parse(text).at("n") == 5);
}

TEST_CASE("matrix and time-series csv round trips") {
    Scratch s;
    Rng rng(701);
    Tensor2D m(7, 7);
    for (double& v : m.data()) v = rng.uniform(-1, 1);
    io::write_matrix_csv(s.dir / "m.csv", m);
    Tensor2D back = io::read_matrix_csv(s.dir / "m.csv");
    REQUIRE(back.rows() == 7);
    for (std::size_t i = 0; i < m.size(); ++i)
        CHECK(back.data()[i] == doctest::Approx(m.data()[i]).epsilon(1e-11));

    Tensor2D ts(10, 4);
    for (double& v : ts.data()) v = rng.normal();
    io::write_timeseries_csv(s.dir / "ts.csv", ts);
    std::string text = io::read_file(s.dir / "ts.csv");
    CHECK(text.rfind("roi_1,roi_2,roi_3,roi_4\n", 0) == 0);
    connectome::RoiTimeSeries rt = io::read_timeseries_csv(s.dir / "ts.csv");
    CHECK(rt.timepoints() == 10);
    CHECK(rt.rois() == 4);

    CHECK_THROWS_AS((void)io::read_matrix_csv(s.dir / "missing.csv"), DataError);
}

TEST_CASE("label volume and rsn table round trips") {
    Scratch s;
    atlas::LabelVolume v;
    v.scale = 3;
    v.dims = {6, 1, 1};
    for (int x = 0; x < 6; ++x) v.voxels.push_back({x, 0, 0, x / 2 + 1});
    io::write_label_volume(s.dir / "labels_3.tsv", v);
    std::string head = io::read_file(s.dir / "labels_3.tsv").substr(0, 22);
    CHECK(head == "# dims 6 1 1 scale 3\n0");
    atlas::LabelVolume back = io::read_label_volume(s.dir / "labels_3.tsv");
    CHECK(back.scale == 3);
    CHECK(back.voxels.size() == 6);
    CHECK(back.voxels[5].label == 3);

    atlas::RsnTable t;
    t.scale = 4;
    t.roi_to_rsn = {1, 5, 7, 2};
    io::write_rsn_table(s.dir / "rsn_4.tsv", t);
    atlas::RsnTable tb = io::read_rsn_table(s.dir / "rsn_4.tsv");
    CHECK(tb.roi_to_rsn == t.roi_to_rsn);
}

TEST_CASE("checkpoint round trip preserves config and params") {
    Scratch s;
    model::ModelConfig cfg;
    cfg.scales = {12, 8, 4};
    cfg.pooling_scheme = atlas::PoolScheme::average;
    cfg.th = 0.25;
    cfg.skip_connections = false;
    cfg.degree_mode = connectome::DegreeMode::absolute;
    model::MahgcnParams p = model::init_params(cfg, 3);
    io::save_checkpoint(s.dir / "ck.json", cfg, p);
    io::Checkpoint back = io::load_checkpoint(s.dir / "ck.json");
    CHECK(back.config.scales == cfg.scales);
    CHECK(back.config.pooling_scheme == atlas::PoolScheme::average);
    CHECK(back.config.th == 0.25);
    CHECK(back.config.skip_connections == false);
    CHECK(back.config.degree_mode == connectome::DegreeMode::absolute);
    REQUIRE(back.params.gcn_theta.size() == 3);
    for (std::size_t i = 0; i < p.fl1_w.size(); ++i)
        CHECK(back.params.fl1_w.data()[i] == doctest::Approx(p.fl1_w.data()[i]).epsilon(1e-11));

    CHECK_THROWS_AS((void)io::load_checkpoint(s.dir / "nope.json"), DataError);
}

TEST_CASE("config defaults reproduce the standard settings") {
    config::AppConfig cfg = config::parse_config(nlohmann::json::object());
    CHECK(cfg.model.scales == std::vector<int>{500, 400, 300, 200, 100});
    CHECK(cfg.model.pooling_scheme == atlas::PoolScheme::sum);
    CHECK(cfg.model.th == 0.0);
    CHECK(cfg.model.dropout_rate == 0.3);
    CHECK(cfg.model.skip_connections == true);
    CHECK(cfg.model.hidden_units == 64);
    CHECK(cfg.train.epochs == 100);
    CHECK(cfg.train.learning_rate == 0.001);
    CHECK(cfg.train.batch_size == 30);
    CHECK(cfg.train.weight_decay == 0.01);
    CHECK(cfg.train.repeats == 5);
    CHECK(cfg.train.test_fraction == 0.2);
}

TEST_CASE("config selects variants and rejects bad keys") {
    config::AppConfig cfg =
        config::parse_config(nlohmann::json{{"model", {{"pooling_scheme", "max"}}}});
    CHECK(cfg.model.pooling_scheme == atlas::PoolScheme::max);

    Scratch s;
    io::write_file_atomic(s.dir / "bad_th.json", R"({"model":{"th":1.5}})");
    try {
        (void)config::load_config(s.dir / "bad_th.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("th") != std::string::npos);
    }

    try {
        (void)config::parse_config(nlohmann::json{{"model", {{"bogus", 1}}}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
    CHECK_THROWS_AS((void)config::parse_config(nlohmann::json{{"wat", nlohmann::json::object()}}),
                    ConfigError);

    io::write_file_atomic(s.dir / "broken.json", "{nope");
    CHECK_THROWS_AS((void)config::load_config(s.dir / "broken.json"), ConfigError);
}

TEST_CASE("dataset save and load round trip") {
    Scratch s;
    training::SynthConfig sc;
    sc.scales = {12, 6};
    sc.modules = 3;
    sc.timepoints = 20;
    sc.samples_per_class = 2;
    sc.seed = 5;
    training::SynthOutput synth = training::synth_generate(sc, true);
    io::save_dataset(s.dir / "d", synth, true, true);

    training::Dataset loaded = io::load_dataset(s.dir / "d", {12, 6});
    REQUIRE(loaded.samples.size() == 4);
    CHECK(loaded.samples[0].id == "sub_0000");
    CHECK(loaded.samples[3].label == 1);
    for (std::size_t i = 0; i < loaded.samples[1].stack.fcns[0].values.size(); ++i)
        CHECK(loaded.samples[1].stack.fcns[0].values.data()[i] ==
              doctest::Approx(synth.dataset.samples[1].stack.fcns[0].values.data()[i])
                  .epsilon(1e-11));

    // scale subset and the time-series fallback both work
    training::Dataset coarse_only = io::load_dataset(s.dir / "d", {6});
    CHECK(coarse_only.samples[0].stack.fcns[0].scale == 6);
    fs::remove(s.dir / "d" / "sub_0000" / "fcn_12.csv");
    training::Dataset via_ts = io::load_dataset(s.dir / "d", {12, 6});
    for (std::size_t i = 0; i < via_ts.samples[0].stack.fcns[0].values.size(); ++i)
        CHECK(via_ts.samples[0].stack.fcns[0].values.data()[i] ==
              doctest::Approx(synth.dataset.samples[0].stack.fcns[0].values.data()[i])
                  .epsilon(1e-9));

    auto volumes = io::load_atlas_volumes(s.dir / "d");
    REQUIRE(volumes.size() == 2);
    CHECK(volumes[0].scale == 12);  // descending
    auto rsn = io::load_rsn_tables(s.dir / "d");
    CHECK(rsn.size() == 2);

    fs::remove(s.dir / "d" / "sub_0001" / "fcn_6.csv");
    fs::remove(s.dir / "d" / "sub_0001" / "ts_6.csv");
    CHECK_THROWS_AS((void)io::load_dataset(s.dir / "d", {12, 6}), DataError);
}

TEST_CASE("metrics json round trip") {
    Scratch s;
    training::RepeatResult r;
    r.metrics.acc = 0.9;
    r.metrics.sen = 0.85;
    r.metrics.auc = 0.95;  // spe left absent
    r.metrics.scores = {0.1, 0.9};
    r.metrics.labels = {0, 1};
    r.test_ids = {"sub_0000", "sub_0003"};
    r.epoch_loss = {1.0, 0.5};
    nlohmann::json j = io::metrics_to_json({r}, nlohmann::json{{"k", "v"}}, 42);
    io::write_file_atomic(s.dir / "metrics.json", io::dump_json(j));
    io::LoadedMetrics back = io::load_metrics(s.dir / "metrics.json");
    REQUIRE(back.repeats.size() == 1);
    CHECK(back.repeats[0].metrics.acc == doctest::Approx(0.9));
    CHECK(back.repeats[0].metrics.sen.has_value());
    CHECK(!back.repeats[0].metrics.spe.has_value());
    CHECK(back.repeats[0].test_ids.size() == 2);
    CHECK(back.seed == 42);
}

TEST_CASE("fnv digest is stable and content-sensitive") {
    Scratch s;
    io::write_file_atomic(s.dir / "a.txt", "hello\n");
    io::write_file_atomic(s.dir / "b.txt", "hello\n");
    io::write_file_atomic(s.dir / "c.txt", "hullo\n");
    CHECK(io::fnv1a64_hex(s.dir / "a.txt") == io::fnv1a64_hex(s.dir / "b.txt"));
    CHECK(io::fnv1a64_hex(s.dir / "a.txt") != io::fnv1a64_hex(s.dir / "c.txt"));
}
