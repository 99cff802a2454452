#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mahgcn/config.hpp"
#include "mahgcn/explain.hpp"
#include "mahgcn/io.hpp"
#include "mahgcn/model.hpp"
#include "mahgcn/stats.hpp"
#include "mahgcn/training.hpp"

namespace fs = std::filesystem;
using namespace mahgcn;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

// MAHGCN_SEED overrides the config seeds for both synthesis and training.
void apply_env_seed(config::AppConfig& cfg) {
    const char* env = std::getenv("MAHGCN_SEED");
    if (!env) return;
    try {
        std::size_t pos = 0;
        std::uint64_t seed = std::stoull(env, &pos);
        if (pos != std::string(env).size()) throw std::invalid_argument(env);
        cfg.train.seed = seed;
        cfg.synth.seed = seed;
    } catch (const std::exception&) {
        throw ConfigError("MAHGCN_SEED: not a valid unsigned integer: " + std::string(env));
    }
}

std::vector<std::string> atlas_input_files(const fs::path& data_dir) {
    std::vector<std::string> files = {(data_dir / "subjects.tsv").string()};
    for (const auto& entry : fs::directory_iterator(data_dir)) {
        std::string name = entry.path().filename().string();
        if ((name.rfind("labels_", 0) == 0 || name.rfind("rsn_", 0) == 0) &&
            entry.path().extension() == ".tsv")
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

double mean_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return v.empty() ? 0.0 : m / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0));
}

void print_metric_summary(const std::vector<training::RepeatResult>& results) {
    auto line = [&](const char* name, auto getter) {
        std::vector<double> vals;
        for (const auto& r : results) {
            auto v = getter(r);
            if (v) vals.push_back(*v);
        }
        if (vals.empty()) return;
        std::printf("%s %.3f(%.3f)\n", name, mean_of(vals), sample_std(vals));
    };
    using R = training::RepeatResult;
    line("acc", [](const R& r) { return std::optional<double>(r.metrics.acc); });
    line("sen", [](const R& r) { return r.metrics.sen; });
    line("spe", [](const R& r) { return r.metrics.spe; });
    line("auc", [](const R& r) { return std::optional<double>(r.metrics.auc); });
}

model::Variant parse_variant(const std::string& s) {
    if (s == "mahgcn") return model::Variant::mahgcn;
    if (s == "magcn") return model::Variant::magcn;
    if (s == "gcn") return model::Variant::gcn;
    throw ConfigError("--variant: unknown variant '" + s + "' (mahgcn|magcn|gcn)");
}

int cmd_version() {
    std::printf("mahgcn %s\n", kVersion);
    return 0;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
    Timer timer;
    config::AppConfig cfg = config::load_config(config_path);
    apply_env_seed(cfg);
    bool emit_fcn = cfg.emit != config::EmitMode::timeseries;
    bool emit_ts = cfg.emit != config::EmitMode::fcn;
    training::SynthOutput synth = training::synth_generate(cfg.synth, emit_ts);
    io::save_dataset(out_dir, synth, emit_fcn, emit_ts);

    io::RunManifest m;
    m.command = "synth";
    m.resolved_config = config::to_json(cfg);
    m.base_seed = cfg.synth.seed;
    m.input_files = {config_path};
    m.output_files.push_back((fs::path(out_dir) / "subjects.tsv").string());
    for (const auto& v : synth.volumes)
        m.output_files.push_back(
            (fs::path(out_dir) / ("labels_" + std::to_string(v.scale) + ".tsv")).string());
    for (const auto& t : synth.rsn_tables)
        m.output_files.push_back(
            (fs::path(out_dir) / ("rsn_" + std::to_string(t.scale) + ".tsv")).string());
    for (const auto& s : synth.dataset.samples)
        for (int scale : s.stack.scales) {
            if (emit_fcn)
                m.output_files.push_back(
                    (fs::path(out_dir) / s.id / ("fcn_" + std::to_string(scale) + ".csv")).string());
            if (emit_ts)
                m.output_files.push_back(
                    (fs::path(out_dir) / s.id / ("ts_" + std::to_string(scale) + ".csv")).string());
        }
    m.wall_seconds = timer.seconds();
    io::write_manifest(out_dir, m);
    std::printf("synth: %zu subjects, %zu scales -> %s\n", synth.dataset.samples.size(),
                cfg.synth.scales.size(), out_dir.c_str());
    return 0;
}

int cmd_fcn(const std::vector<std::string>& inputs, const std::string& out_dir) {
    Timer timer;
    fs::create_directories(out_dir);
    io::RunManifest m;
    m.command = "fcn";
    m.input_files = inputs;
    for (const std::string& in : inputs) {
        connectome::RoiTimeSeries ts = io::read_timeseries_csv(in);
        connectome::PearsonResult res = connectome::pearson_fcn(ts);
        for (int roi : res.zero_variance_rois)
            std::fprintf(stderr, "warning: %s: ROI %d has zero variance\n", in.c_str(), roi + 1);
        std::string stem = fs::path(in).stem().string();
        std::string name = stem.rfind("ts_", 0) == 0 ? "fcn_" + stem.substr(3) : stem + "_fcn";
        fs::path out = fs::path(out_dir) / (name + ".csv");
        io::write_matrix_csv(out, res.fcn.values);
        m.output_files.push_back(out.string());
    }
    m.wall_seconds = timer.seconds();
    io::write_manifest(out_dir, m);
    return 0;
}

int cmd_atlas_map(const std::vector<std::string>& volume_paths, double th,
                  const std::vector<std::string>& extra_pairs, const std::string& out_dir) {
    Timer timer;
    if (volume_paths.size() < 2)
        throw ConfigError("atlas-map: need at least two --volumes, fine to coarse");
    std::vector<atlas::LabelVolume> volumes;
    for (const std::string& p : volume_paths) volumes.push_back(io::read_label_volume(p));

    // extra non-adjacent pairs given as fine:coarse scales
    std::vector<std::pair<int, int>> extra;
    auto index_of_scale = [&](int scale) {
        for (std::size_t i = 0; i < volumes.size(); ++i)
            if (volumes[i].scale == scale) return static_cast<int>(i);
        throw ConfigError("atlas-map: no volume with scale " + std::to_string(scale));
    };
    for (const std::string& spec : extra_pairs) {
        auto colon = spec.find(':');
        if (colon == std::string::npos)
            throw ConfigError("atlas-map: --pairs entries look like FINE:COARSE, got " + spec);
        extra.emplace_back(index_of_scale(std::stoi(spec.substr(0, colon))),
                           index_of_scale(std::stoi(spec.substr(colon + 1))));
    }

    atlas::AtlasReport report = atlas::validate_atlas_set(volumes, th, extra);

    fs::create_directories(out_dir);
    io::RunManifest m;
    m.command = "atlas-map";
    m.input_files = volume_paths;
    auto emit_pair = [&](const atlas::LabelVolume& fine, const atlas::LabelVolume& coarse) {
        atlas::OverlapTable t = atlas::compute_overlap(fine, coarse);
        atlas::MappingMatrix mm = atlas::mapping_matrix(t, th);
        std::string tag = std::to_string(fine.scale) + "_" + std::to_string(coarse.scale);
        fs::path overlap_path = fs::path(out_dir) / ("overlap_" + tag + ".tsv");
        fs::path map_path = fs::path(out_dir) / ("map_" + tag + ".csv");
        io::write_overlap_table(overlap_path, t);
        io::write_mapping_csv(map_path, mm);
        m.output_files.push_back(overlap_path.string());
        m.output_files.push_back(map_path.string());
        for (int roi : mm.zero_rows)
            std::fprintf(stderr, "warning: scale %d ROI %d maps to nothing at th=%g\n",
                         fine.scale, roi, th);
    };
    for (std::size_t k = 0; k + 1 < volumes.size(); ++k) emit_pair(volumes[k], volumes[k + 1]);
    for (const auto& [fi, ci] : extra)
        emit_pair(volumes[static_cast<std::size_t>(fi)], volumes[static_cast<std::size_t>(ci)]);

    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : report.pairs)
        pairs.push_back(nlohmann::json{{"fine_scale", p.fine_scale},
                                       {"coarse_scale", p.coarse_scale},
                                       {"zero_rows", p.zero_rows},
                                       {"multi_parent_rois", p.multi_parent_rois},
                                       {"coverage", p.coverage}});
    fs::path report_path = fs::path(out_dir) / "validation_report.json";
    io::write_file_atomic(report_path, io::dump_json(nlohmann::json{{"th", th}, {"pairs", pairs}}));
    m.output_files.push_back(report_path.string());
    m.wall_seconds = timer.seconds();
    io::write_manifest(out_dir, m);
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& variant_flag, const std::string& out_dir, int jobs) {
    Timer timer;
    config::AppConfig cfg = config::load_config(config_path);
    apply_env_seed(cfg);
    if (!variant_flag.empty()) {
        cfg.model.variant = parse_variant(variant_flag);
        cfg.model.validate();
    }

    training::Dataset dataset = io::load_dataset(data_dir, cfg.model.scales);
    std::vector<atlas::MappingMatrix> maps;
    if (cfg.model.variant == model::Variant::mahgcn)
        maps = training::build_maps(io::load_atlas_volumes(data_dir), cfg.model);

    std::vector<training::RepeatResult> results =
        training::holdout_cv(dataset, cfg.model, cfg.train, maps, jobs);

    fs::create_directories(out_dir);
    nlohmann::json resolved = config::to_json(cfg);
    io::RunManifest m;
    m.command = "train";
    m.resolved_config = resolved;
    m.base_seed = cfg.train.seed;
    m.input_files = atlas_input_files(data_dir);
    m.input_files.insert(m.input_files.begin(), config_path);

    fs::path metrics_path = fs::path(out_dir) / "metrics.json";
    io::write_file_atomic(metrics_path,
                          io::dump_json(io::metrics_to_json(results, resolved, cfg.train.seed)));
    m.output_files.push_back(metrics_path.string());
    for (std::size_t r = 0; r < results.size(); ++r) {
        fs::path ck = fs::path(out_dir) / ("checkpoint_rep" + std::to_string(r) + ".json");
        io::save_checkpoint(ck, cfg.model, results[r].checkpoint);
        m.output_files.push_back(ck.string());
    }
    m.wall_seconds = timer.seconds();
    io::write_manifest(out_dir, m);
    print_metric_summary(results);
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_dir,
             const std::string& out_dir) {
    Timer timer;
    io::Checkpoint ck = io::load_checkpoint(model_path);
    training::Dataset dataset = io::load_dataset(data_dir, ck.config.scales);
    std::vector<atlas::MappingMatrix> maps;
    if (ck.config.variant == model::Variant::mahgcn)
        maps = training::build_maps(io::load_atlas_volumes(data_dir), ck.config);

    std::vector<training::PreparedSample> prepared = training::prepare(dataset, ck.config);
    std::vector<const training::PreparedSample*> ptrs;
    for (const auto& p : prepared) ptrs.push_back(&p);
    training::EvalOutcome eval = training::evaluate(ck.config, ck.params, ptrs, maps);

    training::RepeatResult rec;
    rec.metrics = stats::metrics_from_scores(eval.scores, eval.labels);
    rec.test_ids = eval.ids;

    fs::create_directories(out_dir);
    nlohmann::json resolved{{"model", io::model_config_to_json(ck.config)}};
    fs::path metrics_path = fs::path(out_dir) / "metrics.json";
    io::write_file_atomic(metrics_path, io::dump_json(io::metrics_to_json({rec}, resolved, 0)));

    io::RunManifest m;
    m.command = "eval";
    m.resolved_config = resolved;
    m.input_files = {model_path, (fs::path(data_dir) / "subjects.tsv").string()};
    m.output_files = {metrics_path.string()};
    m.wall_seconds = timer.seconds();
    io::write_manifest(out_dir, m);

    std::printf("acc %.3f\nauc %.3f\n", rec.metrics.acc, rec.metrics.auc);
    return 0;
}

int cmd_explain(const std::string& config_path, const std::string& data_dir,
                const std::string& run_dir, const std::string& out_dir) {
    Timer timer;
    config::AppConfig cfg = config::load_config(config_path);
    apply_env_seed(cfg);

    fs::path metrics_path = fs::path(run_dir) / "metrics.json";
    io::LoadedMetrics metrics = io::load_metrics(metrics_path);
    if (metrics.repeats.empty()) throw DataError("explain: no repeats in " + metrics_path.string());

    std::vector<io::Checkpoint> checkpoints;
    for (std::size_t r = 0; r < metrics.repeats.size(); ++r)
        checkpoints.push_back(io::load_checkpoint(
            fs::path(run_dir) / ("checkpoint_rep" + std::to_string(r) + ".json")));
    const model::ModelConfig& mcfg = checkpoints.front().config;
    for (const auto& ck : checkpoints)
        if (ck.config.scales != mcfg.scales || ck.config.variant != mcfg.variant)
            throw DataError("explain: checkpoints in " + run_dir +
                            " disagree on scales/variant; mixed runs?");

    training::Dataset dataset = io::load_dataset(data_dir, mcfg.scales);
    std::vector<atlas::MappingMatrix> maps;
    if (mcfg.variant == model::Variant::mahgcn)
        maps = training::build_maps(io::load_atlas_volumes(data_dir), mcfg);
    std::vector<training::PreparedSample> prepared = training::prepare(dataset, mcfg);
    std::vector<atlas::RsnTable> rsn_tables = io::load_rsn_tables(data_dir);

    auto prepared_by_id = [&](const std::string& id) -> const training::PreparedSample& {
        for (const auto& p : prepared)
            if (p.sample->id == id) return p;
        throw DataError("explain: subject " + id + " from the run is not in the dataset");
    };

    // per repeat: mean CAM over the disorder group of that repeat's test split
    std::vector<std::vector<explain::CamVector>> group_cams;
    std::vector<double> aucs;
    for (std::size_t r = 0; r < metrics.repeats.size(); ++r) {
        const io::LoadedRepeat& rep = metrics.repeats[r];
        if (rep.test_ids.size() != rep.metrics.labels.size())
            throw DataError("explain: repeat " + std::to_string(r) +
                            " lacks aligned test_ids; re-run train");
        std::vector<std::vector<explain::CamVector>> subject_cams;
        for (std::size_t i = 0; i < rep.test_ids.size(); ++i) {
            if (rep.metrics.labels[i] != 1) continue;  // disorder group only
            const training::PreparedSample& p = prepared_by_id(rep.test_ids[i]);
            model::ForwardTrace trace = model::detail::forward_single(
                mcfg, checkpoints[r].params, p.snorms, maps.empty() ? nullptr : &maps,
                Mode::eval, nullptr);
            subject_cams.push_back(explain::grad_cam(trace, mcfg, cfg.explain.target_class,
                                                     cfg.explain.use_probability));
        }
        if (subject_cams.empty())
            throw DataError("explain: repeat " + std::to_string(r) + " has no disorder subjects");
        group_cams.push_back(explain::group_cam(subject_cams));
        aucs.push_back(rep.metrics.auc);
    }
    std::vector<explain::CamVector> final_cams = explain::auc_weighted_cam(group_cams, aucs);

    fs::create_directories(out_dir);
    io::RunManifest m;
    m.command = "explain";
    m.resolved_config = config::to_json(cfg);
    m.base_seed = metrics.seed;
    m.input_files = {config_path, metrics_path.string()};
    for (std::size_t r = 0; r < metrics.repeats.size(); ++r)
        m.input_files.push_back(
            (fs::path(run_dir) / ("checkpoint_rep" + std::to_string(r) + ".json")).string());

    for (const auto& cam : final_cams) {
        std::string body = "roi,activation\n";
        for (std::size_t i = 0; i < cam.values.size(); ++i)
            body += std::to_string(i + 1) + "," + io::fmt_double(cam.values[i]) + "\n";
        fs::path path = fs::path(out_dir) / ("cam_" + std::to_string(cam.scale) + ".csv");
        io::write_file_atomic(path, body);
        m.output_files.push_back(path.string());
    }

    std::string profile = "scale,rsn_id,rsn_name,mean_activation\n";
    for (const auto& cam : final_cams) {
        const atlas::RsnTable* table = nullptr;
        for (const auto& t : rsn_tables)
            if (t.scale == cam.scale) table = &t;
        if (!table)
            throw DataError("explain: no RSN table at scale " + std::to_string(cam.scale));
        explain::RsnProfile prof = explain::rsn_profile(cam, *table);
        for (std::size_t n = 0; n < 7; ++n) {
            if (!prof.mean_activation[n]) continue;  // absent networks are omitted
            profile += std::to_string(cam.scale) + "," + std::to_string(n + 1) + "," +
                       atlas::kRsnNames[n] + "," + io::fmt_double(*prof.mean_activation[n]) +
                       "\n";
        }
    }
    fs::path profile_path = fs::path(out_dir) / "rsn_profile.csv";
    io::write_file_atomic(profile_path, profile);
    m.output_files.push_back(profile_path.string());
    m.wall_seconds = timer.seconds();
    io::write_manifest(out_dir, m);
    return 0;
}

int cmd_stats(const std::string& a_path, const std::string& b_path, const std::string& metric,
              const std::string& out_dir) {
    Timer timer;
    io::LoadedMetrics ma = io::load_metrics(a_path);
    io::LoadedMetrics mb = io::load_metrics(b_path);
    if (ma.repeats.size() != mb.repeats.size())
        throw DataError("stats: repeat counts differ (" + std::to_string(ma.repeats.size()) +
                        " vs " + std::to_string(mb.repeats.size()) + ")");

    auto extract = [&](const io::LoadedMetrics& lm) {
        std::vector<double> v;
        for (const auto& r : lm.repeats) {
            if (metric == "acc")
                v.push_back(r.metrics.acc);
            else if (metric == "auc")
                v.push_back(r.metrics.auc);
            else if (metric == "sen") {
                if (!r.metrics.sen) throw DataError("stats: sen undefined in a repeat");
                v.push_back(*r.metrics.sen);
            } else if (metric == "spe") {
                if (!r.metrics.spe) throw DataError("stats: spe undefined in a repeat");
                v.push_back(*r.metrics.spe);
            } else
                throw ConfigError("stats: --metric must be acc|sen|spe|auc, got " + metric);
        }
        return v;
    };
    stats::ComparisonResult cmp = stats::compare_paired(metric, extract(ma), extract(mb));

    nlohmann::json flags = nlohmann::json::array();
    for (const auto& f : cmp.t_test.flags) flags.push_back("t:" + f);
    for (const auto& f : cmp.wilcoxon.flags) flags.push_back("wilcoxon:" + f);
    nlohmann::json j{
        {"metric", cmp.metric},
        {"t", cmp.t_test.t},
        {"p_t", cmp.t_test.p},
        {"W", cmp.wilcoxon.w},
        {"p_wilcoxon", cmp.wilcoxon.p},
        {"significant_at_0.05", cmp.significant_at_005},
        {"flags", flags},
    };
    std::string text = io::dump_json(j);
    std::fputs(text.c_str(), stdout);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        fs::path path = fs::path(out_dir) / "comparison.json";
        io::write_file_atomic(path, text);
        io::RunManifest m;
        m.command = "stats";
        m.input_files = {a_path, b_path};
        m.output_files = {path.string()};
        m.wall_seconds = timer.seconds();
        io::write_manifest(out_dir, m);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiscale-atlas hierarchical GCN pipeline"};
    app.require_subcommand(1);

    std::string config_path, data_dir, out_dir, run_dir, model_path, variant;
    std::string a_path, b_path, metric = "auc";
    std::vector<std::string> inputs, volumes, pairs;
    double th = 0.0;
    int jobs = 1;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset + atlas set");
    synth->add_option("--config", config_path, "config JSON")->required();
    synth->add_option("--out", out_dir, "output dataset directory")->required();

    CLI::App* fcn = app.add_subcommand("fcn", "Pearson FCNs from ROI time-series CSVs");
    fcn->add_option("--in", inputs, "time-series CSV (repeatable)")->required();
    fcn->add_option("--out", out_dir, "output directory")->required();

    CLI::App* amap = app.add_subcommand("atlas-map", "overlaps + mapping matrices for an atlas set");
    amap->add_option("--volumes", volumes, "label volume TSVs, fine to coarse")->required();
    amap->add_option("--th", th, "overlap-ratio threshold (default 0)");
    amap->add_option("--pairs", pairs, "extra non-adjacent FINE:COARSE scale pairs");
    amap->add_option("--out", out_dir, "output directory")->required();

    CLI::App* train = app.add_subcommand("train", "holdout cross-validated training");
    train->add_option("--config", config_path, "config JSON")->required();
    train->add_option("--data", data_dir, "dataset directory")->required();
    train->add_option("--variant", variant, "mahgcn|magcn|gcn (overrides config)");
    train->add_option("--jobs", jobs, "parallel repeats (default 1)");
    train->add_option("--out", out_dir, "output directory")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval->add_option("--model", model_path, "checkpoint JSON")->required();
    eval->add_option("--data", data_dir, "dataset directory")->required();
    eval->add_option("--out", out_dir, "output directory")->required();

    CLI::App* explain_cmd = app.add_subcommand("explain", "Grad-CAM attributions for a train run");
    explain_cmd->add_option("--config", config_path, "config JSON")->required();
    explain_cmd->add_option("--data", data_dir, "dataset directory")->required();
    explain_cmd->add_option("--run", run_dir, "train output directory")->required();
    explain_cmd->add_option("--out", out_dir, "output directory")->required();

    CLI::App* stats_cmd = app.add_subcommand("stats", "paired comparison of two metric files");
    stats_cmd->add_option("--a", a_path, "first metrics.json")->required();
    stats_cmd->add_option("--b", b_path, "second metrics.json")->required();
    stats_cmd->add_option("--metric", metric, "acc|sen|spe|auc (default auc)");
    stats_cmd->add_option("--out", out_dir, "optional output directory");

    CLI::App* version = app.add_subcommand("version", "print the tool version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help exits clean; usage problems are config errors
    }

    auto run = [&]() -> int {
        if (synth->parsed()) return cmd_synth(config_path, out_dir);
        if (fcn->parsed()) return cmd_fcn(inputs, out_dir);
        if (amap->parsed()) return cmd_atlas_map(volumes, th, pairs, out_dir);
        if (train->parsed()) return cmd_train(config_path, data_dir, variant, out_dir, jobs);
        if (eval->parsed()) return cmd_eval(model_path, data_dir, out_dir);
        if (explain_cmd->parsed()) return cmd_explain(config_path, data_dir, run_dir, out_dir);
        if (stats_cmd->parsed()) return cmd_stats(a_path, b_path, metric, out_dir);
        if (version->parsed()) return cmd_version();
        return 2;
    };

    try {
        return run();
    } catch (const ConfigError& e) {
        std::cerr << "error[config]: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error[data]: " << e.what() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error[data]: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error[numeric]: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return 4;
    }
}
