#include "mahgcn/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace mahgcn::io {

namespace fs = std::filesystem;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

void dump_json_impl(const nlohmann::json& j, std::string& out, int indent, int depth) {
    auto pad = [&](int d) {
        if (indent > 0) {
            out.push_back('\n');
            out.append(static_cast<std::size_t>(indent) * static_cast<std::size_t>(d), ' ');
        }
    };
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out.push_back('{');
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out.push_back(',');
                first = false;
                pad(depth + 1);
                out += nlohmann::json(it.key()).dump();
                out += indent > 0 ? ": " : ":";
                dump_json_impl(it.value(), out, indent, depth + 1);
            }
            pad(depth);
            out.push_back('}');
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out.push_back('[');
            bool first = true;
            for (const auto& e : j) {
                if (!first) out.push_back(',');
                first = false;
                pad(depth + 1);
                dump_json_impl(e, out, indent, depth + 1);
            }
            pad(depth);
            out.push_back(']');
            return;
        }
        case nlohmann::json::value_t::number_float: {
            double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                return;
            }
            std::string s = fmt_double(v);
            // keep it a JSON number even when %.12g prints an integer form
            out += s;
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const fs::path& path) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("parse error in " + path.string() + ": bad number '" + s + "'");
    }
}

long parse_long(const std::string& s, const fs::path& path) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("parse error in " + path.string() + ": bad integer '" + s + "'");
    }
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
    std::string out;
    dump_json_impl(j, out, indent, 0);
    out.push_back('\n');
    return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fnv1a64_hex(const fs::path& path) {
    std::string bytes = read_file(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_matrix_csv(const fs::path& path, const Tensor2D& m) {
    std::string out;
    out.reserve(m.size() * 16);
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) out.push_back(',');
            out += fmt_double(m(i, j));
        }
        out.push_back('\n');
    }
    write_file_atomic(path, out);
}

Tensor2D read_matrix_csv(const fs::path& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw DataError("empty matrix file " + path.string());
    int rows = static_cast<int>(lines.size());
    auto first = split(lines[0], ',');
    int cols = static_cast<int>(first.size());
    Tensor2D m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        auto cells = split(lines[static_cast<std::size_t>(i)], ',');
        if (static_cast<int>(cells.size()) != cols)
            throw DataError("ragged row " + std::to_string(i + 1) + " in " + path.string());
        for (int j = 0; j < cols; ++j) m(i, j) = parse_double(cells[static_cast<std::size_t>(j)], path);
    }
    if (!m.all_finite()) throw DataError("non-finite value in " + path.string());
    return m;
}

void write_timeseries_csv(const fs::path& path, const Tensor2D& values) {
    std::string out;
    for (int j = 0; j < values.cols(); ++j) {
        if (j) out.push_back(',');
        out += "roi_" + std::to_string(j + 1);
    }
    out.push_back('\n');
    for (int i = 0; i < values.rows(); ++i) {
        for (int j = 0; j < values.cols(); ++j) {
            if (j) out.push_back(',');
            out += fmt_double(values(i, j));
        }
        out.push_back('\n');
    }
    write_file_atomic(path, out);
}

connectome::RoiTimeSeries read_timeseries_csv(const fs::path& path) {
    auto lines = read_lines(path);
    if (lines.size() < 2) throw DataError("time-series file too short: " + path.string());
    int cols = static_cast<int>(split(lines[0], ',').size());
    int rows = static_cast<int>(lines.size()) - 1;
    connectome::RoiTimeSeries ts;
    ts.values = Tensor2D(rows, cols);
    for (int i = 0; i < rows; ++i) {
        auto cells = split(lines[static_cast<std::size_t>(i) + 1], ',');
        if (static_cast<int>(cells.size()) != cols)
            throw DataError("ragged row " + std::to_string(i + 2) + " in " + path.string());
        for (int j = 0; j < cols; ++j) ts.values(i, j) = parse_double(cells[static_cast<std::size_t>(j)], path);
    }
    if (!ts.values.all_finite()) throw DataError("non-finite value in " + path.string());
    return ts;
}

void write_label_volume(const fs::path& path, const atlas::LabelVolume& v) {
    std::string out = "# dims " + std::to_string(v.dims[0]) + " " + std::to_string(v.dims[1]) +
                      " " + std::to_string(v.dims[2]) + " scale " + std::to_string(v.scale) + "\n";
    for (const auto& vox : v.voxels)
        out += std::to_string(vox.x) + "\t" + std::to_string(vox.y) + "\t" +
               std::to_string(vox.z) + "\t" + std::to_string(vox.label) + "\n";
    write_file_atomic(path, out);
}

atlas::LabelVolume read_label_volume(const fs::path& path) {
    auto lines = read_lines(path);
    if (lines.empty() || lines[0].rfind("# dims ", 0) != 0)
        throw DataError("label volume " + path.string() + " is missing its '# dims' header");
    std::istringstream head(lines[0].substr(7));
    atlas::LabelVolume v;
    std::string kw;
    if (!(head >> v.dims[0] >> v.dims[1] >> v.dims[2] >> kw >> v.scale) || kw != "scale")
        throw DataError("bad header in " + path.string());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto cells = split(lines[i], '\t');
        if (cells.size() != 4)
            throw DataError("bad voxel row " + std::to_string(i + 1) + " in " + path.string());
        v.voxels.push_back({static_cast<int>(parse_long(cells[0], path)),
                            static_cast<int>(parse_long(cells[1], path)),
                            static_cast<int>(parse_long(cells[2], path)),
                            static_cast<int>(parse_long(cells[3], path))});
    }
    v.validate();
    return v;
}

void write_rsn_table(const fs::path& path, const atlas::RsnTable& t) {
    std::string out;
    for (std::size_t i = 0; i < t.roi_to_rsn.size(); ++i)
        out += std::to_string(i + 1) + "\t" + std::to_string(t.roi_to_rsn[i]) + "\n";
    write_file_atomic(path, out);
}

atlas::RsnTable read_rsn_table(const fs::path& path) {
    auto lines = read_lines(path);
    atlas::RsnTable t;
    t.roi_to_rsn.assign(lines.size(), 0);
    for (const std::string& line : lines) {
        auto cells = split(line, '\t');
        if (cells.size() != 2) throw DataError("bad RSN row in " + path.string());
        long roi = parse_long(cells[0], path);
        long rsn = parse_long(cells[1], path);
        if (roi < 1 || roi > static_cast<long>(lines.size()))
            throw DataError("RSN table " + path.string() + ": roi " + std::to_string(roi) +
                            " out of range");
        t.roi_to_rsn[static_cast<std::size_t>(roi - 1)] = static_cast<int>(rsn);
    }
    t.scale = static_cast<int>(t.roi_to_rsn.size());
    return t;
}

void write_overlap_table(const fs::path& path, const atlas::OverlapTable& t) {
    std::string out;
    for (const auto& row : t.rows)
        out += std::to_string(row.fine) + "\t" + std::to_string(row.coarse) + "\t" +
               std::to_string(row.overlap) + "\t" +
               std::to_string(t.fine_totals[static_cast<std::size_t>(row.fine - 1)]) + "\n";
    write_file_atomic(path, out);
}

void write_mapping_csv(const fs::path& path, const atlas::MappingMatrix& m) {
    std::string out;
    for (int i = 0; i < m.m.rows(); ++i) {
        for (int j = 0; j < m.m.cols(); ++j) {
            if (j) out.push_back(',');
            out.push_back(m.m(i, j) == 1.0 ? '1' : '0');
        }
        out.push_back('\n');
    }
    write_file_atomic(path, out);
}

nlohmann::json model_config_to_json(const model::ModelConfig& cfg) {
    const char* pooling = cfg.pooling_scheme == atlas::PoolScheme::sum       ? "sum"
                          : cfg.pooling_scheme == atlas::PoolScheme::average ? "average"
                                                                             : "max";
    const char* variant = cfg.variant == model::Variant::mahgcn  ? "mahgcn"
                          : cfg.variant == model::Variant::magcn ? "magcn"
                                                                 : "gcn";
    return nlohmann::json{
        {"scales", cfg.scales},
        {"pooling_scheme", pooling},
        {"th", cfg.th},
        {"dropout_rate", cfg.dropout_rate},
        {"skip_connections", cfg.skip_connections},
        {"hidden_units", cfg.hidden_units},
        {"num_classes", cfg.num_classes},
        {"degree_mode", cfg.degree_mode == connectome::DegreeMode::raw ? "raw" : "absolute"},
        {"variant", variant},
    };
}

model::ModelConfig model_config_from_json(const nlohmann::json& j) {
    model::ModelConfig cfg;
    if (!j.is_object()) throw ConfigError("model: expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const nlohmann::json& v = it.value();
        try {
            if (key == "scales")
                cfg.scales = v.get<std::vector<int>>();
            else if (key == "pooling_scheme") {
                std::string s = v.get<std::string>();
                if (s == "sum")
                    cfg.pooling_scheme = atlas::PoolScheme::sum;
                else if (s == "average")
                    cfg.pooling_scheme = atlas::PoolScheme::average;
                else if (s == "max")
                    cfg.pooling_scheme = atlas::PoolScheme::max;
                else
                    throw ConfigError("model.pooling_scheme: unknown scheme '" + s + "'");
            } else if (key == "th")
                cfg.th = v.get<double>();
            else if (key == "dropout_rate")
                cfg.dropout_rate = v.get<double>();
            else if (key == "skip_connections")
                cfg.skip_connections = v.get<bool>();
            else if (key == "hidden_units")
                cfg.hidden_units = v.get<int>();
            else if (key == "num_classes")
                cfg.num_classes = v.get<int>();
            else if (key == "degree_mode") {
                std::string s = v.get<std::string>();
                if (s == "raw")
                    cfg.degree_mode = connectome::DegreeMode::raw;
                else if (s == "absolute")
                    cfg.degree_mode = connectome::DegreeMode::absolute;
                else
                    throw ConfigError("model.degree_mode: unknown mode '" + s + "'");
            } else if (key == "variant") {
                std::string s = v.get<std::string>();
                if (s == "mahgcn")
                    cfg.variant = model::Variant::mahgcn;
                else if (s == "magcn")
                    cfg.variant = model::Variant::magcn;
                else if (s == "gcn")
                    cfg.variant = model::Variant::gcn;
                else
                    throw ConfigError("model.variant: unknown variant '" + s + "'");
            } else
                throw ConfigError("model: unknown key \"" + key + "\"");
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("model." + key + ": wrong value type");
        }
    }
    return cfg;
}

namespace {

nlohmann::json tensor_to_json(const Tensor2D& t) {
    return nlohmann::json{{"shape", {t.rows(), t.cols()}},
                          {"data", std::vector<double>(t.data().begin(), t.data().end())}};
}

Tensor2D tensor_from_json(const nlohmann::json& j, const std::string& name) {
    if (!j.is_object() || !j.contains("shape") || !j.contains("data"))
        throw DataError("checkpoint: entry " + name + " needs shape and data");
    auto shape = j.at("shape").get<std::vector<int>>();
    auto data = j.at("data").get<std::vector<double>>();
    if (shape.size() != 2 || shape[0] <= 0 || shape[1] <= 0 ||
        data.size() != static_cast<std::size_t>(shape[0]) * static_cast<std::size_t>(shape[1]))
        throw DataError("checkpoint: entry " + name + " has inconsistent shape");
    Tensor2D t(shape[0], shape[1]);
    std::copy(data.begin(), data.end(), t.data().begin());
    return t;
}

}  // namespace

void save_checkpoint(const fs::path& path, const model::ModelConfig& cfg,
                     const model::MahgcnParams& params) {
    nlohmann::json p;
    for (std::size_t k = 0; k < params.gcn_theta.size(); ++k)
        p["gcn." + std::to_string(k) + ".theta"] = tensor_to_json(params.gcn_theta[k]);
    p["fl1.w"] = tensor_to_json(params.fl1_w);
    p["fl1.b"] = tensor_to_json(params.fl1_b);
    p["bn1.gamma"] = tensor_to_json(params.bn_gamma);
    p["bn1.beta"] = tensor_to_json(params.bn_beta);
    p["bn1.run_mean"] = tensor_to_json(params.bn_run_mean);
    p["bn1.run_var"] = tensor_to_json(params.bn_run_var);
    p["fl2.w"] = tensor_to_json(params.fl2_w);
    p["fl2.b"] = tensor_to_json(params.fl2_b);
    nlohmann::json j{{"config", model_config_to_json(cfg)}, {"params", p}};
    write_file_atomic(path, dump_json(j));
}

Checkpoint load_checkpoint(const fs::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("checkpoint " + path.string() + ": " + e.what());
    }
    if (!j.contains("config") || !j.contains("params"))
        throw DataError("checkpoint " + path.string() + ": needs config and params");
    Checkpoint ck;
    ck.config = model_config_from_json(j.at("config"));
    ck.config.validate();
    const nlohmann::json& p = j.at("params");
    for (std::size_t k = 0; k < ck.config.scales.size(); ++k) {
        std::string name = "gcn." + std::to_string(k) + ".theta";
        if (!p.contains(name)) throw DataError("checkpoint: missing " + name);
        ck.params.gcn_theta.push_back(tensor_from_json(p.at(name), name));
    }
    auto need = [&](const char* name) {
        if (!p.contains(name)) throw DataError("checkpoint: missing " + std::string(name));
        return tensor_from_json(p.at(name), name);
    };
    ck.params.fl1_w = need("fl1.w");
    ck.params.fl1_b = need("fl1.b");
    ck.params.bn_gamma = need("bn1.gamma");
    ck.params.bn_beta = need("bn1.beta");
    ck.params.bn_run_mean = need("bn1.run_mean");
    ck.params.bn_run_var = need("bn1.run_var");
    ck.params.fl2_w = need("fl2.w");
    ck.params.fl2_b = need("fl2.b");
    ck.params.validate(ck.config);
    return ck;
}

nlohmann::json metrics_to_json(const std::vector<training::RepeatResult>& repeats,
                               const nlohmann::json& resolved_config, std::uint64_t seed) {
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : repeats) {
        nlohmann::json rec{
            {"acc", r.metrics.acc},
            {"sen", r.metrics.sen ? nlohmann::json(*r.metrics.sen) : nlohmann::json()},
            {"spe", r.metrics.spe ? nlohmann::json(*r.metrics.spe) : nlohmann::json()},
            {"auc", r.metrics.auc},
            {"scores", r.metrics.scores},
            {"labels", r.metrics.labels},
            {"test_ids", r.test_ids},
            {"epoch_loss", r.epoch_loss},
        };
        reps.push_back(std::move(rec));
    }
    return nlohmann::json{{"repeats", reps}, {"config", resolved_config}, {"seed", seed}};
}

LoadedMetrics load_metrics(const fs::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("metrics " + path.string() + ": " + e.what());
    }
    LoadedMetrics out;
    if (!j.contains("repeats") || !j.at("repeats").is_array())
        throw DataError("metrics " + path.string() + ": missing repeats array");
    for (const auto& rec : j.at("repeats")) {
        LoadedRepeat r;
        r.metrics.acc = rec.at("acc").get<double>();
        if (rec.contains("sen") && !rec.at("sen").is_null())
            r.metrics.sen = rec.at("sen").get<double>();
        if (rec.contains("spe") && !rec.at("spe").is_null())
            r.metrics.spe = rec.at("spe").get<double>();
        r.metrics.auc = rec.at("auc").get<double>();
        r.metrics.scores = rec.at("scores").get<std::vector<double>>();
        r.metrics.labels = rec.at("labels").get<std::vector<int>>();
        if (rec.contains("test_ids"))
            r.test_ids = rec.at("test_ids").get<std::vector<std::string>>();
        out.repeats.push_back(std::move(r));
    }
    if (j.contains("config")) out.config = j.at("config");
    if (j.contains("seed")) out.seed = j.at("seed").get<std::uint64_t>();
    return out;
}

void save_dataset(const fs::path& dir, const training::SynthOutput& synth, bool emit_fcn,
                  bool emit_timeseries) {
    fs::create_directories(dir);
    std::string subjects;
    for (const auto& s : synth.dataset.samples)
        subjects += s.id + "\t" + std::to_string(s.label) + "\n";
    write_file_atomic(dir / "subjects.tsv", subjects);

    for (const auto& v : synth.volumes)
        write_label_volume(dir / ("labels_" + std::to_string(v.scale) + ".tsv"), v);
    for (const auto& t : synth.rsn_tables)
        write_rsn_table(dir / ("rsn_" + std::to_string(t.scale) + ".tsv"), t);

    if (emit_timeseries && synth.timeseries.size() != synth.dataset.samples.size())
        throw UsageError("save_dataset: time series were not retained by the generator");

    for (std::size_t i = 0; i < synth.dataset.samples.size(); ++i) {
        const auto& s = synth.dataset.samples[i];
        fs::path sub = dir / s.id;
        fs::create_directories(sub);
        for (std::size_t k = 0; k < s.stack.scales.size(); ++k) {
            std::string scale = std::to_string(s.stack.scales[k]);
            if (emit_fcn) write_matrix_csv(sub / ("fcn_" + scale + ".csv"), s.stack.fcns[k].values);
            if (emit_timeseries)
                write_timeseries_csv(sub / ("ts_" + scale + ".csv"), synth.timeseries[i][k]);
        }
    }
}

std::vector<std::pair<std::string, int>> read_subjects(const fs::path& dir) {
    auto lines = read_lines(dir / "subjects.tsv");
    std::vector<std::pair<std::string, int>> out;
    std::unordered_set<std::string> seen;
    for (const std::string& line : lines) {
        auto cells = split(line, '\t');
        if (cells.size() != 2) throw DataError("bad row in " + (dir / "subjects.tsv").string());
        const std::string& id = cells[0];
        // ids name subdirectories; keep them path-safe
        if (id.empty() || id.find('/') != std::string::npos ||
            id.find('\\') != std::string::npos || id.find("..") != std::string::npos)
            throw DataError("subjects.tsv: unusable subject id '" + id + "'");
        if (!seen.insert(id).second)
            throw DataError("subjects.tsv: duplicate subject id '" + id + "'");
        long label = parse_long(cells[1], dir / "subjects.tsv");
        if (label != 0 && label != 1)
            throw DataError("subjects.tsv: label must be 0 or 1, got " + cells[1]);
        out.emplace_back(id, static_cast<int>(label));
    }
    if (out.empty()) throw DataError("subjects.tsv is empty in " + dir.string());
    return out;
}

training::Dataset load_dataset(const fs::path& dir, const std::vector<int>& scales) {
    training::Dataset data;
    for (const auto& [id, label] : read_subjects(dir)) {
        training::LabeledSample s;
        s.id = id;
        s.label = label;
        s.stack.scales = scales;
        for (int scale : scales) {
            fs::path fcn_path = dir / id / ("fcn_" + std::to_string(scale) + ".csv");
            fs::path ts_path = dir / id / ("ts_" + std::to_string(scale) + ".csv");
            connectome::FcnMatrix f;
            f.scale = scale;
            if (fs::exists(fcn_path)) {
                f.values = read_matrix_csv(fcn_path);
                if (f.values.rows() != scale || f.values.cols() != scale)
                    throw DataError(fcn_path.string() + ": expected " + std::to_string(scale) +
                                    "x" + std::to_string(scale) + " matrix");
            } else if (fs::exists(ts_path)) {
                f.values = connectome::pearson_fcn(read_timeseries_csv(ts_path)).fcn.values;
                if (f.values.rows() != scale)
                    throw DataError(ts_path.string() + ": expected " + std::to_string(scale) +
                                    " ROI columns");
            } else {
                throw DataError("subject " + id + ": no fcn_" + std::to_string(scale) +
                                ".csv or ts_" + std::to_string(scale) + ".csv under " +
                                dir.string());
            }
            s.stack.fcns.push_back(std::move(f));
        }
        data.samples.push_back(std::move(s));
    }
    return data;
}

std::vector<atlas::LabelVolume> load_atlas_volumes(const fs::path& dir) {
    std::vector<atlas::LabelVolume> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("labels_", 0) == 0 && entry.path().extension() == ".tsv")
            out.push_back(read_label_volume(entry.path()));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.scale > b.scale; });
    return out;
}

std::vector<atlas::RsnTable> load_rsn_tables(const fs::path& dir) {
    std::vector<atlas::RsnTable> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.rfind("rsn_", 0) == 0 && entry.path().extension() == ".tsv")
            out.push_back(read_rsn_table(entry.path()));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.scale > b.scale; });
    return out;
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
    nlohmann::json inputs = nlohmann::json::array();
    for (const std::string& f : m.input_files)
        inputs.push_back(nlohmann::json{{"path", f}, {"fnv1a64", fnv1a64_hex(f)}});
    nlohmann::json j{
        {"tool_version", kVersion},
        {"command", m.command},
        {"config", m.resolved_config},
        {"base_seed", m.base_seed},
        {"inputs", inputs},
        {"outputs", m.output_files},
        {"wall_seconds", m.wall_seconds},
    };
    write_file_atomic(dir / "manifest.json", dump_json(j));
}

}  // namespace mahgcn::io
