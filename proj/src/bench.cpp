#include "unadv/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "unadv/compositor.hpp"
#include "unadv/corruption.hpp"
#include "unadv/image_io.hpp"
#include "unadv/parallel.hpp"
#include "unadv/patch_forge.hpp"
#include "unadv/rng.hpp"

namespace unadv::bench {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& what,
                            const std::string& got) {
    throw std::invalid_argument("config key '" + key + "': expected " + what + ", got '" + got +
                                "'");
}

int64_t to_int(const std::string& key, const std::string& v) {
    size_t pos = 0;
    int64_t x = 0;
    try {
        x = std::stoll(v, &pos);
    } catch (const std::exception&) {
        bad_value(key, "an integer", v);
    }
    if (pos != v.size()) bad_value(key, "an integer", v);
    return x;
}

real to_real(const std::string& key, const std::string& v) {
    size_t pos = 0;
    real x = 0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        bad_value(key, "a number", v);
    }
    if (pos != v.size()) bad_value(key, "a number", v);
    return x;
}

uint64_t to_u64(const std::string& key, const std::string& v) {
    size_t pos = 0;
    uint64_t x = 0;
    try {
        x = std::stoull(v, &pos, 0);
    } catch (const std::exception&) {
        bad_value(key, "an unsigned integer", v);
    }
    if (pos != v.size()) bad_value(key, "an unsigned integer", v);
    return x;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

real round6(real x) { return std::round(x * 1e6) / 1e6; }

std::string format_row(const ResultRow& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s,%d,%s,%.6f,%.6f", r.corruption.c_str(), r.severity,
                  r.patch_kind.c_str(), round6(r.patch_area_pct), round6(r.accuracy));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json manifest_to_json(const RunManifest& m, const Config& config) {
    json j;
    j["schema_version"] = m.schema_version;
    j["seed"] = hex64(m.seed);
    j["config_digest"] = hex64(m.config_digest);
    json cfg = json::object();
    for (const auto& [k, v] : config.entries) cfg[k] = v;
    j["config"] = cfg;
    json seeds = json::object();
    for (const auto& [stage, value] : m.stage_seeds) seeds[stage] = hex64(value);
    j["stage_seeds"] = seeds;
    json outs = json::array();
    for (const ManifestEntry& e : m.outputs) outs.push_back({{"path", e.path}, {"digest", hex64(e.digest)}});
    j["outputs"] = outs;
    j["versions"] = {{"library", kLibraryVersion},
                     {"report_schema", kReportSchemaVersion},
                     {"corruption_catalog", 1}};
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << text;
    if (!f.good()) throw std::runtime_error("write failed for " + path);
}

} // namespace

bool Config::has(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return true;
    return false;
}

const std::string& Config::get(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return v;
    throw std::invalid_argument("config key '" + key + "' is missing");
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
}

int64_t Config::get_int(const std::string& key, int64_t fallback) const {
    return has(key) ? to_int(key, get(key)) : fallback;
}

real Config::get_real(const std::string& key, real fallback) const {
    return has(key) ? to_real(key, get(key)) : fallback;
}

uint64_t Config::get_u64(const std::string& key, uint64_t fallback) const {
    return has(key) ? to_u64(key, get(key)) : fallback;
}

std::vector<std::string> Config::get_names(const std::string& key,
                                           const std::string& fallback) const {
    return split_list(get_or(key, fallback));
}

std::vector<int> Config::get_ints(const std::string& key, const std::string& fallback) const {
    std::vector<int> out;
    for (const std::string& tok : get_names(key, fallback))
        out.push_back(static_cast<int>(to_int(key, tok)));
    return out;
}

std::vector<real> Config::get_reals(const std::string& key, const std::string& fallback) const {
    std::vector<real> out;
    for (const std::string& tok : get_names(key, fallback)) out.push_back(to_real(key, tok));
    return out;
}

Config parse_config(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (c.has(key))
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": duplicate key '" + key + "'");
        c.entries.emplace_back(key, value);
    }
    return c;
}

Config load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string canonical_config(const Config& config) {
    std::vector<std::pair<std::string, std::string>> sorted = config.entries;
    std::sort(sorted.begin(), sorted.end());
    std::string out;
    for (const auto& [k, v] : sorted) out += k + " = " + v + "\n";
    return out;
}

uint64_t config_digest(const Config& config) { return fnv1a64(canonical_config(config)); }

void require_keys(const Config& config, const std::vector<std::string>& allowed) {
    for (const auto& [k, v] : config.entries)
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw std::invalid_argument("unknown config key '" + k + "'");
}

void emit_report(const ResultTable& table, ReportFormat format, const std::string& path) {
    if (format == ReportFormat::csv) {
        std::string text = std::string(kReportHeader) + "\n";
        for (const ResultRow& r : table.rows) text += format_row(r) + "\n";
        write_text(path, text);
        return;
    }
    json j;
    j["schema_version"] = table.schema_version;
    j["columns"] = {"corruption", "severity", "patch_kind", "patch_area_pct", "accuracy"};
    json rows = json::array();
    for (const ResultRow& r : table.rows)
        rows.push_back({{"corruption", r.corruption},
                        {"severity", r.severity},
                        {"patch_kind", r.patch_kind},
                        {"patch_area_pct", round6(r.patch_area_pct)},
                        {"accuracy", round6(r.accuracy)}});
    j["rows"] = rows;
    write_text(path, j.dump(2) + "\n");
}

ResultTable parse_report_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || trim(line) != kReportHeader)
        throw std::runtime_error("bad report header in " + path);
    ResultTable t;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 5)
            throw std::runtime_error("bad report row at " + path + ":" + std::to_string(lineno));
        ResultRow r;
        r.corruption = f[0];
        r.severity = static_cast<int>(to_int("severity", f[1]));
        r.patch_kind = f[2];
        r.patch_area_pct = to_real("patch_area_pct", f[3]);
        r.accuracy = to_real("accuracy", f[4]);
        t.rows.push_back(std::move(r));
    }
    return t;
}

ResultTable parse_report_json(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error("bad JSON in " + path + ": " + e.what());
    }
    ResultTable t;
    try {
        t.schema_version = j.at("schema_version").get<int>();
        if (t.schema_version != kReportSchemaVersion)
            throw std::runtime_error("unsupported report schema version in " + path);
        for (const json& row : j.at("rows")) {
            ResultRow r;
            r.corruption = row.at("corruption").get<std::string>();
            r.severity = row.at("severity").get<int>();
            r.patch_kind = row.at("patch_kind").get<std::string>();
            r.patch_area_pct = row.at("patch_area_pct").get<real>();
            r.accuracy = row.at("accuracy").get<real>();
            t.rows.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw std::runtime_error("bad report fields in " + path + ": " + e.what());
    }
    return t;
}

uint64_t file_digest(const std::string& path) {
    const std::string bytes = read_file(path);
    return fnv1a64(bytes.data(), bytes.size());
}

ExperimentConfig parse_experiment(const Config& config) {
    ExperimentConfig e;
    e.seed = config.get_u64("seed", 0);
    e.classes = static_cast<int>(config.get_int("dataset.classes", e.classes));
    e.samples_per_class =
        static_cast<int>(config.get_int("dataset.samples_per_class", e.samples_per_class));
    e.image_size = static_cast<int>(config.get_int("dataset.image_size", e.image_size));
    e.channels = config.get_ints("model.channels", "16,32,64");
    e.model_epochs = static_cast<int>(config.get_int("model.epochs", e.model_epochs));
    e.model_batch = static_cast<int>(config.get_int("model.batch_size", e.model_batch));
    e.learning_rate = config.get_real("model.learning_rate", e.learning_rate);
    e.areas_pct = config.get_reals("patch.areas_pct", "2,5,10");
    e.patch_epochs = static_cast<int>(config.get_int("patch.epochs", e.patch_epochs));
    e.patch_batch = static_cast<int>(config.get_int("patch.batch_size", e.patch_batch));
    e.patch_step = config.get_real("patch.step", e.patch_step);

    const std::string raw = trim(config.get_or("sweep.corruptions", "all"));
    if (raw == "all") {
        for (corr::Kind k : corr::all_kinds()) e.corruptions.push_back(corr::to_string(k));
    } else if (raw != "none" && !raw.empty()) {
        for (const std::string& name : split_list(raw)) {
            corr::kind_from_string(name); // rejects unknown names
            e.corruptions.push_back(name);
        }
    }
    e.severities = config.get_ints("sweep.severities", "1,2,3,4,5");
    for (int s : e.severities)
        if (s < 1 || s > corr::kSeverityCount)
            throw std::invalid_argument("sweep.severities entries must be in 1..5");
    for (real a : e.areas_pct)
        if (!(a > 0.0) || a > 100.0)
            throw std::invalid_argument("patch.areas_pct entries must be in (0, 100]");
    return e;
}

int patch_side_for_area(int image_size, real area_pct) {
    if (image_size < 1) throw std::invalid_argument("patch_side_for_area: image size must be positive");
    if (!(area_pct > 0.0) || area_pct > 100.0)
        throw std::invalid_argument("patch_side_for_area: area must be in (0, 100]");
    const int side = static_cast<int>(std::lround(image_size * std::sqrt(area_pct / 100.0)));
    return std::clamp(side, 1, image_size);
}

RunOutcome run_experiment(const Config& config, const std::string& out_dir) {
    static const std::vector<std::string> kKeys = {
        "seed",          "dataset.classes", "dataset.samples_per_class",
        "dataset.image_size", "model.channels", "model.epochs",
        "model.batch_size",   "model.learning_rate", "patch.areas_pct",
        "patch.epochs",       "patch.step",     "patch.batch_size",
        "sweep.corruptions",  "sweep.severities"};
    require_keys(config, kKeys);
    const ExperimentConfig exp = parse_experiment(config);
    fs::create_directories(out_dir);

    RunOutcome out;
    out.manifest.seed = exp.seed;
    out.manifest.config_digest = config_digest(config);

    struct Cell {
        corr::Kind kind = corr::Kind::gaussian_noise;
        int severity = 0; // 0 marks the clean cell
    };
    std::vector<Cell> cells;
    const size_t n_areas = exp.areas_pct.size();
    const bool any_cells = !exp.corruptions.empty() && !exp.severities.empty();
    if (n_areas > 0 || any_cells) {
        cells.push_back({});
        for (const std::string& name : exp.corruptions)
            for (int s : exp.severities) cells.push_back({corr::kind_from_string(name), s});
    }

    std::vector<std::string> written;
    if (!cells.empty()) {
        out.manifest.stage_seeds["dataset"] = fan_seed(exp.seed, "dataset");
        out.manifest.stage_seeds["model"] = fan_seed(exp.seed, "model");
        out.manifest.stage_seeds["eval-unpatched"] = fan_seed(exp.seed, "eval-unpatched");
        const data::Dataset ds = data::gen_shapes_dataset(
            exp.classes, exp.samples_per_class, exp.image_size, fan_seed(exp.seed, "dataset"));

        model::ModelConfig mc;
        mc.input_h = mc.input_w = exp.image_size;
        mc.channels = exp.channels;
        mc.outputs = exp.classes;
        model::TrainConfig tc;
        tc.learning_rate = exp.learning_rate;
        tc.batch_size = exp.model_batch;
        tc.epochs = exp.model_epochs;
        tc.seed = fan_seed(exp.seed, "model");
        const model::ModelParams m = model::train_classifier(ds, mc, tc);
        model::save_checkpoint(m, (fs::path(out_dir) / "model.ckpt").string());
        written.push_back("model.ckpt");

        std::vector<std::map<int, comp::PatchParams>> patch_sets(n_areas);
        std::vector<int> sides(n_areas);
        if (n_areas > 0) {
            out.manifest.stage_seeds["patch"] = fan_seed(exp.seed, "patch");
            out.manifest.stage_seeds["eval-patched"] = fan_seed(exp.seed, "eval-patched");
        }
        for (size_t ai = 0; ai < n_areas; ++ai) {
            sides[ai] = patch_side_for_area(exp.image_size, exp.areas_pct[ai]);
            char dname[48];
            std::snprintf(dname, sizeof dname, "patches/area%gpct", exp.areas_pct[ai]);
            fs::create_directories(fs::path(out_dir) / dname);
            for (int c = 0; c < exp.classes; ++c) {
                patch::PatchTrainConfig ptc;
                ptc.epochs = exp.patch_epochs;
                ptc.step = exp.patch_step;
                ptc.batch_size = exp.patch_batch;
                ptc.seed = fan_seed(exp.seed, "patch", ai * exp.classes + c);
                comp::PatchParams p = patch::train_patch(m, ds, c, sides[ai], ptc);
                char fname[64];
                std::snprintf(fname, sizeof fname, "%s/class%d", dname, c);
                const std::string base = (fs::path(out_dir) / fname).string();
                comp::save_patch(p, base + ".ppm", base + ".json", "trained",
                                 out.manifest.config_digest, ptc.seed);
                written.push_back(std::string(fname) + ".ppm");
                written.push_back(std::string(fname) + ".json");
                patch_sets[ai][c] = std::move(p);
            }
        }

        const size_t per_cell = 1 + n_areas;
        std::vector<ResultRow> rows(cells.size() * per_cell);
#pragma omp parallel for schedule(dynamic) if (parallel::enabled())
        for (int64_t ci = 0; ci < static_cast<int64_t>(cells.size()); ++ci) {
            const Cell cell = cells[static_cast<size_t>(ci)];
            const bool clean = cell.severity == 0;
            const std::string cname = clean ? "none" : corr::to_string(cell.kind);
            ResultRow base;
            base.corruption = cname;
            base.severity = cell.severity;
            if (clean) {
                base.accuracy = model::accuracy(m, ds.test_images, ds.test_labels);
            } else {
                corr::CorruptionSpec spec{cell.kind, cell.severity,
                                          fan_seed(exp.seed, "eval-unpatched",
                                                   static_cast<uint64_t>(ci))};
                base.accuracy = model::accuracy(m, corr::corrupt(ds.test_images, spec),
                                                ds.test_labels);
            }
            rows[static_cast<size_t>(ci) * per_cell] = base;
            for (size_t ai = 0; ai < n_areas; ++ai) {
                const uint64_t idx = static_cast<uint64_t>(ci) * n_areas + ai;
                patch::PostFn post;
                if (!clean)
                    post = corr::post_fn({cell.kind, cell.severity,
                                          fan_seed(exp.seed, "eval-post", idx)});
                patch::PatchTrainConfig ptc;
                const patch::EvalTable table = patch::evaluate_patched(
                    m, ds, patch_sets[ai], ptc.ranges(sides[ai], exp.image_size),
                    fan_seed(exp.seed, "eval-patched", idx), post);
                ResultRow r;
                r.corruption = cname;
                r.severity = cell.severity;
                r.patch_kind = "trained";
                r.patch_area_pct = exp.areas_pct[ai];
                r.accuracy = table.overall;
                rows[static_cast<size_t>(ci) * per_cell + 1 + ai] = std::move(r);
            }
        }
        out.table.rows = std::move(rows);

        emit_report(out.table, ReportFormat::csv, (fs::path(out_dir) / "results.csv").string());
        emit_report(out.table, ReportFormat::json, (fs::path(out_dir) / "results.json").string());
        written.push_back("results.csv");
        written.push_back("results.json");
    }

    std::sort(written.begin(), written.end());
    for (const std::string& rel : written)
        out.manifest.outputs.push_back({rel, file_digest((fs::path(out_dir) / rel).string())});
    write_text((fs::path(out_dir) / "manifest.json").string(),
               manifest_to_json(out.manifest, config).dump(2) + "\n");
    return out;
}

RunOutcome run_experiment_file(const std::string& config_path, const std::string& out_dir) {
    return run_experiment(load_config(config_path), out_dir);
}

namespace {

void save_split(const fs::path& dir, const Tensor& images, const std::vector<int>& labels) {
    fs::create_directories(dir);
    std::string csv = "index,label\n";
    const int n = images.dim(0);
    for (int i = 0; i < n; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "%05d.ppm", i);
        img::write_ppm((dir / name).string(), images.slice_batch(i));
        csv += std::to_string(i) + "," + std::to_string(labels[static_cast<size_t>(i)]) + "\n";
    }
    write_text((dir / "labels.csv").string(), csv);
}

void load_split(const fs::path& dir, int size, Tensor& images, std::vector<int>& labels) {
    std::istringstream in(read_file((dir / "labels.csv").string()));
    std::string line;
    if (!std::getline(in, line) || trim(line) != "index,label")
        throw std::runtime_error("bad labels header in " + dir.string());
    labels.clear();
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const size_t comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("bad labels row in " + dir.string());
        const int64_t index = to_int("index", trim(line.substr(0, comma)));
        if (index != static_cast<int64_t>(labels.size()))
            throw std::runtime_error("labels rows out of order in " + dir.string());
        labels.push_back(static_cast<int>(to_int("label", trim(line.substr(comma + 1)))));
    }
    if (labels.empty()) throw std::runtime_error("empty split in " + dir.string());
    images = Tensor({static_cast<int>(labels.size()), size, size, 3});
    for (size_t i = 0; i < labels.size(); ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "%05d.ppm", static_cast<int>(i));
        const Tensor im = img::read_ppm((dir / name).string());
        if (im.shape() != std::vector<int>{size, size, 3})
            throw std::runtime_error("image size mismatch in " + (dir / name).string());
        images.set_batch(static_cast<int>(i), im);
    }
}

} // namespace

void save_dataset_dir(const std::string& dir, const data::Dataset& dataset) {
    if (dataset.train_count() == 0 || dataset.test_count() == 0)
        throw std::invalid_argument("save_dataset_dir: both splits must be non-empty");
    fs::create_directories(dir);
    int classes = dataset.num_classes;
    for (int l : dataset.train_labels) classes = std::max(classes, l + 1);
    for (int l : dataset.test_labels) classes = std::max(classes, l + 1);
    json meta;
    meta["schema_version"] = 1;
    meta["classes"] = classes;
    if (!dataset.class_names.empty()) meta["class_names"] = dataset.class_names;
    meta["image_size"] = dataset.train_images.dim(1);
    meta["train_count"] = dataset.train_count();
    meta["test_count"] = dataset.test_count();
    write_text((fs::path(dir) / "meta.json").string(), meta.dump(2) + "\n");
    save_split(fs::path(dir) / "train", dataset.train_images, dataset.train_labels);
    save_split(fs::path(dir) / "test", dataset.test_images, dataset.test_labels);
}

data::Dataset load_dataset_dir(const std::string& dir) {
    json meta;
    try {
        meta = json::parse(read_file((fs::path(dir) / "meta.json").string()));
    } catch (const json::parse_error& e) {
        throw std::runtime_error("bad JSON in " + dir + "/meta.json: " + e.what());
    }
    int size = 0;
    data::Dataset ds;
    try {
        size = meta.at("image_size").get<int>();
        ds.num_classes = meta.at("classes").get<int>();
        if (meta.contains("class_names"))
            ds.class_names = meta.at("class_names").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw std::runtime_error("bad meta fields in " + dir + ": " + e.what());
    }
    load_split(fs::path(dir) / "train", size, ds.train_images, ds.train_labels);
    load_split(fs::path(dir) / "test", size, ds.test_images, ds.test_labels);
    for (int l : ds.train_labels)
        if (l < 0 || l >= ds.num_classes)
            throw std::runtime_error("label outside the class count in " + dir);
    for (int l : ds.test_labels)
        if (l < 0 || l >= ds.num_classes)
            throw std::runtime_error("label outside the class count in " + dir);
    return ds;
}

servo::WorldState standard_world(int frame_side, uint64_t ground_seed) {
    servo::WorldState w;
    w.pad_texture = servo::standard_pad_texture(48);
    w.ground = Tensor({frame_side, frame_side, 3});
    Rng rng(fan_seed(ground_seed, "ground"));
    for (int64_t i = 0; i < w.ground.size(); ++i) w.ground[i] = rng.uniform(0.2, 0.45);
    servo::validate_world(w);
    return w;
}

} // namespace unadv::bench
