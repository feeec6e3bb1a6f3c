#ifndef UNADV_BENCH_HPP
#define UNADV_BENCH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "unadv/dataset.hpp"
#include "unadv/model.hpp"
#include "unadv/servo_sim.hpp"
#include "unadv/tensor.hpp"

namespace unadv::bench {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kReportHeader =
    "corruption,severity,patch_kind,patch_area_pct,accuracy";
inline constexpr const char* kLibraryVersion = "0.1.0";

// Plain-text configuration: one `key = value` per line, '#' starts a comment,
// blank lines ignored. Keys are dotted lowercase identifiers; duplicates are
// rejected at parse time and unknown keys are rejected against a schema, so a
// config never silently loses a setting.
struct Config {
    std::vector<std::pair<std::string, std::string>> entries; // file order

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const; // throws when absent
    std::string get_or(const std::string& key, const std::string& fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    real get_real(const std::string& key, real fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    // Comma-separated lists; an empty value is an empty list.
    std::vector<std::string> get_names(const std::string& key, const std::string& fallback) const;
    std::vector<int> get_ints(const std::string& key, const std::string& fallback) const;
    std::vector<real> get_reals(const std::string& key, const std::string& fallback) const;
};

Config parse_config(const std::string& text);
Config load_config(const std::string& path);

// Key-sorted `key = value` lines; the digest hashes this form, so key order
// and comments in the source file never change an experiment's identity.
std::string canonical_config(const Config& config);
uint64_t config_digest(const Config& config);

void require_keys(const Config& config, const std::vector<std::string>& allowed);

// One accuracy measurement. corruption is "none" or a corruption kind name;
// patch_kind is "none" or a patch archive kind; patch_area_pct is 0 when no
// patch is applied.
struct ResultRow {
    std::string corruption = "none";
    int severity = 0;
    std::string patch_kind = "none";
    real patch_area_pct = 0.0;
    real accuracy = 0.0;
};

struct ResultTable {
    int schema_version = kReportSchemaVersion;
    std::vector<ResultRow> rows;
};

enum class ReportFormat { csv, json };

// Accuracy and area cells are rounded to six decimals before emission, so
// the CSV and JSON forms of a table carry identical values and parse back
// without loss. Column order is kReportHeader and is versioned: changing it
// requires a kReportSchemaVersion bump.
void emit_report(const ResultTable& table, ReportFormat format, const std::string& path);
ResultTable parse_report_csv(const std::string& path);
ResultTable parse_report_json(const std::string& path);

uint64_t file_digest(const std::string& path);

struct ManifestEntry {
    std::string path; // relative to the run directory
    uint64_t digest = 0;
};

struct RunManifest {
    int schema_version = kReportSchemaVersion;
    uint64_t seed = 0;
    uint64_t config_digest = 0;
    std::map<std::string, uint64_t> stage_seeds;
    std::vector<ManifestEntry> outputs; // sorted by path; excludes the manifest itself
};

// The experiment schema. Defaults reproduce the desk-scale benchmark; every
// key is optional. sweep.corruptions is "all", "none", or a comma list of
// kind names; patch.areas_pct may be empty to skip patches entirely.
struct ExperimentConfig {
    uint64_t seed = 0;
    int classes = 8;
    int samples_per_class = 150;
    int image_size = 32;
    std::vector<int> channels = {16, 32, 64};
    int model_epochs = 12;
    int model_batch = 128;
    real learning_rate = 0.1;
    std::vector<real> areas_pct = {2, 5, 10};
    int patch_epochs = 20;
    int patch_batch = 512;
    real patch_step = 0.1;
    std::vector<std::string> corruptions; // resolved kind names
    std::vector<int> severities = {1, 2, 3, 4, 5};
};

ExperimentConfig parse_experiment(const Config& config);

// Patch side for an approximate area fraction of the canvas:
// round(size * sqrt(pct / 100)), clamped to [1, size].
int patch_side_for_area(int image_size, real area_pct);

struct RunOutcome {
    ResultTable table; // empty rows when the sweep is empty
    RunManifest manifest;
};

// Runs the declared pipeline into out_dir: generate data, train the
// classifier, train one patch per class and area, evaluate every
// (corruption, severity) cell unpatched and per patch area, and write
// results.csv / results.json plus manifest.json. Everything derives from
// (config, seed) alone; reruns are bit-identical. An empty sweep (no areas,
// no corruption cells) writes the manifest only.
RunOutcome run_experiment(const Config& config, const std::string& out_dir);
RunOutcome run_experiment_file(const std::string& config_path, const std::string& out_dir);

// Dataset directory archive: <dir>/meta.json, <dir>/{train,test}/NNNNN.ppm
// plus labels.csv ("index,label"). Images are 8-bit quantized by the PPM
// format; loading a saved dataset reproduces the quantized values exactly.
void save_dataset_dir(const std::string& dir, const data::Dataset& dataset);
data::Dataset load_dataset_dir(const std::string& dir);

// The landing world used by the CLI and the benchmark suite: standard
// 48-texel pad on a seeded noise ground of the given side. Pure function of
// its arguments, so separately trained regressors and textures agree on the
// world they fly in.
servo::WorldState standard_world(int frame_side, uint64_t ground_seed);

} // namespace unadv::bench

#endif
