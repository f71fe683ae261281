#pragma once

// Experiment orchestration: dataset loading, single runs with their on-disk
// artifacts, grid sweeps, and the train/test summary tables.
//
// Run directory layout: <out_root>/<name>/<seed>/
//   manifest.json    resolved config, seed, dataset checksum, artifacts
//   checkpoint.json  model config and parameter shapes
//   checkpoint.bin   parameters, float64 little-endian
//   metrics.csv      per-epoch history
//   report.csv       the run's summary row

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tfuse/config.hpp"
#include "tfuse/io.hpp"
#include "tfuse/training.hpp"

namespace tfuse {

struct LoadedData {
    Dataset dataset;
    std::string checksum;
    std::optional<nlohmann::json> meta;
};

std::vector<EncodingMatrix> compute_encodings(const std::vector<Graph>& graphs, const StructuralConfig& cfg);
LoadedData load_data(const RunConfig& cfg);

// Fills the data-derived model fields (d_in, k, out_dim) and applies the
// d_hidden substitution rule. Returns the substitution notes.
std::vector<std::string> resolve_model(RunConfig& cfg, const Dataset& data);

struct RunManifest {
    KeyValues config;
    std::uint64_t seed = 0;
    std::string dataset_checksum;
    std::vector<std::string> substitutions;
    std::map<std::string, std::string> artifacts;  // role -> path relative to the run directory

    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

std::string render_manifest(const RunManifest& m);
RunManifest parse_manifest(const std::string& text);
RunManifest read_manifest(const std::filesystem::path& path);

struct RunOutcome {
    ReportRow row;
    RunManifest manifest;
    std::filesystem::path dir;
    TrainResult result;
};

std::filesystem::path run_dir(const std::filesystem::path& out_root, const RunConfig& cfg);

RunOutcome execute_run(RunConfig cfg, const std::filesystem::path& out_root);
RunOutcome execute_run(RunConfig cfg, const LoadedData& data, const std::filesystem::path& out_root);
RunOutcome rerun_from_manifest(const std::filesystem::path& manifest_path, const std::filesystem::path& out_root);

void write_history(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

// One RunConfig per grid point; the none regime is emitted once per
// (encoder, layer, d_hidden, seed) with L = 0.
std::vector<RunConfig> expand_sweep(const SweepConfig& sweep);

struct SweepOutcome {
    std::vector<ReportRow> rows;
    std::vector<std::filesystem::path> run_dirs;
    std::filesystem::path report_path;
};

// Runs every grid point (up to grid.jobs at a time) and writes
// <out_root>/<name>/report.csv with the rows in grid order.
SweepOutcome run_sweep(const SweepConfig& sweep, const std::filesystem::path& out_root);

struct EvalOutcome {
    double train_metric = 0.0;
    double val_metric = 0.0;
    double test_metric = 0.0;
};
EvalOutcome evaluate_run(const std::filesystem::path& run_directory);

struct SeedSummary {
    std::string dataset, encoder, layer, regime;
    std::size_t K = 0, L = 0, d_hidden = 0, params = 0;
    std::size_t runs = 0;
    double train_mean = 0.0, train_std = 0.0;
    double test_mean = 0.0, test_std = 0.0;
};

// Mean and population standard deviation over seeds of otherwise identical rows.
std::vector<SeedSummary> aggregate_seeds(const std::vector<ReportRow>& rows);

// Train/test tables: one per (dataset, d_hidden, L), rows per layer kind
// with a concat row, a tensor row and a gain row; columns full, sparse K
// (descending) and no MP. Gain is concat/tensor when lower is better and
// tensor/concat otherwise, so gain > 1 favours the tensor encoder.
std::string render_markdown(const std::vector<ReportRow>& rows, bool higher_is_better, bool with_std);

}  // namespace tfuse
