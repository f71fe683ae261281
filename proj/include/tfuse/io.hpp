#pragma once

// File formats:
//   graphs     JSONL, one {"num_nodes", "edges", "features", "target"} object
//              per line; an optional first line {"meta": {...}} records how
//              the dataset was generated.
//   encodings  JSONL sidecar, one {"kind", "k", "rows"} object per graph.
//   checkpoint <stem>.json manifest (config, seed, parameter shapes) plus
//              <stem>.bin, all parameters as little-endian float64 in
//              declaration order.
//   report     CSV, one row per run.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tfuse/encoding.hpp"
#include "tfuse/graph.hpp"
#include "tfuse/model.hpp"

namespace tfuse {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

struct GraphFile {
    std::vector<Graph> graphs;
    std::optional<nlohmann::json> meta;
};

void write_graphs(const std::filesystem::path& path, const std::vector<Graph>& graphs,
                  const std::optional<nlohmann::json>& meta = std::nullopt);
GraphFile read_graphs(const std::filesystem::path& path);

void write_encodings(const std::filesystem::path& path, const std::vector<EncodingMatrix>& encodings);
std::vector<EncodingMatrix> read_encodings(const std::filesystem::path& path);

// FNV-1a over the raw bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

nlohmann::json config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const nlohmann::json& j);

void write_checkpoint(const std::filesystem::path& stem, const ModelConfig& cfg, const ModelParams& params);
struct Checkpoint {
    ModelConfig config;
    ModelParams params;
};
Checkpoint read_checkpoint(const std::filesystem::path& stem);

struct ReportRow {
    std::string dataset;
    std::string encoder;
    std::string layer;
    std::string regime;
    std::size_t K = 0;
    std::size_t L = 0;
    std::size_t d_hidden = 0;
    std::size_t params = 0;
    std::uint64_t seed = 0;
    double train_metric = 0.0;
    double test_metric = 0.0;
    std::size_t epochs = 0;
    double wall_time_s = 0.0;
};

std::string report_header();
std::string format_row(const ReportRow& row);
ReportRow parse_row(const std::string& line);
void write_report(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report(const std::filesystem::path& path);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace tfuse
