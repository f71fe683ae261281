#include "tfuse/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tfuse/rng.hpp"

namespace tfuse {

using nlohmann::json;

namespace {

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

json tensor_rows(const Tensor& t) {
    json rows = json::array();
    for (std::size_t i = 0; i < t.rows(); ++i) rows.push_back(std::vector<double>(t.row(i).begin(), t.row(i).end()));
    return rows;
}

Tensor rows_tensor(const json& rows, std::size_t expected_rows, const char* what) {
    if (!rows.is_array() || rows.size() != expected_rows) {
        throw IoError(std::string(what) + ": expected " + std::to_string(expected_rows) + " rows");
    }
    const std::size_t width = expected_rows ? rows.at(0).size() : 0;
    std::vector<double> data;
    data.reserve(expected_rows * width);
    for (const json& r : rows) {
        if (!r.is_array() || r.size() != width) throw IoError(std::string(what) + ": ragged rows");
        for (const json& v : r) data.push_back(v.get<double>());
    }
    return Tensor({expected_rows, width}, std::move(data));
}

}  // namespace

json graph_to_json(const Graph& g) {
    json edges = json::array();
    for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
    return json{{"num_nodes", g.num_nodes()},
                {"edges", std::move(edges)},
                {"features", tensor_rows(g.features())},
                {"target", g.target()}};
}

Graph graph_from_json(const json& j) {
    try {
        const auto n = j.at("num_nodes").get<std::size_t>();
        std::vector<Edge> edges;
        for (const json& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw IoError("edge entries must be [i, j] pairs");
            edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
        }
        Tensor features = j.contains("features") ? rows_tensor(j.at("features"), n, "features") : Tensor();
        std::vector<double> target = j.contains("target") ? j.at("target").get<std::vector<double>>() : std::vector<double>{};
        return Graph(n, std::move(edges), std::move(features), std::move(target));
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed graph record: ") + e.what());
    }
}

void write_graphs(const std::filesystem::path& path, const std::vector<Graph>& graphs,
                  const std::optional<json>& meta) {
    auto out = open_out(path);
    if (meta) out << json{{"meta", *meta}}.dump() << '\n';
    for (const Graph& g : graphs) out << graph_to_json(g).dump() << '\n';
}

GraphFile read_graphs(const std::filesystem::path& path) {
    auto in = open_in(path);
    GraphFile file;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            if (line_no == 1 && j.contains("meta")) {
                file.meta = j.at("meta");
                continue;
            }
            file.graphs.push_back(graph_from_json(j));
        } catch (const std::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return file;
}

void write_encodings(const std::filesystem::path& path, const std::vector<EncodingMatrix>& encodings) {
    auto out = open_out(path);
    for (const EncodingMatrix& e : encodings) {
        out << json{{"kind", to_string(e.kind)}, {"k", e.k}, {"rows", tensor_rows(e.rows)}}.dump() << '\n';
    }
}

std::vector<EncodingMatrix> read_encodings(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<EncodingMatrix> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            EncodingMatrix e;
            e.kind = parse_encoding_kind(j.at("kind").get<std::string>());
            e.k = j.at("k").get<std::size_t>();
            const json& rows = j.at("rows");
            e.rows = rows_tensor(rows, rows.size(), "encoding rows");
            if (e.rows.rows() > 0 && e.rows.cols() != e.k) throw IoError("row width differs from k");
            if (e.rows.rows() == 0) e.rows = Tensor({0, e.k});
            out.push_back(std::move(e));
        } catch (const std::exception& ex) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return out;
}

std::string file_checksum(const std::filesystem::path& path) {
    auto in = open_in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::uint64_t h = fnv1a64(ss.str());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json config_to_json(const ModelConfig& cfg) {
    return json{{"encoder",
                 {{"kind", to_string(cfg.encoder.kind)},
                  {"d_in", cfg.encoder.d_in},
                  {"k", cfg.encoder.k},
                  {"joint", cfg.encoder.joint},
                  {"mlp_depth", cfg.encoder.mlp_depth}}},
                {"mp",
                 {{"kind", to_string(cfg.mp.kind)},
                  {"regime", to_string(cfg.mp.regime)},
                  {"K", cfg.mp.K},
                  {"layers", cfg.mp.layers},
                  {"gin_epsilon", cfg.mp.gin_epsilon},
                  {"gin_mlp_depth", cfg.mp.gin_mlp_depth}}},
                {"d_hidden", cfg.d_hidden},
                {"decoder_hidden", cfg.decoder_width()},
                {"task", to_string(cfg.task)},
                {"out_dim", cfg.out_dim},
                {"readout", to_string(cfg.readout)},
                {"seed", cfg.seed}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig cfg;
    const json& e = j.at("encoder");
    cfg.encoder.kind = parse_encoder_kind(e.at("kind").get<std::string>());
    cfg.encoder.d_in = e.at("d_in").get<std::size_t>();
    cfg.encoder.k = e.at("k").get<std::size_t>();
    cfg.encoder.joint = e.at("joint").get<bool>();
    cfg.encoder.mlp_depth = e.at("mlp_depth").get<std::size_t>();
    const json& m = j.at("mp");
    cfg.mp.kind = parse_layer_kind(m.at("kind").get<std::string>());
    cfg.mp.regime = parse_regime(m.at("regime").get<std::string>());
    cfg.mp.K = m.at("K").get<std::size_t>();
    cfg.mp.layers = m.at("layers").get<std::size_t>();
    cfg.mp.gin_epsilon = m.at("gin_epsilon").get<double>();
    cfg.mp.gin_mlp_depth = m.at("gin_mlp_depth").get<std::size_t>();
    cfg.d_hidden = j.at("d_hidden").get<std::size_t>();
    cfg.decoder_hidden = j.at("decoder_hidden").get<std::size_t>();
    cfg.task = parse_task_kind(j.at("task").get<std::string>());
    cfg.out_dim = j.at("out_dim").get<std::size_t>();
    cfg.readout = parse_readout(j.at("readout").get<std::string>());
    cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

void write_checkpoint(const std::filesystem::path& stem, const ModelConfig& cfg, const ModelParams& params) {
    json shapes = json::array();
    params.for_each([&](const std::string& name, const Tensor& t) { shapes.push_back({{"name", name}, {"shape", t.shape()}}); });
    json manifest{{"config", config_to_json(cfg)},
                  {"seed", cfg.seed},
                  {"format", "float64-le"},
                  {"num_params", count_params(params)},
                  {"parameters", std::move(shapes)}};
    {
        auto out = open_out(std::filesystem::path(stem).concat(".json"));
        out << manifest.dump(2) << '\n';
    }
    auto out = open_out(std::filesystem::path(stem).concat(".bin"), std::ios::binary);
    for (double v : flatten(params)) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        char bytes[8];
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
        out.write(bytes, 8);
    }
}

Checkpoint read_checkpoint(const std::filesystem::path& stem) {
    json manifest;
    {
        auto in = open_in(std::filesystem::path(stem).concat(".json"));
        manifest = json::parse(in);
    }
    Checkpoint cp;
    cp.config = config_from_json(manifest.at("config"));
    const ModelParams layout = init_model(cp.config);
    std::size_t idx = 0;
    layout.for_each([&](const std::string& name, const Tensor& t) {
        const json& entry = manifest.at("parameters").at(idx++);
        if (entry.at("name").get<std::string>() != name || entry.at("shape").get<Shape>() != t.shape()) {
            throw IoError("checkpoint parameter " + name + " does not match the configured architecture");
        }
    });
    auto in = open_in(std::filesystem::path(stem).concat(".bin"), std::ios::binary);
    std::vector<double> flat;
    char bytes[8];
    while (in.read(bytes, 8)) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[b])) << (8 * b);
        flat.push_back(std::bit_cast<double>(bits));
    }
    if (flat.size() != count_params(layout)) {
        throw IoError("checkpoint holds " + std::to_string(flat.size()) + " values, expected " +
                      std::to_string(count_params(layout)));
    }
    cp.params = unflatten(layout, flat);
    return cp;
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string report_header() {
    return "dataset,encoder,layer,regime,K,L,d_hidden,params,seed,train_metric,test_metric,epochs,wall_time_s";
}

std::string format_row(const ReportRow& r) {
    std::ostringstream ss;
    ss << r.dataset << ',' << r.encoder << ',' << r.layer << ',' << r.regime << ',' << r.K << ',' << r.L << ','
       << r.d_hidden << ',' << r.params << ',' << r.seed << ',' << format_double(r.train_metric) << ','
       << format_double(r.test_metric) << ',' << r.epochs << ',' << format_double(r.wall_time_s);
    return ss.str();
}

ReportRow parse_row(const std::string& line) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 13) throw IoError("report row needs 13 columns: " + line);
    try {
        ReportRow r;
        r.dataset = f[0];
        r.encoder = f[1];
        r.layer = f[2];
        r.regime = f[3];
        r.K = std::stoull(f[4]);
        r.L = std::stoull(f[5]);
        r.d_hidden = std::stoull(f[6]);
        r.params = std::stoull(f[7]);
        r.seed = std::stoull(f[8]);
        r.train_metric = std::stod(f[9]);
        r.test_metric = std::stod(f[10]);
        r.epochs = std::stoull(f[11]);
        r.wall_time_s = std::stod(f[12]);
        return r;
    } catch (const std::logic_error&) {
        throw IoError("malformed report row: " + line);
    }
}

void write_report(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
    auto out = open_out(path);
    out << report_header() << '\n';
    for (const ReportRow& r : rows) out << format_row(r) << '\n';
}

std::vector<ReportRow> read_report(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != report_header()) throw IoError(path.string() + ": unexpected CSV header");
    std::vector<ReportRow> rows;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(parse_row(line));
    return rows;
}

}  // namespace tfuse
