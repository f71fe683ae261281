#include "tfuse/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "tfuse/io.hpp"

namespace tfuse {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": cannot parse '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }
std::string fmt(double v) { return format_double(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

template <typename F>
auto wrap(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

struct Binding {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
};

#define TFUSE_SIZE(field) \
    {[](const RunConfig& c) { return fmt(c.field); }, \
     [](RunConfig& c, const std::string& k, const std::string& v) { c.field = parse_number<std::size_t>(k, v); }}
#define TFUSE_U64(field) \
    {[](const RunConfig& c) { return fmt_u64(c.field); }, \
     [](RunConfig& c, const std::string& k, const std::string& v) { c.field = parse_number<std::uint64_t>(k, v); }}
#define TFUSE_DOUBLE(field) \
    {[](const RunConfig& c) { return fmt(c.field); }, \
     [](RunConfig& c, const std::string& k, const std::string& v) { c.field = parse_number<double>(k, v); }}
#define TFUSE_BOOL(field) \
    {[](const RunConfig& c) { return fmt(c.field); }, \
     [](RunConfig& c, const std::string& k, const std::string& v) { c.field = parse_bool(k, v); }}
#define TFUSE_STRING(field) \
    {[](const RunConfig& c) { return c.field; }, \
     [](RunConfig& c, const std::string&, const std::string& v) { c.field = v; }}
#define TFUSE_ENUM(field, parse) \
    {[](const RunConfig& c) { return std::string(to_string(c.field)); }, \
     [](RunConfig& c, const std::string& k, const std::string& v) { c.field = wrap(k, [&] { return parse(v); }); }}

DataKind parse_data_kind(std::string_view s) {
    if (s == "file") return DataKind::file;
    if (s == "multiplicative") return DataKind::multiplicative;
    throw ConfigError("unknown data kind '" + std::string(s) + "'");
}

StructuralKind parse_structural_kind(std::string_view s) {
    if (s == "rw_diag") return StructuralKind::rw_diag;
    if (s == "laplacian_eig") return StructuralKind::laplacian_eig;
    if (s == "constant") return StructuralKind::constant;
    throw ConfigError("unknown encoding kind '" + std::string(s) + "'");
}

const std::map<std::string, Binding>& bindings() {
    static const std::map<std::string, Binding> table = {
        {"name", TFUSE_STRING(name)},
        {"seed", TFUSE_U64(seed)},
        {"data.kind", TFUSE_ENUM(data.kind, parse_data_kind)},
        {"data.path", TFUSE_STRING(data.path)},
        {"data.name", TFUSE_STRING(data.name)},
        {"data.num_graphs", TFUSE_SIZE(data.num_graphs)},
        {"data.num_nodes", TFUSE_SIZE(data.num_nodes)},
        {"data.edge_prob", TFUSE_DOUBLE(data.edge_prob)},
        {"data.feature_dim", TFUSE_SIZE(data.feature_dim)},
        {"data.rw_steps", TFUSE_SIZE(data.rw_steps)},
        {"data.seed", TFUSE_U64(data.seed)},
        {"data.split_train", TFUSE_DOUBLE(data.split_train)},
        {"data.split_val", TFUSE_DOUBLE(data.split_val)},
        {"encoding.kind", TFUSE_ENUM(encoding.kind, parse_structural_kind)},
        {"encoding.k", TFUSE_SIZE(encoding.k)},
        {"encoding.include_trivial", TFUSE_BOOL(encoding.include_trivial)},
        {"encoding.descending", TFUSE_BOOL(encoding.descending)},
        {"encoder.kind", TFUSE_ENUM(model.encoder.kind, parse_encoder_kind)},
        {"encoder.d_hidden", TFUSE_SIZE(model.d_hidden)},
        {"encoder.joint", TFUSE_BOOL(model.encoder.joint)},
        {"encoder.mlp_depth", TFUSE_SIZE(model.encoder.mlp_depth)},
        {"mp.kind", TFUSE_ENUM(model.mp.kind, parse_layer_kind)},
        {"mp.regime", TFUSE_ENUM(model.mp.regime, parse_regime)},
        {"mp.K", TFUSE_SIZE(model.mp.K)},
        {"mp.layers", TFUSE_SIZE(model.mp.layers)},
        {"mp.gin_epsilon", TFUSE_DOUBLE(model.mp.gin_epsilon)},
        {"mp.gin_mlp_depth", TFUSE_SIZE(model.mp.gin_mlp_depth)},
        {"model.decoder_hidden", TFUSE_SIZE(model.decoder_hidden)},
        {"model.readout", TFUSE_ENUM(model.readout, parse_readout)},
        {"model.task", TFUSE_ENUM(model.task, parse_task_kind)},
        {"model.param_budget", TFUSE_SIZE(param_budget)},
        {"train.lr", TFUSE_DOUBLE(train.lr)},
        {"train.beta1", TFUSE_DOUBLE(train.adam.beta1)},
        {"train.beta2", TFUSE_DOUBLE(train.adam.beta2)},
        {"train.eps", TFUSE_DOUBLE(train.adam.eps)},
        {"train.patience", TFUSE_SIZE(train.patience)},
        {"train.factor", TFUSE_DOUBLE(train.factor)},
        {"train.lr_floor", TFUSE_DOUBLE(train.lr_floor)},
        {"train.batch_size", TFUSE_SIZE(train.batch_size)},
        {"train.max_epochs", TFUSE_SIZE(train.max_epochs)},
        {"train.monitor",
         {[](const RunConfig& c) { return std::string(c.train.monitor_train ? "train" : "val"); },
          [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v != "train" && v != "val") throw ConfigError(k + ": expected train or val, got '" + v + "'");
              c.train.monitor_train = v == "train";
          }}},
    };
    return table;
}

#undef TFUSE_SIZE
#undef TFUSE_U64
#undef TFUSE_DOUBLE
#undef TFUSE_BOOL
#undef TFUSE_STRING
#undef TFUSE_ENUM

const std::vector<std::string> kSweepKeys = {"sweep.encoder", "sweep.regime", "sweep.layer",
                                             "sweep.d_hidden", "sweep.layers", "sweep.seeds",
                                             "sweep.jobs"};

RunConfig apply(const KeyValues& kv, bool allow_sweep_keys) {
    RunConfig cfg;
    const auto& table = bindings();
    for (const auto& [key, value] : kv) {
        auto it = table.find(key);
        if (it == table.end()) {
            if (allow_sweep_keys && std::find(kSweepKeys.begin(), kSweepKeys.end(), key) != kSweepKeys.end()) continue;
            throw ConfigError("unknown config key '" + key + "'");
        }
        it->second.set(cfg, key, value);
    }
    cfg.train.seed = cfg.seed;
    cfg.model.seed = cfg.seed;
    return cfg;
}

}  // namespace

std::string to_string(StructuralKind kind) {
    switch (kind) {
        case StructuralKind::rw_diag: return "rw_diag";
        case StructuralKind::laplacian_eig: return "laplacian_eig";
        case StructuralKind::constant: return "constant";
    }
    return "?";
}

std::string to_string(DataKind kind) { return kind == DataKind::file ? "file" : "multiplicative"; }

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, value).second) throw ConfigError("duplicate config key '" + key + "'");
    }
    return kv;
}

std::string render_key_values(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

KeyValues read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

RunConfig run_config_from(const KeyValues& kv) { return apply(kv, false); }

KeyValues to_key_values(const RunConfig& cfg) {
    KeyValues kv;
    for (const auto& [key, b] : bindings()) kv[key] = b.get(cfg);
    return kv;
}

std::pair<Regime, std::size_t> parse_regime_spec(const std::string& s) {
    const auto colon = s.find(':');
    const Regime r = wrap("regime", [&] { return parse_regime(s.substr(0, colon)); });
    if (colon == std::string::npos) return {r, 0};
    if (r != Regime::sparse) throw ConfigError("only the sparse regime takes a K: '" + s + "'");
    const auto K = parse_number<std::size_t>("regime", s.substr(colon + 1));
    if (K == 0) throw ConfigError("sparse K must be >= 1");
    return {r, K};
}

std::string regime_label(Regime regime, std::size_t K) {
    if (regime == Regime::sparse) return "sparse:" + std::to_string(K);
    return std::string(to_string(regime));
}

SweepConfig sweep_config_from(const KeyValues& kv) {
    SweepConfig sc;
    sc.base = apply(kv, true);
    auto list = [&](const std::string& key, const std::string& fallback) {
        auto it = kv.find(key);
        return split_list(it == kv.end() ? fallback : it->second);
    };
    for (const auto& s : list("sweep.encoder", std::string(to_string(sc.base.model.encoder.kind))))
        sc.grid.encoders.push_back(wrap("sweep.encoder", [&] { return parse_encoder_kind(s); }));
    for (const auto& s : list("sweep.regime", std::string(to_string(sc.base.model.mp.regime)))) {
        auto spec = parse_regime_spec(s);
        if (spec.first == Regime::sparse && spec.second == 0) spec.second = sc.base.model.mp.K;
        sc.grid.regimes.push_back(spec);
    }
    for (const auto& s : list("sweep.layer", std::string(to_string(sc.base.model.mp.kind))))
        sc.grid.layers.push_back(wrap("sweep.layer", [&] { return parse_layer_kind(s); }));
    for (const auto& s : list("sweep.d_hidden", std::to_string(sc.base.model.d_hidden)))
        sc.grid.d_hidden.push_back(parse_number<std::size_t>("sweep.d_hidden", s));
    for (const auto& s : list("sweep.layers", std::to_string(sc.base.model.mp.layers)))
        sc.grid.depths.push_back(parse_number<std::size_t>("sweep.layers", s));
    for (const auto& s : list("sweep.seeds", std::to_string(sc.base.seed)))
        sc.grid.seeds.push_back(parse_number<std::uint64_t>("sweep.seeds", s));
    if (auto it = kv.find("sweep.jobs"); it != kv.end()) sc.grid.jobs = parse_number<std::size_t>("sweep.jobs", it->second);
    if (sc.grid.jobs == 0) throw ConfigError("sweep.jobs must be >= 1");
    return sc;
}

}  // namespace tfuse
