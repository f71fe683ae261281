#include "tfuse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "tfuse/rng.hpp"

namespace tfuse {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<EncodingMatrix> compute_encodings(const std::vector<Graph>& graphs, const StructuralConfig& cfg) {
    std::vector<EncodingMatrix> out;
    out.reserve(graphs.size());
    for (const Graph& g : graphs) {
        switch (cfg.kind) {
            case StructuralKind::rw_diag:
                out.push_back(rw_diag_encoding(build_adjacency(g), cfg.k));
                break;
            case StructuralKind::laplacian_eig:
                out.push_back(laplacian_eig_encoding(build_adjacency(g), cfg.k,
                                                     {cfg.include_trivial, cfg.descending, 1e-10}));
                break;
            case StructuralKind::constant:
                out.push_back(constant_encoding(g.num_nodes(), cfg.k));
                break;
        }
    }
    return out;
}

LoadedData load_data(const RunConfig& cfg) {
    LoadedData out;
    out.dataset.name = cfg.data.name;
    if (cfg.data.kind == DataKind::file) {
        if (cfg.data.path.empty()) throw ConfigError("data.kind = file needs data.path");
        GraphFile file = read_graphs(cfg.data.path);
        out.dataset.graphs = std::move(file.graphs);
        out.meta = std::move(file.meta);
        out.checksum = file_checksum(cfg.data.path);
    } else {
        MultiplicativeTask task = multiplicative_task(cfg.data.task_params(), cfg.data.seed);
        json bilinear = json::array();
        for (std::size_t i = 0; i < task.bilinear.rows(); ++i)
            bilinear.push_back(std::vector<double>(task.bilinear.row(i).begin(), task.bilinear.row(i).end()));
        const auto p = cfg.data.task_params();
        out.meta = json{{"generator", "multiplicative_task"},
                        {"num_graphs", p.num_graphs},
                        {"num_nodes", p.num_nodes},
                        {"edge_prob", p.edge_prob},
                        {"feature_dim", p.feature_dim},
                        {"rw_steps", p.rw_steps},
                        {"seed", cfg.data.seed},
                        {"bilinear", std::move(bilinear)}};
        std::string text = json{{"meta", *out.meta}}.dump() + "\n";
        for (const Graph& g : task.graphs) text += graph_to_json(g).dump() + "\n";
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
        out.checksum = buf;
        out.dataset.graphs = std::move(task.graphs);
    }
    if (out.dataset.graphs.empty()) throw ConfigError("dataset is empty");
    out.dataset.encodings = compute_encodings(out.dataset.graphs, cfg.encoding);
    return out;
}

std::vector<std::string> resolve_model(RunConfig& cfg, const Dataset& data) {
    if (data.graphs.empty()) throw ConfigError("dataset is empty");
    ModelConfig& m = cfg.model;
    m.encoder.d_in = data.graphs.front().feature_dim();
    m.encoder.k = cfg.encoding.k;
    m.out_dim = data.graphs.front().target().size();
    if (m.out_dim == 0) throw ConfigError("graphs carry no target");
    m.seed = cfg.seed;
    cfg.train.seed = cfg.seed;
    if (m.mp.regime == Regime::none) m.mp.layers = 0;
    if (m.mp.regime != Regime::sparse) m.mp.K = m.mp.regime == Regime::none ? 0 : m.mp.K;
    auto notes = resolve_dims(m);
    if (cfg.param_budget > 0) {
        const std::size_t before = m.d_hidden;
        m.d_hidden = d_hidden_for_budget(m, cfg.param_budget);
        notes.push_back("d_hidden " + std::to_string(before) + " -> " + std::to_string(m.d_hidden) +
                        " for parameter budget " + std::to_string(cfg.param_budget) + " (" +
                        std::to_string(model_param_count(m)) + " parameters)");
    }
    validate(m);
    return notes;
}

std::string render_manifest(const RunManifest& m) {
    json j{{"config", m.config},
           {"seed", m.seed},
           {"dataset_checksum", m.dataset_checksum},
           {"substitutions", m.substitutions},
           {"artifacts", m.artifacts}};
    return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
    try {
        json j = json::parse(text);
        RunManifest m;
        m.config = j.at("config").get<KeyValues>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.dataset_checksum = j.at("dataset_checksum").get<std::string>();
        m.substitutions = j.at("substitutions").get<std::vector<std::string>>();
        m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed manifest: ") + e.what());
    }
}

RunManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

fs::path run_dir(const fs::path& out_root, const RunConfig& cfg) {
    return out_root / cfg.name / std::to_string(cfg.seed);
}

void write_history(const fs::path& path, const std::vector<EpochRecord>& history) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "epoch,lr,train_loss,train_metric,val_metric,test_metric\n";
    for (const EpochRecord& r : history) {
        out << r.epoch << ',' << format_double(r.lr) << ',' << format_double(r.train_loss) << ','
            << format_double(r.train_metric) << ',' << format_double(r.val_metric) << ','
            << format_double(r.test_metric) << '\n';
    }
}

RunOutcome execute_run(RunConfig cfg, const fs::path& out_root) {
    const LoadedData data = load_data(cfg);
    return execute_run(std::move(cfg), data, out_root);
}

RunOutcome execute_run(RunConfig cfg, const LoadedData& data, const fs::path& out_root) {
    const auto notes = resolve_model(cfg, data.dataset);
    const Splits splits = make_splits(data.dataset.graphs.size(), cfg.data.split_train, cfg.data.split_val,
                                      cfg.data.seed);
    RunOutcome out;
    out.result = train(cfg.model, cfg.train, data.dataset, splits);
    out.dir = run_dir(out_root, cfg);
    fs::create_directories(out.dir);

    write_checkpoint(out.dir / "checkpoint", cfg.model, out.result.params);
    write_history(out.dir / "metrics.csv", out.result.state.history);

    const ModelConfig& m = cfg.model;
    out.row = ReportRow{data.dataset.name,
                        std::string(to_string(m.encoder.kind)),
                        std::string(to_string(m.mp.kind)),
                        std::string(to_string(m.mp.regime)),
                        m.mp.regime == Regime::sparse ? m.mp.K : 0,
                        m.mp.layers,
                        m.d_hidden,
                        count_params(out.result.params),
                        cfg.seed,
                        out.result.train_metric,
                        out.result.test_metric,
                        out.result.epochs,
                        out.result.wall_time_s};
    write_report(out.dir / "report.csv", {out.row});

    out.manifest.config = to_key_values(cfg);
    out.manifest.seed = cfg.seed;
    out.manifest.dataset_checksum = data.checksum;
    out.manifest.substitutions = notes;
    out.manifest.artifacts = {{"checkpoint", "checkpoint.bin"},
                              {"checkpoint_manifest", "checkpoint.json"},
                              {"metrics", "metrics.csv"},
                              {"report", "report.csv"}};
    std::ofstream mf(out.dir / "manifest.json", std::ios::trunc);
    if (!mf) throw IoError("cannot write " + (out.dir / "manifest.json").string());
    mf << render_manifest(out.manifest);
    return out;
}

RunOutcome rerun_from_manifest(const fs::path& manifest_path, const fs::path& out_root) {
    const RunManifest m = read_manifest(manifest_path);
    RunConfig cfg = run_config_from(m.config);
    const LoadedData data = load_data(cfg);
    if (data.checksum != m.dataset_checksum) {
        throw IoError("dataset checksum " + data.checksum + " differs from manifest " + m.dataset_checksum);
    }
    return execute_run(std::move(cfg), data, out_root);
}

std::vector<RunConfig> expand_sweep(const SweepConfig& sweep) {
    std::vector<RunConfig> runs;
    const std::string& base = sweep.base.name;
    for (std::size_t d_hidden : sweep.grid.d_hidden)
        for (LayerKind layer : sweep.grid.layers)
            for (EncoderKind enc : sweep.grid.encoders) {
                std::vector<std::size_t> depths_done;
                for (const auto& [regime, K] : sweep.grid.regimes)
                    for (std::size_t depth : sweep.grid.depths) {
                        const std::size_t L = regime == Regime::none ? 0 : depth;
                        if (regime == Regime::none) {
                            if (!depths_done.empty()) continue;
                            depths_done.push_back(0);
                        }
                        if (L == 0 && regime != Regime::none) continue;
                        for (std::uint64_t seed : sweep.grid.seeds) {
                            RunConfig cfg = sweep.base;
                            cfg.seed = seed;
                            cfg.model.seed = seed;
                            cfg.train.seed = seed;
                            cfg.model.encoder.kind = enc;
                            cfg.model.mp.kind = layer;
                            cfg.model.mp.regime = regime;
                            if (regime == Regime::sparse) cfg.model.mp.K = K;
                            cfg.model.mp.layers = L;
                            cfg.model.d_hidden = d_hidden;
                            std::string label = regime == Regime::sparse ? "sparse" + std::to_string(K)
                                                                         : std::string(to_string(regime));
                            cfg.name = base + "/" + std::string(to_string(enc)) + "-" + std::string(to_string(layer)) +
                                       "-" + label + "-L" + std::to_string(L) + "-d" + std::to_string(d_hidden);
                            runs.push_back(std::move(cfg));
                        }
                    }
            }
    return runs;
}

SweepOutcome run_sweep(const SweepConfig& sweep, const fs::path& out_root) {
    const std::vector<RunConfig> runs = expand_sweep(sweep);
    const LoadedData data = load_data(sweep.base);
    SweepOutcome out;
    out.rows.resize(runs.size());
    out.run_dirs.resize(runs.size());
    std::vector<std::exception_ptr> errors(runs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) {
            try {
                RunOutcome r = execute_run(runs[i], data, out_root);
                out.rows[i] = r.row;
                out.run_dirs[i] = r.dir;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t jobs = std::min(sweep.grid.jobs, std::max<std::size_t>(1, runs.size()));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    out.report_path = out_root / sweep.base.name / "report.csv";
    write_report(out.report_path, out.rows);
    return out;
}

EvalOutcome evaluate_run(const fs::path& run_directory) {
    const RunManifest m = read_manifest(run_directory / "manifest.json");
    RunConfig cfg = run_config_from(m.config);
    const LoadedData data = load_data(cfg);
    if (data.checksum != m.dataset_checksum) {
        throw IoError("dataset checksum " + data.checksum + " differs from manifest " + m.dataset_checksum);
    }
    const Checkpoint cp = read_checkpoint(run_directory / "checkpoint");
    const Splits splits = make_splits(data.dataset.graphs.size(), cfg.data.split_train, cfg.data.split_val,
                                      cfg.data.seed);
    EvalOutcome e;
    e.train_metric = evaluate_metric(cp.config, cp.params, data.dataset, splits.train);
    e.val_metric = splits.val.empty() ? std::nan("") : evaluate_metric(cp.config, cp.params, data.dataset, splits.val);
    e.test_metric = splits.test.empty() ? std::nan("") : evaluate_metric(cp.config, cp.params, data.dataset, splits.test);
    return e;
}

std::vector<SeedSummary> aggregate_seeds(const std::vector<ReportRow>& rows) {
    using Key = std::tuple<std::string, std::string, std::string, std::string, std::size_t, std::size_t, std::size_t>;
    std::vector<Key> order;
    std::map<Key, std::vector<const ReportRow*>> groups;
    for (const ReportRow& r : rows) {
        Key k{r.dataset, r.encoder, r.layer, r.regime, r.K, r.L, r.d_hidden};
        if (!groups.count(k)) order.push_back(k);
        groups[k].push_back(&r);
    }
    std::vector<SeedSummary> out;
    for (const Key& k : order) {
        const auto& g = groups[k];
        SeedSummary s;
        std::tie(s.dataset, s.encoder, s.layer, s.regime, s.K, s.L, s.d_hidden) = k;
        s.params = g.front()->params;
        s.runs = g.size();
        auto stats = [&](auto field, double& mean, double& sd) {
            double sum = 0.0;
            for (const ReportRow* r : g) sum += r->*field;
            mean = sum / static_cast<double>(g.size());
            double var = 0.0;
            for (const ReportRow* r : g) var += (r->*field - mean) * (r->*field - mean);
            sd = std::sqrt(var / static_cast<double>(g.size()));
        };
        stats(&ReportRow::train_metric, s.train_mean, s.train_std);
        stats(&ReportRow::test_metric, s.test_mean, s.test_std);
        out.push_back(s);
    }
    return out;
}

namespace {

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string column_label(const std::string& regime, std::size_t K) {
    if (regime == "full") return "full";
    if (regime == "none") return "no MP";
    return "K=" + std::to_string(K);
}

}  // namespace

std::string render_markdown(const std::vector<ReportRow>& rows, bool higher_is_better, bool with_std) {
    const std::vector<SeedSummary> summary = aggregate_seeds(rows);
    // Columns: full, sparse by descending K, none.
    std::vector<std::pair<std::string, std::size_t>> columns;
    auto rank = [](const std::pair<std::string, std::size_t>& c) {
        return c.first == "full" ? 0 : (c.first == "sparse" ? 1 : 2);
    };
    for (const SeedSummary& s : summary) {
        std::pair<std::string, std::size_t> c{s.regime, s.K};
        if (std::find(columns.begin(), columns.end(), c) == columns.end()) columns.push_back(c);
    }
    std::sort(columns.begin(), columns.end(), [&](const auto& a, const auto& b) {
        if (rank(a) != rank(b)) return rank(a) < rank(b);
        return a.second > b.second;
    });

    std::set<std::tuple<std::string, std::size_t, std::size_t>> tables;  // dataset, d_hidden, L
    std::vector<std::string> layers;
    for (const SeedSummary& s : summary) {
        if (s.regime != "none") tables.insert({s.dataset, s.d_hidden, s.L});
        if (std::find(layers.begin(), layers.end(), s.layer) == layers.end()) layers.push_back(s.layer);
    }
    if (tables.empty())
        for (const SeedSummary& s : summary) tables.insert({s.dataset, s.d_hidden, 0});

    auto find = [&](const std::string& ds, std::size_t d, std::size_t L, const std::string& layer,
                    const std::string& enc, const std::pair<std::string, std::size_t>& col) -> const SeedSummary* {
        for (const SeedSummary& s : summary) {
            if (s.dataset != ds || s.d_hidden != d || s.layer != layer || s.encoder != enc) continue;
            if (s.regime != col.first || s.K != col.second) continue;
            if (s.regime != "none" && s.L != L) continue;
            return &s;
        }
        return nullptr;
    };

    std::ostringstream md;
    for (const auto& [ds, d, L] : tables) {
        md << "### " << ds << " (d_hidden = " << d << ", L = " << L << ", train / test)\n\n";
        md << "| layer | encoding |";
        for (const auto& c : columns) md << ' ' << column_label(c.first, c.second) << " |";
        md << "\n|---|---|";
        for (std::size_t i = 0; i < columns.size(); ++i) md << "---|";
        md << '\n';
        for (const std::string& layer : layers) {
            for (const std::string enc : {"concat", "tensor"}) {
                md << "| " << layer << " | " << enc << " |";
                for (const auto& c : columns) {
                    const SeedSummary* s = find(ds, d, L, layer, enc, c);
                    if (!s) {
                        md << " - |";
                        continue;
                    }
                    md << ' ' << fixed3(s->train_mean);
                    if (with_std) md << " ± " << fixed3(s->train_std);
                    md << " / " << fixed3(s->test_mean);
                    if (with_std) md << " ± " << fixed3(s->test_std);
                    md << " |";
                }
                md << '\n';
            }
            md << "| " << layer << " | Gain |";
            for (const auto& c : columns) {
                const SeedSummary* cc = find(ds, d, L, layer, "concat", c);
                const SeedSummary* tt = find(ds, d, L, layer, "tensor", c);
                if (!cc || !tt) {
                    md << " - |";
                    continue;
                }
                auto gain = [&](double concat, double tensor) {
                    return higher_is_better ? tensor / concat : concat / tensor;
                };
                md << ' ' << fixed3(gain(cc->train_mean, tt->train_mean)) << " / "
                   << fixed3(gain(cc->test_mean, tt->test_mean)) << " |";
            }
            md << '\n';
        }
        md << '\n';
    }
    return md.str();
}

}  // namespace tfuse
