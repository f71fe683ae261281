// tfuse command-line front end.
//
//   tfuse generate   --kind multiplicative --out data.jsonl
//   tfuse encode     --input data.jsonl --kind rw_diag --k 20 --out enc.jsonl
//   tfuse train      --config run.cfg [--out runs] | --manifest runs/x/0/manifest.json
//   tfuse eval       --run runs/x/0
//   tfuse sweep      --config sweep.cfg [--out runs] [--jobs N]
//   tfuse wl-test    --figure1 | a.jsonl b.jsonl
//   tfuse param-count --config run.cfg | flags
//   tfuse report     --input report.csv [--higher-is-better] [--std]
//
// The output root defaults to $TFUSE_OUT_DIR, then "runs".

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tfuse/config.hpp"
#include "tfuse/encoding.hpp"
#include "tfuse/generators.hpp"
#include "tfuse/harness.hpp"
#include "tfuse/io.hpp"
#include "tfuse/model.hpp"
#include "tfuse/wl.hpp"

namespace fs = std::filesystem;
using namespace tfuse;

namespace {

std::string default_out_root() {
    const char* env = std::getenv("TFUSE_OUT_DIR");
    return env && *env ? env : "runs";
}

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw IoError("no such file: " + path);
}

std::string row_str(std::span<const double> row) {
    std::string s = "[";
    for (std::size_t i = 0; i < row.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", row[i]);
        s += (i ? ", " : "") + std::string(buf);
    }
    return s + "]";
}

void print_coloring(const char* label, const ColoringState& c) {
    std::cout << label << ": rounds=" << c.rounds << " histogram={";
    bool first = true;
    for (const auto& [color, count] : c.histogram) {
        std::cout << (first ? "" : ", ") << color << ":" << count;
        first = false;
    }
    std::cout << "}\n";
}

int cmd_wl_test(bool figure1, const std::vector<std::string>& files, std::size_t k) {
    Graph a, b;
    if (figure1) {
        std::tie(a, b) = figure1_pair();
    } else {
        if (files.size() != 2) throw std::invalid_argument("wl-test needs --figure1 or two graph files");
        for (const auto& f : files) require_file(f);
        auto ga = read_graphs(files[0]).graphs;
        auto gb = read_graphs(files[1]).graphs;
        if (ga.empty() || gb.empty()) throw IoError("graph file is empty");
        a = ga.front();
        b = gb.front();
    }
    const WlComparison cmp = wl_compare(a, b);
    std::cout << "rounds to stability: " << cmp.rounds << "\n";
    print_coloring("left", cmp.left);
    print_coloring("right", cmp.right);
    std::cout << (cmp.equivalent ? "equivalent" : "distinguished") << "\n";

    // Sorted RW rows: what the structural encoding sees that 1-WL does not.
    auto sorted_rows = [k](const Graph& g) {
        EncodingMatrix e = rw_diag_encoding(build_adjacency(g), k);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < e.rows.rows(); ++i)
            rows.emplace_back(e.rows.row(i).begin(), e.rows.row(i).end());
        std::sort(rows.begin(), rows.end());
        return rows;
    };
    const auto ra = sorted_rows(a), rb = sorted_rows(b);
    double diff = ra.size() == rb.size() ? 0.0 : 1.0;
    for (std::size_t i = 0; i < std::min(ra.size(), rb.size()); ++i)
        for (std::size_t j = 0; j < k; ++j) diff = std::max(diff, std::abs(ra[i][j] - rb[i][j]));
    std::cout << "rw_diag encodings (k=" << k << ") " << (diff > 1e-6 ? "differ" : "agree")
              << ", max sorted-row difference " << diff << "\n";
    if (figure1) {
        const std::size_t show = std::min<std::size_t>(k, 6);
        std::cout << "left  node 0 rw[0.." << show << "): " << row_str(std::span(ra.front()).first(show)) << "\n";
        std::cout << "right node 0 rw[0.." << show << "): " << row_str(std::span(rb.front()).first(show)) << "\n";
    }
    return 0;
}

void print_breakdown(const ModelConfig& cfg) {
    const ParamBreakdown b = param_breakdown(cfg);
    std::cout << "encoder " << b.encoder << "\n";
    for (std::size_t l = 0; l < b.layers.size(); ++l) std::cout << "layer." << l << " " << b.layers[l] << "\n";
    std::cout << "decoder " << b.decoder << "\n";
    std::cout << "total " << b.total << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tfuse: tensor-product structural encodings for message passing networks"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic JSONL dataset");
    std::string gen_kind = "multiplicative", gen_out;
    std::uint64_t gen_seed = 0;
    MultiplicativeTaskParams mt;
    std::size_t gen_n = 10, gen_a = 6, gen_b = 6;
    double gen_p = 0.3;
    gen->add_option("--kind", gen_kind, "multiplicative | cycle | erdos_renyi | fused_cycles")->capture_default_str();
    gen->add_option("--out", gen_out, "output JSONL path")->required();
    gen->add_option("--seed", gen_seed)->capture_default_str();
    gen->add_option("--num-graphs", mt.num_graphs)->capture_default_str();
    gen->add_option("--num-nodes", mt.num_nodes)->capture_default_str();
    gen->add_option("--edge-prob", mt.edge_prob)->capture_default_str();
    gen->add_option("--feature-dim", mt.feature_dim)->capture_default_str();
    gen->add_option("--rw-steps", mt.rw_steps)->capture_default_str();
    gen->add_option("--n", gen_n, "nodes for cycle / erdos_renyi")->capture_default_str();
    gen->add_option("--p", gen_p, "edge probability for erdos_renyi")->capture_default_str();
    gen->add_option("--a", gen_a, "first cycle length for fused_cycles")->capture_default_str();
    gen->add_option("--b", gen_b, "second cycle length for fused_cycles")->capture_default_str();

    // encode
    auto* enc = app.add_subcommand("encode", "write structural encodings as a JSONL sidecar");
    std::string enc_in, enc_out, enc_kind = "rw_diag";
    StructuralConfig enc_cfg;
    enc->add_option("--input", enc_in)->required();
    enc->add_option("--out", enc_out)->required();
    enc->add_option("--kind", enc_kind, "rw_diag | laplacian_eig")->capture_default_str();
    enc->add_option("--k", enc_cfg.k)->capture_default_str();
    enc->add_flag("--include-trivial", enc_cfg.include_trivial);
    enc->add_flag("--descending", enc_cfg.descending);

    // train
    auto* tr = app.add_subcommand("train", "train one configuration");
    std::string tr_config, tr_manifest, out_root = default_out_root();
    auto* tr_cfg_opt = tr->add_option("--config", tr_config, "key = value run config");
    auto* tr_man_opt = tr->add_option("--manifest", tr_manifest, "re-run from a manifest");
    tr_cfg_opt->excludes(tr_man_opt);
    tr->add_option("--out", out_root, "output root")->capture_default_str();

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a trained run directory");
    std::string ev_run;
    ev->add_option("--run", ev_run, "run directory")->required();

    // sweep
    auto* sw = app.add_subcommand("sweep", "run an ablation grid");
    std::string sw_config;
    std::size_t sw_jobs = 0;
    sw->add_option("--config", sw_config)->required();
    sw->add_option("--out", out_root, "output root")->capture_default_str();
    sw->add_option("--jobs", sw_jobs, "concurrent runs (overrides sweep.jobs)");
    bool sw_md = false;
    sw->add_flag("--markdown", sw_md, "print the summary table");

    // wl-test
    auto* wl = app.add_subcommand("wl-test", "1-WL comparison of two graphs");
    bool wl_fig = false;
    std::vector<std::string> wl_files;
    std::size_t wl_k = kDefaultRwSteps;
    wl->add_flag("--figure1", wl_fig, "use the built-in WL-equivalent pair");
    wl->add_option("files", wl_files, "two JSONL files (first graph of each)");
    wl->add_option("--k", wl_k, "random-walk steps for the encoding comparison")->capture_default_str();

    // param-count
    auto* pc = app.add_subcommand("param-count", "print the parameter breakdown");
    std::string pc_config, pc_layer = "gcn", pc_regime = "full", pc_encoder = "tensor";
    std::size_t pc_K = 1, pc_L = 4, pc_d = 64, pc_din = 1, pc_k = kDefaultRwSteps, pc_out = 1;
    pc->add_option("--config", pc_config, "read the model from a run config");
    pc->add_option("--layer", pc_layer)->capture_default_str();
    pc->add_option("--regime", pc_regime, "full | sparse | none")->capture_default_str();
    pc->add_option("--K", pc_K)->capture_default_str();
    pc->add_option("--layers", pc_L)->capture_default_str();
    pc->add_option("--d-hidden", pc_d)->capture_default_str();
    pc->add_option("--encoder", pc_encoder)->capture_default_str();
    pc->add_option("--d-in", pc_din)->capture_default_str();
    pc->add_option("--k", pc_k)->capture_default_str();
    pc->add_option("--out-dim", pc_out)->capture_default_str();
    std::size_t pc_budget = 0;
    pc->add_option("--budget", pc_budget, "choose d_hidden to approach this parameter total");

    // report
    auto* rp = app.add_subcommand("report", "render report CSVs as train/test tables");
    std::vector<std::string> rp_inputs;
    bool rp_higher = false, rp_std = false;
    rp->add_option("--input", rp_inputs, "report.csv files")->required();
    rp->add_flag("--higher-is-better", rp_higher, "metric is AP-like");
    rp->add_flag("--std", rp_std, "show standard deviation over seeds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            std::vector<Graph> graphs;
            std::optional<nlohmann::json> meta;
            if (gen_kind == "multiplicative") {
                MultiplicativeTask task = multiplicative_task(mt, gen_seed);
                graphs = std::move(task.graphs);
                nlohmann::json b = nlohmann::json::array();
                for (std::size_t i = 0; i < task.bilinear.rows(); ++i)
                    b.push_back(std::vector<double>(task.bilinear.row(i).begin(), task.bilinear.row(i).end()));
                meta = nlohmann::json{{"generator", "multiplicative_task"},
                                      {"num_graphs", mt.num_graphs},
                                      {"num_nodes", mt.num_nodes},
                                      {"edge_prob", mt.edge_prob},
                                      {"feature_dim", mt.feature_dim},
                                      {"rw_steps", mt.rw_steps},
                                      {"seed", gen_seed},
                                      {"bilinear", b}};
            } else if (gen_kind == "cycle") {
                graphs = generate_synthetic(CycleSpec{gen_n}, gen_seed);
            } else if (gen_kind == "erdos_renyi") {
                graphs = generate_synthetic(ErdosRenyiSpec{gen_n, gen_p}, gen_seed);
            } else if (gen_kind == "fused_cycles") {
                graphs = generate_synthetic(FusedCyclesSpec{gen_a, gen_b}, gen_seed);
            } else {
                throw std::invalid_argument("unknown generator '" + gen_kind + "'");
            }
            write_graphs(gen_out, graphs, meta);
            std::cout << "wrote " << graphs.size() << " graphs to " << gen_out << "\n";
        } else if (*enc) {
            require_file(enc_in);
            const EncodingKind kind = parse_encoding_kind(enc_kind);
            enc_cfg.kind = kind == EncodingKind::rw_diag         ? StructuralKind::rw_diag
                           : kind == EncodingKind::laplacian_eig ? StructuralKind::laplacian_eig
                                                                 : StructuralKind::constant;
            const auto graphs = read_graphs(enc_in).graphs;
            write_encodings(enc_out, compute_encodings(graphs, enc_cfg));
            std::cout << "wrote " << graphs.size() << " encodings to " << enc_out << "\n";
        } else if (*tr) {
            RunOutcome r;
            if (!tr_manifest.empty()) {
                require_file(tr_manifest);
                r = rerun_from_manifest(tr_manifest, out_root);
            } else if (!tr_config.empty()) {
                require_file(tr_config);
                r = execute_run(run_config_from(read_key_values(tr_config)), out_root);
            } else {
                throw std::invalid_argument("train needs --config or --manifest");
            }
            for (const auto& note : r.manifest.substitutions) std::cerr << "note: " << note << "\n";
            std::cout << report_header() << "\n" << format_row(r.row) << "\n";
            std::cout << "run directory: " << r.dir.string() << "\n";
        } else if (*ev) {
            require_file((fs::path(ev_run) / "manifest.json").string());
            const EvalOutcome e = evaluate_run(ev_run);
            std::cout << "train_metric " << format_double(e.train_metric) << "\n"
                      << "val_metric " << format_double(e.val_metric) << "\n"
                      << "test_metric " << format_double(e.test_metric) << "\n";
        } else if (*sw) {
            require_file(sw_config);
            SweepConfig sweep = sweep_config_from(read_key_values(sw_config));
            if (sw_jobs > 0) sweep.grid.jobs = sw_jobs;
            const SweepOutcome s = run_sweep(sweep, out_root);
            std::cout << "ran " << s.rows.size() << " runs, report: " << s.report_path.string() << "\n";
            if (sw_md) {
                const bool higher = sweep.base.model.task == TaskKind::multilabel;
                std::cout << render_markdown(s.rows, higher, sweep.grid.seeds.size() > 1);
            }
        } else if (*wl) {
            return cmd_wl_test(wl_fig, wl_files, wl_k);
        } else if (*pc) {
            ModelConfig cfg;
            if (!pc_config.empty()) {
                require_file(pc_config);
                RunConfig rc = run_config_from(read_key_values(pc_config));
                LoadedData data = load_data(rc);
                for (const auto& note : resolve_model(rc, data.dataset)) std::cerr << "note: " << note << "\n";
                cfg = rc.model;
            } else {
                cfg.mp.kind = parse_layer_kind(pc_layer);
                cfg.mp.regime = parse_regime(pc_regime);
                cfg.mp.K = pc_K;
                cfg.mp.layers = cfg.mp.regime == Regime::none ? 0 : pc_L;
                cfg.d_hidden = pc_d;
                cfg.encoder.kind = parse_encoder_kind(pc_encoder);
                cfg.encoder.d_in = pc_din;
                cfg.encoder.k = pc_k;
                cfg.out_dim = pc_out;
                for (const auto& note : resolve_dims(cfg)) std::cerr << "note: " << note << "\n";
                if (pc_budget > 0) cfg.d_hidden = d_hidden_for_budget(cfg, pc_budget);
                validate(cfg);
            }
            std::cout << "d_hidden " << cfg.d_hidden << "\n";
            print_breakdown(cfg);
        } else if (*rp) {
            std::vector<ReportRow> rows;
            for (const auto& f : rp_inputs) {
                require_file(f);
                auto part = read_report(f);
                rows.insert(rows.end(), part.begin(), part.end());
            }
            std::cout << render_markdown(rows, rp_higher, rp_std);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
