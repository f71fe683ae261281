#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tfuse/harness.hpp"

using namespace tfuse;
namespace fs = std::filesystem;

namespace {

fs::path fresh(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "tfuse_test_harness" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SweepConfig tiny_sweep() {
    return sweep_config_from(parse_key_values(R"(name = tiny
data.num_graphs = 24
data.num_nodes = 6
encoding.k = 6
encoder.d_hidden = 16
train.max_epochs = 3
train.batch_size = 8
sweep.encoder = concat, tensor
sweep.regime = full, sparse:10, sparse:1, none
sweep.layers = 1
sweep.seeds = 0, 1
)"));
}

}  // namespace

TEST(Manifest, RoundTrip) {
    RunManifest m{{{"a", "1"}, {"b.c", "x y"}}, 7, "00ff", {"d_hidden 17 -> 16"}, {{"metrics", "metrics.csv"}}};
    EXPECT_EQ(parse_manifest(render_manifest(m)), m);
    EXPECT_THROW(parse_manifest("{}"), IoError);
}

TEST(Sweep, ExpandsTableColumns) {
    const auto runs = expand_sweep(tiny_sweep());
    // 2 encoders x 4 regimes x 2 seeds
    EXPECT_EQ(runs.size(), 16u);
    for (const auto& r : runs) EXPECT_EQ(r.model.mp.layers, r.model.mp.regime == Regime::none ? 0u : 1u);
}

TEST(Sweep, WritesArtifactsAndReproduces) {
    const fs::path root = fresh("sweep"), again = fresh("again");
    SweepConfig s = tiny_sweep();
    s.grid.jobs = 2;
    const SweepOutcome out = run_sweep(s, root);
    EXPECT_EQ(out.rows.size(), 16u);
    EXPECT_EQ(read_report(out.report_path).size(), 16u);
    for (const fs::path& dir : out.run_dirs) {
        for (const char* f : {"manifest.json", "checkpoint.json", "checkpoint.bin", "metrics.csv", "report.csv"})
            EXPECT_TRUE(fs::exists(dir / f)) << dir / f;
        const RunOutcome r = rerun_from_manifest(dir / "manifest.json", again);
        const fs::path rel = fs::relative(dir, root);
        EXPECT_EQ(slurp(dir / "checkpoint.bin"), slurp(again / rel / "checkpoint.bin"));
        EXPECT_EQ(slurp(dir / "metrics.csv"), slurp(again / rel / "metrics.csv"));
        EXPECT_EQ(slurp(dir / "manifest.json"), slurp(again / rel / "manifest.json"));
    }
}

TEST(Run, ManifestHoldsResolvedConfig) {
    const fs::path root = fresh("run");
    RunConfig cfg = run_config_from(parse_key_values(
        "name = r\ndata.num_graphs = 12\ndata.num_nodes = 5\nencoder.d_hidden = 17\ntrain.max_epochs = 2\n"));
    const RunOutcome r = execute_run(cfg, root);
    EXPECT_EQ(r.manifest.config.at("encoder.d_hidden"), "16");
    ASSERT_EQ(r.manifest.substitutions.size(), 1u);
    EXPECT_EQ(read_manifest(r.dir / "manifest.json"), r.manifest);
    const EvalOutcome e = evaluate_run(r.dir);
    EXPECT_EQ(e.train_metric, r.result.train_metric);
    EXPECT_EQ(e.test_metric, r.result.test_metric);
}

TEST(Run, ChecksumMismatchIsReported) {
    const fs::path root = fresh("checksum");
    RunConfig cfg = run_config_from(parse_key_values("name = c\ndata.num_graphs = 8\ntrain.max_epochs = 1\n"));
    const RunOutcome r = execute_run(cfg, root);
    RunManifest m = r.manifest;
    m.dataset_checksum = "0000000000000000";
    std::ofstream(r.dir / "manifest.json") << render_manifest(m);
    EXPECT_THROW(rerun_from_manifest(r.dir / "manifest.json", fresh("checksum2")), IoError);
}

TEST(Report, MarkdownLayout) {
    std::vector<ReportRow> rows;
    for (const char* enc : {"concat", "tensor"})
        for (auto [reg, K] : {std::pair{"full", 0}, {"sparse", 10}, {"sparse", 1}, {"none", 0}})
            for (int seed : {0, 1})
                rows.push_back({"ds", enc, "gcn", reg, std::size_t(K), std::string(reg) == "none" ? 0u : 4u, 64, 1,
                                std::uint64_t(seed), std::string(enc) == "tensor" ? 0.1 : 0.2, 0.3, 10, 1.0});
    const std::string md = render_markdown(rows, false, true);
    EXPECT_NE(md.find("| layer | encoding | full | K=10 | K=1 | no MP |"), std::string::npos) << md;
    EXPECT_NE(md.find("| gcn | Gain | 2.000 / 1.000 |"), std::string::npos) << md;
    EXPECT_NE(md.find("0.100 ± 0.000"), std::string::npos) << md;
}
