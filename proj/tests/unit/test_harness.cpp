#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sparselab/config.hpp"
#include "sparselab/engine.hpp"
#include "sparselab/io.hpp"
#include "sparselab/report.hpp"
#include "sparselab/task.hpp"

using namespace sparselab;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("harness");

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

/// Small, fast configuration for engine-level tests.
ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.classes = 4;
    cfg.dim = 8;
    cfg.n_train = 128;
    cfg.n_test = 64;
    cfg.separation = 3.0;
    cfg.widths = {8, 16, 16, 4};
    cfg.schedule.total_epochs = 4;
    cfg.schedule.warmup_epochs = 1;
    cfg.batch_size = 32;
    cfg.levels = 3;
    cfg.keep_fraction = 0.5;
    cfg.warmup_checkpoint_epochs = 1;
    cfg.seeds = 1;
    return cfg;
}

void write_be32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void write_idx_fixture(const fs::path& dir, std::uint32_t img_magic, std::uint32_t n_img,
                       std::uint32_t lab_magic, std::uint32_t n_lab, bool truncate_payload) {
    {
        std::ofstream os(dir / "images.idx", std::ios::binary);
        write_be32(os, img_magic);
        write_be32(os, n_img);
        write_be32(os, 28);
        write_be32(os, 28);
        const std::size_t payload = truncate_payload ? 100 : n_img * 784;
        for (std::size_t i = 0; i < payload; ++i) os.put(static_cast<char>(i % 256));
    }
    {
        std::ofstream os(dir / "labels.idx", std::ios::binary);
        write_be32(os, lab_magic);
        write_be32(os, n_lab);
        for (std::size_t i = 0; i < n_lab; ++i) os.put(static_cast<char>(i % 10));
    }
}

}  // namespace

TEST_CASE("config: JSON round-trip is exact and defaults parse") {
    ExperimentConfig cfg = tiny_config();
    cfg.target_sparsity = 0.875;
    cfg.schemes = {RewindPolicy::None, RewindPolicy::Weights};
    const std::string j1 = config_to_json(cfg);
    const ExperimentConfig back = config_from_json(j1);
    const std::string j2 = config_to_json(back);
    CHECK(j1 == j2);
    CHECK(back.target_sparsity.has_value());
    CHECK(*back.target_sparsity == 0.875);
    CHECK(config_from_json("{}").levels == 10);  // all fields optional
}

TEST_CASE("config: unknown keys are rejected") {
    CHECK_THROWS_AS(config_from_json("{\"bogus\": 1}"), Error);
    CHECK_THROWS_AS(config_from_json("{\"task\": {\"classses\": 10}}"), Error);
    CHECK_THROWS_AS(config_from_json("not json"), Error);
}

TEST_CASE("config: target_sparsity derives the per-level keep fraction") {
    ExperimentConfig cfg = tiny_config();
    cfg.levels = 3;
    cfg.target_sparsity = 0.875;  // (1-0.875)^(1/3) = 0.5
    CHECK(cfg.effective_keep_fraction() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gen_synthetic_task: zero separation is uninformative") {
    Rng rng(1);
    const SplitTask split = gen_synthetic_task(10, 16, 512, 256, 0.0, rng);
    MLPSpec spec;
    spec.widths = {16, 32, 10};
    spec.batchnorm = {0};
    Rng mrng(2);
    ModelState st = init_model(spec, mrng);
    const Mask mask = full_mask(spec);
    Rng trng(3);
    for (int e = 0; e < 10; ++e) sgd_epoch(st, mask, split.train, 0.05, 0.9, 0.0, 64, trng);
    CHECK(accuracy(st, mask, split.test) <= 0.1 + 0.05);
}

TEST_CASE("gen_synthetic_task: separation 6 is solvable (nearest-mean oracle, then a model)") {
    Rng rng(4);
    const SplitTask split = gen_synthetic_task(10, 64, 1024, 512, 6.0, rng);

    // oracle: classify by the nearest mixture mean
    const DenseMatrix means = mixture_means(10, 64, 6.0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < split.test.n(); ++i) {
        double best = 1e300;
        int arg = -1;
        for (std::size_t c = 0; c < 10; ++c) {
            double dist = 0.0;
            for (std::size_t j = 0; j < 64; ++j) {
                const double d = split.test.inputs(i, j) - means(c, j);
                dist += d * d;
            }
            if (dist < best) {
                best = dist;
                arg = static_cast<int>(c);
            }
        }
        if (arg == split.test.labels[i]) ++correct;
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(split.test.n()) >= 0.95);

    MLPSpec spec;
    spec.widths = {64, 64, 10};
    spec.batchnorm = {0};
    Rng mrng(5);
    ModelState st = init_model(spec, mrng);
    const Mask mask = full_mask(spec);
    Rng trng(6);
    for (int e = 0; e < 15; ++e) sgd_epoch(st, mask, split.train, 0.05, 0.9, 0.0, 64, trng);
    CHECK(accuracy(st, mask, split.test) >= 0.95);
}

TEST_CASE("gen_synthetic_task: fixed seed reproduces the dataset bit for bit") {
    Rng r1(7), r2(7);
    const SplitTask a = gen_synthetic_task(4, 8, 64, 32, 2.0, r1);
    const SplitTask b = gen_synthetic_task(4, 8, 64, 32, 2.0, r2);
    CHECK(a.train.inputs.data == b.train.inputs.data);
    CHECK(a.test.inputs.data == b.test.inputs.data);
    CHECK(a.train.labels == b.train.labels);
}

TEST_CASE("task file: save/load round-trips") {
    Rng rng(8);
    const SplitTask split = gen_synthetic_task(3, 6, 32, 16, 1.0, rng);
    const auto dir = temp_dir("sparselab_task_io");
    save_task((dir / "t.task").string(), split.train);
    const TaskData loaded = load_task((dir / "t.task").string());
    CHECK(loaded.inputs.data == split.train.inputs.data);
    CHECK(loaded.labels == split.train.labels);
    fs::remove_all(dir);
}

TEST_CASE("load_idx: fixture loads with shape (2, 784)") {
    const auto dir = temp_dir("sparselab_idx_ok");
    write_idx_fixture(dir, 0x803, 2, 0x801, 2, false);
    const TaskData t = load_idx((dir / "images.idx").string(), (dir / "labels.idx").string());
    CHECK(t.inputs.rows == 2);
    CHECK(t.inputs.cols == 784);
    CHECK(t.labels.size() == 2);
    for (double v : t.inputs.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    fs::remove_all(dir);
}

TEST_CASE("load_idx: wrong magic raises BadMagic") {
    const auto dir = temp_dir("sparselab_idx_magic");
    write_idx_fixture(dir, 0x1234, 2, 0x801, 2, false);
    try {
        load_idx((dir / "images.idx").string(), (dir / "labels.idx").string());
        FAIL("expected BadMagic");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::BadMagic);
    }
    fs::remove_all(dir);
}

TEST_CASE("load_idx: truncated payload raises TruncatedFile") {
    const auto dir = temp_dir("sparselab_idx_trunc");
    write_idx_fixture(dir, 0x803, 2, 0x801, 2, true);
    try {
        load_idx((dir / "images.idx").string(), (dir / "labels.idx").string());
        FAIL("expected TruncatedFile");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TruncatedFile);
    }
    fs::remove_all(dir);
}

TEST_CASE("load_idx: image/label count mismatch raises CountMismatch") {
    const auto dir = temp_dir("sparselab_idx_count");
    write_idx_fixture(dir, 0x803, 2, 0x801, 3, false);
    try {
        load_idx((dir / "images.idx").string(), (dir / "labels.idx").string());
        FAIL("expected CountMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::CountMismatch);
    }
    fs::remove_all(dir);
}

TEST_CASE("t interval: frozen three-value example") {
    const double vals[] = {1.0, 2.0, 3.0};
    const MeanCI ci = t_confidence_interval(vals);
    CHECK(ci.mean == doctest::Approx(2.0).epsilon(1e-15));
    // half width = t(0.975, dof=2) * sd / sqrt(3) = 4.30265273 / sqrt(3)
    CHECK(ci.hi - ci.mean == doctest::Approx(2.4841377118949786).epsilon(1e-9));
    CHECK(ci.mean - ci.lo == doctest::Approx(2.4841377118949786).epsilon(1e-9));
}

TEST_CASE("t interval: duplicate runs give a zero-width interval") {
    const double vals[] = {0.75, 0.75, 0.75};
    const MeanCI ci = t_confidence_interval(vals);
    CHECK(ci.lo == ci.mean);
    CHECK(ci.hi == ci.mean);
}

TEST_CASE("metrics csv: emit and parse round-trip") {
    RunRecord rec;
    rec.scheme = "lrr";
    rec.seed = 3;
    rec.levels = {{0, 0.0, 0.5, 0.9}, {1, 0.2, 0.25, 0.875}};
    const std::string csv = metrics_csv(rec);
    const auto rows = parse_metrics_csv(csv);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].level == 1);
    CHECK(rows[1].sparsity == 0.2);
    CHECK(rows[1].test_acc == 0.875);
    CHECK(rows[1].scheme == "lrr");
    CHECK(rows[1].seed == 3);
}

TEST_CASE("engine: metrics are byte-identical across reruns of the same config") {
    const auto dir = temp_dir("sparselab_repro");
    const ExperimentConfig cfg = tiny_config();
    run_iterative_pruning(cfg, RewindPolicy::None, 5, (dir / "a").string());
    run_iterative_pruning(cfg, RewindPolicy::None, 5, (dir / "b").string());
    CHECK(read_text_file((dir / "a" / "metrics.csv").string()) ==
          read_text_file((dir / "b" / "metrics.csv").string()));
    CHECK(read_text_file((dir / "a" / "signs.bin").string()) ==
          read_text_file((dir / "b" / "signs.bin").string()));
    fs::remove_all(dir);
}

TEST_CASE("engine: transplanting a run's own masks under Weights rewind reproduces it bit-exactly") {
    const auto dir = temp_dir("sparselab_transplant");
    ExperimentConfig cfg = tiny_config();
    run_iterative_pruning(cfg, RewindPolicy::Weights, 9, (dir / "imp").string());

    ExperimentConfig replay = cfg;
    replay.transplant_masks_from = (dir / "imp").string();
    run_iterative_pruning(replay, RewindPolicy::Weights, 9, (dir / "replay").string());

    CHECK(read_text_file((dir / "imp" / "metrics.csv").string()) ==
          read_text_file((dir / "replay" / "metrics.csv").string()));
    fs::remove_all(dir);
}

TEST_CASE("engine: sparsity sequence follows 1 - keep_fraction^level") {
    const auto dir = temp_dir("sparselab_schedule");
    ExperimentConfig cfg = tiny_config();
    const RunRecord rec = run_iterative_pruning(cfg, RewindPolicy::None, 2, "");
    REQUIRE(rec.levels.size() == cfg.levels + 1);
    const auto total = static_cast<double>(rec.final_mask.total());
    for (std::size_t i = 0; i < rec.levels.size(); ++i) {
        const double expect = 1.0 - std::pow(cfg.keep_fraction, static_cast<double>(i));
        // ceil rounding keeps the measured sparsity within a few weights
        CHECK(std::abs(rec.levels[i].sparsity - expect) <= 8.0 / total);
        if (i > 0) CHECK(rec.levels[i].sparsity > rec.levels[i - 1].sparsity);
    }
    fs::remove_all(dir);
}

TEST_CASE("run_matrix: produces one directory per scheme and seed") {
    const auto dir = temp_dir("sparselab_matrix");
    ExperimentConfig cfg = tiny_config();
    cfg.levels = 1;
    cfg.seeds = 2;
    cfg.schemes = {RewindPolicy::None, RewindPolicy::Weights};
    const auto dirs = run_matrix(cfg, dir.string());
    CHECK(dirs.size() == 4);
    for (const auto& d : dirs) CHECK(fs::exists(fs::path(d) / "metrics.csv"));
    const auto agg = aggregate_metrics(dirs);
    CHECK(agg.size() == 2 * 2);  // 2 schemes x 2 levels
    for (const auto& row : agg) CHECK(row.acc.n == 2);
    fs::remove_all(dir);
}

TEST_CASE("atomic_write_text: no temp file left behind, content matches") {
    const auto dir = temp_dir("sparselab_atomic");
    const std::string path = (dir / "out.txt").string();
    atomic_write_text(path, "hello\n");
    CHECK(read_text_file(path) == "hello\n");
    CHECK_FALSE(fs::exists(path + ".tmp"));
    fs::remove_all(dir);
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {1.0 / 3.0, 0.1, 123456.789, 1e-17, -2.5e300}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_SUITE_END();
