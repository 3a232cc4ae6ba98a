#include "sparselab/engine.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "sparselab/io.hpp"

namespace sparselab {

namespace fs = std::filesystem;

SplitTask make_task(const ExperimentConfig& cfg) {
    if (cfg.use_idx()) {
        SplitTask split;
        split.train = load_idx(cfg.idx_train_images, cfg.idx_train_labels);
        split.test = load_idx(cfg.idx_test_images, cfg.idx_test_labels);
        return split;
    }
    Rng rng(cfg.data_seed);
    return gen_synthetic_task(cfg.classes, cfg.dim, cfg.n_train, cfg.n_test, cfg.separation, rng);
}

namespace {

std::string level_name(const char* stem, std::size_t level, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%02zu%s", stem, level, ext);
    return buf;
}

DenseMatrix probe_batch(const TaskData& train, std::size_t batch_size) {
    const std::size_t count = std::min(batch_size, train.n());
    DenseMatrix batch(count, train.inputs.cols);
    std::copy(train.inputs.data.begin(),
              train.inputs.data.begin() + static_cast<std::ptrdiff_t>(count * train.inputs.cols),
              batch.data.begin());
    return batch;
}

}  // namespace

RunRecord run_iterative_pruning(const ExperimentConfig& cfg, RewindPolicy scheme,
                                std::uint64_t seed, const std::string& run_dir) {
    cfg.validate();
    const SplitTask task = make_task(cfg);
    const MLPSpec spec = cfg.mlp_spec();
    const double keep_fraction = cfg.effective_keep_fraction();
    const std::size_t epochs = cfg.schedule.total_epochs;
    const bool persist = !run_dir.empty();

    RunRecord rec;
    rec.run_dir = run_dir;
    rec.scheme = policy_name(scheme);
    rec.seed = seed;

    if (persist) {
        fs::create_directories(fs::path(run_dir) / "masks");
        fs::create_directories(fs::path(run_dir) / "checkpoints");
        ExperimentConfig snapshot = cfg;
        snapshot.scheme = scheme;
        snapshot.seed = seed;
        atomic_write_text((fs::path(run_dir) / "config.json").string(), config_to_json(snapshot));
    }

    Rng init_rng = Rng::substream(seed, 1);
    Rng shuffle_rng = Rng::substream(seed, 2);
    Rng prune_rng = Rng::substream(seed, 3);
    Rng perturb_rng = Rng::substream(seed, 4);

    ModelState state = init_model(spec, init_rng);
    Mask mask = full_mask(spec);

    // Dense warmup to the rewind point theta(k).
    for (std::size_t e = 0; e < cfg.warmup_checkpoint_epochs; ++e) {
        const double lr = lr_at(cfg.schedule, std::min(e, cfg.schedule.total_epochs - 1));
        sgd_epoch(state, mask, task.train, lr, cfg.momentum, cfg.weight_decay, cfg.batch_size,
                  shuffle_rng);
    }
    rec.rewind_checkpoint = state;
    if (persist)
        save_checkpoint((fs::path(run_dir) / "checkpoints" / "rewind.ckpt").string(), state, mask,
                        shuffle_rng.snapshot());

    TaskData snip_probe;
    if (cfg.criterion == PruneCriterion::Snip) {
        snip_probe.inputs = probe_batch(task.train, cfg.batch_size);
        snip_probe.labels.assign(task.train.labels.begin(),
                                 task.train.labels.begin() +
                                     static_cast<std::ptrdiff_t>(snip_probe.inputs.rows));
    }

    for (std::size_t level = 0; level <= cfg.levels; ++level) {
        if (level > 0) {
            if (!cfg.transplant_masks_from.empty()) {
                mask = load_mask((fs::path(cfg.transplant_masks_from) / "masks" /
                                  level_name("level", level, ".mask"))
                                     .string());
            } else {
                mask = prune_step(state, mask, cfg.criterion, keep_fraction, prune_rng,
                                  cfg.criterion == PruneCriterion::Snip ? &snip_probe : nullptr);
            }
            state = rewind(state, rec.rewind_checkpoint, scheme, mask);
            zero_momentum(state);  // fresh optimizer at every level, all schemes
            apply_mask(state, mask);
            if (cfg.perturb_fraction > 0.0 && cfg.perturb_level == level)
                state = perturb_signs(state, mask, cfg.perturb_fraction, perturb_rng);
        }

        double train_loss = 0.0;
        for (std::size_t e = 0; e < epochs; ++e) {
            train_loss = sgd_epoch(state, mask, task.train, lr_at(cfg.schedule, e), cfg.momentum,
                                   cfg.weight_decay, cfg.batch_size, shuffle_rng);
        }

        LevelRecord lr_rec;
        lr_rec.level = level;
        lr_rec.sparsity = mask.sparsity();
        lr_rec.train_loss = train_loss;
        lr_rec.test_acc = accuracy(state, mask, task.test);
        rec.levels.push_back(lr_rec);
        record_signs(rec.ledger, state, mask, level);

        if (persist) {
            save_mask((fs::path(run_dir) / "masks" / level_name("level", level, ".mask")).string(),
                      mask);
            save_checkpoint(
                (fs::path(run_dir) / "checkpoints" / level_name("level", level, ".ckpt")).string(),
                state, mask, shuffle_rng.snapshot());
        }
    }

    rec.final_state = state;
    rec.final_mask = mask;
    if (persist) {
        save_ledger((fs::path(run_dir) / "signs.bin").string(), rec.ledger);
        atomic_write_text((fs::path(run_dir) / "metrics.csv").string(), metrics_csv(rec));
    }
    return rec;
}

double train_assembled(ModelState state, const Mask& mask, const ExperimentConfig& cfg,
                       std::uint64_t shuffle_seed) {
    const SplitTask task = make_task(cfg);
    Rng shuffle_rng = Rng::substream(shuffle_seed, 2);
    for (std::size_t e = 0; e < cfg.schedule.total_epochs; ++e)
        sgd_epoch(state, mask, task.train, lr_at(cfg.schedule, e), cfg.momentum, cfg.weight_decay,
                  cfg.batch_size, shuffle_rng);
    return accuracy(state, mask, task.test);
}

std::vector<std::string> run_matrix(const ExperimentConfig& cfg, const std::string& out_root) {
    cfg.validate();
    const auto schemes = cfg.scheme_list();

    struct Job {
        RewindPolicy scheme;
        std::uint64_t seed;
        std::string dir;
    };
    std::vector<Job> jobs;
    for (RewindPolicy scheme : schemes)
        for (std::size_t s = 0; s < cfg.seeds; ++s) {
            const std::uint64_t seed = cfg.seed + s;
            const std::string dir =
                (fs::path(out_root) /
                 (std::string(policy_name(scheme)) + "_seed" + std::to_string(seed)))
                    .string();
            jobs.push_back({scheme, seed, dir});
        }

    const std::size_t workers = std::max<std::size_t>(
        1, cfg.workers > 0 ? cfg.workers : std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(jobs.size());
    for (std::size_t w = 0; w < std::min(workers, jobs.size()); ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                try {
                    run_iterative_pruning(cfg, jobs[i].scheme, jobs[i].seed, jobs[i].dir);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    std::vector<std::string> dirs;
    dirs.reserve(jobs.size());
    for (const auto& j : jobs) dirs.push_back(j.dir);
    return dirs;
}

std::string metrics_csv(const RunRecord& rec) {
    std::string out = "level,sparsity,train_loss,test_acc,seed,scheme\n";
    for (const auto& lv : rec.levels) {
        out += std::to_string(lv.level) + "," + format_double(lv.sparsity) + "," +
               format_double(lv.train_loss) + "," + format_double(lv.test_acc) + "," +
               std::to_string(rec.seed) + "," + rec.scheme + "\n";
    }
    return out;
}

}  // namespace sparselab
