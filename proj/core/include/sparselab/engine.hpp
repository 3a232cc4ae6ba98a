#pragma once

#include <string>
#include <vector>

#include "sparselab/config.hpp"
#include "sparselab/signs.hpp"
#include "sparselab/task.hpp"

namespace sparselab {

struct LevelRecord {
    std::size_t level = 0;
    double sparsity = 0.0;
    double train_loss = 0.0;
    double test_acc = 0.0;
};

/// Outcome of one (scheme, seed) run. When run_dir is non-empty the same
/// content is persisted there: config.json, metrics.csv, masks/, checkpoints/
/// (including the rewind point), and signs.bin.
struct RunRecord {
    std::vector<LevelRecord> levels;
    std::string run_dir;
    std::string scheme;
    std::uint64_t seed = 0;
    ModelState final_state;
    Mask final_mask;
    ModelState rewind_checkpoint;
    SignLedger ledger;
};

SplitTask make_task(const ExperimentConfig& cfg);

/// The full iterative prune-train cycle:
/// warmup k epochs -> store rewind checkpoint -> repeat per level
/// {train full schedule, record, prune (or load a transplanted mask),
/// rewind per policy, optional sign perturbation}. The learning-rate
/// schedule and optimizer restart at every level for every policy.
RunRecord run_iterative_pruning(const ExperimentConfig& cfg, RewindPolicy scheme,
                                std::uint64_t seed, const std::string& run_dir);

/// One complete training schedule on an already-assembled masked state
/// (fresh optimizer, restarted schedule); returns the final test accuracy.
double train_assembled(ModelState state, const Mask& mask, const ExperimentConfig& cfg,
                       std::uint64_t shuffle_seed);

/// Expand schemes x seeds into independent runs, execute them on a worker
/// pool, and return the run directories (ordered by scheme then seed).
std::vector<std::string> run_matrix(const ExperimentConfig& cfg, const std::string& out_root);

std::string metrics_csv(const RunRecord& rec);

}  // namespace sparselab
