#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparselab/net.hpp"
#include "sparselab/prune.hpp"

namespace sparselab {

/// One declarative record driving a pruning experiment: task, architecture,
/// schedule, optimizer, pruning plan, seeds and hooks. Every field has a
/// default; unknown keys in a config file are rejected. Serializing and
/// re-parsing yields an identical value.
struct ExperimentConfig {
    // task: synthetic mixture by default, IDX files when all four paths set
    std::size_t classes = 10;
    std::size_t dim = 64;
    std::size_t n_train = 2048;
    std::size_t n_test = 1024;
    double separation = 1.0;
    std::uint64_t data_seed = 42;
    std::string idx_train_images, idx_train_labels, idx_test_images, idx_test_labels;

    // model
    std::vector<std::size_t> widths{64, 256, 256, 10};
    std::vector<std::uint8_t> batchnorm;  // empty = BN on every hidden layer

    // learning-rate schedule; total_epochs doubles as epochs-per-level
    LRSchedule schedule{LRKind::CosineWarmup, 0.1, 5, 30, {}, 0.1};

    // optimizer
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::size_t batch_size = 128;

    // pruning plan
    RewindPolicy scheme = RewindPolicy::None;
    PruneCriterion criterion = PruneCriterion::MagnitudeGlobal;
    double keep_fraction = 0.8;
    std::optional<double> target_sparsity;  // when set, keep_fraction derives from it
    std::size_t levels = 10;
    std::size_t warmup_checkpoint_epochs = 5;  // rewind point k

    // run matrix
    std::uint64_t seed = 1;
    std::size_t seeds = 1;
    std::vector<RewindPolicy> schemes;  // empty = just `scheme`
    std::size_t workers = 0;            // 0 = hardware concurrency

    // hooks
    std::size_t perturb_level = 0;  // pruning level at which signs get flipped
    double perturb_fraction = 0.0;  // 0 disables the hook
    std::string transplant_masks_from;  // donor run dir supplying the mask sequence

    std::string out_root = "runs";

    bool use_idx() const { return !idx_train_images.empty(); }
    double effective_keep_fraction() const;
    MLPSpec mlp_spec() const;
    std::vector<RewindPolicy> scheme_list() const;
    void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace sparselab
