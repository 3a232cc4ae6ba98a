#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparselab/mask.hpp"
#include "sparselab/matrix.hpp"
#include "sparselab/rng.hpp"

namespace sparselab {

enum class Activation { ReLU };
enum class InitScheme { KaimingNormal };

/// Fully-connected architecture. Layer l maps widths[l] -> widths[l+1];
/// every hidden layer is linear -> (optional BN) -> ReLU, the last layer is
/// plain linear.
struct MLPSpec {
    std::vector<std::size_t> widths;
    std::vector<std::uint8_t> batchnorm;  // one flag per hidden layer
    Activation activation = Activation::ReLU;
    InitScheme init = InitScheme::KaimingNormal;

    std::size_t layers() const { return widths.empty() ? 0 : widths.size() - 1; }
    std::size_t hidden() const { return widths.size() < 2 ? 0 : widths.size() - 2; }
    void validate() const;
    bool operator==(const MLPSpec&) const = default;
};

/// All trainable parameters plus BN running statistics and SGD momentum
/// buffers. Pruned weight entries are kept at exactly zero.
struct ModelState {
    MLPSpec spec;
    std::vector<DenseMatrix> weights;  // [l]: widths[l+1] x widths[l]
    std::vector<std::vector<double>> biases;
    std::vector<std::vector<double>> bn_gamma, bn_beta;               // empty when no BN
    std::vector<std::vector<double>> bn_running_mean, bn_running_var;  // var > 0
    std::vector<DenseMatrix> vel_w;
    std::vector<std::vector<double>> vel_b, vel_gamma, vel_beta;

    std::vector<std::size_t> weight_tensor_sizes() const;
};

ModelState init_model(const MLPSpec& spec, Rng& rng);
Mask full_mask(const MLPSpec& spec);

enum class LRKind { CosineWarmup, StepWarmup, Constant };

struct LRSchedule {
    LRKind kind = LRKind::CosineWarmup;
    double base_lr = 0.1;
    std::size_t warmup_epochs = 5;
    std::size_t total_epochs = 30;
    std::vector<std::size_t> step_milestones;
    double step_factor = 0.1;
};

/// Per-epoch learning rate: linear ramp to base_lr over the warmup epochs
/// (floored at epoch 1's value so lr stays positive), then cosine decay or
/// multiplicative milestone drops. Constant ignores warmup.
double lr_at(const LRSchedule& s, std::size_t epoch);

/// Inputs plus either integer class labels or real regression targets.
struct TaskData {
    DenseMatrix inputs;
    std::vector<int> labels;  // classification when non-empty
    DenseMatrix targets;      // regression otherwise

    std::size_t n() const { return inputs.rows; }
    bool classification() const { return !labels.empty(); }
};

enum class RunMode { Train, Eval };

/// Per-batch intermediate activations kept for the backward pass.
struct ForwardCache {
    std::vector<DenseMatrix> wmask;   // masked weights actually used
    std::vector<DenseMatrix> act;     // act[0] = input batch, act[l+1] = layer l output
    std::vector<DenseMatrix> lin;     // linear outputs per layer
    std::vector<DenseMatrix> xhat;    // BN normalized values (hidden layers with BN)
    std::vector<std::vector<double>> inv_std;  // BN 1/sqrt(var+eps) per feature
    DenseMatrix logits;
};

/// Masked forward pass. Train mode normalizes with batch statistics (and
/// advances running statistics when update_running is set); eval mode uses
/// the stored running statistics.
DenseMatrix forward(ModelState& state, const Mask& mask, const DenseMatrix& batch, RunMode mode,
                    ForwardCache* cache = nullptr, bool update_running = false);

struct Gradients {
    std::vector<DenseMatrix> w;
    std::vector<std::vector<double>> b, gamma, beta;
};

Gradients zero_gradients(const ModelState& state);

/// Forward + reverse pass in train mode; returns the batch mean loss.
/// Gradients of pruned weights are exactly zero. Classification batches use
/// softmax cross-entropy, regression batches mean squared error.
double loss_and_gradients(ModelState& state, const Mask& mask, const DenseMatrix& batch,
                          std::span<const int> labels, const DenseMatrix* reg_targets,
                          Gradients& grads, bool update_running);

/// Batch loss without gradient bookkeeping (used by finite-difference
/// probes); never touches running statistics.
double batch_loss(ModelState& state, const Mask& mask, const DenseMatrix& batch,
                  std::span<const int> labels, const DenseMatrix* reg_targets, RunMode mode);

/// One epoch of mini-batch SGD with momentum and decoupled weight decay
/// (decay applies to unpruned weight entries only; biases and BN parameters
/// are decayed never). Batch order is drawn from rng. Returns the epoch
/// mean loss; throws NonFiniteLoss on divergence.
double sgd_epoch(ModelState& state, const Mask& mask, const TaskData& data, double lr,
                 double momentum, double weight_decay, std::size_t batch_size, Rng& rng);

double accuracy(ModelState& state, const Mask& mask, const TaskData& data,
                std::size_t batch_size = 256);
double dataset_loss(ModelState& state, const Mask& mask, const TaskData& data, RunMode mode,
                    std::size_t batch_size = 256);

// ---- checkpoint file: versioned binary dump, round-trip exact -------------

struct Checkpoint {
    ModelState state;
    Mask mask;
    Rng::Snapshot rng{{0, 0, 0, 0}, 0, 0};
};

void save_checkpoint(const std::string& path, const ModelState& state, const Mask& mask,
                     const Rng::Snapshot& rng);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sparselab
