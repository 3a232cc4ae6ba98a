#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparselab/mask.hpp"
#include "sparselab/net.hpp"

namespace sparselab {

enum class PruneCriterion { MagnitudeGlobal, MagnitudeLayerwise, RandomBalanced, Snip, Synflow };

/// What happens to the parameters right after a pruning step.
///   None                    - keep current parameters (LRR)
///   Weights                 - full state back to the stored checkpoint (IMP/WR)
///   BNOnly                  - only BN parameters and statistics rewound
///   MagnitudesOnlyKeepSigns - checkpoint magnitudes, currently learnt signs
enum class RewindPolicy { None, Weights, BNOnly, MagnitudesOnlyKeepSigns };

const char* criterion_name(PruneCriterion c);
const char* policy_name(RewindPolicy p);
std::optional<PruneCriterion> parse_criterion(const std::string& s);
std::optional<RewindPolicy> parse_policy(const std::string& s);

/// Per-entry saliency for every weight tensor. Magnitude needs no data;
/// Snip differentiates one probe batch; Synflow runs the all-ones
/// absolute-weight pass with BN folded away. Scores of pruned entries are 0.
std::vector<std::vector<double>> criterion_scores(ModelState& state, const Mask& mask,
                                                  PruneCriterion criterion,
                                                  const TaskData* probe_data);

/// One pruning round: keeps ceil(keep_fraction x currently-kept) entries by
/// descending score (globally, or per layer for MagnitudeLayerwise), or an
/// equal per-layer quota of uniform random survivors for RandomBalanced.
/// Previously pruned entries stay pruned.
Mask prune_step(ModelState& state, const Mask& mask, PruneCriterion criterion,
                double keep_fraction, Rng& rng, const TaskData* probe_data = nullptr);

/// Zero out weight entries the mask prunes (and their momentum buffers).
void apply_mask(ModelState& state, const Mask& mask);

ModelState rewind(const ModelState& current, const ModelState& checkpoint, RewindPolicy policy,
                  const Mask& mask);

void zero_momentum(ModelState& state);

/// Flip the sign of exactly floor(fraction x kept) distinct kept entries in
/// each weight tensor; magnitudes and mask are untouched.
ModelState perturb_signs(const ModelState& state, const Mask& mask, double fraction, Rng& rng);

/// Weight magnitudes from init_from, keep/prune pattern from mask_from,
/// signs from signs_from on kept entries (zero signs fall back to
/// init_from's sign). Biases and BN state come from init_from.
ModelState transplant_assemble(const ModelState& init_from, const Mask& mask_from,
                               const ModelState& signs_from);

void save_mask(const std::string& path, const Mask& mask);
Mask load_mask(const std::string& path);

}  // namespace sparselab
