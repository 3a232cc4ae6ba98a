#include "sparselab/prune.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "sparselab/io.hpp"

namespace sparselab {

const char* criterion_name(PruneCriterion c) {
    switch (c) {
        case PruneCriterion::MagnitudeGlobal: return "magnitude";
        case PruneCriterion::MagnitudeLayerwise: return "magnitude-layerwise";
        case PruneCriterion::RandomBalanced: return "random-balanced";
        case PruneCriterion::Snip: return "snip";
        case PruneCriterion::Synflow: return "synflow";
    }
    return "?";
}

const char* policy_name(RewindPolicy p) {
    switch (p) {
        case RewindPolicy::None: return "lrr";
        case RewindPolicy::Weights: return "imp";
        case RewindPolicy::BNOnly: return "lrr-rewindbn";
        case RewindPolicy::MagnitudesOnlyKeepSigns: return "magrewind";
    }
    return "?";
}

std::optional<PruneCriterion> parse_criterion(const std::string& s) {
    if (s == "magnitude") return PruneCriterion::MagnitudeGlobal;
    if (s == "magnitude-layerwise") return PruneCriterion::MagnitudeLayerwise;
    if (s == "random-balanced") return PruneCriterion::RandomBalanced;
    if (s == "snip") return PruneCriterion::Snip;
    if (s == "synflow") return PruneCriterion::Synflow;
    return std::nullopt;
}

std::optional<RewindPolicy> parse_policy(const std::string& s) {
    if (s == "lrr") return RewindPolicy::None;
    if (s == "imp") return RewindPolicy::Weights;
    if (s == "lrr-rewindbn") return RewindPolicy::BNOnly;
    if (s == "magrewind") return RewindPolicy::MagnitudesOnlyKeepSigns;
    return std::nullopt;
}

namespace {

/// ceil(fraction * count) computed so that binary representation error of
/// the fraction (e.g. 0.8) cannot push an exact product past the integer.
std::int64_t ceil_count(double fraction, std::int64_t count) {
    return static_cast<std::int64_t>(std::ceil(fraction * static_cast<double>(count) - 1e-9));
}

std::vector<std::vector<double>> magnitude_scores(const ModelState& state, const Mask& mask) {
    std::vector<std::vector<double>> scores(state.weights.size());
    for (std::size_t l = 0; l < state.weights.size(); ++l) {
        const auto& w = state.weights[l].data;
        scores[l].assign(w.size(), 0.0);
        for (std::size_t i = 0; i < w.size(); ++i)
            if (mask.keep[l][i]) scores[l][i] = std::abs(w[i]);
    }
    return scores;
}

std::vector<std::vector<double>> snip_scores(ModelState& state, const Mask& mask,
                                             const TaskData& probe) {
    Gradients grads = zero_gradients(state);
    std::vector<int> labels = probe.labels;
    loss_and_gradients(state, mask, probe.inputs, labels,
                       probe.classification() ? nullptr : &probe.targets, grads, false);
    std::vector<std::vector<double>> scores(state.weights.size());
    for (std::size_t l = 0; l < state.weights.size(); ++l) {
        const auto& w = state.weights[l].data;
        scores[l].assign(w.size(), 0.0);
        for (std::size_t i = 0; i < w.size(); ++i)
            if (mask.keep[l][i]) scores[l][i] = std::abs(grads.w[l].data[i] * w[i]);
    }
    return scores;
}

/// Path-sensitivity pass: linear network with |W| and |b|, all-ones input,
/// BN folded to identity. R = sum of outputs; score = dR/d|w| * |w|.
std::vector<std::vector<double>> synflow_scores(const ModelState& state, const Mask& mask) {
    const std::size_t layers = state.spec.layers();
    std::vector<std::vector<double>> acts(layers + 1);
    acts[0].assign(state.spec.widths[0], 1.0);
    for (std::size_t l = 0; l < layers; ++l) {
        const auto& w = state.weights[l];
        acts[l + 1].assign(w.rows, 0.0);
        for (std::size_t o = 0; o < w.rows; ++o) {
            double s = std::abs(state.biases[l][o]);
            for (std::size_t i = 0; i < w.cols; ++i)
                if (mask.keep[l][o * w.cols + i]) s += std::abs(w(o, i)) * acts[l][i];
            acts[l + 1][o] = s;
        }
    }

    std::vector<std::vector<double>> scores(layers);
    std::vector<double> grad(acts[layers].size(), 1.0);  // dR/d(output) = 1
    for (std::size_t l = layers; l-- > 0;) {
        const auto& w = state.weights[l];
        scores[l].assign(w.size(), 0.0);
        std::vector<double> grad_in(w.cols, 0.0);
        for (std::size_t o = 0; o < w.rows; ++o) {
            for (std::size_t i = 0; i < w.cols; ++i) {
                const std::size_t idx = o * w.cols + i;
                if (!mask.keep[l][idx]) continue;
                const double aw = std::abs(w(o, i));
                scores[l][idx] = grad[o] * acts[l][i] * aw;
                grad_in[i] += grad[o] * aw;
            }
        }
        grad = std::move(grad_in);
    }
    return scores;
}

struct Entry {
    double score;
    std::uint32_t tensor;
    std::uint64_t index;
};

/// Select the `target` highest-scoring entries; stable order by
/// (tensor, index) breaks ties deterministically.
void keep_top(std::vector<Entry>& entries, std::size_t target, Mask& out) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.score > b.score; });
    for (std::size_t r = 0; r < entries.size(); ++r) {
        if (r < target) continue;
        out.keep[entries[r].tensor][entries[r].index] = 0;
    }
}

}  // namespace

std::vector<std::vector<double>> criterion_scores(ModelState& state, const Mask& mask,
                                                  PruneCriterion criterion,
                                                  const TaskData* probe_data) {
    require(mask.tensors() == state.weights.size(), Errc::ShapeMismatch,
            "mask/state tensor count mismatch");
    std::vector<std::vector<double>> scores;
    switch (criterion) {
        case PruneCriterion::MagnitudeGlobal:
        case PruneCriterion::MagnitudeLayerwise:
            scores = magnitude_scores(state, mask);
            break;
        case PruneCriterion::Snip:
            require(probe_data != nullptr, Errc::ConfigError, "snip needs a probe batch");
            scores = snip_scores(state, mask, *probe_data);
            break;
        case PruneCriterion::Synflow:
            scores = synflow_scores(state, mask);
            break;
        case PruneCriterion::RandomBalanced:
            raise(Errc::ConfigError, "random-balanced has no scores; use prune_step");
    }
    for (const auto& layer : scores)
        for (double s : layer)
            require(std::isfinite(s), Errc::NonFiniteScore, "criterion score not finite");
    return scores;
}

Mask prune_step(ModelState& state, const Mask& mask, PruneCriterion criterion,
                double keep_fraction, Rng& rng, const TaskData* probe_data) {
    require(keep_fraction > 0.0 && keep_fraction < 1.0, Errc::ConfigError,
            "keep_fraction must lie in (0,1)");
    require(mask.tensors() == state.weights.size(), Errc::ShapeMismatch,
            "mask/state tensor count mismatch");

    Mask out = mask;
    const std::size_t tensors = mask.tensors();

    if (criterion == PruneCriterion::RandomBalanced) {
        const auto kept_total = mask.kept_total();
        const std::int64_t target_total = ceil_count(keep_fraction, kept_total);
        // Equal per-layer quotas; the first (target % tensors) layers absorb
        // the remainder, so counts differ by at most one.
        const std::int64_t base = target_total / static_cast<std::int64_t>(tensors);
        const std::int64_t rem = target_total % static_cast<std::int64_t>(tensors);
        for (std::size_t l = 0; l < tensors; ++l) {
            const std::int64_t quota = base + (static_cast<std::int64_t>(l) < rem ? 1 : 0);
            require(quota >= 1, Errc::EmptyLayer,
                    "balanced quota would empty layer " + std::to_string(l));
            std::vector<std::uint64_t> kept_idx;
            for (std::size_t i = 0; i < mask.keep[l].size(); ++i)
                if (mask.keep[l][i]) kept_idx.push_back(i);
            require(quota <= static_cast<std::int64_t>(kept_idx.size()), Errc::EmptyLayer,
                    "layer " + std::to_string(l) + " holds fewer kept entries than the balanced quota");
            // partial Fisher-Yates: the first `quota` slots become the survivors
            for (std::int64_t i = 0; i < quota; ++i) {
                const auto j = i + static_cast<std::int64_t>(
                                       rng.below(kept_idx.size() - static_cast<std::size_t>(i)));
                std::swap(kept_idx[static_cast<std::size_t>(i)], kept_idx[static_cast<std::size_t>(j)]);
            }
            std::fill(out.keep[l].begin(), out.keep[l].end(), std::uint8_t{0});
            for (std::int64_t i = 0; i < quota; ++i)
                out.keep[l][kept_idx[static_cast<std::size_t>(i)]] = 1;
        }
        out.recount();
        return out;
    }

    const auto scores = criterion_scores(state, mask, criterion, probe_data);

    if (criterion == PruneCriterion::MagnitudeLayerwise) {
        for (std::size_t l = 0; l < tensors; ++l) {
            const std::int64_t kept = mask.kept_counts[l];
            require(kept >= 1, Errc::EmptyLayer, "layer " + std::to_string(l) + " already empty");
            const auto target = static_cast<std::size_t>(ceil_count(keep_fraction, kept));
            std::vector<Entry> entries;
            for (std::size_t i = 0; i < mask.keep[l].size(); ++i)
                if (mask.keep[l][i])
                    entries.push_back({scores[l][i], static_cast<std::uint32_t>(l), i});
            keep_top(entries, target, out);
        }
        out.recount();
        return out;
    }

    // Global ranking across every prunable tensor.
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(mask.kept_total()));
    for (std::size_t l = 0; l < tensors; ++l)
        for (std::size_t i = 0; i < mask.keep[l].size(); ++i)
            if (mask.keep[l][i]) entries.push_back({scores[l][i], static_cast<std::uint32_t>(l), i});
    const auto target = static_cast<std::size_t>(
        ceil_count(keep_fraction, static_cast<std::int64_t>(entries.size())));
    keep_top(entries, target, out);
    out.recount();
    return out;
}

void apply_mask(ModelState& state, const Mask& mask) {
    require(mask.tensors() == state.weights.size(), Errc::ShapeMismatch,
            "mask/state tensor count mismatch");
    for (std::size_t l = 0; l < state.weights.size(); ++l) {
        require(mask.keep[l].size() == state.weights[l].size(), Errc::ShapeMismatch,
                "mask size mismatch at layer " + std::to_string(l));
        for (std::size_t i = 0; i < mask.keep[l].size(); ++i) {
            if (!mask.keep[l][i]) {
                state.weights[l].data[i] = 0.0;
                state.vel_w[l].data[i] = 0.0;
            }
        }
    }
}

void zero_momentum(ModelState& state) {
    for (auto& m : state.vel_w) m.fill(0.0);
    for (auto& v : state.vel_b) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : state.vel_gamma) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : state.vel_beta) std::fill(v.begin(), v.end(), 0.0);
}

ModelState rewind(const ModelState& current, const ModelState& checkpoint, RewindPolicy policy,
                  const Mask& mask) {
    require(current.spec == checkpoint.spec, Errc::ShapeMismatch,
            "rewind checkpoint has a different architecture");
    ModelState out = current;
    switch (policy) {
        case RewindPolicy::None:
            return out;
        case RewindPolicy::Weights:
            out = checkpoint;
            break;
        case RewindPolicy::BNOnly:
            out.bn_gamma = checkpoint.bn_gamma;
            out.bn_beta = checkpoint.bn_beta;
            out.bn_running_mean = checkpoint.bn_running_mean;
            out.bn_running_var = checkpoint.bn_running_var;
            break;
        case RewindPolicy::MagnitudesOnlyKeepSigns: {
            auto recombine = [](double cur, double ck) {
                const double mag = std::abs(ck);
                if (cur > 0.0) return mag;
                if (cur < 0.0) return -mag;
                return ck;  // sign 0 keeps the checkpoint sign
            };
            for (std::size_t l = 0; l < out.weights.size(); ++l)
                for (std::size_t i = 0; i < out.weights[l].data.size(); ++i)
                    out.weights[l].data[i] =
                        recombine(current.weights[l].data[i], checkpoint.weights[l].data[i]);
            for (std::size_t l = 0; l < out.biases.size(); ++l)
                for (std::size_t i = 0; i < out.biases[l].size(); ++i)
                    out.biases[l][i] = recombine(current.biases[l][i], checkpoint.biases[l][i]);
            for (std::size_t h = 0; h < out.bn_gamma.size(); ++h) {
                for (std::size_t i = 0; i < out.bn_gamma[h].size(); ++i)
                    out.bn_gamma[h][i] = recombine(current.bn_gamma[h][i], checkpoint.bn_gamma[h][i]);
                for (std::size_t i = 0; i < out.bn_beta[h].size(); ++i)
                    out.bn_beta[h][i] = recombine(current.bn_beta[h][i], checkpoint.bn_beta[h][i]);
            }
            out.bn_running_mean = checkpoint.bn_running_mean;
            out.bn_running_var = checkpoint.bn_running_var;
            break;
        }
    }
    zero_momentum(out);
    apply_mask(out, mask);
    return out;
}

ModelState perturb_signs(const ModelState& state, const Mask& mask, double fraction, Rng& rng) {
    require(fraction >= 0.0 && fraction <= 1.0, Errc::ConfigError,
            "perturb fraction must lie in [0,1]");
    ModelState out = state;
    for (std::size_t l = 0; l < out.weights.size(); ++l) {
        std::vector<std::uint64_t> kept_idx;
        for (std::size_t i = 0; i < mask.keep[l].size(); ++i)
            if (mask.keep[l][i]) kept_idx.push_back(i);
        const auto flips = static_cast<std::size_t>(
            std::floor(fraction * static_cast<double>(kept_idx.size())));
        for (std::size_t i = 0; i < flips; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(kept_idx.size() - i));
            std::swap(kept_idx[i], kept_idx[j]);
        }
        for (std::size_t i = 0; i < flips; ++i) out.weights[l].data[kept_idx[i]] *= -1.0;
    }
    return out;
}

ModelState transplant_assemble(const ModelState& init_from, const Mask& mask_from,
                               const ModelState& signs_from) {
    require(init_from.spec == signs_from.spec, Errc::ShapeMismatch,
            "transplant sources have different architectures");
    require(mask_from.tensors() == init_from.weights.size(), Errc::ShapeMismatch,
            "transplant mask does not match architecture");
    ModelState out = init_from;
    for (std::size_t l = 0; l < out.weights.size(); ++l) {
        require(mask_from.keep[l].size() == out.weights[l].size(), Errc::ShapeMismatch,
                "transplant mask size mismatch at layer " + std::to_string(l));
        for (std::size_t i = 0; i < out.weights[l].data.size(); ++i) {
            if (!mask_from.keep[l][i]) {
                out.weights[l].data[i] = 0.0;
                continue;
            }
            const double mag = std::abs(init_from.weights[l].data[i]);
            const double s = signs_from.weights[l].data[i];
            if (s > 0.0)
                out.weights[l].data[i] = mag;
            else if (s < 0.0)
                out.weights[l].data[i] = -mag;
            // s == 0: keep init_from's sign as-is
        }
    }
    zero_momentum(out);
    return out;
}

namespace {
constexpr std::uint32_t kMaskMagic = 0x534c4d4b;  // "KMLS" little-endian on disk
constexpr std::uint32_t kMaskVersion = 1;
}  // namespace

void save_mask(const std::string& path, const Mask& mask) {
    atomic_write_file(path, [&](std::ostream& os) {
        put_u32(os, kMaskMagic);
        put_u32(os, kMaskVersion);
        put_u64(os, mask.keep.size());
        for (const auto& k : mask.keep) {
            put_u64(os, k.size());
            put_bytes(os, k);
        }
    });
}

Mask load_mask(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), Errc::IoError, "cannot open mask " + path);
    require(get_u32(is) == kMaskMagic, Errc::BadMagic, "not a mask file: " + path);
    require(get_u32(is) == kMaskVersion, Errc::BadMagic, "unsupported mask version");
    Mask mask;
    mask.keep.resize(get_u64(is));
    for (auto& k : mask.keep) {
        const std::size_t len = get_u64(is);
        get_bytes(is, k, len);
    }
    mask.recount();
    return mask;
}

}  // namespace sparselab
