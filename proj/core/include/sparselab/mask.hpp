#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "sparselab/error.hpp"

namespace sparselab {

/// Binary keep/prune indicators, one flat array per prunable weight tensor.
/// Biases and BN parameters are never masked. Kept counts are cached and
/// must stay consistent with the indicator arrays.
struct Mask {
    std::vector<std::vector<std::uint8_t>> keep;
    std::vector<std::int64_t> kept_counts;

    static Mask ones(const std::vector<std::size_t>& tensor_sizes) {
        Mask m;
        for (std::size_t s : tensor_sizes) {
            m.keep.emplace_back(s, std::uint8_t{1});
            m.kept_counts.push_back(static_cast<std::int64_t>(s));
        }
        return m;
    }

    std::size_t tensors() const { return keep.size(); }

    std::int64_t total() const {
        std::int64_t t = 0;
        for (const auto& k : keep) t += static_cast<std::int64_t>(k.size());
        return t;
    }

    std::int64_t kept_total() const {
        return std::accumulate(kept_counts.begin(), kept_counts.end(), std::int64_t{0});
    }

    double sparsity() const {
        const std::int64_t t = total();
        return t == 0 ? 0.0 : 1.0 - static_cast<double>(kept_total()) / static_cast<double>(t);
    }

    void recount() {
        kept_counts.assign(keep.size(), 0);
        for (std::size_t l = 0; l < keep.size(); ++l)
            for (std::uint8_t b : keep[l]) kept_counts[l] += b;
    }

    bool same_shape(const Mask& o) const {
        if (keep.size() != o.keep.size()) return false;
        for (std::size_t l = 0; l < keep.size(); ++l)
            if (keep[l].size() != o.keep[l].size()) return false;
        return true;
    }

    /// kept-set inclusion: every kept entry of this mask is kept in `wider`.
    bool subset_of(const Mask& wider) const {
        if (!same_shape(wider)) return false;
        for (std::size_t l = 0; l < keep.size(); ++l)
            for (std::size_t i = 0; i < keep[l].size(); ++i)
                if (keep[l][i] && !wider.keep[l][i]) return false;
        return true;
    }
};

}  // namespace sparselab
