#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparselab/mask.hpp"
#include "sparselab/net.hpp"

namespace sparselab {

/// Per-parameter sign history across pruning levels. Row L holds
/// sign(theta) * mask for every weight entry after level-L training;
/// entries are 0 exactly where pruned. Rows are append-only.
struct SignLedger {
    std::size_t params = 0;
    std::vector<std::vector<std::int8_t>> rows;

    std::size_t levels() const { return rows.size(); }
};

void record_signs(SignLedger& ledger, const ModelState& state, const Mask& mask,
                  std::size_t level);

/// For each parameter kept at the final level: the earliest level l such
/// that its sign never changes from l on (zeros are skipped, matching the
/// flip rule). Returns counts indexed by l.
std::vector<std::int64_t> settle_iteration_histogram(const SignLedger& ledger);

/// For each parameter kept at the final level: the number of
/// adjacent-level sign changes, ignoring zero entries (a pruned gap is not
/// a flip). Returns counts indexed by flip count.
std::vector<std::int64_t> flip_count_histogram(const SignLedger& ledger);

/// Per level: (#parameters whose sign differs from their level-0 sign in A)
/// minus (the same count in B). Zero entries never count as flipped.
std::vector<std::int64_t> net_flip_difference(const SignLedger& a, const SignLedger& b);

/// Median of the per-survivor settle levels (mean of the two middle values
/// for even counts).
double median_settle_level(const SignLedger& ledger);

void save_ledger(const std::string& path, const SignLedger& ledger);
SignLedger load_ledger(const std::string& path);

/// "bin,count" CSV for either histogram.
std::string histogram_csv(const std::vector<std::int64_t>& hist);

}  // namespace sparselab
