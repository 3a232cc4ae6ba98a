#include "sparselab/signs.hpp"

#include <algorithm>
#include <fstream>

#include "sparselab/io.hpp"

namespace sparselab {

namespace {

constexpr std::uint32_t kLedgerMagic = 0x534c5347;  // "GSLS" little-endian on disk
constexpr std::uint32_t kLedgerVersion = 1;

std::int8_t sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

void record_signs(SignLedger& ledger, const ModelState& state, const Mask& mask,
                  std::size_t level) {
    require(level == ledger.rows.size(), Errc::LedgerMismatch,
            "record_signs level must equal current ledger length");
    require(mask.tensors() == state.weights.size(), Errc::ShapeMismatch,
            "mask/state tensor count mismatch");
    std::vector<std::int8_t> row;
    for (std::size_t l = 0; l < state.weights.size(); ++l) {
        require(mask.keep[l].size() == state.weights[l].size(), Errc::ShapeMismatch,
                "mask size mismatch at layer " + std::to_string(l));
        for (std::size_t i = 0; i < state.weights[l].data.size(); ++i)
            row.push_back(mask.keep[l][i] ? sign_of(state.weights[l].data[i]) : 0);
    }
    if (ledger.params == 0)
        ledger.params = row.size();
    else
        require(ledger.params == row.size(), Errc::LedgerMismatch,
                "parameter count changed between recorded levels");
    ledger.rows.push_back(std::move(row));
}

namespace {

/// Settle level of one survivor: the level where its final stable sign was
/// first adopted (0 when the sign never changes); zeros are skipped.
std::size_t settle_level(const SignLedger& led, std::size_t p) {
    std::size_t settle = 0;
    std::int8_t prev = 0;
    for (std::size_t l = 0; l < led.levels(); ++l) {
        const std::int8_t s = led.rows[l][p];
        if (s == 0) continue;
        if (prev != 0 && s != prev) settle = l;
        prev = s;
    }
    return settle;
}

std::vector<std::size_t> survivors(const SignLedger& led) {
    std::vector<std::size_t> out;
    const auto& last = led.rows.back();
    for (std::size_t p = 0; p < led.params; ++p)
        if (last[p] != 0) out.push_back(p);
    return out;
}

}  // namespace

std::vector<std::int64_t> settle_iteration_histogram(const SignLedger& ledger) {
    require(ledger.levels() >= 2, Errc::LedgerMismatch, "need at least two recorded levels");
    std::vector<std::int64_t> hist(ledger.levels(), 0);
    for (std::size_t p : survivors(ledger)) ++hist[settle_level(ledger, p)];
    return hist;
}

std::vector<std::int64_t> flip_count_histogram(const SignLedger& ledger) {
    require(ledger.levels() >= 2, Errc::LedgerMismatch, "need at least two recorded levels");
    std::vector<std::int64_t> hist(ledger.levels(), 0);
    for (std::size_t p : survivors(ledger)) {
        std::size_t flips = 0;
        std::int8_t prev = 0;
        for (std::size_t l = 0; l < ledger.levels(); ++l) {
            const std::int8_t s = ledger.rows[l][p];
            if (s == 0) continue;
            if (prev != 0 && s != prev) ++flips;
            prev = s;
        }
        ++hist[flips];
    }
    return hist;
}

std::vector<std::int64_t> net_flip_difference(const SignLedger& a, const SignLedger& b) {
    require(a.params == b.params && a.levels() == b.levels(), Errc::LedgerMismatch,
            "ledgers cover different parameter universes");
    std::vector<std::int64_t> diff(a.levels(), 0);
    for (std::size_t l = 0; l < a.levels(); ++l) {
        std::int64_t ca = 0, cb = 0;
        for (std::size_t p = 0; p < a.params; ++p) {
            const int fa = a.rows[0][p] * a.rows[l][p];
            const int fb = b.rows[0][p] * b.rows[l][p];
            if (fa < 0) ++ca;
            if (fb < 0) ++cb;
        }
        diff[l] = ca - cb;
    }
    return diff;
}

double median_settle_level(const SignLedger& ledger) {
    std::vector<std::size_t> settles;
    for (std::size_t p : survivors(ledger)) settles.push_back(settle_level(ledger, p));
    require(!settles.empty(), Errc::LedgerMismatch, "no surviving parameters");
    std::sort(settles.begin(), settles.end());
    const std::size_t n = settles.size();
    if (n % 2 == 1) return static_cast<double>(settles[n / 2]);
    return 0.5 * (static_cast<double>(settles[n / 2 - 1]) + static_cast<double>(settles[n / 2]));
}

void save_ledger(const std::string& path, const SignLedger& ledger) {
    atomic_write_file(path, [&](std::ostream& os) {
        put_u32(os, kLedgerMagic);
        put_u32(os, kLedgerVersion);
        put_u64(os, ledger.levels());
        put_u64(os, ledger.params);
        for (const auto& row : ledger.rows)
            os.write(reinterpret_cast<const char*>(row.data()),
                     static_cast<std::streamsize>(row.size()));
    });
}

SignLedger load_ledger(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), Errc::IoError, "cannot open ledger " + path);
    require(get_u32(is) == kLedgerMagic, Errc::BadMagic, "not a sign ledger: " + path);
    require(get_u32(is) == kLedgerVersion, Errc::BadMagic, "unsupported ledger version");
    SignLedger led;
    const std::size_t levels = get_u64(is);
    led.params = get_u64(is);
    led.rows.resize(levels);
    for (auto& row : led.rows) {
        row.resize(led.params);
        is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(led.params));
        require(static_cast<std::size_t>(is.gcount()) == led.params, Errc::TruncatedFile,
                "ledger truncated: " + path);
    }
    return led;
}

std::string histogram_csv(const std::vector<std::int64_t>& hist) {
    std::string out = "bin,count\n";
    for (std::size_t i = 0; i < hist.size(); ++i)
        out += std::to_string(i) + "," + std::to_string(hist[i]) + "\n";
    return out;
}

}  // namespace sparselab
