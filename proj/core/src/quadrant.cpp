#include "sparselab/quadrant.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

namespace sparselab {

const char* scheme_name(Scheme s) { return s == Scheme::Imp ? "imp" : "lrr"; }

namespace {

/// One full-batch gradient-descent step on the masked neuron; pruned
/// coordinates receive no update and stay exactly zero.
void gd_step(NeuronParams& p, const std::vector<std::uint8_t>& alive, const DataSet1Neuron& data,
             double lr, std::vector<double>& grad_w) {
    const std::size_t n = data.n();
    const std::size_t d = data.d();
    double grad_a = 0.0;
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = data.x.row(i);
        const double s = dot(xi, p.w);
        if (s > 0.0) {
            const double r = p.a * s - data.y[i];
            grad_a += r * s;
            axpy(r, xi, grad_w);
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    const double a_old = p.a;  // simultaneous update: w's gradient uses the pre-step a
    p.a -= lr * grad_a * inv_n;
    const double scale = lr * a_old * inv_n;
    for (std::size_t k = 0; k < d; ++k)
        if (alive[k]) p.w[k] -= scale * grad_w[k];
}

void train_gd(NeuronParams& p, const std::vector<std::uint8_t>& alive, const DataSet1Neuron& data,
              std::size_t epochs, double lr) {
    std::vector<double> grad_w(data.d());
    for (std::size_t e = 0; e < epochs; ++e) gd_step(p, alive, data, lr, grad_w);
}

/// Keep the `keep` highest-magnitude alive coordinates; ties break towards
/// the lower index. Pruned coordinates are zeroed in w.
void prune_to(NeuronParams& p, std::vector<std::uint8_t>& alive, std::size_t keep) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < alive.size(); ++k)
        if (alive[k]) idx.push_back(k);
    if (idx.size() <= keep) return;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(p.w[a]) > std::abs(p.w[b]);
    });
    for (std::size_t r = keep; r < idx.size(); ++r) {
        alive[idx[r]] = 0;
        p.w[idx[r]] = 0.0;
    }
}

QuadrantRunRow run_one(const QuadrantConfig& cfg, Scheme scheme, SignQuadrant q,
                       std::uint64_t seed) {
    // Imp and Lrr share the stream: data + init depend on (base_seed, seed, quadrant) only.
    Rng rng = Rng::substream(cfg.base_seed, seed * 4 + static_cast<std::uint64_t>(q));
    DataSet1Neuron data =
        make_neuron_dataset(cfg.n, cfg.d, std::sqrt(cfg.noise_var), rng);

    NeuronParams p = balanced_init(cfg.d, 1.0, rng);
    set_weight_norm(p, cfg.init_norm);
    const bool a_pos = (q == SignQuadrant::PosPos || q == SignQuadrant::PosNeg);
    const bool w1_pos = (q == SignQuadrant::PosPos || q == SignQuadrant::NegPos);
    p.w[0] = (w1_pos ? 1.0 : -1.0) * std::abs(p.w[0]);
    p.a = (a_pos ? 1.0 : -1.0) * std::abs(p.a);
    const NeuronParams init = p;

    std::vector<std::uint8_t> alive(cfg.d, 1);
    train_gd(p, alive, data, cfg.epochs_per_level, cfg.lr);

    if (cfg.levels > 0) {
        const double keep_fraction =
            std::pow(1.0 - cfg.target_sparsity, 1.0 / static_cast<double>(cfg.levels));
        for (std::size_t level = 1; level <= cfg.levels; ++level) {
            const auto keep = static_cast<std::size_t>(std::max<long long>(
                1, std::llround(static_cast<double>(cfg.d) *
                                std::pow(keep_fraction, static_cast<double>(level)))));
            prune_to(p, alive, keep);
            if (scheme == Scheme::Imp) {
                p.a = init.a;
                for (std::size_t k = 0; k < cfg.d; ++k) p.w[k] = alive[k] ? init.w[k] : 0.0;
            }
            train_gd(p, alive, data, cfg.epochs_per_level, cfg.lr);
        }
    }

    QuadrantRunRow row;
    row.seed = seed;
    row.quadrant = q;
    row.scheme = scheme;
    row.final_loss = neuron_loss(p, data);
    row.a_final = p.a;
    row.w1_final = p.w[0];
    row.outcome = classify_outcome(p, row.final_loss, cfg.noise_var / 2.0 + cfg.success_tol_extra,
                                   cfg.product_tol);
    return row;
}

}  // namespace

QuadrantResult run_quadrant_experiment(const QuadrantConfig& cfg, Scheme scheme) {
    require(cfg.d >= 1, Errc::ConfigError, "quadrant experiment needs d >= 1");
    require(cfg.levels == 0 || cfg.d >= 2, Errc::ConfigError, "pruning levels need d >= 2");
    if (cfg.levels > 0) {
        require(cfg.target_sparsity > 0.0 && cfg.target_sparsity < 1.0, Errc::ConfigError,
                "target_sparsity must lie in (0,1)");
        const auto survivors = std::llround(static_cast<double>(cfg.d) * (1.0 - cfg.target_sparsity));
        require(survivors <= 1, Errc::ConfigError,
                "target_sparsity leaves more than one surviving input");
    }

    const std::size_t total = 4 * cfg.seeds_per_quadrant;
    std::vector<QuadrantRunRow> rows(total);

    // Embarrassingly parallel over (quadrant, seed); each run is seeded
    // independently, results land in preassigned slots.
    const std::size_t workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), total);
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= total) return;
                const auto q = static_cast<SignQuadrant>(i / cfg.seeds_per_quadrant);
                const std::uint64_t seed = i % cfg.seeds_per_quadrant;
                rows[i] = run_one(cfg, scheme, q, seed);
            }
        });
    }
    for (auto& th : pool) th.join();

    QuadrantResult res;
    res.scheme = scheme;
    res.seeds_per_quadrant = cfg.seeds_per_quadrant;
    res.rows = std::move(rows);
    for (const auto& row : res.rows) {
        const auto qi = static_cast<std::size_t>(row.quadrant);
        if (row.outcome == Outcome::Success) ++res.successes[qi];
        res.mean_final_loss[qi] += row.final_loss / static_cast<double>(cfg.seeds_per_quadrant);
    }
    return res;
}

std::string quadrant_csv(const std::vector<QuadrantRunRow>& rows) {
    std::string out = "seed,quadrant,scheme,final_loss,outcome,a_final,w1_final\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%llu,%s,%s,%.17g,%s,%.17g,%.17g\n",
                      static_cast<unsigned long long>(r.seed), quadrant_name(r.quadrant),
                      scheme_name(r.scheme), r.final_loss, outcome_name(r.outcome), r.a_final,
                      r.w1_final);
        out += buf;
    }
    return out;
}

}  // namespace sparselab
