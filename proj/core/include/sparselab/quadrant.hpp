#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sparselab/neuron.hpp"

namespace sparselab {

/// Rewind-vs-continue scheme for iterative pruning cycles.
/// Imp restarts every cycle from the stored initial parameters; Lrr keeps
/// the surviving parameters of the previous cycle and only restarts the
/// learning-rate schedule.
enum class Scheme { Imp, Lrr };

const char* scheme_name(Scheme s);

/// One prune-and-train experiment on the d-input single hidden neuron,
/// swept over all four initial sign quadrants.
struct QuadrantConfig {
    std::size_t d = 10;
    std::size_t n = 1000;
    double noise_var = 0.01;  // variance of the label noise
    std::size_t levels = 3;   // pruning rounds after the dense cycle
    double target_sparsity = 0.9;
    std::size_t seeds_per_quadrant = 10;
    std::size_t epochs_per_level = 12000;  // full-batch GD steps per training cycle
    double lr = 1e-2;
    double init_norm = 0.7;  // ||w(0)||; |a| ||w|| = init_norm^2 stays within Lemma range
    double success_tol_extra = 1e-3;  // success threshold above the Bayes floor noise_var/2
    double product_tol = 0.1;
    std::uint64_t base_seed = 1;
};

struct QuadrantRunRow {
    std::uint64_t seed = 0;
    SignQuadrant quadrant = SignQuadrant::PosPos;
    Scheme scheme = Scheme::Imp;
    double final_loss = 0.0;
    Outcome outcome = Outcome::Degenerate;
    double a_final = 0.0;
    double w1_final = 0.0;
};

struct QuadrantResult {
    Scheme scheme = Scheme::Imp;
    std::size_t seeds_per_quadrant = 0;
    std::array<std::size_t, 4> successes{};  // indexed by SignQuadrant
    std::array<double, 4> mean_final_loss{};
    std::vector<QuadrantRunRow> rows;

    double success_rate(SignQuadrant q) const {
        return static_cast<double>(successes[static_cast<std::size_t>(q)]) /
               static_cast<double>(seeds_per_quadrant);
    }
};

/// Trains, prunes by weight magnitude down to a single surviving input, and
/// classifies the outcome per initial sign quadrant. The per-level keep
/// fraction is (1 - target_sparsity)^(1/levels); data and initialization are
/// functions of (base_seed, seed, quadrant) only, so Imp and Lrr see
/// identical starting points.
QuadrantResult run_quadrant_experiment(const QuadrantConfig& cfg, Scheme scheme);

/// CSV rows ("seed,quadrant,scheme,final_loss,outcome,a_final,w1_final").
std::string quadrant_csv(const std::vector<QuadrantRunRow>& rows);

}  // namespace sparselab
