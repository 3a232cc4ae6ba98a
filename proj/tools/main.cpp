// sparselab command line: iterative pruning runs, single-neuron quadrant
// experiments, sign analytics, synthetic data generation and report
// aggregation. Subcommands: neuron, prune, analyze, gen-data, report.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "sparselab/engine.hpp"
#include "sparselab/io.hpp"
#include "sparselab/quadrant.hpp"
#include "sparselab/report.hpp"

namespace fs = std::filesystem;
using namespace sparselab;

namespace {

std::string default_out_root() {
    if (const char* env = std::getenv("SPARSELAB_OUT")) return env;
    return "runs";
}

int cmd_neuron(const QuadrantConfig& cfg, const std::vector<std::string>& scheme_names,
               std::size_t closed_form_tuples, const std::string& out_dir) {
    if (closed_form_tuples > 0) {
        // Closed-form vs RK4 agreement sweep over random (w0, c1, c2_tilde).
        Rng rng(cfg.base_seed);
        double worst = 0.0;
        for (std::size_t i = 0; i < closed_form_tuples; ++i) {
            double w0 = rng.uniform(-2.0, 2.0);
            if (std::abs(w0) < 1e-3) w0 = 1e-3;
            const double c1 = rng.uniform(1e-6, 1.0);
            const double c2t = rng.uniform(-1.0, 1.0);
            auto rhs = [c1, c2t](double, std::span<const double> y, std::span<double> dy) {
                dy[0] = -c1 * y[0] * y[0] * y[0] + c2t * y[0];
            };
            const Trajectory traj = integrate_ode(rhs, {w0}, 10.0, 1e-3);
            for (std::size_t k = 0; k < traj.size(); ++k)
                worst = std::max(worst,
                                 std::abs(closed_form_w(traj.times[k], w0, c1, c2t) - traj.states[k][0]));
        }
        std::cout << "closed-form vs RK4, " << closed_form_tuples
                  << " tuples, t<=10, step 1e-3: max abs deviation = " << worst << "\n";
        return 0;
    }

    std::vector<QuadrantResult> results;
    for (const auto& name : scheme_names) {
        const Scheme scheme = (name == "imp") ? Scheme::Imp : Scheme::Lrr;
        results.push_back(run_quadrant_experiment(cfg, scheme));
    }

    std::cout << "success rates per initial sign quadrant (seeds=" << cfg.seeds_per_quadrant
              << ", d=" << cfg.d << ", levels=" << cfg.levels << "):\n";
    std::cout << "scheme   PosPos  PosNeg  NegPos  NegNeg\n";
    for (const auto& res : results) {
        std::printf("%-6s ", scheme_name(res.scheme));
        for (int q = 0; q < 4; ++q)
            std::printf("  %5.2f", res.success_rate(static_cast<SignQuadrant>(q)));
        std::printf("\n");
    }

    if (!out_dir.empty()) {
        std::vector<QuadrantRunRow> all_rows;
        for (const auto& res : results)
            all_rows.insert(all_rows.end(), res.rows.begin(), res.rows.end());
        atomic_write_text((fs::path(out_dir) / "neuron_runs.csv").string(),
                          quadrant_csv(all_rows));
        for (const auto& res : results) {
            // per-quadrant success rate with a t-interval over the 0/1 seeds
            std::string body;
            for (int q = 0; q < 4; ++q) {
                std::vector<double> ind;
                for (const auto& row : res.rows)
                    if (static_cast<int>(row.quadrant) == q)
                        ind.push_back(row.outcome == Outcome::Success ? 1.0 : 0.0);
                const MeanCI ci = t_confidence_interval(ind);
                body += std::to_string(q) + " " + format_double(ci.mean) + " " +
                        format_double(ci.lo) + " " + format_double(ci.hi) + "\n";
            }
            atomic_write_text((fs::path(out_dir) /
                               ("quadrant_success_" + std::string(scheme_name(res.scheme)) + ".dat"))
                                  .string(),
                              body);
        }
        std::cout << "wrote " << out_dir << "/neuron_runs.csv\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparselab: iterative pruning cycles and single-neuron gradient-flow experiments"};
    app.require_subcommand(1);

    // ---- neuron ------------------------------------------------------------
    auto* neuron = app.add_subcommand("neuron", "single hidden neuron quadrant experiment");
    QuadrantConfig qcfg;
    std::vector<std::string> neuron_schemes{"imp", "lrr"};
    std::size_t closed_form_tuples = 0;
    std::string neuron_out;
    double sigma2 = qcfg.noise_var;
    neuron->add_option("--d", qcfg.d, "input dimension");
    neuron->add_option("--n", qcfg.n, "training samples");
    neuron->add_option("--sigma2", sigma2, "label noise variance");
    neuron->add_option("--levels", qcfg.levels, "pruning levels");
    neuron->add_option("--target-sparsity", qcfg.target_sparsity, "final sparsity of w");
    neuron->add_option("--seeds", qcfg.seeds_per_quadrant, "seeds per quadrant");
    neuron->add_option("--epochs", qcfg.epochs_per_level, "GD steps per training cycle");
    neuron->add_option("--lr", qcfg.lr, "GD learning rate");
    neuron->add_option("--seed", qcfg.base_seed, "base seed");
    neuron->add_option("--scheme", neuron_schemes, "imp and/or lrr")
        ->check(CLI::IsMember({"imp", "lrr"}));
    neuron->add_option("--closed-form-tuples", closed_form_tuples,
                       "instead: run the closed-form vs RK4 sweep with this many tuples");
    neuron->add_option("--out", neuron_out, "output directory for CSV/plot data");

    // ---- prune ---------------------------------------------------------------
    auto* prune = app.add_subcommand("prune", "iterative pruning run matrix");
    std::string config_path, prune_out;
    std::vector<std::string> prune_schemes;
    std::size_t prune_seeds = 0;
    std::uint64_t prune_seed_base = 0;
    bool has_seed_base = false;
    prune->add_option("--config", config_path, "JSON config file");
    prune->add_option("--scheme", prune_schemes, "override: schemes to run")
        ->check(CLI::IsMember({"lrr", "imp", "lrr-rewindbn", "magrewind"}));
    prune->add_option("--seeds", prune_seeds, "override: number of seeds");
    prune->add_option("--seed", prune_seed_base, "override: base seed")
        ->each([&](const std::string&) { has_seed_base = true; });
    prune->add_option("--out", prune_out, "output root (default $SPARSELAB_OUT or ./runs)");

    // ---- analyze -------------------------------------------------------------
    auto* analyze = app.add_subcommand("analyze", "sign statistics from run directories");
    std::string analyze_run, analyze_baseline, analyze_out;
    analyze->add_option("--run", analyze_run, "run directory (with signs.bin)")->required();
    analyze->add_option("--baseline", analyze_baseline,
                        "second run directory for the net flip difference");
    analyze->add_option("--out", analyze_out, "output directory (default: the run directory)");

    // ---- gen-data ------------------------------------------------------------
    auto* gen = app.add_subcommand("gen-data", "synthesize and store task data");
    std::size_t g_classes = 10, g_dim = 64, g_ntrain = 2048, g_ntest = 1024;
    double g_sep = 1.0;
    std::uint64_t g_seed = 42;
    std::string g_out = "task";
    gen->add_option("--classes", g_classes, "number of classes");
    gen->add_option("--dim", g_dim, "input dimension");
    gen->add_option("--n-train", g_ntrain, "training samples");
    gen->add_option("--n-test", g_ntest, "test samples");
    gen->add_option("--separation", g_sep, "distance between class means");
    gen->add_option("--seed", g_seed, "data seed");
    gen->add_option("--out", g_out, "output prefix (<prefix>_train.task, <prefix>_test.task)");

    // ---- report ----------------------------------------------------------------
    auto* report = app.add_subcommand("report", "aggregate metrics.csv files across runs");
    std::string report_root, report_out;
    report->add_option("--root", report_root, "directory holding run directories")->required();
    report->add_option("--out", report_out, "plot-data output directory (default: root)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (neuron->parsed()) {
            qcfg.noise_var = sigma2;
            return cmd_neuron(qcfg, neuron_schemes, closed_form_tuples, neuron_out);
        }
        if (prune->parsed()) {
            ExperimentConfig cfg;
            if (!config_path.empty()) cfg = config_from_json(read_text_file(config_path));
            if (!prune_schemes.empty()) {
                cfg.schemes.clear();
                for (const auto& s : prune_schemes) cfg.schemes.push_back(*parse_policy(s));
            }
            if (prune_seeds > 0) cfg.seeds = prune_seeds;
            if (has_seed_base) cfg.seed = prune_seed_base;
            const std::string root = !prune_out.empty()
                                         ? prune_out
                                         : (cfg.out_root != "runs" ? cfg.out_root : default_out_root());
            const auto dirs = run_matrix(cfg, root);
            const auto agg = aggregate_metrics(dirs);
            std::cout << report_table(agg);
            std::cout << dirs.size() << " runs under " << root << "\n";
            return 0;
        }
        if (analyze->parsed()) {
            const SignLedger led = load_ledger((fs::path(analyze_run) / "signs.bin").string());
            const std::string out = analyze_out.empty() ? analyze_run : analyze_out;
            atomic_write_text((fs::path(out) / "settle_hist.csv").string(),
                              histogram_csv(settle_iteration_histogram(led)));
            atomic_write_text((fs::path(out) / "flip_hist.csv").string(),
                              histogram_csv(flip_count_histogram(led)));
            std::cout << "median settle level: " << median_settle_level(led) << "\n";
            if (!analyze_baseline.empty()) {
                const SignLedger base =
                    load_ledger((fs::path(analyze_baseline) / "signs.bin").string());
                const auto diff = net_flip_difference(led, base);
                std::string csv = "level,net_flip_difference\n";
                for (std::size_t l = 0; l < diff.size(); ++l)
                    csv += std::to_string(l) + "," + std::to_string(diff[l]) + "\n";
                atomic_write_text((fs::path(out) / "net_flip_diff.csv").string(), csv);
            }
            std::cout << "sign statistics written to " << out << "\n";
            return 0;
        }
        if (gen->parsed()) {
            Rng rng(g_seed);
            const SplitTask split = gen_synthetic_task(g_classes, g_dim, g_ntrain, g_ntest, g_sep, rng);
            save_task(g_out + "_train.task", split.train);
            save_task(g_out + "_test.task", split.test);
            std::cout << "wrote " << g_out << "_train.task and " << g_out << "_test.task\n";
            return 0;
        }
        if (report->parsed()) {
            const auto dirs = find_run_dirs(report_root);
            const auto agg = aggregate_metrics(dirs);
            std::cout << report_table(agg);
            write_plot_data(report_out.empty() ? report_root : report_out, agg);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: Unexpected: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
