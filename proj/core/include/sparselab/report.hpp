#pragma once

#include <span>
#include <string>
#include <vector>

namespace sparselab {

/// Student-t 95% confidence interval: mean +- t(0.975, n-1) * s / sqrt(n).
struct MeanCI {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;
};

MeanCI t_confidence_interval(std::span<const double> values);

/// Two-sided 95% t critical value for the given degrees of freedom
/// (tabulated; df beyond the table fall back to the nearest lower entry).
double t_critical_975(std::size_t dof);

struct MetricsRow {
    std::size_t level = 0;
    double sparsity = 0.0;
    double train_loss = 0.0;
    double test_acc = 0.0;
    std::uint64_t seed = 0;
    std::string scheme;
};

std::vector<MetricsRow> parse_metrics_csv(const std::string& text);

struct AggRow {
    std::string scheme;
    std::size_t level = 0;
    double sparsity = 0.0;
    MeanCI acc;
};

/// Group per (scheme, level) across run directories and aggregate test
/// accuracy over seeds.
std::vector<AggRow> aggregate_metrics(const std::vector<std::string>& run_dirs);

/// Scan a root directory for run dirs (anything holding a metrics.csv).
std::vector<std::string> find_run_dirs(const std::string& root);

std::string report_table(const std::vector<AggRow>& rows);

/// One whitespace-separated plot-data file per scheme:
/// x (sparsity)  y (mean acc)  ci_low  ci_high
void write_plot_data(const std::string& dir, const std::vector<AggRow>& rows);

}  // namespace sparselab
