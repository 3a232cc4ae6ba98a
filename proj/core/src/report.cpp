#include "sparselab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "sparselab/error.hpp"
#include "sparselab/io.hpp"

namespace sparselab {

namespace {

// Two-sided 95% quantiles of Student's t; last entries cover df 40/60/120
// and the normal limit.
struct TEntry {
    std::size_t dof;
    double value;
};
constexpr TEntry kT975[] = {
    {1, 12.70620474}, {2, 4.30265273},  {3, 3.18244631},  {4, 2.77644511},  {5, 2.57058184},
    {6, 2.44691185},  {7, 2.36462425},  {8, 2.30600414},  {9, 2.26215716},  {10, 2.22813885},
    {11, 2.20098516}, {12, 2.17881283}, {13, 2.16036866}, {14, 2.14478669}, {15, 2.13144955},
    {16, 2.11990530}, {17, 2.10981558}, {18, 2.10092204}, {19, 2.09302406}, {20, 2.08596345},
    {21, 2.07961384}, {22, 2.07387307}, {23, 2.06865761}, {24, 2.06389856}, {25, 2.05953855},
    {26, 2.05552944}, {27, 2.05183052}, {28, 2.04840714}, {29, 2.04522964}, {30, 2.04227246},
    {40, 2.02107539}, {60, 2.00029782}, {120, 1.97993041}, {100000, 1.95996398},
};

}  // namespace

double t_critical_975(std::size_t dof) {
    require(dof >= 1, Errc::ConfigError, "t critical value needs dof >= 1");
    double best = kT975[0].value;
    for (const auto& e : kT975) {
        if (e.dof <= dof) best = e.value;
    }
    return best;
}

MeanCI t_confidence_interval(std::span<const double> values) {
    require(!values.empty(), Errc::ConfigError, "confidence interval of empty sample");
    MeanCI out;
    out.n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(out.n);
    if (out.n == 1) {
        out.lo = out.hi = out.mean;
        return out;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(out.n - 1));
    const double half = t_critical_975(out.n - 1) * sd / std::sqrt(static_cast<double>(out.n));
    out.lo = out.mean - half;
    out.hi = out.mean + half;
    return out;
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
    std::vector<MetricsRow> rows;
    std::istringstream is(text);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (first) {
            require(line == "level,sparsity,train_loss,test_acc,seed,scheme", Errc::ConfigError,
                    "unexpected metrics.csv header: " + line);
            first = false;
            continue;
        }
        MetricsRow r;
        std::istringstream ls(line);
        std::string field;
        std::getline(ls, field, ',');
        r.level = std::stoul(field);
        std::getline(ls, field, ',');
        r.sparsity = std::stod(field);
        std::getline(ls, field, ',');
        r.train_loss = std::stod(field);
        std::getline(ls, field, ',');
        r.test_acc = std::stod(field);
        std::getline(ls, field, ',');
        r.seed = std::stoull(field);
        std::getline(ls, field, ',');
        r.scheme = field;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<std::string> find_run_dirs(const std::string& root) {
    namespace fs = std::filesystem;
    std::vector<std::string> dirs;
    require(fs::exists(root), Errc::IoError, "no such directory: " + root);
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && fs::exists(entry.path() / "metrics.csv"))
            dirs.push_back(entry.path().string());
    }
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

std::vector<AggRow> aggregate_metrics(const std::vector<std::string>& run_dirs) {
    namespace fs = std::filesystem;
    // (scheme, level) -> accuracies across seeds
    std::map<std::pair<std::string, std::size_t>, std::pair<double, std::vector<double>>> groups;
    for (const auto& dir : run_dirs) {
        const auto rows = parse_metrics_csv(read_text_file((fs::path(dir) / "metrics.csv").string()));
        for (const auto& r : rows) {
            auto& g = groups[{r.scheme, r.level}];
            g.first = r.sparsity;
            g.second.push_back(r.test_acc);
        }
    }
    std::vector<AggRow> out;
    for (const auto& [key, val] : groups) {
        AggRow row;
        row.scheme = key.first;
        row.level = key.second;
        row.sparsity = val.first;
        row.acc = t_confidence_interval(val.second);
        out.push_back(std::move(row));
    }
    return out;
}

std::string report_table(const std::vector<AggRow>& rows) {
    std::string out = "scheme       level  sparsity   acc_mean   ci_low     ci_high    seeds\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-12s %5zu  %8.4f   %8.4f   %8.4f   %8.4f   %zu\n",
                      r.scheme.c_str(), r.level, r.sparsity, r.acc.mean, r.acc.lo, r.acc.hi,
                      r.acc.n);
        out += buf;
    }
    return out;
}

void write_plot_data(const std::string& dir, const std::vector<AggRow>& rows) {
    namespace fs = std::filesystem;
    std::map<std::string, std::string> per_scheme;
    for (const auto& r : rows) {
        per_scheme[r.scheme] += format_double(r.sparsity) + " " + format_double(r.acc.mean) + " " +
                                format_double(r.acc.lo) + " " + format_double(r.acc.hi) + "\n";
    }
    for (const auto& [scheme, body] : per_scheme)
        atomic_write_text((fs::path(dir) / ("accuracy_vs_sparsity_" + scheme + ".dat")).string(),
                          body);
}

}  // namespace sparselab
