#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sparselab/error.hpp"
#include "sparselab/rng.hpp"

namespace sparselab {

/// Dense row-major matrix of doubles. All heavy math in the library runs on
/// contiguous rows of these.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    std::size_t size() const { return data.size(); }

    bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

/// n x d matrix of iid N(0, 1/d) entries, so each row is one input sample
/// drawn from N(0, I/d).
inline DenseMatrix sample_gaussian_inputs(std::size_t n, std::size_t d, Rng& rng) {
    require(n >= 1 && d >= 1, Errc::ConfigError, "sample_gaussian_inputs needs n >= 1, d >= 1");
    DenseMatrix x(n, d);
    const double stddev = 1.0 / std::sqrt(static_cast<double>(d));
    for (double& v : x.data) v = rng.gaussian(0.0, stddev);
    return x;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

}  // namespace sparselab
