#pragma once

#include <string>

#include "sparselab/net.hpp"
#include "sparselab/rng.hpp"

namespace sparselab {

struct SplitTask {
    TaskData train;
    TaskData test;
};

/// Gaussian mixture with `classes` unit-orthogonal mean directions scaled so
/// every pair of class means sits at distance `separation`; per-class
/// covariance I/dim. Labels cycle round-robin so both splits are balanced.
SplitTask gen_synthetic_task(std::size_t classes, std::size_t dim, std::size_t n_train,
                             std::size_t n_test, double separation, Rng& rng);

/// Class means of the mixture above (classes x dim); handy as a
/// nearest-mean reference classifier.
DenseMatrix mixture_means(std::size_t classes, std::size_t dim, double separation);

/// IDX-format reader (big-endian magic 0x803 for images, 0x801 for labels);
/// pixels scaled to [0,1].
TaskData load_idx(const std::string& images_path, const std::string& labels_path);

void save_task(const std::string& path, const TaskData& data);
TaskData load_task(const std::string& path);

}  // namespace sparselab
