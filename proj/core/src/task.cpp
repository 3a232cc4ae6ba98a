#include "sparselab/task.hpp"

#include <cmath>
#include <fstream>

#include "sparselab/io.hpp"

namespace sparselab {

namespace {

constexpr std::uint32_t kTaskMagic = 0x534c544b;  // "KTLS" little-endian on disk
constexpr std::uint32_t kTaskVersion = 1;
constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

TaskData sample_split(const DenseMatrix& means, std::size_t classes, std::size_t dim,
                      std::size_t n, Rng& rng) {
    TaskData out;
    out.inputs = DenseMatrix(n, dim);
    out.labels.resize(n);
    const double noise = 1.0 / std::sqrt(static_cast<double>(dim));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % classes;
        out.labels[i] = static_cast<int>(c);
        auto row = out.inputs.row(i);
        const auto mean = means.row(c);
        for (std::size_t j = 0; j < dim; ++j) row[j] = mean[j] + rng.gaussian(0.0, noise);
    }
    return out;
}

std::uint32_t get_u32_be(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    require(is.gcount() == 4, Errc::TruncatedFile, "unexpected end of IDX file");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

}  // namespace

DenseMatrix mixture_means(std::size_t classes, std::size_t dim, double separation) {
    require(classes >= 2, Errc::ConfigError, "need at least two classes");
    require(dim >= classes, Errc::ConfigError, "mixture needs dim >= classes");
    DenseMatrix means(classes, dim);
    const double scale = separation / std::sqrt(2.0);  // orthogonal unit directions
    for (std::size_t c = 0; c < classes; ++c) means(c, c) = scale;
    return means;
}

SplitTask gen_synthetic_task(std::size_t classes, std::size_t dim, std::size_t n_train,
                             std::size_t n_test, double separation, Rng& rng) {
    require(separation >= 0.0, Errc::ConfigError, "separation must be nonnegative");
    const DenseMatrix means = mixture_means(classes, dim, separation);
    SplitTask split;
    split.train = sample_split(means, classes, dim, n_train, rng);
    split.test = sample_split(means, classes, dim, n_test, rng);
    return split;
}

TaskData load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgs(images_path, std::ios::binary);
    require(imgs.good(), Errc::IoError, "cannot open " + images_path);
    require(get_u32_be(imgs) == kIdxImagesMagic, Errc::BadMagic,
            "bad IDX image magic in " + images_path);
    const std::size_t n = get_u32_be(imgs);
    const std::size_t rows = get_u32_be(imgs);
    const std::size_t cols = get_u32_be(imgs);
    const std::size_t dim = rows * cols;

    TaskData out;
    out.inputs = DenseMatrix(n, dim);
    std::vector<unsigned char> buf(dim);
    for (std::size_t i = 0; i < n; ++i) {
        imgs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(dim));
        require(static_cast<std::size_t>(imgs.gcount()) == dim, Errc::TruncatedFile,
                "image payload truncated in " + images_path);
        auto row = out.inputs.row(i);
        for (std::size_t j = 0; j < dim; ++j) row[j] = static_cast<double>(buf[j]) / 255.0;
    }

    std::ifstream labs(labels_path, std::ios::binary);
    require(labs.good(), Errc::IoError, "cannot open " + labels_path);
    require(get_u32_be(labs) == kIdxLabelsMagic, Errc::BadMagic,
            "bad IDX label magic in " + labels_path);
    const std::size_t n_labels = get_u32_be(labs);
    require(n_labels == n, Errc::CountMismatch,
            "image/label counts differ: " + std::to_string(n) + " vs " + std::to_string(n_labels));
    out.labels.resize(n);
    std::vector<unsigned char> lbuf(n);
    labs.read(reinterpret_cast<char*>(lbuf.data()), static_cast<std::streamsize>(n));
    require(static_cast<std::size_t>(labs.gcount()) == n, Errc::TruncatedFile,
            "label payload truncated in " + labels_path);
    for (std::size_t i = 0; i < n; ++i) out.labels[i] = static_cast<int>(lbuf[i]);
    return out;
}

void save_task(const std::string& path, const TaskData& data) {
    atomic_write_file(path, [&](std::ostream& os) {
        put_u32(os, kTaskMagic);
        put_u32(os, kTaskVersion);
        put_u64(os, data.inputs.rows);
        put_u64(os, data.inputs.cols);
        put_f64_span(os, data.inputs.data);
        put_u64(os, data.labels.size());
        for (int v : data.labels) put_u32(os, static_cast<std::uint32_t>(v));
    });
}

TaskData load_task(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), Errc::IoError, "cannot open " + path);
    require(get_u32(is) == kTaskMagic, Errc::BadMagic, "not a task file: " + path);
    require(get_u32(is) == kTaskVersion, Errc::BadMagic, "unsupported task version");
    TaskData out;
    out.inputs.rows = get_u64(is);
    out.inputs.cols = get_u64(is);
    get_f64_vec(is, out.inputs.data, out.inputs.rows * out.inputs.cols);
    const std::size_t nl = get_u64(is);
    out.labels.resize(nl);
    for (auto& v : out.labels) v = static_cast<int>(get_u32(is));
    return out;
}

}  // namespace sparselab
