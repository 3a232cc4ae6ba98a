#include "sparselab/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "sparselab/io.hpp"

namespace sparselab {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;
constexpr std::uint32_t kCheckpointMagic = 0x53504c43;  // "CLPS" little-endian on disk
constexpr std::uint32_t kCheckpointVersion = 1;

// z (B x out) = x (B x in) . w^T + bias
void linear_forward(const DenseMatrix& x, const DenseMatrix& w, std::span<const double> bias,
                    DenseMatrix& z) {
    z = DenseMatrix(x.rows, w.rows);
    for (std::size_t b = 0; b < x.rows; ++b) {
        const auto xb = x.row(b);
        auto zb = z.row(b);
        for (std::size_t o = 0; o < w.rows; ++o) zb[o] = bias[o] + dot(xb, w.row(o));
    }
}

}  // namespace

void MLPSpec::validate() const {
    require(widths.size() >= 2, Errc::ConfigError, "MLPSpec needs at least two widths");
    for (std::size_t wdt : widths)
        require(wdt >= 1, Errc::ConfigError, "MLPSpec widths must be positive");
    require(batchnorm.size() == hidden(), Errc::ConfigError,
            "MLPSpec needs one batchnorm flag per hidden layer");
}

std::vector<std::size_t> ModelState::weight_tensor_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.reserve(weights.size());
    for (const auto& w : weights) sizes.push_back(w.size());
    return sizes;
}

ModelState init_model(const MLPSpec& spec, Rng& rng) {
    spec.validate();
    ModelState st;
    st.spec = spec;
    const std::size_t layers = spec.layers();
    st.weights.resize(layers);
    st.biases.resize(layers);
    st.vel_w.resize(layers);
    st.vel_b.resize(layers);
    st.bn_gamma.resize(spec.hidden());
    st.bn_beta.resize(spec.hidden());
    st.bn_running_mean.resize(spec.hidden());
    st.bn_running_var.resize(spec.hidden());
    st.vel_gamma.resize(spec.hidden());
    st.vel_beta.resize(spec.hidden());

    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t fan_in = spec.widths[l];
        const std::size_t fan_out = spec.widths[l + 1];
        st.weights[l] = DenseMatrix(fan_out, fan_in);
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));  // Kaiming normal
        for (double& v : st.weights[l].data) v = rng.gaussian(0.0, stddev);
        st.biases[l].assign(fan_out, 0.0);
        st.vel_w[l] = DenseMatrix(fan_out, fan_in);
        st.vel_b[l].assign(fan_out, 0.0);
    }
    for (std::size_t h = 0; h < spec.hidden(); ++h) {
        if (!spec.batchnorm[h]) continue;
        const std::size_t dim = spec.widths[h + 1];
        st.bn_gamma[h].assign(dim, 1.0);
        st.bn_beta[h].assign(dim, 0.0);
        st.bn_running_mean[h].assign(dim, 0.0);
        st.bn_running_var[h].assign(dim, 1.0);
        st.vel_gamma[h].assign(dim, 0.0);
        st.vel_beta[h].assign(dim, 0.0);
    }
    return st;
}

Mask full_mask(const MLPSpec& spec) {
    spec.validate();
    std::vector<std::size_t> sizes;
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l)
        sizes.push_back(spec.widths[l] * spec.widths[l + 1]);
    return Mask::ones(sizes);
}

double lr_at(const LRSchedule& s, std::size_t epoch) {
    require(epoch < s.total_epochs, Errc::ConfigError, "lr_at epoch out of range");
    require(s.base_lr > 0.0, Errc::ConfigError, "base_lr must be positive");
    if (s.kind == LRKind::Constant) return s.base_lr;
    require(s.warmup_epochs < s.total_epochs, Errc::ConfigError, "warmup must end before total");

    if (epoch <= s.warmup_epochs && s.warmup_epochs > 0) {
        const auto e = std::max<std::size_t>(epoch, 1);  // keep lr(0) positive
        return s.base_lr * static_cast<double>(e) / static_cast<double>(s.warmup_epochs);
    }
    if (s.kind == LRKind::CosineWarmup) {
        const double span = static_cast<double>(s.total_epochs - s.warmup_epochs);
        const double x = static_cast<double>(epoch - s.warmup_epochs) / span;
        return s.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * x));
    }
    // StepWarmup: multiply by step_factor at each passed milestone.
    double lr = s.base_lr;
    for (std::size_t m : s.step_milestones)
        if (epoch >= m) lr *= s.step_factor;
    return lr;
}

DenseMatrix forward(ModelState& state, const Mask& mask, const DenseMatrix& batch, RunMode mode,
                    ForwardCache* cache, bool update_running) {
    const MLPSpec& spec = state.spec;
    spec.validate();
    require(batch.cols == spec.widths.front(), Errc::ShapeMismatch,
            "batch width does not match input width");
    require(mask.tensors() == spec.layers(), Errc::ShapeMismatch,
            "mask tensor count does not match layer count");

    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.wmask.resize(spec.layers());
    c.act.assign(1, batch);
    c.lin.resize(spec.layers());
    c.xhat.assign(spec.hidden(), DenseMatrix());
    c.inv_std.assign(spec.hidden(), {});

    DenseMatrix cur = batch;
    for (std::size_t l = 0; l < spec.layers(); ++l) {
        require(mask.keep[l].size() == state.weights[l].size(), Errc::ShapeMismatch,
                "mask size does not match weight tensor");
        DenseMatrix& wm = c.wmask[l];
        wm = state.weights[l];
        for (std::size_t i = 0; i < wm.data.size(); ++i)
            if (!mask.keep[l][i]) wm.data[i] = 0.0;

        DenseMatrix z;
        linear_forward(cur, wm, state.biases[l], z);
        c.lin[l] = z;

        const bool is_hidden = l + 1 < spec.layers();
        if (is_hidden && spec.batchnorm[l]) {
            const std::size_t dim = z.cols;
            const std::size_t bsz = z.rows;
            auto& istd = c.inv_std[l];
            istd.assign(dim, 0.0);
            DenseMatrix xh(bsz, dim);
            if (mode == RunMode::Train) {
                for (std::size_t j = 0; j < dim; ++j) {
                    double mu = 0.0;
                    for (std::size_t b = 0; b < bsz; ++b) mu += z(b, j);
                    mu /= static_cast<double>(bsz);
                    double var = 0.0;
                    for (std::size_t b = 0; b < bsz; ++b) {
                        const double dv = z(b, j) - mu;
                        var += dv * dv;
                    }
                    var /= static_cast<double>(bsz);  // biased estimator
                    istd[j] = 1.0 / std::sqrt(var + kBnEps);
                    for (std::size_t b = 0; b < bsz; ++b) xh(b, j) = (z(b, j) - mu) * istd[j];
                    if (update_running) {
                        state.bn_running_mean[l][j] =
                            (1.0 - kBnMomentum) * state.bn_running_mean[l][j] + kBnMomentum * mu;
                        state.bn_running_var[l][j] =
                            (1.0 - kBnMomentum) * state.bn_running_var[l][j] + kBnMomentum * var;
                    }
                }
            } else {
                for (std::size_t j = 0; j < dim; ++j) {
                    istd[j] = 1.0 / std::sqrt(state.bn_running_var[l][j] + kBnEps);
                    for (std::size_t b = 0; b < bsz; ++b)
                        xh(b, j) = (z(b, j) - state.bn_running_mean[l][j]) * istd[j];
                }
            }
            c.xhat[l] = xh;
            for (std::size_t b = 0; b < bsz; ++b)
                for (std::size_t j = 0; j < dim; ++j)
                    z(b, j) = state.bn_gamma[l][j] * xh(b, j) + state.bn_beta[l][j];
        }

        if (is_hidden)
            for (double& v : z.data) v = v > 0.0 ? v : 0.0;  // ReLU
        c.act.push_back(z);
        cur = std::move(z);
    }
    c.logits = cur;
    return cur;
}

Gradients zero_gradients(const ModelState& state) {
    Gradients g;
    g.w.reserve(state.weights.size());
    for (const auto& w : state.weights) g.w.emplace_back(w.rows, w.cols);
    for (const auto& b : state.biases) g.b.emplace_back(b.size(), 0.0);
    for (const auto& v : state.bn_gamma) g.gamma.emplace_back(v.size(), 0.0);
    for (const auto& v : state.bn_beta) g.beta.emplace_back(v.size(), 0.0);
    return g;
}

namespace {

double softmax_xent(const DenseMatrix& logits, std::span<const int> labels, DenseMatrix* dlogits) {
    const std::size_t bsz = logits.rows;
    const std::size_t k = logits.cols;
    if (dlogits) *dlogits = DenseMatrix(bsz, k);
    double loss = 0.0;
    for (std::size_t b = 0; b < bsz; ++b) {
        const auto row = logits.row(b);
        const double mx = *std::max_element(row.begin(), row.end());
        double z = 0.0;
        for (std::size_t j = 0; j < k; ++j) z += std::exp(row[j] - mx);
        const double logz = std::log(z) + mx;
        const int y = labels[b];
        loss += logz - row[static_cast<std::size_t>(y)];
        if (dlogits) {
            for (std::size_t j = 0; j < k; ++j)
                (*dlogits)(b, j) = std::exp(row[j] - logz) / static_cast<double>(bsz);
            (*dlogits)(b, static_cast<std::size_t>(y)) -= 1.0 / static_cast<double>(bsz);
        }
    }
    return loss / static_cast<double>(bsz);
}

double mse(const DenseMatrix& out, const DenseMatrix& targets, DenseMatrix* dout) {
    require(out.same_shape(targets), Errc::ShapeMismatch, "regression target shape mismatch");
    const double inv = 1.0 / static_cast<double>(out.rows);
    if (dout) *dout = DenseMatrix(out.rows, out.cols);
    double loss = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double r = out.data[i] - targets.data[i];
        loss += 0.5 * r * r;
        if (dout) dout->data[i] = r * inv;
    }
    return loss * inv;
}

}  // namespace

double loss_and_gradients(ModelState& state, const Mask& mask, const DenseMatrix& batch,
                          std::span<const int> labels, const DenseMatrix* reg_targets,
                          Gradients& grads, bool update_running) {
    const MLPSpec& spec = state.spec;
    for (auto& m : grads.w) m.fill(0.0);
    for (auto& v : grads.b) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : grads.gamma) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : grads.beta) std::fill(v.begin(), v.end(), 0.0);

    ForwardCache c;
    forward(state, mask, batch, RunMode::Train, &c, update_running);

    DenseMatrix delta;  // dL/d(current layer output)
    double loss;
    if (!labels.empty())
        loss = softmax_xent(c.logits, labels, &delta);
    else
        loss = mse(c.logits, *reg_targets, &delta);

    for (std::size_t li = spec.layers(); li-- > 0;) {
        const bool is_hidden = li + 1 < spec.layers();
        const DenseMatrix& input = c.act[li];
        DenseMatrix dz = std::move(delta);

        if (is_hidden) {
            // ReLU gate on the post-BN (or linear) pre-activation
            const DenseMatrix& pre = (spec.batchnorm[li]) ? c.act[li + 1] : c.lin[li];
            // act[li+1] is post-ReLU; gate by positivity of the activation itself
            for (std::size_t i = 0; i < dz.data.size(); ++i)
                if (!(pre.data[i] > 0.0)) dz.data[i] = 0.0;
        }

        if (is_hidden && spec.batchnorm[li]) {
            const std::size_t dim = dz.cols;
            const std::size_t bsz = dz.rows;
            const DenseMatrix& xh = c.xhat[li];
            DenseMatrix dlin(bsz, dim);
            for (std::size_t j = 0; j < dim; ++j) {
                double sum_dy = 0.0, sum_dy_xh = 0.0;
                for (std::size_t b = 0; b < bsz; ++b) {
                    const double dy = dz(b, j);
                    sum_dy += dy;
                    sum_dy_xh += dy * xh(b, j);
                }
                grads.beta[li][j] += sum_dy;
                grads.gamma[li][j] += sum_dy_xh;
                const double g = state.bn_gamma[li][j];
                const double istd = c.inv_std[li][j];
                const double mean_dy = sum_dy / static_cast<double>(bsz);
                const double mean_dy_xh = sum_dy_xh / static_cast<double>(bsz);
                for (std::size_t b = 0; b < bsz; ++b)
                    dlin(b, j) = g * istd * (dz(b, j) - mean_dy - xh(b, j) * mean_dy_xh);
            }
            dz = std::move(dlin);
        }

        // dW = dz^T . input, db = column sums, delta = dz . W
        DenseMatrix& dw = grads.w[li];
        for (std::size_t b = 0; b < dz.rows; ++b) {
            const auto xb = input.row(b);
            const auto dzb = dz.row(b);
            for (std::size_t o = 0; o < dz.cols; ++o) {
                if (dzb[o] != 0.0) axpy(dzb[o], xb, dw.row(o));
                grads.b[li][o] += dzb[o];
            }
        }
        for (std::size_t i = 0; i < dw.data.size(); ++i)
            if (!mask.keep[li][i]) dw.data[i] = 0.0;

        if (li > 0) {
            delta = DenseMatrix(dz.rows, spec.widths[li]);
            const DenseMatrix& wm = c.wmask[li];
            for (std::size_t b = 0; b < dz.rows; ++b) {
                auto out_row = delta.row(b);
                const auto dzb = dz.row(b);
                for (std::size_t o = 0; o < dz.cols; ++o)
                    if (dzb[o] != 0.0) axpy(dzb[o], wm.row(o), out_row);
            }
        }
    }
    return loss;
}

double batch_loss(ModelState& state, const Mask& mask, const DenseMatrix& batch,
                  std::span<const int> labels, const DenseMatrix* reg_targets, RunMode mode) {
    const DenseMatrix out = forward(state, mask, batch, mode, nullptr, false);
    if (!labels.empty()) return softmax_xent(out, labels, nullptr);
    return mse(out, *reg_targets, nullptr);
}

namespace {

DenseMatrix gather_rows(const DenseMatrix& src, std::span<const std::size_t> idx) {
    DenseMatrix out(idx.size(), src.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto r = src.row(idx[i]);
        std::copy(r.begin(), r.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace

double sgd_epoch(ModelState& state, const Mask& mask, const TaskData& data, double lr,
                 double momentum, double weight_decay, std::size_t batch_size, Rng& rng) {
    require(lr > 0.0, Errc::ConfigError, "sgd_epoch needs lr > 0");
    require(batch_size >= 1, Errc::ConfigError, "sgd_epoch needs batch_size >= 1");
    const std::size_t n = data.n();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    double loss_sum = 0.0;
    Gradients grads = zero_gradients(state);
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t count = std::min(batch_size, n - start);
        const std::span<const std::size_t> idx(order.data() + start, count);
        const DenseMatrix batch = gather_rows(data.inputs, idx);

        std::vector<int> labels;
        DenseMatrix targets;
        if (data.classification()) {
            labels.resize(count);
            for (std::size_t i = 0; i < count; ++i) labels[i] = data.labels[idx[i]];
        } else {
            targets = gather_rows(data.targets, idx);
        }

        const double loss =
            loss_and_gradients(state, mask, batch, labels,
                               data.classification() ? nullptr : &targets, grads, true);
        require(std::isfinite(loss), Errc::NonFiniteLoss, "training loss diverged");
        loss_sum += loss * static_cast<double>(count);

        for (std::size_t l = 0; l < state.weights.size(); ++l) {
            auto& w = state.weights[l].data;
            auto& v = state.vel_w[l].data;
            const auto& gw = grads.w[l].data;
            const auto& keep = mask.keep[l];
            for (std::size_t i = 0; i < w.size(); ++i) {
                if (!keep[i]) {
                    w[i] = 0.0;
                    v[i] = 0.0;  // momentum of pruned entries stays zero
                    continue;
                }
                const double g = gw[i] + weight_decay * w[i];
                v[i] = momentum * v[i] + g;
                w[i] -= lr * v[i];
            }
            auto& b = state.biases[l];
            auto& vb = state.vel_b[l];
            for (std::size_t i = 0; i < b.size(); ++i) {
                vb[i] = momentum * vb[i] + grads.b[l][i];
                b[i] -= lr * vb[i];
            }
        }
        for (std::size_t h = 0; h < state.bn_gamma.size(); ++h) {
            if (state.bn_gamma[h].empty()) continue;
            auto& g = state.bn_gamma[h];
            auto& bt = state.bn_beta[h];
            for (std::size_t i = 0; i < g.size(); ++i) {
                state.vel_gamma[h][i] = momentum * state.vel_gamma[h][i] + grads.gamma[h][i];
                g[i] -= lr * state.vel_gamma[h][i];
                state.vel_beta[h][i] = momentum * state.vel_beta[h][i] + grads.beta[h][i];
                bt[i] -= lr * state.vel_beta[h][i];
            }
        }
    }
    return loss_sum / static_cast<double>(n);
}

double accuracy(ModelState& state, const Mask& mask, const TaskData& data, std::size_t batch_size) {
    require(data.classification(), Errc::ConfigError, "accuracy needs labelled data");
    const std::size_t n = data.n();
    std::size_t correct = 0;
    std::vector<std::size_t> idx(batch_size);
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t count = std::min(batch_size, n - start);
        idx.resize(count);
        std::iota(idx.begin(), idx.end(), start);
        const DenseMatrix batch = gather_rows(data.inputs, idx);
        const DenseMatrix out = forward(state, mask, batch, RunMode::Eval);
        for (std::size_t b = 0; b < count; ++b) {
            const auto row = out.row(b);
            const auto arg = std::distance(
                row.begin(), std::max_element(row.begin(), row.end()));
            if (arg == data.labels[start + b]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

double dataset_loss(ModelState& state, const Mask& mask, const TaskData& data, RunMode mode,
                    std::size_t batch_size) {
    const std::size_t n = data.n();
    double sum = 0.0;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t count = std::min(batch_size, n - start);
        idx.resize(count);
        std::iota(idx.begin(), idx.end(), start);
        const DenseMatrix batch = gather_rows(data.inputs, idx);
        std::vector<int> labels;
        DenseMatrix targets;
        if (data.classification()) {
            labels.assign(data.labels.begin() + static_cast<std::ptrdiff_t>(start),
                          data.labels.begin() + static_cast<std::ptrdiff_t>(start + count));
        } else {
            targets = gather_rows(data.targets, idx);
        }
        sum += batch_loss(state, mask, batch, labels,
                          data.classification() ? nullptr : &targets, mode) *
               static_cast<double>(count);
    }
    return sum / static_cast<double>(n);
}

// ---- checkpoint io ---------------------------------------------------------

namespace {

void put_vec(std::ostream& os, const std::vector<double>& v) {
    put_u64(os, v.size());
    put_f64_span(os, v);
}

std::vector<double> get_vec(std::istream& is) {
    const std::size_t n = get_u64(is);
    std::vector<double> v;
    get_f64_vec(is, v, n);
    return v;
}

void put_mat(std::ostream& os, const DenseMatrix& m) {
    put_u64(os, m.rows);
    put_u64(os, m.cols);
    put_f64_span(os, m.data);
}

DenseMatrix get_mat(std::istream& is) {
    DenseMatrix m;
    m.rows = get_u64(is);
    m.cols = get_u64(is);
    get_f64_vec(is, m.data, m.rows * m.cols);
    return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelState& state, const Mask& mask,
                     const Rng::Snapshot& rng) {
    atomic_write_file(path, [&](std::ostream& os) {
        put_u32(os, kCheckpointMagic);
        put_u32(os, kCheckpointVersion);
        put_u64(os, state.spec.widths.size());
        for (std::size_t w : state.spec.widths) put_u64(os, w);
        put_u64(os, state.spec.batchnorm.size());
        put_bytes(os, state.spec.batchnorm);
        put_u32(os, static_cast<std::uint32_t>(state.spec.activation));
        put_u32(os, static_cast<std::uint32_t>(state.spec.init));

        for (const auto& w : state.weights) put_mat(os, w);
        for (const auto& b : state.biases) put_vec(os, b);
        for (std::size_t h = 0; h < state.spec.hidden(); ++h) {
            put_vec(os, state.bn_gamma[h]);
            put_vec(os, state.bn_beta[h]);
            put_vec(os, state.bn_running_mean[h]);
            put_vec(os, state.bn_running_var[h]);
        }
        for (const auto& w : state.vel_w) put_mat(os, w);
        for (const auto& b : state.vel_b) put_vec(os, b);
        for (std::size_t h = 0; h < state.spec.hidden(); ++h) {
            put_vec(os, state.vel_gamma[h]);
            put_vec(os, state.vel_beta[h]);
        }

        put_u64(os, mask.keep.size());
        for (const auto& k : mask.keep) {
            put_u64(os, k.size());
            put_bytes(os, k);
        }

        for (int i = 0; i < 4; ++i) put_u64(os, rng.state[i]);
        put_u64(os, rng.seed);
        put_u64(os, rng.draws);
    });
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), Errc::MissingCheckpoint, "cannot open checkpoint " + path);
    require(get_u32(is) == kCheckpointMagic, Errc::BadMagic, "not a checkpoint file: " + path);
    const std::uint32_t version = get_u32(is);
    require(version == kCheckpointVersion, Errc::BadMagic,
            "unsupported checkpoint version " + std::to_string(version));

    Checkpoint ck;
    MLPSpec spec;
    const std::size_t nw = get_u64(is);
    spec.widths.resize(nw);
    for (auto& w : spec.widths) w = get_u64(is);
    const std::size_t nf = get_u64(is);
    get_bytes(is, spec.batchnorm, nf);
    spec.activation = static_cast<Activation>(get_u32(is));
    spec.init = static_cast<InitScheme>(get_u32(is));
    spec.validate();

    ModelState& st = ck.state;
    st.spec = spec;
    st.weights.resize(spec.layers());
    st.biases.resize(spec.layers());
    for (auto& w : st.weights) w = get_mat(is);
    for (auto& b : st.biases) b = get_vec(is);
    st.bn_gamma.resize(spec.hidden());
    st.bn_beta.resize(spec.hidden());
    st.bn_running_mean.resize(spec.hidden());
    st.bn_running_var.resize(spec.hidden());
    for (std::size_t h = 0; h < spec.hidden(); ++h) {
        st.bn_gamma[h] = get_vec(is);
        st.bn_beta[h] = get_vec(is);
        st.bn_running_mean[h] = get_vec(is);
        st.bn_running_var[h] = get_vec(is);
    }
    st.vel_w.resize(spec.layers());
    st.vel_b.resize(spec.layers());
    for (auto& w : st.vel_w) w = get_mat(is);
    for (auto& b : st.vel_b) b = get_vec(is);
    st.vel_gamma.resize(spec.hidden());
    st.vel_beta.resize(spec.hidden());
    for (std::size_t h = 0; h < spec.hidden(); ++h) {
        st.vel_gamma[h] = get_vec(is);
        st.vel_beta[h] = get_vec(is);
    }

    const std::size_t tensors = get_u64(is);
    ck.mask.keep.resize(tensors);
    for (auto& k : ck.mask.keep) {
        const std::size_t len = get_u64(is);
        get_bytes(is, k, len);
    }
    ck.mask.recount();

    for (int i = 0; i < 4; ++i) ck.rng.state[i] = get_u64(is);
    ck.rng.seed = get_u64(is);
    ck.rng.draws = get_u64(is);
    require(is.good(), Errc::TruncatedFile, "checkpoint truncated: " + path);
    return ck;
}

}  // namespace sparselab
