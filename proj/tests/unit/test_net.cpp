#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "sparselab/net.hpp"
#include "sparselab/task.hpp"

using namespace sparselab;

TEST_SUITE_BEGIN("net");

namespace {

MLPSpec small_spec(std::vector<std::size_t> widths, bool bn) {
    MLPSpec spec;
    spec.widths = std::move(widths);
    spec.batchnorm.assign(spec.hidden(), bn ? 1 : 0);
    return spec;
}

TaskData random_task(std::size_t n, std::size_t dim, std::size_t classes, Rng& rng) {
    TaskData t;
    t.inputs = DenseMatrix(n, dim);
    for (double& v : t.inputs.data) v = rng.gaussian(0.0, 1.0);
    t.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.labels[i] = static_cast<int>(rng.below(classes));
    return t;
}

}  // namespace

TEST_CASE("lr_at: step-warmup values from the training recipe") {
    LRSchedule s;
    s.kind = LRKind::StepWarmup;
    s.base_lr = 0.1;
    s.warmup_epochs = 10;
    s.total_epochs = 150;
    s.step_milestones = {60, 120};
    s.step_factor = 0.1;
    CHECK(lr_at(s, 5) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(lr_at(s, 61) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(lr_at(s, 121) == doctest::Approx(0.001).epsilon(1e-12));
    CHECK(lr_at(s, 0) > 0.0);
}

TEST_CASE("lr_at: cosine ramp endpoint and monotone decay across phases") {
    LRSchedule s;
    s.kind = LRKind::CosineWarmup;
    s.base_lr = 0.1;
    s.warmup_epochs = 10;
    s.total_epochs = 100;
    CHECK(lr_at(s, 10) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(lr_at(s, 99) < lr_at(s, 10));
    for (std::size_t e = 0; e < 100; ++e) CHECK(lr_at(s, e) > 0.0);

    s.kind = LRKind::StepWarmup;
    s.step_milestones = {60};
    CHECK(lr_at(s, 99) < lr_at(s, 10));
}

TEST_CASE("forward: all-ones mask equals unmasked weights") {
    Rng rng(41);
    const auto spec = small_spec({6, 12, 4}, true);
    ModelState st = init_model(spec, rng);
    const Mask ones = full_mask(spec);
    DenseMatrix batch(5, 6);
    for (double& v : batch.data) v = rng.gaussian(0.0, 1.0);
    const auto out1 = forward(st, ones, batch, RunMode::Eval);
    const auto out2 = forward(st, ones, batch, RunMode::Eval);
    CHECK(out1.data == out2.data);
}

TEST_CASE("forward: all-zero mask with zero biases and no BN gives zero logits") {
    Rng rng(43);
    const auto spec = small_spec({4, 8, 3}, false);
    ModelState st = init_model(spec, rng);  // biases init to zero
    Mask zero = full_mask(spec);
    for (auto& k : zero.keep) std::fill(k.begin(), k.end(), std::uint8_t{0});
    zero.recount();
    DenseMatrix batch(3, 4);
    for (double& v : batch.data) v = rng.gaussian(0.0, 1.0);
    const auto out = forward(st, zero, batch, RunMode::Eval);
    for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("forward: single-neuron spec reproduces a*relu(w.x) to 1e-12") {
    Rng rng(47);
    const std::size_t d = 7;
    const auto spec = small_spec({d, 1, 1}, false);
    ModelState st = init_model(spec, rng);
    std::vector<double> w(d);
    for (auto& v : w) v = rng.gaussian(0.0, 1.0);
    const double a = rng.gaussian(0.0, 1.0);
    for (std::size_t k = 0; k < d; ++k) st.weights[0](0, k) = w[k];
    st.weights[1](0, 0) = a;
    const Mask mask = full_mask(spec);

    DenseMatrix batch(20, d);
    for (double& v : batch.data) v = rng.gaussian(0.0, 1.0);
    const auto out = forward(st, mask, batch, RunMode::Eval);
    for (std::size_t i = 0; i < batch.rows; ++i) {
        const double s = dot(batch.row(i), std::span<const double>(w));
        const double expect = a * std::max(s, 0.0);
        CHECK(std::abs(out(i, 0) - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("gradients match central finite differences on a BN net") {
    Rng rng(53);
    const auto spec = small_spec({5, 8, 6, 3}, true);
    ModelState st = init_model(spec, rng);
    const Mask mask = full_mask(spec);
    DenseMatrix batch(8, 5);
    for (double& v : batch.data) v = rng.gaussian(0.0, 1.0);
    std::vector<int> labels(8);
    for (auto& l : labels) l = static_cast<int>(rng.below(3));

    Gradients grads = zero_gradients(st);
    loss_and_gradients(st, mask, batch, labels, nullptr, grads, false);

    const double h = 1e-5;
    auto fd = [&](double* param) {
        const double save = *param;
        *param = save + h;
        const double lp = batch_loss(st, mask, batch, labels, nullptr, RunMode::Train);
        *param = save - h;
        const double lm = batch_loss(st, mask, batch, labels, nullptr, RunMode::Train);
        *param = save;
        return (lp - lm) / (2.0 * h);
    };
    auto close = [](double ad, double numeric) {
        return std::abs(ad - numeric) <= 1e-4 * std::max(1.0, std::abs(numeric));
    };

    for (std::size_t l = 0; l < st.weights.size(); ++l)
        for (std::size_t i = 0; i < st.weights[l].data.size(); ++i)
            CHECK(close(grads.w[l].data[i], fd(&st.weights[l].data[i])));
    for (std::size_t l = 0; l < st.biases.size(); ++l)
        for (std::size_t i = 0; i < st.biases[l].size(); ++i)
            CHECK(close(grads.b[l][i], fd(&st.biases[l][i])));
    for (std::size_t hl = 0; hl < st.bn_gamma.size(); ++hl) {
        for (std::size_t i = 0; i < st.bn_gamma[hl].size(); ++i)
            CHECK(close(grads.gamma[hl][i], fd(&st.bn_gamma[hl][i])));
        for (std::size_t i = 0; i < st.bn_beta[hl].size(); ++i)
            CHECK(close(grads.beta[hl][i], fd(&st.bn_beta[hl][i])));
    }
}

TEST_CASE("masking an already-zero weight leaves other gradients bit-identical") {
    Rng rng(59);
    const auto spec = small_spec({4, 6, 2}, false);
    ModelState st = init_model(spec, rng);
    st.weights[0](2, 1) = 0.0;
    Mask m1 = full_mask(spec);
    Mask m2 = m1;
    m2.keep[0][2 * 4 + 1] = 0;
    m2.recount();

    DenseMatrix batch(6, 4);
    for (double& v : batch.data) v = rng.gaussian(0.0, 1.0);
    std::vector<int> labels(6);
    for (auto& l : labels) l = static_cast<int>(rng.below(2));

    Gradients g1 = zero_gradients(st), g2 = zero_gradients(st);
    loss_and_gradients(st, m1, batch, labels, nullptr, g1, false);
    loss_and_gradients(st, m2, batch, labels, nullptr, g2, false);

    for (std::size_t l = 0; l < g1.w.size(); ++l)
        for (std::size_t i = 0; i < g1.w[l].data.size(); ++i) {
            if (l == 0 && i == 2 * 4 + 1)
                CHECK(g2.w[l].data[i] == 0.0);
            else
                CHECK(g1.w[l].data[i] == g2.w[l].data[i]);
        }
}

TEST_CASE("pruned entries stay exactly zero through 100 epochs") {
    Rng rng(61);
    const auto spec = small_spec({6, 10, 4}, true);
    ModelState st = init_model(spec, rng);
    Mask mask = full_mask(spec);
    for (std::size_t i = 0; i < mask.keep[0].size(); i += 3) mask.keep[0][i] = 0;
    for (std::size_t i = 0; i < mask.keep[1].size(); i += 2) mask.keep[1][i] = 0;
    mask.recount();
    for (std::size_t l = 0; l < st.weights.size(); ++l)
        for (std::size_t i = 0; i < mask.keep[l].size(); ++i)
            if (!mask.keep[l][i]) st.weights[l].data[i] = 0.0;

    const TaskData task = random_task(64, 6, 4, rng);
    Rng train_rng(62);
    for (int e = 0; e < 100; ++e)
        sgd_epoch(st, mask, task, 0.05, 0.9, 1e-4, 16, train_rng);
    for (std::size_t l = 0; l < st.weights.size(); ++l)
        for (std::size_t i = 0; i < mask.keep[l].size(); ++i)
            if (!mask.keep[l][i]) {
                CHECK(st.weights[l].data[i] == 0.0);
                CHECK(st.vel_w[l].data[i] == 0.0);
            }
}

TEST_CASE("sgd learns linearly separable blobs to >= 0.99 train accuracy") {
    Rng rng(67);
    const SplitTask split = gen_synthetic_task(2, 8, 256, 64, 6.0, rng);
    const auto spec = small_spec({8, 16, 2}, false);
    ModelState st = init_model(spec, rng);
    const Mask mask = full_mask(spec);
    Rng train_rng(68);
    for (int e = 0; e < 50; ++e)
        sgd_epoch(st, mask, split.train, 0.1, 0.9, 0.0, 32, train_rng);
    CHECK(accuracy(st, mask, split.train) >= 0.99);
}

TEST_CASE("BN running statistics stabilize: successive eval outputs converge") {
    Rng rng(71);
    const auto spec = small_spec({6, 8, 3}, true);
    ModelState st = init_model(spec, rng);
    const Mask mask = full_mask(spec);
    const TaskData task = random_task(64, 6, 3, rng);
    Rng train_rng(72);
    // full-batch epochs with a vanishing lr: weights barely move, running
    // statistics converge geometrically to the batch statistics
    for (int e = 0; e < 100; ++e)
        sgd_epoch(st, mask, task, 1e-9, 0.0, 0.0, 64, train_rng);
    const auto out1 = forward(st, mask, task.inputs, RunMode::Eval);
    sgd_epoch(st, mask, task, 1e-9, 0.0, 0.0, 64, train_rng);
    const auto out2 = forward(st, mask, task.inputs, RunMode::Eval);
    double worst = 0.0;
    for (std::size_t i = 0; i < out1.data.size(); ++i)
        worst = std::max(worst, std::abs(out1.data[i] - out2.data[i]));
    CHECK(worst <= 1e-3);
}

TEST_CASE("training is bitwise deterministic for a fixed seed") {
    const auto spec = small_spec({6, 12, 4}, true);
    auto run = [&] {
        Rng rng(73);
        ModelState st = init_model(spec, rng);
        const Mask mask = full_mask(spec);
        const TaskData task = random_task(128, 6, 4, rng);
        Rng train_rng(74);
        double loss = 0.0;
        for (int e = 0; e < 5; ++e)
            loss = sgd_epoch(st, mask, task, 0.05, 0.9, 1e-4, 32, train_rng);
        return loss;
    };
    const double l1 = run();
    const double l2 = run();
    CHECK(l1 == l2);
}

TEST_CASE("sgd_epoch raises NonFiniteLoss on divergence") {
    Rng rng(79);
    const auto spec = small_spec({4, 8, 2}, false);
    ModelState st = init_model(spec, rng);
    const Mask mask = full_mask(spec);
    TaskData task = random_task(32, 4, 2, rng);
    for (double& v : task.inputs.data) v *= 1e6;
    Rng train_rng(80);
    auto diverge = [&] {
        for (int e = 0; e < 50; ++e) sgd_epoch(st, mask, task, 10.0, 0.9, 0.0, 8, train_rng);
    };
    CHECK_THROWS_AS(diverge(), Error);
}

TEST_CASE("checkpoint: save/load round-trips every field exactly") {
    Rng rng(83);
    const auto spec = small_spec({5, 9, 3}, true);
    ModelState st = init_model(spec, rng);
    Mask mask = full_mask(spec);
    mask.keep[0][3] = 0;
    mask.recount();
    st.weights[0].data[3] = 0.0;
    const TaskData task = random_task(32, 5, 3, rng);
    Rng train_rng(84);
    for (int e = 0; e < 3; ++e) sgd_epoch(st, mask, task, 0.05, 0.9, 1e-4, 8, train_rng);

    const std::string path =
        (std::filesystem::temp_directory_path() / "sparselab_ckpt_test.bin").string();
    save_checkpoint(path, st, mask, train_rng.snapshot());
    const Checkpoint ck = load_checkpoint(path);

    CHECK(ck.state.spec == st.spec);
    for (std::size_t l = 0; l < st.weights.size(); ++l) {
        CHECK(ck.state.weights[l].data == st.weights[l].data);
        CHECK(ck.state.biases[l] == st.biases[l]);
        CHECK(ck.state.vel_w[l].data == st.vel_w[l].data);
        CHECK(ck.state.vel_b[l] == st.vel_b[l]);
    }
    for (std::size_t h = 0; h < st.bn_gamma.size(); ++h) {
        CHECK(ck.state.bn_gamma[h] == st.bn_gamma[h]);
        CHECK(ck.state.bn_beta[h] == st.bn_beta[h]);
        CHECK(ck.state.bn_running_mean[h] == st.bn_running_mean[h]);
        CHECK(ck.state.bn_running_var[h] == st.bn_running_var[h]);
    }
    CHECK(ck.mask.keep == mask.keep);
    CHECK(ck.mask.kept_counts == mask.kept_counts);
    const auto snap = train_rng.snapshot();
    CHECK(ck.rng.seed == snap.seed);
    CHECK(ck.rng.draws == snap.draws);
    for (int i = 0; i < 4; ++i) CHECK(ck.rng.state[i] == snap.state[i]);
    std::filesystem::remove(path);
}

TEST_SUITE_END();
