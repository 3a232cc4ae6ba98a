#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "sparselab/prune.hpp"

using namespace sparselab;

TEST_SUITE_BEGIN("prune");

namespace {

MLPSpec make_spec(std::vector<std::size_t> widths) {
    MLPSpec spec;
    spec.widths = std::move(widths);
    spec.batchnorm.assign(spec.hidden(), 0);
    return spec;
}

ModelState random_state(const MLPSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return init_model(spec, rng);
}

}  // namespace

TEST_CASE("prune_step: keep fraction 0.8 of 10 kept weights keeps 8") {
    const auto spec = make_spec({5, 2, 1});  // 10 + 2 weights
    ModelState st = random_state(spec, 1);
    Mask mask = full_mask(spec);
    // restrict attention to the first tensor by pruning the second up-front
    mask.keep[1] = {0, 0};
    mask.recount();
    Rng rng(2);
    const Mask next = prune_step(st, mask, PruneCriterion::MagnitudeGlobal, 0.8, rng);
    CHECK(next.kept_counts[0] == 8);
    CHECK(next.kept_counts[1] == 0);
}

TEST_CASE("prune_step: geometric schedule reaches 0.8^L within rounding") {
    const auto spec = make_spec({40, 25, 10});  // 1000 + 250 weights
    ModelState st = random_state(spec, 3);
    Mask mask = full_mask(spec);
    Rng rng(4);
    const std::int64_t total = mask.total();
    for (int level = 1; level <= 10; ++level) {
        mask = prune_step(st, mask, PruneCriterion::MagnitudeGlobal, 0.8, rng);
        apply_mask(st, mask);
    }
    const double expected = std::pow(0.8, 10) * static_cast<double>(total);
    CHECK(std::abs(static_cast<double>(mask.kept_total()) - expected) < 8.0);  // ceil slack
    CHECK(mask.sparsity() == doctest::Approx(1.0 - static_cast<double>(mask.kept_total()) /
                                                       static_cast<double>(total)));
}

TEST_CASE("prune_step: random-balanced keeps exactly 8 per layer on [4,4,4] at 0.5") {
    const auto spec = make_spec({4, 4, 4});  // two 16-weight tensors
    ModelState st = random_state(spec, 5);
    const Mask mask = full_mask(spec);
    Rng rng(6);
    const Mask next = prune_step(st, mask, PruneCriterion::RandomBalanced, 0.5, rng);
    CHECK(next.kept_counts[0] == 8);
    CHECK(next.kept_counts[1] == 8);
}

TEST_CASE("prune_step: random-balanced per-layer counts differ by at most 1") {
    const auto spec = make_spec({12, 12, 12, 12});
    ModelState st = random_state(spec, 7);
    Mask mask = full_mask(spec);
    Rng rng(8);
    for (int level = 0; level < 6; ++level) {
        mask = prune_step(st, mask, PruneCriterion::RandomBalanced, 0.7, rng);
        const auto [mn, mx] = std::minmax_element(mask.kept_counts.begin(), mask.kept_counts.end());
        CHECK(*mx - *mn <= 1);
    }
}

TEST_CASE("prune_step: masks are monotone for every criterion") {
    const auto spec = make_spec({8, 8, 8});
    TaskData probe;
    {
        Rng prng(99);
        probe.inputs = DenseMatrix(16, 8);
        for (double& v : probe.inputs.data) v = prng.gaussian(0.0, 1.0);
        probe.labels.resize(16);
        for (auto& l : probe.labels) l = static_cast<int>(prng.below(8));
    }
    for (PruneCriterion crit :
         {PruneCriterion::MagnitudeGlobal, PruneCriterion::MagnitudeLayerwise,
          PruneCriterion::RandomBalanced, PruneCriterion::Snip, PruneCriterion::Synflow}) {
        ModelState st = random_state(spec, 9);
        Mask mask = full_mask(spec);
        Rng rng(10);
        for (int level = 0; level < 4; ++level) {
            const Mask next = prune_step(st, mask, crit, 0.7, rng, &probe);
            CHECK(next.subset_of(mask));
            CHECK(next.kept_total() < mask.kept_total());
            mask = next;
            apply_mask(st, mask);
        }
    }
}

TEST_CASE("magnitude criterion equals brute-force top-k on a 6-weight net") {
    const auto spec = make_spec({2, 2, 1});  // 4 + 2 weights
    ModelState st = random_state(spec, 11);
    Mask mask = full_mask(spec);
    Rng rng(12);
    // stop at 2: ceil(0.6 * 2) = 2 keeps both survivors
    while (mask.kept_total() > 2) {
        const auto target = static_cast<std::size_t>(
            std::ceil(0.6 * static_cast<double>(mask.kept_total()) - 1e-9));
        // brute force: collect |w| of kept entries, take the k largest
        std::vector<double> mags;
        for (std::size_t l = 0; l < mask.tensors(); ++l)
            for (std::size_t i = 0; i < mask.keep[l].size(); ++i)
                if (mask.keep[l][i]) mags.push_back(std::abs(st.weights[l].data[i]));
        std::sort(mags.begin(), mags.end(), std::greater<>());
        const double kth = mags[target - 1];

        const Mask next = prune_step(st, mask, PruneCriterion::MagnitudeGlobal, 0.6, rng);
        for (std::size_t l = 0; l < mask.tensors(); ++l)
            for (std::size_t i = 0; i < mask.keep[l].size(); ++i)
                if (mask.keep[l][i]) {
                    const bool kept = next.keep[l][i] != 0;
                    const bool should = std::abs(st.weights[l].data[i]) >= kth;
                    CHECK(kept == should);
                }
        mask = next;
        apply_mask(st, mask);
    }
}

TEST_CASE("synflow scores equal hand-enumerated path products on a 2x2 net") {
    const auto spec = make_spec({2, 2, 2});
    ModelState st = random_state(spec, 13);
    st.weights[0](0, 0) = 1.0;
    st.weights[0](0, 1) = 2.0;
    st.weights[0](1, 0) = 3.0;
    st.weights[0](1, 1) = 4.0;
    st.weights[1](0, 0) = 5.0;
    st.weights[1](0, 1) = 6.0;
    st.weights[1](1, 0) = 7.0;
    st.weights[1](1, 1) = 8.0;
    st.biases[0] = {0.0, 0.0};
    st.biases[1] = {0.0, 0.0};
    const Mask mask = full_mask(spec);
    const auto scores = criterion_scores(st, mask, PruneCriterion::Synflow, nullptr);
    // layer 0: |w1_ji| * sum_k |w2_kj| (all paths through the edge, ones input)
    CHECK(scores[0][0] == doctest::Approx(12.0));  // 1*(5+7)
    CHECK(scores[0][1] == doctest::Approx(24.0));  // 2*(5+7)
    CHECK(scores[0][2] == doctest::Approx(42.0));  // 3*(6+8)
    CHECK(scores[0][3] == doctest::Approx(56.0));  // 4*(6+8)
    // layer 1: |w2_kj| * (sum_i |w1_ji|)
    CHECK(scores[1][0] == doctest::Approx(15.0));  // 5*(1+2)
    CHECK(scores[1][1] == doctest::Approx(42.0));  // 6*(3+4)
    CHECK(scores[1][2] == doctest::Approx(21.0));  // 7*(1+2)
    CHECK(scores[1][3] == doctest::Approx(56.0));  // 8*(3+4)
}

TEST_CASE("magnitude score of -3 is 3; snip score with a zero gradient is 0") {
    const auto spec = make_spec({2, 2, 2});
    ModelState st = random_state(spec, 14);
    st.weights[0](0, 0) = -3.0;
    const Mask mask = full_mask(spec);
    const auto mag = criterion_scores(st, mask, PruneCriterion::MagnitudeGlobal, nullptr);
    CHECK(mag[0][0] == 3.0);

    // an input feature that is zero on the whole probe batch receives zero
    // first-layer gradient, so its snip saliency vanishes
    TaskData probe;
    probe.inputs = DenseMatrix(8, 2);
    Rng rng(15);
    for (std::size_t i = 0; i < 8; ++i) {
        probe.inputs(i, 0) = rng.gaussian(0.0, 1.0);
        probe.inputs(i, 1) = 0.0;
    }
    probe.labels.assign(8, 0);
    const auto snip = criterion_scores(st, mask, PruneCriterion::Snip, &probe);
    CHECK(snip[0][0 * 2 + 1] == 0.0);
    CHECK(snip[0][1 * 2 + 1] == 0.0);
}

TEST_CASE("rewind: Weights policy restores the checkpoint on unpruned entries") {
    const auto spec = make_spec({4, 6, 2});
    ModelState ck = random_state(spec, 16);
    ModelState cur = random_state(spec, 17);
    Mask mask = full_mask(spec);
    mask.keep[0][5] = 0;
    mask.recount();
    const ModelState out = rewind(cur, ck, RewindPolicy::Weights, mask);
    for (std::size_t l = 0; l < out.weights.size(); ++l)
        for (std::size_t i = 0; i < out.weights[l].data.size(); ++i) {
            if (mask.keep[l][i])
                CHECK(out.weights[l].data[i] == ck.weights[l].data[i]);
            else
                CHECK(out.weights[l].data[i] == 0.0);
        }
}

TEST_CASE("rewind: magnitude-only keeps the learnt sign") {
    const auto spec = make_spec({2, 2, 2});
    ModelState ck = random_state(spec, 18);
    ModelState cur = random_state(spec, 19);
    cur.weights[0](0, 0) = -2.0;
    ck.weights[0](0, 0) = 5.0;
    cur.weights[0](0, 1) = 0.0;  // sign zero keeps the checkpoint sign
    ck.weights[0](0, 1) = -1.5;
    const Mask mask = full_mask(spec);
    const ModelState out = rewind(cur, ck, RewindPolicy::MagnitudesOnlyKeepSigns, mask);
    CHECK(out.weights[0](0, 0) == -5.0);
    CHECK(out.weights[0](0, 1) == -1.5);
}

TEST_CASE("rewind: BNOnly leaves weight tensors bit-identical") {
    const auto spec = make_spec({4, 6, 2});
    MLPSpec bn_spec = spec;
    bn_spec.batchnorm.assign(bn_spec.hidden(), 1);
    ModelState ck = random_state(bn_spec, 20);
    ModelState cur = random_state(bn_spec, 21);
    cur.bn_gamma[0][0] = 9.0;
    const Mask mask = full_mask(bn_spec);
    const ModelState out = rewind(cur, ck, RewindPolicy::BNOnly, mask);
    for (std::size_t l = 0; l < out.weights.size(); ++l)
        CHECK(out.weights[l].data == cur.weights[l].data);
    CHECK(out.bn_gamma[0] == ck.bn_gamma[0]);
}

TEST_CASE("rewind: None is the identity") {
    const auto spec = make_spec({4, 6, 2});
    ModelState ck = random_state(spec, 22);
    ModelState cur = random_state(spec, 23);
    const Mask mask = full_mask(spec);
    const ModelState out = rewind(cur, ck, RewindPolicy::None, mask);
    for (std::size_t l = 0; l < out.weights.size(); ++l)
        CHECK(out.weights[l].data == cur.weights[l].data);
}

TEST_CASE("perturb_signs: exact flip counts, magnitudes and mask preserved") {
    const auto spec = make_spec({10, 10, 10});
    ModelState st = random_state(spec, 24);
    const Mask mask = full_mask(spec);
    Rng rng(25);
    const ModelState out = perturb_signs(st, mask, 0.3, rng);
    for (std::size_t l = 0; l < st.weights.size(); ++l) {
        std::size_t flipped = 0;
        for (std::size_t i = 0; i < st.weights[l].data.size(); ++i) {
            CHECK(std::abs(out.weights[l].data[i]) == std::abs(st.weights[l].data[i]));
            if (out.weights[l].data[i] != st.weights[l].data[i]) ++flipped;
        }
        CHECK(flipped == static_cast<std::size_t>(0.3 * 100));  // floor(0.3*100) = 30
    }
}

TEST_CASE("perturb_signs: fraction 0 is the identity, fraction 1 twice is the identity") {
    const auto spec = make_spec({6, 6, 6});
    ModelState st = random_state(spec, 26);
    const Mask mask = full_mask(spec);
    Rng rng(27);
    const ModelState same = perturb_signs(st, mask, 0.0, rng);
    for (std::size_t l = 0; l < st.weights.size(); ++l)
        CHECK(same.weights[l].data == st.weights[l].data);
    Rng r1(28), r2(29);
    const ModelState twice = perturb_signs(perturb_signs(st, mask, 1.0, r1), mask, 1.0, r2);
    for (std::size_t l = 0; l < st.weights.size(); ++l)
        CHECK(twice.weights[l].data == st.weights[l].data);
}

TEST_CASE("transplant_assemble: identical sources act as the identity") {
    const auto spec = make_spec({4, 5, 3});
    ModelState st = random_state(spec, 30);
    const Mask mask = full_mask(spec);
    const ModelState out = transplant_assemble(st, mask, st);
    for (std::size_t l = 0; l < st.weights.size(); ++l)
        CHECK(out.weights[l].data == st.weights[l].data);
}

TEST_CASE("transplant_assemble: unit magnitudes with negative signs give -1 everywhere kept") {
    const auto spec = make_spec({3, 3, 3});
    ModelState init = random_state(spec, 31);
    ModelState signs = random_state(spec, 32);
    for (auto& w : init.weights)
        for (double& v : w.data) v = 1.0;
    for (auto& w : signs.weights)
        for (double& v : w.data) v = -0.7;
    Mask mask = full_mask(spec);
    mask.keep[0][0] = 0;
    mask.recount();
    const ModelState out = transplant_assemble(init, mask, signs);
    CHECK(out.weights[0].data[0] == 0.0);
    for (std::size_t l = 0; l < out.weights.size(); ++l)
        for (std::size_t i = 0; i < out.weights[l].data.size(); ++i)
            if (mask.keep[l][i]) CHECK(out.weights[l].data[i] == -1.0);
}

TEST_CASE("sparsity accounting is exact") {
    const auto spec = make_spec({10, 10, 10});
    ModelState st = random_state(spec, 33);
    Mask mask = full_mask(spec);
    Rng rng(34);
    mask = prune_step(st, mask, PruneCriterion::MagnitudeGlobal, 0.45, rng);
    const double expected =
        1.0 - static_cast<double>(mask.kept_total()) / static_cast<double>(mask.total());
    CHECK(mask.sparsity() == expected);
    std::int64_t manual = 0;
    for (const auto& k : mask.keep)
        for (auto b : k) manual += b;
    CHECK(manual == mask.kept_total());
}

TEST_CASE("mask save/load round-trips") {
    const auto spec = make_spec({7, 5, 2});
    ModelState st = random_state(spec, 35);
    Mask mask = full_mask(spec);
    Rng rng(36);
    mask = prune_step(st, mask, PruneCriterion::MagnitudeGlobal, 0.5, rng);
    const std::string path =
        (std::filesystem::temp_directory_path() / "sparselab_mask_test.bin").string();
    save_mask(path, mask);
    const Mask loaded = load_mask(path);
    CHECK(loaded.keep == mask.keep);
    CHECK(loaded.kept_counts == mask.kept_counts);
    std::filesystem::remove(path);
}

TEST_SUITE_END();
