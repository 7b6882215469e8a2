#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "motionfield/scheduler.hpp"

using namespace motionfield;

namespace {

Latents random_latents(std::mt19937& rng, int frames, int dim) {
    std::normal_distribution<double> d;
    Latents x(static_cast<std::size_t>(frames), std::vector<double>(static_cast<std::size_t>(dim)));
    for (auto& f : x) {
        for (double& v : f) v = d(rng);
    }
    return x;
}

// Nonlinear but deterministic: depends on the whole window and the step.
Latents mixing_denoiser(const Latents& w, int step, const std::vector<double>& c) {
    double mean = 0;
    for (const auto& f : w) mean += f[0];
    mean /= static_cast<double>(w.size());
    Latents out = w;
    for (std::size_t k = 0; k < w.size(); ++k) {
        for (std::size_t i = 0; i < w[k].size(); ++i) out[k][i] = std::tanh(w[k][i] + mean) * (1 + step) + c[i % c.size()];
    }
    return out;
}

}  // namespace

TEST(Schedule, WindowsForReferenceLengths) {
    EXPECT_EQ(build_schedule(14).groups, (std::vector<FrameWindow>{{0, 14}}));
    EXPECT_EQ(build_schedule(21).groups, (std::vector<FrameWindow>{{0, 14}, {7, 14}}));
    EXPECT_EQ(build_schedule(25).groups, (std::vector<FrameWindow>{{0, 14}, {7, 14}, {11, 14}}));
    const auto s = build_schedule(100);
    EXPECT_EQ(s.groups.size(), 14u);
    EXPECT_EQ(s.groups.front(), (FrameWindow{0, 14}));
    EXPECT_EQ(s.groups.back(), (FrameWindow{86, 14}));
}

TEST(Schedule, EveryFrameCoveredAndWeightsSumToOne) {
    for (int total : {14, 21, 25, 100}) {
        const auto s = build_schedule(total);
        const auto w = frame_weights(s);
        for (int f = 0; f < total; ++f) {
            EXPECT_GE(s.multiplicity(f), 1);
            double sum = 0;
            for (double v : w[static_cast<std::size_t>(f)]) sum += v;
            EXPECT_EQ(sum, 1.0) << "L=" << total << " frame " << f;
        }
    }
}

TEST(Schedule, MultiplicityMatchesBruteForce) {
    const auto s = build_schedule(25);
    for (int f = 0; f < 25; ++f) {
        const int want = f < 7 ? 1 : f < 11 ? 2 : f < 14 ? 3 : f < 21 ? 2 : 1;
        EXPECT_EQ(s.multiplicity(f), want) << f;
    }
}

TEST(Schedule, Errors) {
    EXPECT_THROW(build_schedule(13), Error);
    EXPECT_THROW(build_schedule(20, 14, 0), Error);
    EXPECT_THROW(build_schedule(20, 14, 15), Error);
}

TEST(Blend, SingleWindowIsBitExact) {
    std::mt19937 rng(1);
    const auto x = random_latents(rng, 14, 4);
    const std::vector<double> c = {0.3, -0.1};
    const auto out = blend_predictions(build_schedule(14), x, 3, mixing_denoiser, c);
    EXPECT_EQ(out, mixing_denoiser(x, 3, c));
}

TEST(Blend, TwoGroupConstantsAverageInOverlap) {
    const auto s = build_schedule(21);
    int calls = 0;
    const Denoiser d = [&](const Latents& w, int, const std::vector<double>&) {
        return Latents(w.size(), std::vector<double>(1, calls++ == 0 ? 0.0 : 2.0));
    };
    const auto out = blend_predictions(s, Latents(21, std::vector<double>(1)), 0, d, {});
    for (int f = 0; f < 21; ++f) {
        const double want = f < 7 ? 0.0 : f < 14 ? 1.0 : 2.0;
        EXPECT_EQ(out[static_cast<std::size_t>(f)][0], want) << f;
    }
}

TEST(Blend, IdentityDenoiserReturnsInput) {
    std::mt19937 rng(2);
    for (int total : {14, 21, 25, 100}) {
        const auto x = random_latents(rng, total, 3);
        const Denoiser id = [](const Latents& w, int, const std::vector<double>&) { return w; };
        const auto out = blend_predictions(build_schedule(total), x, 0, id, {});
        for (std::size_t f = 0; f < x.size(); ++f) {
            for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(out[f][i], x[f][i], 1e-15);
        }
    }
}

TEST(Blend, MatchesWeightedSumOracle) {
    std::mt19937 rng(3);
    const auto s = build_schedule(25);
    const auto x = random_latents(rng, 25, 2);
    const std::vector<double> c = {1.0};
    const auto w = frame_weights(s);
    Latents want(25, std::vector<double>(2, 0.0));
    for (std::size_t g = 0; g < s.groups.size(); ++g) {
        const auto win = s.groups[g];
        const auto pred = mixing_denoiser(Latents(x.begin() + win.start, x.begin() + win.end()), 1, c);
        for (int k = 0; k < win.length; ++k) {
            const auto f = static_cast<std::size_t>(win.start + k);
            for (std::size_t i = 0; i < 2; ++i) want[f][i] += w[f][g] * pred[static_cast<std::size_t>(k)][i];
        }
    }
    const auto out = blend_predictions(s, x, 1, mixing_denoiser, c);
    for (std::size_t f = 0; f < 25; ++f) {
        for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(out[f][i], want[f][i], 1e-12);
    }
}

TEST(Blend, GroupOrderDoesNotMatter) {
    std::mt19937 rng(4);
    const auto s = build_schedule(100);
    const auto x = random_latents(rng, 100, 2);
    const std::vector<double> c = {0.5};
    const auto base = blend_predictions(s, x, 2, mixing_denoiser, c);
    std::vector<std::size_t> order(s.groups.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(order.begin(), order.end(), rng);
        const auto out = blend_predictions(s, x, 2, mixing_denoiser, c, order);
        for (std::size_t f = 0; f < 100; ++f) {
            for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(out[f][i], base[f][i], 1e-12);
        }
    }
}

TEST(Blend, ContractViolations) {
    const auto s = build_schedule(14);
    const Latents x(14, std::vector<double>(2));
    EXPECT_THROW(blend_predictions(s, Latents(13, std::vector<double>(2)), 0, mixing_denoiser, {1.0}), Error);
    const Denoiser shorter = [](const Latents& w, int, const std::vector<double>&) { return Latents(w.begin() + 1, w.end()); };
    const Denoiser narrower = [](const Latents& w, int, const std::vector<double>&) { return Latents(w.size(), std::vector<double>(1)); };
    try {
        blend_predictions(s, x, 0, shorter, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::contract);
    }
    EXPECT_THROW(blend_predictions(s, x, 0, narrower, {}), Error);
    const std::vector<std::size_t> bad = {0, 1};
    EXPECT_THROW(blend_predictions(s, x, 0, mixing_denoiser, {1.0}, bad), Error);
}

TEST(ToyDdpm, DeterministicAndMatchesManualLoop) {
    std::mt19937 rng(5);
    const auto s = build_schedule(21);
    const auto x0 = random_latents(rng, 21, 3);
    const ToyDdpm ddpm(6);
    const std::vector<double> c = {0.1, 0.2, 0.3};
    const auto a = ddpm.sample(s, x0, mixing_denoiser, c);
    EXPECT_EQ(a, ddpm.sample(s, x0, mixing_denoiser, c));
    auto x = x0;
    for (int t = 5; t >= 0; --t) x = ddpm.update(x, blend_predictions(s, x, t, mixing_denoiser, c), t);
    EXPECT_EQ(a, x);
    EXPECT_THROW(ToyDdpm(0), Error);
}

TEST(ToyDdpm, ZeroNoisePredictionOnlyRescales) {
    const ToyDdpm ddpm(1, 0.19);
    const Latents x = {{2.0}};
    const auto out = ddpm.update(x, {{0.0}}, 0);
    EXPECT_NEAR(out[0][0], 2.0 / 0.9, 1e-15);
}
