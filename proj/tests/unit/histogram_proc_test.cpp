// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ppc/histogram_proc.hpp"

namespace ppc {
namespace {

// Direct O(N K) correlation.
std::vector<double> brute_filter(const std::vector<double>& h, const PulseKernel& k, bool circular) {
    const int n = static_cast<int>(h.size());
    std::vector<double> y(h.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int o = -k.center; o <= k.center; ++o) {
            int j = i - o;
            if (circular) j = ((j % n) + n) % n;
            else if (j < 0 || j >= n) continue;
            acc += k.taps[static_cast<std::size_t>(o + k.center)] * h[static_cast<std::size_t>(j)];
        }
        y[static_cast<std::size_t>(i)] = acc;
    }
    return y;
}

PulseKernel delta_kernel() { return PulseKernel{{1.0}, 0}; }

TEST(MatchedFilter, DeltaKernelIsIdentity) {
    const std::vector<double> h = {0, 3, 1, 0, 7, 2};
    EXPECT_EQ(matched_filter(std::span<const double>(h), delta_kernel()), h);
}

TEST(MatchedFilter, ImpulseResponseIsKernelCentred) {
    const PulseModel p;
    const PulseKernel k = pulse_kernel(p);
    for (int j : {0, 3, 500, 1023}) {
        std::vector<std::uint32_t> h(1024, 0);
        h[static_cast<std::size_t>(j)] = 1;
        const auto y = matched_filter(std::span<const std::uint32_t>(h), k);
        for (int o = -k.center; o <= k.center; ++o) {
            const int n = ((j + o) % 1024 + 1024) % 1024;
            EXPECT_NEAR(y[static_cast<std::size_t>(n)], k.taps[static_cast<std::size_t>(o + k.center)], 1e-12);
        }
        EXPECT_NEAR(std::accumulate(y.begin(), y.end(), 0.0), 1.0, 1e-9);
    }
}

TEST(MatchedFilter, AdjacentPhotonsMergeAboveSinglePhotonHeight) {
    const PulseModel p;  // fwhm about 3.6 bins
    const PulseKernel k = pulse_kernel(p);
    std::vector<double> h(1024, 0.0);
    h[400] = h[401] = 1.0;
    const auto y = matched_filter(std::span<const double>(h), k);
    const Peak peak = detect_peak(y, k.max_tap() + 1e-9);
    EXPECT_TRUE(peak.valid);
    EXPECT_TRUE(peak.bin == 400 || peak.bin == 401);
    // One merged maximum: the response rises to the peak then falls.
    for (int n = 390; n < 400; ++n) EXPECT_LE(y[static_cast<std::size_t>(n)], y[static_cast<std::size_t>(n + 1)]);
    for (int n = 401; n < 411; ++n) EXPECT_GE(y[static_cast<std::size_t>(n)], y[static_cast<std::size_t>(n + 1)]);
}

TEST(MatchedFilter, MatchesBruteForceOnRandomInputs) {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 120; ++trial) {
        const int n = std::uniform_int_distribution<int>(16, 2048)(gen);
        PulseModel p;
        p.num_bins = n;
        p.repetition_period = n * p.bin_width;
        p.fwhm = std::uniform_real_distribution<double>(50e-12, 900e-12)(gen);
        if (2 * static_cast<int>(std::floor(4.0 * p.sigma() / p.bin_width + 0.5)) + 1 > n) continue;
        const PulseKernel k = pulse_kernel(p);
        std::vector<double> h(static_cast<std::size_t>(n));
        std::poisson_distribution<int> pois(0.7);
        for (auto& v : h) v = pois(gen);
        for (bool circular : {true, false}) {
            const auto got = matched_filter(std::span<const double>(h), k,
                                            circular ? CorrelationMode::kCircular : CorrelationMode::kLinear);
            const auto want = brute_filter(h, k, circular);
            for (std::size_t i = 0; i < h.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-9);
        }
    }
}

TEST(MatchedFilter, KernelLongerThanHistogramRejected) {
    PulseKernel k{std::vector<double>(9, 1.0 / 9), 4};
    const std::vector<double> h(5, 1.0);
    EXPECT_THROW(matched_filter(std::span<const double>(h), k), ValidationError);
}

TEST(DetectPeak, UniqueMaxAndTieBreak) {
    std::vector<double> f(200, 0.1);
    f[100] = 3.0;
    EXPECT_EQ(detect_peak(f, 0.0).bin, 100);
    std::vector<double> g(12, 0.0);
    g[5] = g[9] = 2.0;
    const Peak p = detect_peak(g, 0.0);
    EXPECT_EQ(p.bin, 5);
    EXPECT_EQ(p.height, 2.0);
    EXPECT_TRUE(p.valid);
}

TEST(DetectPeak, AllZeroIsInvalid) { EXPECT_FALSE(detect_peak(std::vector<double>(64, 0.0), 0.0).valid); }

TEST(DetectPeak, IsolatedSinglePhotonsGated) {
    const PulseKernel k = pulse_kernel(PulseModel{});
    std::vector<std::uint32_t> h(1024, 0);
    h[10] = h[300] = h[800] = 1;
    const auto y = matched_filter(std::span<const std::uint32_t>(h), k);
    EXPECT_FALSE(detect_peak(y, 1.0 * k.max_tap()).valid);
}

TEST(DepthFromBin, HandArithmetic) {
    EXPECT_EQ(depth_from_bin(0, 97e-12), 0.0);
    EXPECT_NEAR(depth_from_bin(100, 97e-12), 1.4540, 1e-4);
    EXPECT_NEAR(depth_from_bin(1023, 97e-12), 14.874, 1e-3);
}

TEST(PointProbability, Anchors) {
    std::vector<double> one(32, 0.0);
    one[7] = 4.0;
    EXPECT_EQ(point_probability(one, 7), 1.0);
    EXPECT_NEAR(point_probability(std::vector<double>(1024, 0.3), 9), 1.0 / 1024, 1e-12);
    EXPECT_EQ(point_probability(std::vector<double>{2, 5, 3}, 1), 0.5);
    EXPECT_THROW(point_probability(std::vector<double>(4, 0.0), 0), DomainError);
}

TEST(PointProbability, ScaleInvariant) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<double> f(256);
    for (auto& v : f) v = u(gen);
    const double base = point_probability(f, 17);
    for (double c : {0.5, 3.0, 1000.0}) {
        auto g = f;
        for (auto& v : g) v *= c;
        EXPECT_NEAR(point_probability(g, 17), base, 1e-15);
    }
}

TEST(EstimatePixel, CleanPixelWithinOneBin) {
    const PulseModel p;
    const SensorConfig s;
    int good = 0;
    for (std::uint64_t px = 0; px < 200; ++px) {
        const double depth = 1.0 + 0.05 * static_cast<double>(px);
        // 2000 signal photons at every depth; centroid jitter is then far below a bin.
        const FluxCalibration c{2000.0 * depth * depth / s.quantum_efficiency, 1e-9};
        const auto flux = expected_flux(depth, 1.0, p, s, c);
        const auto h = simulate_histogram(flux, 9, px);
        const PixelEstimate e = estimate_pixel(h, p);
        ASSERT_TRUE(e.valid);
        if (std::abs(e.depth - depth) <= p.bin_depth()) ++good;
        EXPECT_EQ(e.depth, depth_from_bin(e.peak_bin, p.bin_width));
        EXPECT_GT(e.probability, 0.0);
        EXPECT_LE(e.probability, 1.0);
    }
    EXPECT_EQ(good, 200);
}

// Gate decision against a brute-force filter of the same histogram.
TEST(EstimatePixel, BackgroundOnlyGateMatchesBruteForce) {
    const PulseModel p;
    const PulseKernel k = pulse_kernel(p);
    const double gate = k.max_tap() + 1e-9;
    const std::vector<double> flux(1024, 5.0 / 1024.0);
    int invalid = 0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
        const auto h = simulate_histogram(flux, 77, static_cast<std::uint64_t>(t));
        const auto y = brute_filter(std::vector<double>(h.begin(), h.end()), k, true);
        const bool expect_valid = *std::max_element(y.begin(), y.end()) > gate;
        const bool valid = estimate_pixel(h, p).valid;
        EXPECT_EQ(valid, expect_valid) << "trial " << t;
        if (!valid) ++invalid;
    }
    // Two photons within the kernel support always exceed the single-photon
    // gate; with 5 photons over 1024 bins that happens in about 15% of pixels.
    EXPECT_GE(invalid, static_cast<int>(0.80 * trials));
}

TEST(EstimatePixel, SparseBackgroundRejected) {
    const PulseModel p;
    const std::vector<double> flux(1024, 1.0 / 1024.0);
    int invalid = 0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t)
        if (!estimate_pixel(simulate_histogram(flux, 78, static_cast<std::uint64_t>(t)), p).valid) ++invalid;
    EXPECT_GE(invalid, static_cast<int>(0.99 * trials));
}

TEST(EstimatePixel, RawAndMatchedAgreeForDeltaKernel) {
    PulseModel p;
    p.num_bins = 128;
    p.fwhm = 1e-15;
    std::mt19937_64 gen(8);
    std::poisson_distribution<int> pois(0.5);
    for (int t = 0; t < 50; ++t) {
        std::vector<std::uint32_t> h(128);
        for (auto& v : h) v = static_cast<std::uint32_t>(pois(gen));
        h[static_cast<std::size_t>(t)] += 4;
        ExtractOptions raw{PeakDomain::kRaw, 0.0, CorrelationMode::kCircular};
        ExtractOptions matched{PeakDomain::kMatched, 0.0, CorrelationMode::kCircular};
        const auto a = estimate_pixel(h, p, raw), b = estimate_pixel(h, p, matched);
        EXPECT_EQ(a.peak_bin, b.peak_bin);
        EXPECT_EQ(a.probability, b.probability);
        EXPECT_EQ(a.valid, b.valid);
    }
}

TEST(EstimatePixel, RawDomainUsesCountsForProbability) {
    PulseModel p;
    std::vector<std::uint32_t> h(1024, 0);
    h[40] = 3;
    h[41] = 1;
    const auto e = estimate_pixel(h, p, ExtractOptions{PeakDomain::kRaw, std::nullopt, CorrelationMode::kCircular});
    EXPECT_TRUE(e.valid);
    EXPECT_EQ(e.peak_bin, 40);
    EXPECT_EQ(e.probability, 0.75);
    EXPECT_EQ(e.peak_height, 3.0);
}

TEST(PixelEstimator, DefaultMinHeight) {
    const PixelEstimator est(PulseModel{});
    EXPECT_NEAR(est.min_height(), est.kernel().max_tap() + 1e-9, 1e-15);
    const PixelEstimator raw(PulseModel{}, ExtractOptions{PeakDomain::kRaw, std::nullopt, CorrelationMode::kCircular});
    EXPECT_NEAR(raw.min_height(), 1.0 + 1e-9, 1e-15);
}

EstimateGrid grid_with_heights(const std::vector<double>& heights) {
    EstimateGrid g;
    g.intrinsics = CameraIntrinsics::with_defaults(static_cast<int>(heights.size()), 1);
    for (double h : heights) g.estimates.push_back(PixelEstimate{1.0, 10, h, 0.5, true});
    return g;
}

TEST(ThresholdBaseline, Boundaries) {
    const auto g = grid_with_heights({0.2, 1.0, 1.1, 1.5, 9.0});
    EXPECT_EQ(threshold_baseline(g, 0.0).valid_count(), 5u);
    EXPECT_EQ(threshold_baseline(g, 1.1).valid_count(), 2u);  // <= threshold dropped
    EXPECT_EQ(threshold_baseline(g, std::numeric_limits<double>::infinity()).valid_count(), 0u);
}

TEST(ThresholdBaseline, DropsIsolatedSinglePhotonPeaks) {
    const PulseModel p;
    const PixelEstimator est(p, ExtractOptions{PeakDomain::kMatched, 0.0, CorrelationMode::kCircular});
    EstimateGrid g;
    g.intrinsics = CameraIntrinsics::with_defaults(20, 1);
    for (int i = 0; i < 20; ++i) {
        std::vector<std::uint32_t> h(1024, 0);
        h[static_cast<std::size_t>(37 * i)] = 1;
        h[static_cast<std::size_t>(37 * i + 500)] = 1;
        g.estimates.push_back(est(std::span<const std::uint32_t>(h)));
    }
    EXPECT_EQ(g.valid_count(), 20u);
    EXPECT_EQ(threshold_baseline(g, 1.1).valid_count(), 0u);
}

RealHistogramFrame real_frame(int w, int h, int n) {
    RealHistogramFrame f;
    f.intrinsics = CameraIntrinsics::with_defaults(w, h);
    f.pulse.num_bins = n;
    f.values.assign(static_cast<std::size_t>(w) * h * n, 0.0);
    return f;
}

TEST(SpatialDenoise, ConstantFrameUnchanged) {
    auto f = real_frame(9, 7, 16);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = 0.5 + static_cast<double>(i % 16);
    const auto g = spatial_gaussian_denoise(f, 5, 1.0, 2);
    for (std::size_t i = 0; i < f.values.size(); ++i) EXPECT_NEAR(g.values[i], f.values[i], 1e-12);
}

TEST(SpatialDenoise, ImpulseGivesKernelReplicaAndConservesMass) {
    const int w = 11, h = 9, n = 4;
    auto f = real_frame(w, h, n);
    const std::size_t center = static_cast<std::size_t>(4 * w + 5);
    f.values[center * n + 2] = 1.0;
    const auto g = spatial_gaussian_denoise(f, 5, 1.0, 1);
    double total = 0.0, norm_const = 0.0;
    for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) norm_const += std::exp(-(dx * dx + dy * dy) / 2.0);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double v = g.values[(static_cast<std::size_t>(r * w + c)) * n + 2];
            const int dx = c - 5, dy = r - 4;
            const double want = (std::abs(dx) <= 2 && std::abs(dy) <= 2) ? std::exp(-(dx * dx + dy * dy) / 2.0) / norm_const : 0.0;
            EXPECT_NEAR(v, want, 1e-12);
            total += v;
            EXPECT_EQ(g.values[(static_cast<std::size_t>(r * w + c)) * n + 1], 0.0);
        }
    }
    EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(SpatialDenoise, Validation) {
    const auto f = real_frame(6, 4, 8);
    EXPECT_THROW(spatial_gaussian_denoise(f, 4, 1.0), ValidationError);
    EXPECT_THROW(spatial_gaussian_denoise(f, 5, 1.0), ValidationError);  // 5 > min(H, W)
    EXPECT_NO_THROW(spatial_gaussian_denoise(f, 3, 1.0));
}

TEST(EstimateFrame, WorkerIndependentAndRowMajor) {
    DepthMap d;
    d.intrinsics = CameraIntrinsics::with_defaults(12, 8);
    d.depth.assign(96, 2.0f);
    for (int i = 0; i < 96; ++i) d.depth[static_cast<std::size_t>(i)] = 1.0f + 0.05f * static_cast<float>(i);
    AlbedoMap a{12, 8, std::vector<float>(96, 0.8f)};
    const auto frame = simulate_frame(d, a, PulseModel{}, SensorConfig{}, SbrTarget{5000.0, 1.0}, 1, 1);
    const auto g1 = estimate_frame(frame, {}, 1);
    const auto g4 = estimate_frame(frame, {}, 4);
    ASSERT_EQ(g1.estimates.size(), 96u);
    for (std::size_t i = 0; i < 96; ++i) {
        EXPECT_EQ(g1.estimates[i].peak_bin, g4.estimates[i].peak_bin);
        EXPECT_EQ(g1.estimates[i].probability, g4.estimates[i].probability);
        if (g1.estimates[i].valid) {
            EXPECT_NEAR(g1.estimates[i].depth, d.depth[i], 1.5 * frame.pulse.bin_depth());
        }
    }
}

}  // namespace
}  // namespace ppc
