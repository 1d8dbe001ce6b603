// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "ppc/fourier.hpp"
#include "ppc/histogram_proc.hpp"

namespace ppc {
namespace {

std::vector<std::complex<double>> direct_dft(const std::vector<double>& h, int k) {
    const int n = static_cast<int>(h.size());
    std::vector<std::complex<double>> out(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        std::complex<double> acc = 0.0;
        for (int t = 0; t < n; ++t)
            acc += h[static_cast<std::size_t>(t)] * std::polar(1.0, -2.0 * std::numbers::pi * j * t / n);
        out[static_cast<std::size_t>(j)] = acc;
    }
    return out;
}

// Inverse from the first k coefficients with the rest zero, negatives clamped.
std::vector<double> direct_inverse(const std::vector<std::complex<double>>& c, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    const int k = static_cast<int>(c.size());
    for (int t = 0; t < n; ++t) {
        double acc = c[0].real();
        for (int j = 1; j < k; ++j) {
            const double w = (2 * j == n) ? 1.0 : 2.0;
            acc += w * (c[static_cast<std::size_t>(j)] * std::polar(1.0, 2.0 * std::numbers::pi * j * t / n)).real();
        }
        out[static_cast<std::size_t>(t)] = std::max(0.0, acc / n);
    }
    return out;
}

std::vector<double> random_histogram(std::mt19937_64& gen, int n) {
    std::poisson_distribution<int> pois(1.5);
    std::vector<double> h(static_cast<std::size_t>(n));
    for (auto& v : h) v = pois(gen);
    return h;
}

TEST(Fourier, CoefficientsMatchDirectDft) {
    std::mt19937_64 gen(5);
    for (int n : {8, 33, 64, 255, 1024}) {
        const auto h = random_histogram(gen, n);
        for (int k : {1, 5, n / 2 + 1}) {
            const auto code = compress_fourier(h, k);
            ASSERT_EQ(code.k(), k);
            const auto want = direct_dft(h, k);
            for (int j = 0; j < k; ++j) {
                EXPECT_NEAR(code.coefficients[static_cast<std::size_t>(j)].real(), want[static_cast<std::size_t>(j)].real(), 1e-8);
                EXPECT_NEAR(code.coefficients[static_cast<std::size_t>(j)].imag(), want[static_cast<std::size_t>(j)].imag(), 1e-8);
            }
        }
    }
}

TEST(Fourier, ReconstructionMatchesDirectInverse) {
    std::mt19937_64 gen(6);
    for (int n : {16, 63, 1024}) {
        const auto h = random_histogram(gen, n);
        for (int k : {1, 4, 32 < n / 2 + 1 ? 32 : n / 2 + 1}) {
            const auto code = compress_fourier(h, k);
            const auto got = decompress_fourier(code);
            const auto want = direct_inverse(direct_dft(h, k), n);
            for (int t = 0; t < n; ++t) EXPECT_NEAR(got[static_cast<std::size_t>(t)], want[static_cast<std::size_t>(t)], 1e-8);
        }
    }
}

TEST(Fourier, FullSpectrumIsLossless) {
    std::mt19937_64 gen(7);
    for (int n : {2, 7, 128, 1024, 2048}) {
        const auto h = random_histogram(gen, n);
        const auto back = decompress_fourier(compress_fourier(h, n / 2 + 1));
        for (int t = 0; t < n; ++t) EXPECT_NEAR(back[static_cast<std::size_t>(t)], h[static_cast<std::size_t>(t)], 1e-6);
    }
}

TEST(Fourier, ConstantHistogramExactForAnyK) {
    const std::vector<std::uint32_t> h(1024, 3);
    for (int k : {1, 2, 32, 513}) {
        const auto back = decompress_fourier(compress_fourier(std::span<const std::uint32_t>(h), k));
        for (double v : back) EXPECT_NEAR(v, 3.0, 1e-9);
    }
}

TEST(Fourier, KRange) {
    const std::vector<double> h(64, 1.0);
    EXPECT_THROW(compress_fourier(h, 0), DomainError);
    EXPECT_THROW(compress_fourier(h, 34), DomainError);
    EXPECT_NO_THROW(compress_fourier(h, 33));
}

// Clean pixels (no background, 50 signal photons): the matched-filter peak of
// the k = 32 reconstruction stays within one bin of the full histogram's.
TEST(Fourier, CleanPixelPeakWithinOneBinAtK32) {
    const PulseModel p;
    const SensorConfig s;
    const PixelEstimator est(p);
    int close = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const double depth = 0.5 + 0.07 * t;
        const FluxCalibration c{50.0 * depth * depth / s.quantum_efficiency, 0.0};
        const auto h = simulate_histogram(expected_flux(depth, 1.0, p, s, c), 4, static_cast<std::uint64_t>(t));
        std::vector<double> hd(h.begin(), h.end());
        const auto back = decompress_fourier(compress_fourier(hd, 32));
        const int a = est(std::span<const double>(hd)).peak_bin;
        const int b = est(std::span<const double>(back)).peak_bin;
        if (std::abs(a - b) <= 1) ++close;
    }
    EXPECT_GE(close, 198);
}

TEST(FourierFrame, CompressDecompressFileRoundTrip) {
    DepthMap d;
    d.intrinsics = CameraIntrinsics::with_defaults(6, 4);
    d.depth.assign(24, 3.0f);
    AlbedoMap a{6, 4, std::vector<float>(24, 0.7f)};
    const auto frame = simulate_frame(d, a, PulseModel{}, SensorConfig{}, SbrTarget{10.0, 10.0}, 2, 1);
    const auto code = compress_frame(frame, 513, 2);
    const auto full = decompress_frame(code, 1);
    for (std::size_t i = 0; i < frame.counts.size(); ++i) EXPECT_NEAR(full.values[i], frame.counts[i], 1e-6);

    const auto dir = std::filesystem::temp_directory_path() / "ppc_fourier_test";
    std::filesystem::create_directories(dir);
    const auto small = compress_frame(frame, 32, 1);
    write_fourier_frame(small, dir / "f.fou");
    const auto back = read_fourier_frame(dir / "f.fou", frame.pulse);
    EXPECT_EQ(back.k, 32);
    EXPECT_EQ(back.intrinsics.width, 6);
    ASSERT_EQ(back.coefficients.size(), small.coefficients.size());
    for (std::size_t i = 0; i < back.coefficients.size(); ++i) {
        EXPECT_EQ(back.coefficients[i].real(), static_cast<double>(static_cast<float>(small.coefficients[i].real())));
        EXPECT_EQ(back.coefficients[i].imag(), static_cast<double>(static_cast<float>(small.coefficients[i].imag())));
    }
    EXPECT_EQ(std::filesystem::file_size(dir / "f.fou"), 8u + 16u + 24u * 32u * 8u);
}

}  // namespace
}  // namespace ppc
