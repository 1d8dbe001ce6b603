// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "ppc/spad_sim.hpp"

namespace ppc {
namespace {

DepthMap constant_depth(int w, int h, float d) {
    DepthMap m;
    m.intrinsics = CameraIntrinsics::with_defaults(w, h);
    m.depth.assign(m.intrinsics.pixel_count(), d);
    return m;
}

AlbedoMap constant_albedo(int w, int h, float a) {
    return AlbedoMap{w, h, std::vector<float>(static_cast<std::size_t>(w) * h, a)};
}

// Simpson integration of the Gaussian density over [a, b].
double gaussian_mass(double a, double b, double mu, double sigma) {
    const int steps = 2000;
    const double hstep = (b - a) / steps;
    auto f = [&](double t) { return std::exp(-0.5 * (t - mu) * (t - mu) / (sigma * sigma)); };
    double s = f(a) + f(b);
    for (int i = 1; i < steps; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * hstep);
    return s * hstep / 3.0;
}

TEST(Pulse, Validation) {
    PulseModel p;
    EXPECT_NO_THROW(p.validate());
    p.num_bins = 2048;  // 2048 * 97 ps > 100 ns
    EXPECT_THROW(p.validate(), ValidationError);
    p = PulseModel{};
    p.fwhm = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
    p = PulseModel{};
    p.bin_width = -1.0;
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Pulse, SigmaFromFwhm) {
    PulseModel p;
    EXPECT_NEAR(p.sigma() * 2.0 * std::sqrt(2.0 * std::log(2.0)), p.fwhm, 1e-24);
}

TEST(Pulse, KernelHasUnitMassAndIsSymmetric) {
    const PulseKernel k = pulse_kernel(PulseModel{});
    EXPECT_NEAR(std::accumulate(k.taps.begin(), k.taps.end(), 0.0), 1.0, 1e-9);
    ASSERT_EQ(k.taps.size(), static_cast<std::size_t>(2 * k.center + 1));
    for (int o = 1; o <= k.center; ++o)
        EXPECT_NEAR(k.taps[static_cast<std::size_t>(k.center + o)], k.taps[static_cast<std::size_t>(k.center - o)], 1e-15);
    EXPECT_EQ(k.max_tap(), k.taps[static_cast<std::size_t>(k.center)]);
}

TEST(Pulse, BinnedMassMatchesNumericalIntegration) {
    const PulseModel p;
    const double dt = p.bin_width, sigma = p.sigma();
    for (double delay : {100.0 * dt, 100.3 * dt, 517.77 * dt}) {
        const auto binned = binned_pulse(p, delay);
        const double lo = delay - 4.0 * sigma, hi = delay + 4.0 * sigma;
        double total = gaussian_mass(lo, hi, delay, sigma);
        double sum = 0.0;
        for (const auto& [bin, mass] : binned) {
            const double a = std::max(lo, (bin - 0.5) * dt), b = std::min(hi, (bin + 0.5) * dt);
            EXPECT_NEAR(mass, gaussian_mass(a, b, delay, sigma) / total, 1e-9) << "bin " << bin;
            sum += mass;
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
    }
}

TEST(Pulse, WrapsModuloPeriod) {
    const PulseModel p;
    const auto binned = binned_pulse(p, 0.0);
    double sum = 0.0;
    bool wrapped = false;
    for (const auto& [bin, mass] : binned) {
        EXPECT_GE(bin, 0);
        EXPECT_LT(bin, p.num_bins);
        wrapped |= bin == p.num_bins - 1;
        sum += mass;
    }
    EXPECT_TRUE(wrapped);
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Flux, DeltaPulseLimit) {
    PulseModel p;
    p.fwhm = 1e-15;
    const double depth = 100.0 * p.bin_depth();
    const FluxCalibration calib{1.0, 0.0};
    const SensorConfig sensor{0.5, 0.0};
    const auto flux = expected_flux(depth, 1.0, p, sensor, calib);
    const double signal = expected_signal(depth, 1.0, sensor, calib);
    for (int n = 0; n < p.num_bins; ++n) {
        if (n == 100) EXPECT_NEAR(flux[100], signal, 1e-12 * signal);
        else EXPECT_EQ(flux[static_cast<std::size_t>(n)], 0.0);
    }
}

TEST(Flux, SignalSumsToEtaPhi) {
    const PulseModel p;
    const SensorConfig sensor{0.35, 0.0};
    const FluxCalibration calib{7.5, 0.0};
    const double depth = 3.7, albedo = 0.6;
    const auto flux = expected_flux(depth, albedo, p, sensor, calib);
    const double eta_phi = 0.35 * 7.5 * albedo / (depth * depth);
    EXPECT_NEAR(std::accumulate(flux.begin(), flux.end(), 0.0), eta_phi, 1e-9);
}

TEST(Flux, DomainErrors) {
    const PulseModel p;
    const SensorConfig s;
    const FluxCalibration c{1.0, 0.01};
    EXPECT_THROW(expected_flux(0.0, 0.5, p, s, c), DomainError);
    EXPECT_THROW(expected_flux(p.unambiguous_range() + 1.0, 0.5, p, s, c), DomainError);
    EXPECT_THROW(expected_flux(2.0, 0.0, p, s, c), DomainError);
    EXPECT_THROW(expected_flux(2.0, 1.5, p, s, c), DomainError);
}

TEST(Flux, ArgmaxMatchesRoundTripBin) {
    const PulseModel p;
    const SensorConfig s;
    const FluxCalibration c{50.0, 1e-12};
    for (int i = 0; i < 200; ++i) {
        const double depth = 0.3 + 0.0713 * i;
        const auto flux = expected_flux(depth, 1.0, p, s, c);
        const auto arg = std::max_element(flux.begin(), flux.end()) - flux.begin();
        EXPECT_EQ(arg, std::lround(2.0 * depth / (kSpeedOfLight * p.bin_width))) << depth;
    }
}

TEST(Calibrate, UniformSceneGetsExactlyS) {
    const PulseModel p;
    const SensorConfig sensor{0.5, 0.0};
    const auto depth = constant_depth(8, 6, 2.5f);
    const auto albedo = constant_albedo(8, 6, 0.8f);
    const auto c = calibrate({5.0, 50.0}, p, sensor, depth, albedo);
    EXPECT_NEAR(expected_signal(2.5, static_cast<double>(0.8f), sensor, c), 5.0, 1e-12);
    const auto bg = background_flux(p, sensor, c);
    EXPECT_NEAR(bg[0], 50.0 / 1024.0, 1e-15);
}

TEST(Calibrate, InverseSquareFalloff) {
    const PulseModel p;
    const SensorConfig sensor;
    auto depth = constant_depth(2, 1, 2.0f);
    depth.depth[1] = 4.0f;
    const auto albedo = constant_albedo(2, 1, 1.0f);
    const auto c = calibrate({5.0, 100.0}, p, sensor, depth, albedo);
    const double near = expected_signal(2.0, 1.0, sensor, c), far = expected_signal(4.0, 1.0, sensor, c);
    EXPECT_NEAR(far / near, 0.25, 1e-15);
    EXPECT_NEAR(0.5 * (near + far), 5.0, 1e-12);
    EXPECT_NEAR(background_flux(p, sensor, c)[3], 100.0 / 1024.0, 1e-15);
}

TEST(Calibrate, DarkCountIsPartOfBackground) {
    const PulseModel p;
    const SensorConfig sensor{0.4, 0.01};
    const auto c = calibrate({1.0, 50.0}, p, sensor, constant_depth(4, 4, 3.0f), constant_albedo(4, 4, 0.5f));
    EXPECT_NEAR(background_flux(p, sensor, c)[0], 50.0 / 1024.0, 1e-15);
    const SensorConfig noisy{0.4, 1.0};
    EXPECT_THROW(calibrate({1.0, 50.0}, p, noisy, constant_depth(4, 4, 3.0f), constant_albedo(4, 4, 0.5f)),
                 ValidationError);
}

TEST(Calibrate, Errors) {
    const PulseModel p;
    const SensorConfig s;
    const auto sentinel = constant_depth(3, 3, kNoReturn);
    const auto albedo = constant_albedo(3, 3, kNoReturn);
    EXPECT_THROW(calibrate({5.0, 50.0}, p, s, sentinel, albedo), ValidationError);
    EXPECT_THROW(calibrate({0.0, 50.0}, p, s, constant_depth(3, 3, 2.0f), constant_albedo(3, 3, 1.0f)),
                 ValidationError);
    EXPECT_THROW(calibrate({5.0, 0.0}, p, s, constant_depth(3, 3, 2.0f), constant_albedo(3, 3, 1.0f)),
                 ValidationError);
}

TEST(SbrTarget, Ratio) {
    for (auto [s, b] : {std::pair{5.0, 50.0}, {5.0, 100.0}, {1.0, 50.0}, {1.0, 100.0}})
        EXPECT_NEAR((SbrTarget{s, b}.sbr()), s / b, 1e-12);
}

TEST(SimulateHistogram, ZeroFluxIsZero) {
    const std::vector<double> flux(256, 0.0);
    for (auto c : simulate_histogram(flux, 1, 2)) EXPECT_EQ(c, 0u);
}

TEST(SimulateHistogram, MonteCarloMeanAndVariance) {
    const std::vector<double> flux(4, 2.0);
    const int trials = 10000;
    std::vector<double> sum(4, 0.0), sum2(4, 0.0);
    for (int t = 0; t < trials; ++t) {
        const auto h = simulate_histogram(flux, 17, static_cast<std::uint64_t>(t));
        for (std::size_t n = 0; n < 4; ++n) {
            sum[n] += h[n];
            sum2[n] += static_cast<double>(h[n]) * h[n];
        }
    }
    for (std::size_t n = 0; n < 4; ++n) {
        const double mean = sum[n] / trials;
        const double var = (sum2[n] - trials * mean * mean) / (trials - 1);
        EXPECT_NEAR(mean, 2.0, 3.0 * std::sqrt(2.0 / trials));
        EXPECT_NEAR(var, 2.0, 3.0 * std::sqrt((2.0 + 2.0 * 4.0) / trials));
    }
}

TEST(SimulateFrame, DeterministicAndSeedSensitive) {
    const auto depth = constant_depth(10, 8, 3.0f);
    const auto albedo = constant_albedo(10, 8, 0.5f);
    const PulseModel p;
    const SensorConfig s;
    const auto a = simulate_frame(depth, albedo, p, s, SbrTarget{5.0, 50.0}, 7, 1);
    const auto b = simulate_frame(depth, albedo, p, s, SbrTarget{5.0, 50.0}, 7, 4);
    const auto c = simulate_frame(depth, albedo, p, s, SbrTarget{5.0, 50.0}, 8, 2);
    EXPECT_EQ(a, b);
    EXPECT_NE(a.counts, c.counts);
    EXPECT_EQ(a.counts.size(), 10u * 8u * 1024u);
}

TEST(SimulateFrame, SentinelPixelsAreBackgroundOnly) {
    auto depth = constant_depth(40, 25, kNoReturn);
    depth.depth[0] = 2.0f;
    auto albedo = constant_albedo(40, 25, kNoReturn);
    albedo.albedo[0] = 1.0f;
    const PulseModel p;
    const SensorConfig s;
    const SbrTarget sbr{5.0, 50.0};
    const auto frame = simulate_frame(depth, albedo, p, s, sbr, 3, 2);
    double total = 0.0;
    std::size_t pixels = 0;
    for (std::size_t i = 1; i < frame.pixel_count(); ++i, ++pixels)
        for (auto v : frame.pixel(i)) total += v;
    // Per-pixel total is Poisson(B); the mean over `pixels` has sd sqrt(B / pixels).
    EXPECT_NEAR(total / pixels, 50.0, 3.0 * std::sqrt(50.0 / pixels));
}

TEST(SimulateFrame, MisalignedMapsRejected) {
    const auto depth = constant_depth(4, 4, 2.0f);
    const auto albedo = constant_albedo(4, 3, 1.0f);
    EXPECT_THROW(simulate_frame(depth, albedo, PulseModel{}, SensorConfig{}, FluxCalibration{1.0, 0.0}, 0),
                 ValidationError);
}

TEST(FrameFile, RoundTripAndHeader) {
    const auto dir = std::filesystem::temp_directory_path() / "ppc_spad_test";
    std::filesystem::create_directories(dir);
    const auto frame = simulate_frame(constant_depth(5, 3, 2.0f), constant_albedo(5, 3, 0.5f), PulseModel{},
                                      SensorConfig{}, SbrTarget{5.0, 50.0}, 0xfeedbeefcafeULL, 1);
    write_frame(frame, dir / "f.sph");
    const auto back = read_frame(dir / "f.sph");
    EXPECT_EQ(back.counts, frame.counts);
    EXPECT_EQ(back.pulse, frame.pulse);
    EXPECT_EQ(back.seed, frame.seed);
    EXPECT_EQ(back.width(), 5);
    EXPECT_EQ(back.height(), 3);
    EXPECT_EQ(std::filesystem::file_size(dir / "f.sph"), 8u + 12u + 24u + 8u + 5u * 3u * 1024u * 4u);

    auto real = to_real(frame);
    write_real_frame(real, dir / "f.shr");
    const auto rb = read_real_frame(dir / "f.shr");
    EXPECT_EQ(rb.values, real.values);
    EXPECT_THROW(read_frame(dir / "f.shr"), IoError);
}

}  // namespace
}  // namespace ppc
