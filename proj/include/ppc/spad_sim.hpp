// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// Forward sensing model of a single-photon LiDAR pixel array.
//
// Expected photons in bin n of a pixel at depth d with albedo a:
//
//   lambda[n] = eta * Phi * pulse_mass[n] + eta * b_gamma + b_d,
//   Phi       = k * a / d^2,
//
// where pulse_mass[n] integrates the unit-area Gaussian pulse, delayed by the
// round trip 2d/C, over bin n. Bin n covers [(n - 1/2) dt, (n + 1/2) dt) so a
// pulse centred at time n * dt peaks in bin n. Observed counts are
// independent Poisson draws per bin.

#ifndef PPC_SPAD_SIM_HPP_
#define PPC_SPAD_SIM_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "ppc/rng.hpp"
#include "ppc/scene.hpp"

namespace ppc {

struct PulseModel {
    int num_bins = 1024;
    double bin_width = 97e-12;          // s
    double repetition_period = 100e-9;  // s
    double fwhm = 350e-12;              // s

    void validate() const;
    double sigma() const;
    // C * T_r / 2.
    double unambiguous_range() const { return kSpeedOfLight * repetition_period / 2.0; }
    // Metres per bin, dt * C / 2.
    double bin_depth() const { return bin_width * kSpeedOfLight / 2.0; }
    friend bool operator==(const PulseModel&, const PulseModel&) = default;
};

// Binned pulse truncated at +-4 sigma and renormalised to unit mass.
// taps[center] is the bin containing the pulse centre.
struct PulseKernel {
    std::vector<double> taps;
    int center = 0;

    double max_tap() const;
};

// Kernel of a pulse centred on a bin centre; used for matched filtering.
PulseKernel pulse_kernel(const PulseModel& pulse);

// Mass of a pulse centred at `delay` seconds, per bin, wrapped modulo N.
// Returned as (bin, mass) pairs with mass summing to 1.
std::vector<std::pair<int, double>> binned_pulse(const PulseModel& pulse, double delay);

struct SensorConfig {
    double quantum_efficiency = 0.5;  // eta in [0, 1)
    double dark_count = 0.0;          // b_d, expected photons per bin

    void validate() const;
    friend bool operator==(const SensorConfig&, const SensorConfig&) = default;
};

// Mean signal photons S per pixel and mean background photons B per pixel
// over the full period.
struct SbrTarget {
    double signal = 5.0;
    double background = 50.0;

    double sbr() const { return signal / background; }
    void validate() const;
};

// Result of calibration: the signal scale k in Phi = k * a / d^2 and the
// ambient flux b_gamma per bin.
struct FluxCalibration {
    double signal_scale = 0.0;
    double ambient_flux = 0.0;
};

// Chooses k so that the mean expected signal over valid pixels is S, and
// b_gamma so that every pixel receives B expected background photons.
// Throws ValidationError for an all-sentinel scene or when b_d alone
// exceeds B / N.
FluxCalibration calibrate(const SbrTarget& sbr, const PulseModel& pulse, const SensorConfig& sensor,
                          const DepthMap& depth, const AlbedoMap& albedo);

// Expected signal photons for a pixel, eta * Phi.
double expected_signal(double depth, double albedo, const SensorConfig& sensor, const FluxCalibration& calib);

// lambda[n] for one pixel. Throws DomainError if depth is outside
// (0, unambiguous range) or albedo outside (0, 1].
std::vector<double> expected_flux(double depth, double albedo, const PulseModel& pulse, const SensorConfig& sensor,
                                  const FluxCalibration& calib);

// lambda[n] = eta * b_gamma + b_d for a pixel without a return.
std::vector<double> background_flux(const PulseModel& pulse, const SensorConfig& sensor, const FluxCalibration& calib);

// Poisson counts for one pixel. Bin n draws from PhiloxStream(seed, pixel, n).
std::vector<std::uint32_t> simulate_histogram(std::span<const double> flux, std::uint64_t seed, std::uint64_t pixel);

struct HistogramFrame {
    CameraIntrinsics intrinsics;
    PulseModel pulse;
    SensorConfig sensor;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> counts;  // pixel-major: all bins of pixel 0, then pixel 1, ...

    int height() const { return intrinsics.height; }
    int width() const { return intrinsics.width; }
    std::size_t pixel_count() const { return intrinsics.pixel_count(); }
    std::span<const std::uint32_t> pixel(std::size_t index) const {
        return {counts.data() + index * pulse.num_bins, static_cast<std::size_t>(pulse.num_bins)};
    }
    friend bool operator==(const HistogramFrame&, const HistogramFrame&) = default;
};

// Same layout with real-valued bins: spatially denoised or decompressed.
struct RealHistogramFrame {
    CameraIntrinsics intrinsics;
    PulseModel pulse;
    std::uint64_t seed = 0;
    std::vector<double> values;

    int height() const { return intrinsics.height; }
    int width() const { return intrinsics.width; }
    std::size_t pixel_count() const { return intrinsics.pixel_count(); }
    std::span<const double> pixel(std::size_t index) const {
        return {values.data() + index * pulse.num_bins, static_cast<std::size_t>(pulse.num_bins)};
    }
};

RealHistogramFrame to_real(const HistogramFrame& frame);

HistogramFrame simulate_frame(const DepthMap& depth, const AlbedoMap& albedo, const PulseModel& pulse,
                              const SensorConfig& sensor, const FluxCalibration& calib, std::uint64_t seed,
                              unsigned workers = 0);

// Calibrates against (depth, albedo) and simulates.
HistogramFrame simulate_frame(const DepthMap& depth, const AlbedoMap& albedo, const PulseModel& pulse,
                              const SensorConfig& sensor, const SbrTarget& sbr, std::uint64_t seed,
                              unsigned workers = 0);

// SPADHST1: magic, u32 H, u32 W, u32 N, f64 dt, f64 T_r, f64 fwhm, u64 seed,
// then H*W*N u32 counts, pixel-major, all little-endian.
void write_frame(const HistogramFrame& frame, const std::filesystem::path& path);
HistogramFrame read_frame(const std::filesystem::path& path);

// SPADHRF1: SPADHST1 header followed by H*W*N binary32 values.
void write_real_frame(const RealHistogramFrame& frame, const std::filesystem::path& path);
RealHistogramFrame read_real_frame(const std::filesystem::path& path);

}  // namespace ppc

#endif  // PPC_SPAD_SIM_HPP_
