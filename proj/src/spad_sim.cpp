// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include "ppc/spad_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ppc {
namespace {

constexpr double kTruncationSigmas = 4.0;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

int wrap(long long bin, int n) {
    const long long m = bin % n;
    return static_cast<int>(m < 0 ? m + n : m);
}

void check_pixel(double depth, double albedo, const PulseModel& pulse) {
    if (!(depth > 0.0) || !(depth < pulse.unambiguous_range()))
        throw DomainError("depth " + std::to_string(depth) + " m outside (0, " +
                          std::to_string(pulse.unambiguous_range()) + ") m");
    if (!(albedo > 0.0) || albedo > 1.0) throw DomainError("albedo must be in (0, 1]");
}

}  // namespace

void PulseModel::validate() const {
    if (num_bins < 1) throw ValidationError("num_bins must be >= 1");
    if (!(bin_width > 0.0)) throw ValidationError("bin_width must be positive");
    if (!(fwhm > 0.0)) throw ValidationError("fwhm must be positive");
    // Relative slack so that 1024 * 97 ps <= 100 ns style configs are not
    // rejected by rounding.
    if (num_bins * bin_width > repetition_period * (1.0 + 1e-12))
        throw ValidationError("num_bins * bin_width exceeds the repetition period");
}

double PulseModel::sigma() const { return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2)); }

double PulseKernel::max_tap() const { return taps.empty() ? 0.0 : *std::max_element(taps.begin(), taps.end()); }

std::vector<std::pair<int, double>> binned_pulse(const PulseModel& pulse, double delay) {
    const double dt = pulse.bin_width;
    const double sigma = pulse.sigma();
    const double lo = delay - kTruncationSigmas * sigma;
    const double hi = delay + kTruncationSigmas * sigma;
    // Bin n covers [(n - 1/2) dt, (n + 1/2) dt).
    const long long first = static_cast<long long>(std::floor(lo / dt + 0.5));
    const long long last = static_cast<long long>(std::floor(hi / dt + 0.5));

    std::vector<std::pair<long long, double>> raw;
    double total = 0.0;
    for (long long n = first; n <= last; ++n) {
        const double a = std::max(lo, (n - 0.5) * dt);
        const double b = std::min(hi, (n + 0.5) * dt);
        if (!(b > a)) continue;
        const double mass = normal_cdf((b - delay) / sigma) - normal_cdf((a - delay) / sigma);
        if (mass > 0.0) {
            raw.emplace_back(n, mass);
            total += mass;
        }
    }
    if (!(total > 0.0)) {
        // Degenerate sigma: all mass in the bin containing the delay.
        raw.assign(1, {static_cast<long long>(std::floor(delay / dt + 0.5)), 1.0});
        total = 1.0;
    }

    std::vector<std::pair<int, double>> out;
    out.reserve(raw.size());
    for (const auto& [n, m] : raw) {
        const int bin = wrap(n, pulse.num_bins);
        const double mass = m / total;
        const auto it = std::find_if(out.begin(), out.end(), [bin](const auto& p) { return p.first == bin; });
        if (it != out.end()) it->second += mass;
        else out.emplace_back(bin, mass);
    }
    return out;
}

PulseKernel pulse_kernel(const PulseModel& pulse) {
    pulse.validate();
    const double sigma_bins = pulse.sigma() / pulse.bin_width;
    const int half = static_cast<int>(std::floor(kTruncationSigmas * sigma_bins + 0.5));
    if (2 * half + 1 > pulse.num_bins) throw ValidationError("pulse kernel is longer than the histogram");

    // Unwrapped binning around delay 0.
    PulseModel unwrapped = pulse;
    unwrapped.num_bins = 2 * half + 1;
    PulseKernel k;
    k.center = half;
    k.taps.assign(static_cast<std::size_t>(2 * half + 1), 0.0);
    for (const auto& [bin, mass] : binned_pulse(unwrapped, 0.0)) {
        // bin is wrapped modulo 2 * half + 1; map back to the offset.
        const int offset = bin <= half ? bin : bin - (2 * half + 1);
        k.taps[static_cast<std::size_t>(offset + half)] = mass;
    }
    return k;
}

void SensorConfig::validate() const {
    if (!(quantum_efficiency >= 0.0) || !(quantum_efficiency < 1.0))
        throw ValidationError("quantum efficiency must be in [0, 1)");
    if (!(dark_count >= 0.0)) throw ValidationError("dark count must be >= 0");
}

void SbrTarget::validate() const {
    if (!(signal > 0.0) || !std::isfinite(signal)) throw ValidationError("mean signal photons must be positive");
    if (!(background > 0.0) || !std::isfinite(background))
        throw ValidationError("mean background photons must be positive");
}

FluxCalibration calibrate(const SbrTarget& sbr, const PulseModel& pulse, const SensorConfig& sensor,
                          const DepthMap& depth, const AlbedoMap& albedo) {
    sbr.validate();
    pulse.validate();
    sensor.validate();
    if (!(sensor.quantum_efficiency > 0.0)) throw ValidationError("calibration needs a positive quantum efficiency");
    if (depth.depth.size() != albedo.albedo.size()) throw ValidationError("depth and albedo maps differ in size");

    double sum = 0.0;
    std::size_t valid = 0;
    for (std::size_t i = 0; i < depth.depth.size(); ++i) {
        const float d = depth.depth[i];
        if (DepthMap::is_sentinel(d)) continue;
        check_pixel(d, albedo.albedo[i], pulse);
        sum += static_cast<double>(albedo.albedo[i]) / (static_cast<double>(d) * d);
        ++valid;
    }
    if (valid == 0) throw ValidationError("calibration needs at least one pixel with a return");

    const double mean_falloff = sum / static_cast<double>(valid);
    const double per_bin_background = sbr.background / pulse.num_bins;
    if (sensor.dark_count > per_bin_background)
        throw ValidationError("dark count alone exceeds the background budget B / N");

    FluxCalibration c;
    c.signal_scale = sbr.signal / (sensor.quantum_efficiency * mean_falloff);
    c.ambient_flux = (per_bin_background - sensor.dark_count) / sensor.quantum_efficiency;
    return c;
}

double expected_signal(double depth, double albedo, const SensorConfig& sensor, const FluxCalibration& calib) {
    return sensor.quantum_efficiency * calib.signal_scale * albedo / (depth * depth);
}

std::vector<double> background_flux(const PulseModel& pulse, const SensorConfig& sensor, const FluxCalibration& calib) {
    return std::vector<double>(static_cast<std::size_t>(pulse.num_bins),
                               sensor.quantum_efficiency * calib.ambient_flux + sensor.dark_count);
}

std::vector<double> expected_flux(double depth, double albedo, const PulseModel& pulse, const SensorConfig& sensor,
                                  const FluxCalibration& calib) {
    check_pixel(depth, albedo, pulse);
    std::vector<double> flux = background_flux(pulse, sensor, calib);
    const double signal = expected_signal(depth, albedo, sensor, calib);
    for (const auto& [bin, mass] : binned_pulse(pulse, 2.0 * depth / kSpeedOfLight))
        flux[static_cast<std::size_t>(bin)] += signal * mass;
    return flux;
}

std::vector<std::uint32_t> simulate_histogram(std::span<const double> flux, std::uint64_t seed, std::uint64_t pixel) {
    std::vector<std::uint32_t> counts(flux.size());
    for (std::size_t n = 0; n < flux.size(); ++n) {
        PhiloxStream rng(seed, pixel, static_cast<std::uint32_t>(n));
        counts[n] = sample_poisson(flux[n], rng);
    }
    return counts;
}

RealHistogramFrame to_real(const HistogramFrame& frame) {
    RealHistogramFrame out;
    out.intrinsics = frame.intrinsics;
    out.pulse = frame.pulse;
    out.seed = frame.seed;
    out.values.assign(frame.counts.begin(), frame.counts.end());
    return out;
}

HistogramFrame simulate_frame(const DepthMap& depth, const AlbedoMap& albedo, const PulseModel& pulse,
                              const SensorConfig& sensor, const FluxCalibration& calib, std::uint64_t seed,
                              unsigned workers) {
    pulse.validate();
    sensor.validate();
    depth.intrinsics.validate();
    if (albedo.width != depth.intrinsics.width || albedo.height != depth.intrinsics.height ||
        depth.depth.size() != depth.intrinsics.pixel_count() || albedo.albedo.size() != depth.depth.size())
        throw ValidationError("depth and albedo maps are not aligned");
    for (std::size_t i = 0; i < depth.depth.size(); ++i)
        if (!DepthMap::is_sentinel(depth.depth[i])) check_pixel(depth.depth[i], albedo.albedo[i], pulse);

    HistogramFrame frame;
    frame.intrinsics = depth.intrinsics;
    frame.pulse = pulse;
    frame.sensor = sensor;
    frame.seed = seed;
    const std::size_t bins = static_cast<std::size_t>(pulse.num_bins);
    frame.counts.assign(depth.depth.size() * bins, 0u);

    const std::vector<double> background = background_flux(pulse, sensor, calib);
    parallel_for(depth.depth.size(), workers, [&](std::size_t i) {
        const float d = depth.depth[i];
        const auto counts = DepthMap::is_sentinel(d)
                                ? simulate_histogram(background, seed, i)
                                : simulate_histogram(expected_flux(d, albedo.albedo[i], pulse, sensor, calib), seed, i);
        std::copy(counts.begin(), counts.end(), frame.counts.begin() + static_cast<std::ptrdiff_t>(i * bins));
    });
    return frame;
}

HistogramFrame simulate_frame(const DepthMap& depth, const AlbedoMap& albedo, const PulseModel& pulse,
                              const SensorConfig& sensor, const SbrTarget& sbr, std::uint64_t seed,
                              unsigned workers) {
    return simulate_frame(depth, albedo, pulse, sensor, calibrate(sbr, pulse, sensor, depth, albedo), seed, workers);
}

}  // namespace ppc
