// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include "ppc/histogram_proc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ppc {
namespace {

constexpr double kMinHeightMargin = 1e-9;

template <typename T>
std::vector<double> convolve(std::span<const T> h, const PulseKernel& kernel, CorrelationMode mode) {
    const int n_bins = static_cast<int>(h.size());
    const int len = static_cast<int>(kernel.taps.size());
    if (len > n_bins) throw ValidationError("matched filter kernel is longer than the histogram");
    const int c = kernel.center;
    std::vector<double> out(h.size(), 0.0);

    // y[n] = sum_j taps[j] * h[n - (j - c)]
    for (int n = 0; n < n_bins; ++n) {
        double acc = 0.0;
        const int first = n + c;  // source index for j = 0
        if (first - (len - 1) >= 0 && first < n_bins) {
            for (int j = 0; j < len; ++j) acc += kernel.taps[j] * static_cast<double>(h[first - j]);
        } else {
            for (int j = 0; j < len; ++j) {
                int src = first - j;
                if (src < 0 || src >= n_bins) {
                    if (mode == CorrelationMode::kLinear) continue;
                    src = (src % n_bins + n_bins) % n_bins;
                }
                acc += kernel.taps[j] * static_cast<double>(h[src]);
            }
        }
        out[n] = acc;
    }
    return out;
}

PixelEstimate invalid_estimate(const Peak& peak) {
    PixelEstimate e;
    e.peak_bin = peak.bin;
    e.peak_height = peak.height;
    return e;
}

}  // namespace

std::vector<double> matched_filter(std::span<const double> histogram, const PulseKernel& kernel, CorrelationMode mode) {
    return convolve(histogram, kernel, mode);
}

std::vector<double> matched_filter(std::span<const std::uint32_t> histogram, const PulseKernel& kernel,
                                   CorrelationMode mode) {
    return convolve(histogram, kernel, mode);
}

Peak detect_peak(std::span<const double> values, double min_height) {
    if (!(min_height >= 0.0)) throw ValidationError("min_height must be >= 0");
    Peak p;
    if (values.empty()) return p;
    const auto it = std::max_element(values.begin(), values.end());  // first maximum
    p.bin = static_cast<int>(it - values.begin());
    p.height = *it;
    p.valid = p.height > min_height;
    return p;
}

double depth_from_bin(int bin, double bin_width) { return bin_width * kSpeedOfLight / 2.0 * bin; }

double point_probability(std::span<const double> values, int bin) {
    const double total = std::accumulate(values.begin(), values.end(), 0.0);
    if (!(total > 0.0)) throw DomainError("probability undefined for an empty histogram");
    if (bin < 0 || static_cast<std::size_t>(bin) >= values.size()) throw DomainError("peak bin out of range");
    return values[static_cast<std::size_t>(bin)] / total;
}

PixelEstimator::PixelEstimator(const PulseModel& pulse, ExtractOptions options)
    : pulse_(pulse), options_(options), kernel_(pulse_kernel(pulse)) {
    const double kernel_max = options_.domain == PeakDomain::kMatched ? kernel_.max_tap() : 1.0;
    min_height_ = options_.min_height.value_or(kernel_max + kMinHeightMargin);
    if (!(min_height_ >= 0.0)) throw ValidationError("min_height must be >= 0");
}

PixelEstimate PixelEstimator::from_response(std::span<const double> response) const {
    const Peak peak = detect_peak(response, min_height_);
    if (!peak.valid) return invalid_estimate(peak);
    PixelEstimate e;
    e.peak_bin = peak.bin;
    e.peak_height = peak.height;
    e.depth = depth_from_bin(peak.bin, pulse_.bin_width);
    e.probability = point_probability(response, peak.bin);
    e.valid = true;
    return e;
}

PixelEstimate PixelEstimator::operator()(std::span<const double> histogram) const {
    if (histogram.size() != static_cast<std::size_t>(pulse_.num_bins))
        throw ValidationError("histogram length does not match the pulse model");
    if (options_.domain == PeakDomain::kRaw) return from_response(histogram);
    const auto response = matched_filter(histogram, kernel_, options_.correlation);
    return from_response(response);
}

PixelEstimate PixelEstimator::operator()(std::span<const std::uint32_t> histogram) const {
    if (options_.domain == PeakDomain::kMatched) {
        if (histogram.size() != static_cast<std::size_t>(pulse_.num_bins))
            throw ValidationError("histogram length does not match the pulse model");
        const auto response = matched_filter(histogram, kernel_, options_.correlation);
        return from_response(response);
    }
    const std::vector<double> real(histogram.begin(), histogram.end());
    return (*this)(std::span<const double>(real));
}

PixelEstimate estimate_pixel(std::span<const std::uint32_t> histogram, const PulseModel& pulse,
                             const ExtractOptions& options) {
    return PixelEstimator(pulse, options)(histogram);
}

std::size_t EstimateGrid::valid_count() const {
    return static_cast<std::size_t>(
        std::count_if(estimates.begin(), estimates.end(), [](const PixelEstimate& e) { return e.valid; }));
}

namespace {

template <typename Frame>
EstimateGrid estimate_any(const Frame& frame, const ExtractOptions& options, unsigned workers) {
    const PixelEstimator estimator(frame.pulse, options);
    EstimateGrid grid;
    grid.intrinsics = frame.intrinsics;
    grid.pulse = frame.pulse;
    grid.seed = frame.seed;
    grid.estimates.resize(frame.pixel_count());
    parallel_for(frame.pixel_count(), workers, [&](std::size_t i) { grid.estimates[i] = estimator(frame.pixel(i)); });
    return grid;
}

}  // namespace

EstimateGrid estimate_frame(const HistogramFrame& frame, const ExtractOptions& options, unsigned workers) {
    return estimate_any(frame, options, workers);
}

EstimateGrid estimate_frame(const RealHistogramFrame& frame, const ExtractOptions& options, unsigned workers) {
    return estimate_any(frame, options, workers);
}

EstimateGrid threshold_baseline(EstimateGrid grid, double threshold) {
    if (!(threshold >= 0.0)) throw ValidationError("threshold must be >= 0");
    for (auto& e : grid.estimates)
        if (e.valid && !(e.peak_height > threshold)) e.valid = false;
    return grid;
}

RealHistogramFrame spatial_gaussian_denoise(const RealHistogramFrame& frame, int size, double sigma, unsigned workers) {
    if (size < 1 || size % 2 == 0) throw ValidationError("spatial filter size must be odd and positive");
    if (size > std::min(frame.height(), frame.width()))
        throw ValidationError("spatial filter size exceeds the frame dimensions");
    if (!(sigma > 0.0)) throw ValidationError("spatial filter sigma must be positive");

    const int half = size / 2;
    std::vector<double> w(static_cast<std::size_t>(size));
    for (int d = -half; d <= half; ++d) w[static_cast<std::size_t>(d + half)] = std::exp(-0.5 * d * d / (sigma * sigma));

    const int H = frame.height();
    const int W = frame.width();
    const std::size_t N = static_cast<std::size_t>(frame.pulse.num_bins);

    // The 2D weight is w(dx) w(dy) and the valid window is a rectangle, so
    // renormalising each separable pass equals renormalising in 2D.
    auto pass = [&](const std::vector<double>& src, std::vector<double>& dst, bool along_rows) {
        parallel_for(static_cast<std::size_t>(H) * W, workers, [&](std::size_t idx) {
            const int row = static_cast<int>(idx / W);
            const int col = static_cast<int>(idx % W);
            double* out = dst.data() + idx * N;
            std::fill(out, out + N, 0.0);
            double norm = 0.0;
            for (int d = -half; d <= half; ++d) {
                const int r = along_rows ? row : row + d;
                const int c = along_rows ? col + d : col;
                if (r < 0 || r >= H || c < 0 || c >= W) continue;
                const double wd = w[static_cast<std::size_t>(d + half)];
                norm += wd;
                const double* in = src.data() + (static_cast<std::size_t>(r) * W + c) * N;
                for (std::size_t n = 0; n < N; ++n) out[n] += wd * in[n];
            }
            for (std::size_t n = 0; n < N; ++n) out[n] /= norm;
        });
    };

    RealHistogramFrame out;
    out.intrinsics = frame.intrinsics;
    out.pulse = frame.pulse;
    out.seed = frame.seed;
    std::vector<double> tmp(frame.values.size());
    out.values.resize(frame.values.size());
    pass(frame.values, tmp, true);
    pass(tmp, out.values, false);
    return out;
}

RealHistogramFrame spatial_gaussian_denoise(const HistogramFrame& frame, int size, double sigma, unsigned workers) {
    return spatial_gaussian_denoise(to_real(frame), size, sigma, workers);
}

}  // namespace ppc
