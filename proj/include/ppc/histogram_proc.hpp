// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-pixel histogram processing: matched filtering, peak picking, the
// peak-mass probability attribute and the baselines built on them.

#ifndef PPC_HISTOGRAM_PROC_HPP_
#define PPC_HISTOGRAM_PROC_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ppc/spad_sim.hpp"

namespace ppc {

enum class CorrelationMode {
    kCircular,  // indices wrap modulo N (the laser period wraps)
    kLinear,    // zero padding outside [0, N)
};

enum class PeakDomain {
    kRaw,      // peak and probability on the counts themselves
    kMatched,  // on the matched-filter response
};

// Matched-filter response y[n] = sum_o taps[o + center] * h[n - o], i.e. the
// cross-correlation of h with the time-reversed kernel. A single photon in
// bin j therefore produces the kernel centred on j. Throws ValidationError
// when the kernel is longer than h.
std::vector<double> matched_filter(std::span<const double> histogram, const PulseKernel& kernel,
                                   CorrelationMode mode = CorrelationMode::kCircular);
std::vector<double> matched_filter(std::span<const std::uint32_t> histogram, const PulseKernel& kernel,
                                   CorrelationMode mode = CorrelationMode::kCircular);

struct Peak {
    int bin = 0;
    double height = 0.0;
    bool valid = false;
};

// Lowest index achieving the maximum; valid iff height > min_height.
Peak detect_peak(std::span<const double> values, double min_height);

// (dt * C / 2) * bin.
double depth_from_bin(int bin, double bin_width);

// values[bin] / sum(values). Throws DomainError when the sum is not positive.
double point_probability(std::span<const double> values, int bin);

struct PixelEstimate {
    double depth = 0.0;
    int peak_bin = 0;
    double peak_height = 0.0;
    double probability = 0.0;
    bool valid = false;
};

struct ExtractOptions {
    PeakDomain domain = PeakDomain::kMatched;
    // Defaults to max(kernel) + 1e-9, where the raw domain uses a unit
    // delta kernel. Rejects pixels whose best peak is a lone photon.
    std::optional<double> min_height;
    CorrelationMode correlation = CorrelationMode::kCircular;
};

// Reusable per-pixel estimator holding the pulse kernel.
class PixelEstimator {
  public:
    PixelEstimator(const PulseModel& pulse, ExtractOptions options = {});

    PixelEstimate operator()(std::span<const double> histogram) const;
    PixelEstimate operator()(std::span<const std::uint32_t> histogram) const;

    double min_height() const { return min_height_; }
    const PulseKernel& kernel() const { return kernel_; }

  private:
    PixelEstimate from_response(std::span<const double> response) const;

    PulseModel pulse_;
    ExtractOptions options_;
    PulseKernel kernel_;
    double min_height_ = 0.0;
};

PixelEstimate estimate_pixel(std::span<const std::uint32_t> histogram, const PulseModel& pulse,
                             const ExtractOptions& options = {});

// Row-major H x W estimates.
struct EstimateGrid {
    CameraIntrinsics intrinsics;
    PulseModel pulse;
    std::uint64_t seed = 0;
    std::vector<PixelEstimate> estimates;

    std::size_t valid_count() const;
};

EstimateGrid estimate_frame(const HistogramFrame& frame, const ExtractOptions& options = {}, unsigned workers = 0);
EstimateGrid estimate_frame(const RealHistogramFrame& frame, const ExtractOptions& options = {}, unsigned workers = 0);

inline constexpr double kDefaultThreshold = 1.1;

// Thresholding baseline: invalidates estimates with peak_height <= threshold.
EstimateGrid threshold_baseline(EstimateGrid grid, double threshold = kDefaultThreshold);

// Spatial (per-bin) Gaussian smoothing over a size x size window. At the
// border the kernel is renormalised over the pixels inside the image.
// Throws ValidationError for even size or size > min(H, W).
RealHistogramFrame spatial_gaussian_denoise(const RealHistogramFrame& frame, int size = 5, double sigma = 1.0,
                                            unsigned workers = 0);
RealHistogramFrame spatial_gaussian_denoise(const HistogramFrame& frame, int size = 5, double sigma = 1.0,
                                            unsigned workers = 0);

}  // namespace ppc

#endif  // PPC_HISTOGRAM_PROC_HPP_
