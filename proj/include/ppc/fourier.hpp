// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// Truncated Fourier compression of timing histograms: keep the k lowest
// non-negative DFT frequencies, zero the rest on reconstruction.

#ifndef PPC_FOURIER_HPP_
#define PPC_FOURIER_HPP_

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ppc/spad_sim.hpp"

namespace ppc {

struct FourierCode {
    int num_bins = 0;
    std::vector<std::complex<double>> coefficients;  // X[0..k-1], X[j] = sum_n h[n] e^{-2 pi i j n / N}

    int k() const { return static_cast<int>(coefficients.size()); }
};

// Throws DomainError unless 1 <= k <= N/2 + 1.
FourierCode compress_fourier(std::span<const double> histogram, int k);
FourierCode compress_fourier(std::span<const std::uint32_t> histogram, int k);

// Inverse real DFT with the missing coefficients zeroed; negatives clamp to 0.
std::vector<double> decompress_fourier(const FourierCode& code);

struct FourierFrame {
    CameraIntrinsics intrinsics;
    PulseModel pulse;
    std::uint64_t seed = 0;
    int k = 0;
    std::vector<std::complex<double>> coefficients;  // pixel-major, k per pixel
};

FourierFrame compress_frame(const HistogramFrame& frame, int k, unsigned workers = 0);
RealHistogramFrame decompress_frame(const FourierFrame& frame, unsigned workers = 0);

// SPADFOU1: magic, u32 H, W, N, k, then per pixel k (re, im) binary32 pairs.
// The header carries no timing; read_fourier_frame takes the pulse model.
void write_fourier_frame(const FourierFrame& frame, const std::filesystem::path& path);
FourierFrame read_fourier_frame(const std::filesystem::path& path, const PulseModel& pulse = {});

}  // namespace ppc

#endif  // PPC_FOURIER_HPP_
