// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include "ppc/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>

#include "binary_io.hpp"

namespace ppc {
namespace {

constexpr std::string_view kFourierMagic = "SPADFOU1";

// FFTW planning is not thread-safe; execution with the new-array interface is.
struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

Plans plans_for(int n) {
    static std::mutex mutex;
    static std::map<int, Plans> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    const std::size_t spectrum = static_cast<std::size_t>(n / 2 + 1);
    std::vector<double> real(static_cast<std::size_t>(n));
    std::vector<fftw_complex> cplx(spectrum);
    Plans p;
    p.forward = fftw_plan_dft_r2c_1d(n, real.data(), cplx.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.inverse = fftw_plan_dft_c2r_1d(n, cplx.data(), real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p.forward || !p.inverse) throw Error("FFTW planning failed");
    cache.emplace(n, p);
    return p;
}

void check_k(int k, std::size_t n) {
    if (k < 1 || static_cast<std::size_t>(k) > n / 2 + 1)
        throw DomainError("Fourier k=" + std::to_string(k) + " outside [1, N/2+1] for N=" + std::to_string(n));
}

FourierCode compress_real(std::vector<double> input, int k) {
    const int n = static_cast<int>(input.size());
    check_k(k, input.size());
    std::vector<fftw_complex> spectrum(static_cast<std::size_t>(n / 2 + 1));
    fftw_execute_dft_r2c(plans_for(n).forward, input.data(), spectrum.data());
    FourierCode code;
    code.num_bins = n;
    code.coefficients.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) code.coefficients.emplace_back(spectrum[j][0], spectrum[j][1]);
    return code;
}

}  // namespace

FourierCode compress_fourier(std::span<const double> histogram, int k) {
    return compress_real(std::vector<double>(histogram.begin(), histogram.end()), k);
}

FourierCode compress_fourier(std::span<const std::uint32_t> histogram, int k) {
    return compress_real(std::vector<double>(histogram.begin(), histogram.end()), k);
}

std::vector<double> decompress_fourier(const FourierCode& code) {
    const int n = code.num_bins;
    if (n < 1) throw DomainError("Fourier code has no bins");
    check_k(code.k(), static_cast<std::size_t>(n));
    std::vector<fftw_complex> spectrum(static_cast<std::size_t>(n / 2 + 1));
    for (auto& c : spectrum) c[0] = c[1] = 0.0;
    for (int j = 0; j < code.k(); ++j) {
        spectrum[j][0] = code.coefficients[j].real();
        spectrum[j][1] = code.coefficients[j].imag();
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    fftw_execute_dft_c2r(plans_for(n).inverse, spectrum.data(), out.data());
    for (auto& v : out) v = std::max(0.0, v / n);
    return out;
}

FourierFrame compress_frame(const HistogramFrame& frame, int k, unsigned workers) {
    check_k(k, static_cast<std::size_t>(frame.pulse.num_bins));
    FourierFrame out;
    out.intrinsics = frame.intrinsics;
    out.pulse = frame.pulse;
    out.seed = frame.seed;
    out.k = k;
    out.coefficients.resize(frame.pixel_count() * static_cast<std::size_t>(k));
    plans_for(frame.pulse.num_bins);
    parallel_for(frame.pixel_count(), workers, [&](std::size_t i) {
        const auto code = compress_fourier(frame.pixel(i), k);
        std::copy(code.coefficients.begin(), code.coefficients.end(),
                  out.coefficients.begin() + static_cast<std::ptrdiff_t>(i * k));
    });
    return out;
}

RealHistogramFrame decompress_frame(const FourierFrame& frame, unsigned workers) {
    const std::size_t n = static_cast<std::size_t>(frame.pulse.num_bins);
    check_k(frame.k, n);
    RealHistogramFrame out;
    out.intrinsics = frame.intrinsics;
    out.pulse = frame.pulse;
    out.seed = frame.seed;
    out.values.resize(frame.intrinsics.pixel_count() * n);
    plans_for(frame.pulse.num_bins);
    parallel_for(frame.intrinsics.pixel_count(), workers, [&](std::size_t i) {
        FourierCode code;
        code.num_bins = frame.pulse.num_bins;
        const auto first = frame.coefficients.begin() + static_cast<std::ptrdiff_t>(i * frame.k);
        code.coefficients.assign(first, first + frame.k);
        const auto values = decompress_fourier(code);
        std::copy(values.begin(), values.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * n));
    });
    return out;
}

void write_fourier_frame(const FourierFrame& frame, const std::filesystem::path& path) {
    auto os = detail::open_for_write(path);
    detail::write_magic(os, kFourierMagic);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(frame.intrinsics.height));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(frame.intrinsics.width));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(frame.pulse.num_bins));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(frame.k));
    for (const auto& c : frame.coefficients) {
        detail::put_le<float>(os, static_cast<float>(c.real()));
        detail::put_le<float>(os, static_cast<float>(c.imag()));
    }
    detail::finish_write(os, path);
}

FourierFrame read_fourier_frame(const std::filesystem::path& path, const PulseModel& pulse) {
    auto is = detail::open_for_read(path);
    detail::expect_magic(is, kFourierMagic, path);
    const auto h = detail::get_le<std::uint32_t>(is);
    const auto w = detail::get_le<std::uint32_t>(is);
    const auto n = detail::get_le<std::uint32_t>(is);
    const auto k = detail::get_le<std::uint32_t>(is);
    if (h == 0 || w == 0 || n == 0 || h > (1u << 16) || w > (1u << 16) || n > (1u << 20) || k == 0 || k > n / 2 + 1)
        throw IoError("'" + path.string() + "': implausible Fourier frame header");
    FourierFrame f;
    f.intrinsics = CameraIntrinsics::with_defaults(static_cast<int>(w), static_cast<int>(h));
    f.pulse = pulse;
    f.pulse.num_bins = static_cast<int>(n);
    f.k = static_cast<int>(k);
    f.coefficients.resize(f.intrinsics.pixel_count() * k);
    for (auto& c : f.coefficients) {
        const float re = detail::get_le<float>(is);
        const float im = detail::get_le<float>(is);
        c = {re, im};
    }
    return f;
}

}  // namespace ppc
