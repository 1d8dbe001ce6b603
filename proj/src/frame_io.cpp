// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include "binary_io.hpp"
#include "ppc/spad_sim.hpp"

namespace ppc {
namespace {

constexpr std::string_view kCountMagic = "SPADHST1";
constexpr std::string_view kRealMagic = "SPADHRF1";

struct FrameHeader {
    CameraIntrinsics intrinsics;
    PulseModel pulse;
    std::uint64_t seed = 0;
};

void write_header(std::ostream& os, std::string_view magic, const CameraIntrinsics& k, const PulseModel& p,
                  std::uint64_t seed) {
    detail::write_magic(os, magic);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(k.height));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(k.width));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(p.num_bins));
    detail::put_le<double>(os, p.bin_width);
    detail::put_le<double>(os, p.repetition_period);
    detail::put_le<double>(os, p.fwhm);
    detail::put_le<std::uint64_t>(os, seed);
}

FrameHeader read_header(std::istream& is, const std::filesystem::path& path) {
    FrameHeader h;
    const auto height = detail::get_le<std::uint32_t>(is);
    const auto width = detail::get_le<std::uint32_t>(is);
    const auto bins = detail::get_le<std::uint32_t>(is);
    if (height == 0 || width == 0 || bins == 0 || height > (1u << 16) || width > (1u << 16) || bins > (1u << 20))
        throw IoError("'" + path.string() + "': implausible frame dimensions");
    h.intrinsics = CameraIntrinsics::with_defaults(static_cast<int>(width), static_cast<int>(height));
    h.pulse.num_bins = static_cast<int>(bins);
    h.pulse.bin_width = detail::get_le<double>(is);
    h.pulse.repetition_period = detail::get_le<double>(is);
    h.pulse.fwhm = detail::get_le<double>(is);
    h.seed = detail::get_le<std::uint64_t>(is);
    try {
        h.pulse.validate();
    } catch (const ValidationError& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
    return h;
}

}  // namespace

void write_frame(const HistogramFrame& frame, const std::filesystem::path& path) {
    auto os = detail::open_for_write(path);
    write_header(os, kCountMagic, frame.intrinsics, frame.pulse, frame.seed);
    for (std::uint32_t c : frame.counts) detail::put_le<std::uint32_t>(os, c);
    detail::finish_write(os, path);
}

HistogramFrame read_frame(const std::filesystem::path& path) {
    auto is = detail::open_for_read(path);
    detail::expect_magic(is, kCountMagic, path);
    const FrameHeader h = read_header(is, path);
    HistogramFrame frame;
    frame.intrinsics = h.intrinsics;
    frame.pulse = h.pulse;
    frame.seed = h.seed;
    frame.counts.resize(h.intrinsics.pixel_count() * static_cast<std::size_t>(h.pulse.num_bins));
    for (auto& c : frame.counts) c = detail::get_le<std::uint32_t>(is);
    return frame;
}

void write_real_frame(const RealHistogramFrame& frame, const std::filesystem::path& path) {
    auto os = detail::open_for_write(path);
    write_header(os, kRealMagic, frame.intrinsics, frame.pulse, frame.seed);
    for (double v : frame.values) detail::put_le<float>(os, static_cast<float>(v));
    detail::finish_write(os, path);
}

RealHistogramFrame read_real_frame(const std::filesystem::path& path) {
    auto is = detail::open_for_read(path);
    detail::expect_magic(is, kRealMagic, path);
    const FrameHeader h = read_header(is, path);
    RealHistogramFrame frame;
    frame.intrinsics = h.intrinsics;
    frame.pulse = h.pulse;
    frame.seed = h.seed;
    frame.values.resize(h.intrinsics.pixel_count() * static_cast<std::size_t>(h.pulse.num_bins));
    for (auto& v : frame.values) v = detail::get_le<float>(is);
    return frame;
}

}  // namespace ppc
