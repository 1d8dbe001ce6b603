// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// Probabilistic point clouds: one point per valid pixel estimate carrying
// its peak-mass probability and the pixel it came from.

#ifndef PPC_POINT_CLOUD_HPP_
#define PPC_POINT_CLOUD_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppc/histogram_proc.hpp"

namespace ppc {

struct ProbabilisticPoint {
    Vec3 position;
    double probability = 1.0;
    // Source pixel (column, row); -1 when the cloud carries no provenance.
    int pixel_u = -1;
    int pixel_v = -1;

    bool has_pixel() const { return pixel_u >= 0 && pixel_v >= 0; }
};

struct CloudMetadata {
    std::string generator = std::string("ppc-lidar ") + PPC_VERSION;
    std::optional<std::uint64_t> seed;
    std::optional<double> bin_width;
    std::optional<int> num_bins;
    std::optional<int> width;
    std::optional<int> height;
    // Set by read_ply when the file had no probability property and every
    // point defaulted to 1.
    bool probability_defaulted = false;
};

struct ProbabilisticPointCloud {
    std::vector<ProbabilisticPoint> points;
    CloudMetadata metadata;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    std::vector<Vec3> positions() const;
    std::vector<double> probabilities() const;
    // Points at the given indices, in that order, metadata preserved.
    ProbabilisticPointCloud subset(std::span<const std::size_t> indices) const;
};

// One point per valid estimate in row-major pixel order, placed on the
// pixel ray at the estimated depth.
ProbabilisticPointCloud build_ppc(const EstimateGrid& grid);

enum class PlyFormat { kAscii, kBinaryLittleEndian };

// Vertex properties: float x, y, z, probability; ushort pixel_u, pixel_v.
// Metadata goes into "comment ppc <key> <value>" header lines.
void write_ply(const ProbabilisticPointCloud& cloud, const std::filesystem::path& path,
               PlyFormat format = PlyFormat::kBinaryLittleEndian);
// Accepts ASCII and binary little-endian files. Throws IoError on a
// malformed header or missing x/y/z.
ProbabilisticPointCloud read_ply(const std::filesystem::path& path);

}  // namespace ppc

#endif  // PPC_POINT_CLOUD_HPP_
