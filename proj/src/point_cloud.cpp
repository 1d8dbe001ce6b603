// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include "ppc/point_cloud.hpp"

namespace ppc {

std::vector<Vec3> ProbabilisticPointCloud::positions() const {
    std::vector<Vec3> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.position);
    return out;
}

std::vector<double> ProbabilisticPointCloud::probabilities() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.probability);
    return out;
}

ProbabilisticPointCloud ProbabilisticPointCloud::subset(std::span<const std::size_t> indices) const {
    ProbabilisticPointCloud out;
    out.metadata = metadata;
    out.points.reserve(indices.size());
    for (std::size_t i : indices) out.points.push_back(points.at(i));
    return out;
}

ProbabilisticPointCloud build_ppc(const EstimateGrid& grid) {
    const auto& k = grid.intrinsics;
    if (grid.estimates.size() != k.pixel_count()) throw ValidationError("estimate grid does not match the intrinsics");

    ProbabilisticPointCloud cloud;
    cloud.metadata.seed = grid.seed;
    cloud.metadata.bin_width = grid.pulse.bin_width;
    cloud.metadata.num_bins = grid.pulse.num_bins;
    cloud.metadata.width = k.width;
    cloud.metadata.height = k.height;
    cloud.points.reserve(grid.valid_count());
    for (std::size_t i = 0; i < grid.estimates.size(); ++i) {
        const PixelEstimate& e = grid.estimates[i];
        if (!e.valid) continue;
        const int row = static_cast<int>(i / k.width);
        const int col = static_cast<int>(i % k.width);
        ProbabilisticPoint p;
        // Same formula as unproject(), but a peak in bin 0 (depth 0) is kept
        // as a point at the camera centre rather than rejected.
        p.position = {(col - k.cx) / k.fx * e.depth, (row - k.cy) / k.fy * e.depth, e.depth};
        p.probability = e.probability;
        p.pixel_u = col;
        p.pixel_v = row;
        cloud.points.push_back(p);
    }
    return cloud;
}

}  // namespace ppc
