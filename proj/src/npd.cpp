// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "ppc/spatial.hpp"

namespace ppc {

void NpdParams::validate() const {
    if (max_neighbors < 1) throw ValidationError("max neighbours L must be >= 1");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("ball radius r must be positive");
    if (!(alpha >= 0.0)) throw ValidationError("NPD threshold alpha must be >= 0");
}

std::vector<double> npd_scores(const ProbabilisticPointCloud& cloud, const NpdParams& params, unsigned workers) {
    params.validate();
    for (const auto& p : cloud.points)
        if (!(p.probability >= 0.0) || p.probability > 1.0) throw ValidationError("point probability outside [0, 1]");

    const auto positions = cloud.positions();
    const SpatialIndex index(positions);
    const double inv_l = 1.0 / static_cast<double>(params.max_neighbors);

    std::vector<double> scores(cloud.size(), 0.0);
    const std::size_t leaves_per_task = 64;
    const std::size_t tasks = (index.leaf_count() + leaves_per_task - 1) / leaves_per_task;
    parallel_for(tasks, workers, [&](std::size_t t) {
        index.self_nearest(t * leaves_per_task, (t + 1) * leaves_per_task, params.radius, params.max_neighbors,
                           params.include_self, [&](std::size_t i, const std::vector<SpatialIndex::Neighbor>& hits) {
                               // Summation order is fixed by the point set and the task split,
                               // never by the worker count.
                               double sum = 0.0;
                               for (const auto& h : hits) sum += cloud.points[h.second].probability;
                               scores[i] = sum * inv_l;
                           });
    });
    return scores;
}

NpdFilterResult npd_filter(const ProbabilisticPointCloud& cloud, const NpdParams& params, unsigned workers) {
    NpdFilterResult r;
    r.scores = npd_scores(cloud, params, workers);
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (r.scores[i] >= params.alpha) r.kept.push_back(i);
    r.cloud = cloud.subset(r.kept);
    return r;
}

}  // namespace ppc
