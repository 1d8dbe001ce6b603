// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// Neighbourhood queries and the probability-aware point operators:
//
//   NPD(p_i) = sum_{p_j in BQ_{L,r}(p_i)} Pr(p_j) / L
//
// where BQ_{L,r} returns up to L points within radius r. Dense neighbourhoods
// score their mean probability; sparse ones (fewer than L neighbours) are
// penalised by the fixed 1/L normalisation.
//
// FPPS runs farthest point sampling over the candidate set {i : Pr_i >= beta}
// while the low-probability points stay in the cloud.

#ifndef PPC_SPATIAL_HPP_
#define PPC_SPATIAL_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <span>
#include <unordered_map>
#include <vector>

#include "ppc/point_cloud.hpp"

namespace ppc {

// Static kd-tree (median splits on the widest axis, small leaves) answering
// bounded-radius nearest-neighbour queries.
class SpatialIndex {
  public:
    using Neighbor = std::pair<double, std::size_t>;  // (squared distance, index)

    explicit SpatialIndex(std::span<const Vec3> points);

    // Up to max_neighbors indices within distance <= radius of `query`,
    // ordered by (distance, index). When more candidates exist the nearest
    // ones are kept. `exclude` drops one index (the query point itself).
    std::vector<std::size_t> ball_query(const Vec3& query, double radius, std::size_t max_neighbors,
                                        std::optional<std::size_t> exclude = std::nullopt) const;

    // Same query, writing (d2, index) pairs sorted by (d2, index) into `out`.
    // `bound2` may carry a known upper bound on the squared distance of the
    // max_neighbors-th nearest point; it only speeds up the search.
    void nearest_in_ball(const Vec3& query, double radius, std::size_t max_neighbors,
                         std::optional<std::size_t> exclude, std::vector<Neighbor>& out,
                         double bound2 = std::numeric_limits<double>::infinity()) const;

    // Queries centred on the indexed points themselves, for the points of
    // leaves [first_leaf, last_leaf). Calls fn(index, hits) with the same set
    // nearest_in_ball(point, radius, max_neighbors, self-or-none) returns, in
    // an unspecified order that depends only on the point set and the range.
    // Queries of a leaf share one candidate gather, bounded through the
    // previous result: the L points within R of q' lie within R + |q - q'|
    // of q.
    void self_nearest(std::size_t first_leaf, std::size_t last_leaf, double radius, std::size_t max_neighbors,
                      bool include_self,
                      const std::function<void(std::size_t, const std::vector<Neighbor>&)>& fn) const;

    std::size_t size() const { return ids_.size(); }
    std::size_t leaf_count() const { return leaves_.size(); }

  private:
    struct Node {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        int axis = -1;  // -1 for leaves
        double split = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
    };

    // Candidate buffer compacted to the `cap` smallest whenever it reaches
    // 2 * cap; only pairs below `limit` can still make the final set.
    struct KnnState {
        std::size_t cap;
        Neighbor limit;
        std::vector<Neighbor>& out;
        void accept(const Neighbor& cand);
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::uint32_t node, const Vec3& query, double bound2, std::optional<std::size_t> exclude,
                double gap[3], KnnState& state) const;
    // Tree slots of points within sqrt(reach2) of the box [lo, hi].
    void gather(std::uint32_t node, const Vec3& lo, const Vec3& hi, double reach2, double bound2, double gap[3],
                std::vector<std::uint32_t>& out) const;

    std::vector<Vec3> pts_;         // positions in tree order
    std::vector<double> xs_, ys_, zs_;
    std::vector<std::size_t> ids_;  // original index of pts_[k]
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> leaves_;  // leaf node ids in tree order
};

struct NpdParams {
    std::size_t max_neighbors = 64;  // L
    double radius = 0.2;             // r, metres
    double alpha = 0.003;            // keep points with score >= alpha
    bool include_self = true;        // whether BQ(p_i) may return p_i

    void validate() const;
};

std::vector<double> npd_scores(const ProbabilisticPointCloud& cloud, const NpdParams& params = {},
                               unsigned workers = 0);

struct NpdFilterResult {
    ProbabilisticPointCloud cloud;      // kept points, original order
    std::vector<std::size_t> kept;      // their indices in the input
    std::vector<double> scores;         // score of every input point
};

NpdFilterResult npd_filter(const ProbabilisticPointCloud& cloud, const NpdParams& params = {}, unsigned workers = 0);

// Greedy max-min farthest point sampling starting from `start`; ties pick the
// lowest index. Throws ValidationError when count > points.size() or start is
// out of range.
std::vector<std::size_t> fps(std::span<const Vec3> points, std::size_t count, std::size_t start = 0);

struct FppsParams {
    double beta = 0.01;      // candidates have probability >= beta
    std::size_t count = 1024;

    void validate() const;
};

// FPS over the candidate set, starting at the lowest-index candidate unless
// `start` (a candidate index into the cloud) is given. When fewer than
// `count` candidates exist, the highest-probability non-candidates fill the
// remaining slots, appended in farthest-point order.
std::vector<std::size_t> fpps(const ProbabilisticPointCloud& cloud, const FppsParams& params,
                              std::optional<std::size_t> start = std::nullopt);

// Deterministic pseudo-random start index for FPS/FPPS ("random start" mode).
std::size_t random_start(std::size_t n, std::uint64_t seed);

}  // namespace ppc

#endif  // PPC_SPATIAL_HPP_
