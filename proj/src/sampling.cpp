// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <limits>
#include <numeric>

#include "ppc/rng.hpp"
#include "ppc/spatial.hpp"

namespace ppc {
namespace {

constexpr std::size_t kBlockSize = 64;

// Spatially coherent blocks of pool positions with their bounding boxes.
// A new sample can only lower min_d2 inside a block whose box is closer
// than the block's current maximum, so most blocks are skipped after the
// first few picks. The selection is identical to the plain O(n * count)
// loop: same distance expression, same lowest-position tie-break.
struct Block {
    std::size_t begin = 0;
    std::size_t end = 0;
    Vec3 lo, hi;
    double max_d2 = 0.0;
    std::size_t arg = 0;  // pool position attaining max_d2, lowest on ties
};

// Morton order of the points over their bounding box, 10 bits per axis.
std::vector<std::size_t> morton_order(std::span<const Vec3> points, const std::vector<std::size_t>& pool) {
    Vec3 lo = points[pool.front()], hi = lo;
    for (std::size_t i : pool) {
        const Vec3& p = points[i];
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    auto quantize = [](double v, double a, double b) -> std::uint64_t {
        if (!(b > a)) return 0;
        return static_cast<std::uint64_t>(std::clamp((v - a) / (b - a) * 1023.0, 0.0, 1023.0));
    };
    auto spread = [](std::uint64_t v) {
        std::uint64_t r = 0;
        for (int bit = 0; bit < 10; ++bit) r |= ((v >> bit) & 1u) << (3 * bit);
        return r;
    };
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed(pool.size());
    for (std::size_t k = 0; k < pool.size(); ++k) {
        const Vec3& p = points[pool[k]];
        keyed[k] = {spread(quantize(p.x, lo.x, hi.x)) | (spread(quantize(p.y, lo.y, hi.y)) << 1) |
                        (spread(quantize(p.z, lo.z, hi.z)) << 2),
                    k};
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::size_t> order(pool.size());
    for (std::size_t k = 0; k < keyed.size(); ++k) order[k] = keyed[k].second;
    return order;
}

double box_distance2(const Vec3& c, const Vec3& lo, const Vec3& hi) {
    const double gx = c.x < lo.x ? lo.x - c.x : (c.x > hi.x ? c.x - hi.x : 0.0);
    const double gy = c.y < lo.y ? lo.y - c.y : (c.y > hi.y ? c.y - hi.y : 0.0);
    const double gz = c.z < lo.z ? lo.z - c.z : (c.z > hi.z ? c.z - hi.z : 0.0);
    return gx * gx + gy * gy + gz * gz;
}

bool better(double v, std::size_t pos, double best, std::size_t best_pos) {
    return v > best || (v == best && pos < best_pos);
}

// Greedy max-min selection of `take` members of `pool` (indices into
// `points`, ascending). min_d2[k] is the squared distance of pool[k] to the
// already selected set; `first` is the pool position chosen when nothing has
// been selected yet. Chosen positions are marked -1 so duplicates of a
// chosen point can still be picked but the point itself cannot.
void greedy_select(std::span<const Vec3> points, const std::vector<std::size_t>& pool, std::vector<double>& min_d2,
                   std::size_t take, std::size_t first, std::vector<std::size_t>& out) {
    if (take == 0) return;
    const std::vector<std::size_t> order = morton_order(points, pool);
    std::vector<Vec3> pos(order.size());
    std::vector<double> d2(order.size());
    for (std::size_t s = 0; s < order.size(); ++s) {
        pos[s] = points[pool[order[s]]];
        d2[s] = min_d2[order[s]];
    }

    std::vector<Block> blocks;
    for (std::size_t b = 0; b < order.size(); b += kBlockSize) {
        Block blk;
        blk.begin = b;
        blk.end = std::min(order.size(), b + kBlockSize);
        blk.lo = blk.hi = pos[b];
        for (std::size_t s = b; s < blk.end; ++s) {
            const Vec3& p = pos[s];
            blk.lo = {std::min(blk.lo.x, p.x), std::min(blk.lo.y, p.y), std::min(blk.lo.z, p.z)};
            blk.hi = {std::max(blk.hi.x, p.x), std::max(blk.hi.y, p.y), std::max(blk.hi.z, p.z)};
        }
        blocks.push_back(blk);
    }
    auto rescan = [&](Block& blk) {
        blk.max_d2 = -2.0;
        blk.arg = std::numeric_limits<std::size_t>::max();
        for (std::size_t s = blk.begin; s < blk.end; ++s)
            if (better(d2[s], order[s], blk.max_d2, blk.arg)) {
                blk.max_d2 = d2[s];
                blk.arg = order[s];
            }
    };
    for (auto& blk : blocks) rescan(blk);

    std::vector<std::size_t> slot_of(order.size());
    for (std::size_t s = 0; s < order.size(); ++s) slot_of[order[s]] = s;

    auto argmax = [&] {
        double best = -3.0;
        std::size_t best_pos = std::numeric_limits<std::size_t>::max();
        for (const auto& blk : blocks)
            if (better(blk.max_d2, blk.arg, best, best_pos)) {
                best = blk.max_d2;
                best_pos = blk.arg;
            }
        return best_pos;
    };

    std::size_t next = out.empty() ? first : argmax();
    for (std::size_t step = 0;; ++step) {
        out.push_back(pool[next]);
        const std::size_t chosen_slot = slot_of[next];
        d2[chosen_slot] = -1.0;
        rescan(blocks[chosen_slot / kBlockSize]);
        if (step + 1 == take) break;

        const Vec3 c = pos[chosen_slot];
        for (auto& blk : blocks) {
            // Shrunk by a relative 1e-9 against rounding in the box bound.
            if (box_distance2(c, blk.lo, blk.hi) * (1.0 - 1e-9) >= blk.max_d2) continue;
            bool changed = false;
            for (std::size_t s = blk.begin; s < blk.end; ++s) {
                if (d2[s] < 0.0) continue;
                const double d = squared_distance(pos[s], c);
                if (d < d2[s]) {
                    d2[s] = d;
                    changed = true;
                }
            }
            if (changed) rescan(blk);
        }
        next = argmax();
    }
    for (std::size_t s = 0; s < order.size(); ++s) min_d2[order[s]] = d2[s];
}

}  // namespace

std::vector<std::size_t> fps(std::span<const Vec3> points, std::size_t count, std::size_t start) {
    if (count > points.size()) throw ValidationError("FPS: count exceeds the number of points");
    std::vector<std::size_t> out;
    if (count == 0) return out;
    if (start >= points.size()) throw ValidationError("FPS: start index out of range");
    std::vector<std::size_t> pool(points.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::vector<double> min_d2(points.size(), std::numeric_limits<double>::infinity());
    out.reserve(count);
    greedy_select(points, pool, min_d2, count, start, out);
    return out;
}

void FppsParams::validate() const {
    if (!(beta >= 0.0) || beta > 1.0) throw ValidationError("FPPS beta must be in [0, 1]");
    if (count < 1) throw ValidationError("FPPS count must be >= 1");
}

std::vector<std::size_t> fpps(const ProbabilisticPointCloud& cloud, const FppsParams& params,
                              std::optional<std::size_t> start) {
    params.validate();
    if (cloud.empty()) throw ValidationError("FPPS: empty cloud");
    if (params.count > cloud.size()) throw ValidationError("FPPS: count exceeds the number of points");

    std::vector<std::size_t> candidates, others;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        (cloud.points[i].probability >= params.beta ? candidates : others).push_back(i);

    const auto positions = cloud.positions();
    std::vector<std::size_t> out;
    out.reserve(params.count);

    const std::size_t take = std::min(params.count, candidates.size());
    if (take > 0) {
        std::size_t first = 0;
        if (start) {
            const auto it = std::lower_bound(candidates.begin(), candidates.end(), *start);
            if (it == candidates.end() || *it != *start) throw ValidationError("FPPS: start is not a candidate point");
            first = static_cast<std::size_t>(it - candidates.begin());
        }
        std::vector<double> min_d2(candidates.size(), std::numeric_limits<double>::infinity());
        greedy_select(positions, candidates, min_d2, take, first, out);
    }

    const std::size_t deficit = params.count - out.size();
    if (deficit > 0) {
        // Highest-probability non-candidates, ties by index, then visited in
        // farthest-point order relative to what is already selected.
        std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
            return cloud.points[a].probability > cloud.points[b].probability;
        });
        std::vector<std::size_t> fill(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(deficit));
        std::sort(fill.begin(), fill.end());
        std::vector<double> min_d2(fill.size(), std::numeric_limits<double>::infinity());
        for (std::size_t k = 0; k < fill.size(); ++k)
            for (std::size_t s : out) min_d2[k] = std::min(min_d2[k], squared_distance(positions[fill[k]], positions[s]));
        greedy_select(positions, fill, min_d2, deficit, 0, out);
    }
    return out;
}

std::size_t random_start(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ValidationError("random start on an empty set");
    PhiloxStream rng(seed, 0x5350'5354'4152'5400ULL, 0);  // fixed stream id for start selection
    return static_cast<std::size_t>(rng.next_u64() % n);
}

}  // namespace ppc
