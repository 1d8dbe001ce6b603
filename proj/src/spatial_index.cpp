// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <limits>
#include <numeric>

#include "ppc/spatial.hpp"

namespace ppc {
namespace {

constexpr std::uint32_t kLeafSize = 24;
// Largest candidate set shared by the queries of one leaf.
constexpr std::size_t kMaxShared = 4096;

// Lower bounds are shrunk by a relative 1e-9 so rounding never prunes a
// subtree holding a point the exact comparison would accept.
constexpr double kShrink = 1.0 - 1e-9;

double coord(const Vec3& p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }

// Keeps the `keep` smallest (d2, index) pairs of `hits`, preserving their
// relative order.
void keep_nearest(std::vector<SpatialIndex::Neighbor>& hits, std::size_t keep, std::vector<double>& scratch,
                  std::vector<std::size_t>& ties) {
    scratch.clear();
    for (const auto& h : hits) scratch.push_back(h.first);
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(keep - 1), scratch.end());
    const double kth = scratch[keep - 1];
    std::size_t below = 0;
    ties.clear();
    for (const auto& h : hits) {
        if (h.first < kth) ++below;
        else if (h.first == kth) ties.push_back(h.second);
    }
    // Ties at the cut go to the lowest indices.
    const std::size_t take = keep - below;
    std::nth_element(ties.begin(), ties.begin() + static_cast<std::ptrdiff_t>(take - 1), ties.end());
    const std::size_t last_id = ties[take - 1];
    std::size_t out = 0;
    for (const auto& h : hits)
        if (h.first < kth || (h.first == kth && h.second <= last_id)) hits[out++] = h;
    hits.resize(out);
}

}  // namespace

SpatialIndex::SpatialIndex(std::span<const Vec3> points) {
    if (points.size() >= std::numeric_limits<std::uint32_t>::max())
        throw ValidationError("spatial index: too many points");
    for (const auto& p : points)
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw ValidationError("spatial index: non-finite point");
    pts_.assign(points.begin(), points.end());
    ids_.resize(points.size());
    std::iota(ids_.begin(), ids_.end(), std::size_t{0});
    if (!pts_.empty()) {
        nodes_.reserve(2 * (pts_.size() / kLeafSize + 1));
        build(0, static_cast<std::uint32_t>(pts_.size()));
    }
    xs_.reserve(pts_.size());
    ys_.reserve(pts_.size());
    zs_.reserve(pts_.size());
    for (const Vec3& p : pts_) {
        xs_.push_back(p.x);
        ys_.push_back(p.y);
        zs_.push_back(p.z);
    }
}

std::uint32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) {
        leaves_.push_back(id);
        return id;
    }

    Vec3 lo = pts_[begin], hi = lo;
    for (std::uint32_t k = begin; k < end; ++k) {
        const Vec3& p = pts_[k];
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    const double ext[3] = {hi.x - lo.x, hi.y - lo.y, hi.z - lo.z};
    const int axis = static_cast<int>(std::max_element(ext, ext + 3) - ext);
    if (!(ext[axis] > 0.0)) {  // all points coincide
        leaves_.push_back(id);
        return id;
    }

    // Sort a permutation so the point and id arrays move together.
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::vector<std::uint32_t> perm(end - begin);
    std::iota(perm.begin(), perm.end(), begin);
    std::nth_element(perm.begin(), perm.begin() + (mid - begin), perm.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double ca = coord(pts_[a], axis), cb = coord(pts_[b], axis);
        return ca < cb || (ca == cb && a < b);
    });
    std::vector<Vec3> p(perm.size());
    std::vector<std::size_t> ids(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
        p[k] = pts_[perm[k]];
        ids[k] = ids_[perm[k]];
    }
    std::copy(p.begin(), p.end(), pts_.begin() + begin);
    std::copy(ids.begin(), ids.end(), ids_.begin() + begin);

    // Left holds coordinates <= split, right >= split.
    const double split = coord(pts_[mid], axis);
    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    Node& n = nodes_[id];
    n.axis = axis;
    n.split = split;
    n.left = left;
    n.right = right;
    return id;
}

inline void SpatialIndex::KnnState::accept(const Neighbor& cand) {
    out.push_back(cand);
    if (out.size() == cap) {
        limit = *std::max_element(out.begin(), out.end());
    } else if (out.size() == 2 * cap) {
        std::nth_element(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(cap - 1), out.end());
        out.resize(cap);
        limit = out.back();
    }
}

void SpatialIndex::search(std::uint32_t node, const Vec3& query, double bound2, std::optional<std::size_t> exclude,
                          double gap[3], KnnState& state) const {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
        // Same expression as squared_distance(), written over the
        // coordinate arrays so the loop vectorises.
        // Leaves of coincident points may exceed kLeafSize; go in chunks.
        double d2[kLeafSize];
        for (std::uint32_t base = n.begin; base < n.end; base += kLeafSize) {
            const std::uint32_t count = std::min(kLeafSize, n.end - base);
            const double* xs = xs_.data() + base;
            const double* ys = ys_.data() + base;
            const double* zs = zs_.data() + base;
            for (std::uint32_t k = 0; k < count; ++k) {
                const double dx = xs[k] - query.x;
                const double dy = ys[k] - query.y;
                const double dz = zs[k] - query.z;
                d2[k] = dx * dx + dy * dy + dz * dz;
            }
            for (std::uint32_t k = 0; k < count; ++k) {
                if (d2[k] > state.limit.first) continue;
                const Neighbor cand{d2[k], ids_[base + k]};
                if (!(cand < state.limit)) continue;
                if (exclude && *exclude == cand.second) continue;
                state.accept(cand);
            }
        }
        return;
    }
    const double diff = coord(query, n.axis) - n.split;
    const std::uint32_t near = diff <= 0.0 ? n.left : n.right;
    const std::uint32_t far = diff <= 0.0 ? n.right : n.left;
    search(near, query, bound2, exclude, gap, state);

    // Box distance to the far child: replace this axis' gap by |diff|.
    const double old_gap = gap[n.axis];
    const double far_bound2 = bound2 - old_gap * old_gap + diff * diff;
    if (far_bound2 * kShrink > state.limit.first) return;
    gap[n.axis] = std::abs(diff);
    search(far, query, far_bound2, exclude, gap, state);
    gap[n.axis] = old_gap;
}

void SpatialIndex::nearest_in_ball(const Vec3& query, double radius, std::size_t max_neighbors,
                                   std::optional<std::size_t> exclude, std::vector<Neighbor>& out,
                                   double bound2) const {
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw ValidationError("ball query radius must be finite and >= 0");
    out.clear();
    if (nodes_.empty() || max_neighbors == 0) return;
    double gap[3] = {0.0, 0.0, 0.0};
    const double r2 = radius * radius;
    KnnState state{max_neighbors, {std::min(r2, bound2), std::numeric_limits<std::size_t>::max()}, out};
    search(0, query, 0.0, exclude, gap, state);
    if (out.size() > max_neighbors) {
        std::nth_element(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(max_neighbors - 1), out.end());
        out.resize(max_neighbors);
    }
    std::sort(out.begin(), out.end());
}

void SpatialIndex::gather(std::uint32_t node, const Vec3& lo, const Vec3& hi, double reach2, double bound2,
                          double gap[3], std::vector<std::uint32_t>& out) const {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
        for (std::uint32_t s = n.begin; s < n.end; ++s) {
            const Vec3& p = pts_[s];
            const double gx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
            const double gy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
            const double gz = std::max({lo.z - p.z, 0.0, p.z - hi.z});
            if (gx * gx + gy * gy + gz * gz <= reach2) out.push_back(s);
        }
        return;
    }
    const double old_gap = gap[n.axis];
    // Left subtree coordinates are <= split, right ones >= split.
    const double child_gap[2] = {coord(lo, n.axis) - n.split, n.split - coord(hi, n.axis)};
    const std::uint32_t child[2] = {n.left, n.right};
    for (int c = 0; c < 2; ++c) {
        const double g = std::max(old_gap, child_gap[c]);
        const double b2 = bound2 - old_gap * old_gap + g * g;
        if (b2 * kShrink > reach2) continue;
        gap[n.axis] = g;
        gather(child[c], lo, hi, reach2, b2, gap, out);
        gap[n.axis] = old_gap;
    }
}

void SpatialIndex::self_nearest(std::size_t first_leaf, std::size_t last_leaf, double radius,
                                std::size_t max_neighbors, bool include_self,
                                const std::function<void(std::size_t, const std::vector<Neighbor>&)>& fn) const {
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw ValidationError("ball query radius must be finite and >= 0");
    last_leaf = std::min(last_leaf, leaves_.size());
    const double r2 = radius * radius;
    constexpr double kGrow = 1.0 + 1e-9;

    std::vector<Neighbor> hits;
    std::vector<std::uint32_t> slots;
    std::vector<double> cx, cy, cz, d2;
    std::vector<std::size_t> cid;
    std::vector<std::uint32_t> sel;
    std::vector<double> scratch;
    std::vector<std::size_t> ties;

    // Completed queries that found a full set of L: the L points within
    // `reach` of `at` lie within reach + |q - at| of any q.
    struct Anchor {
        Vec3 at;
        double reach;
    };
    std::optional<Anchor> prev;    // most recent, carried across leaves
    std::vector<Anchor> anchors;  // those of the current leaf
    auto bound2 = [&](const Vec3& q) {
        double best = prev ? prev->reach + norm(q - prev->at) : std::numeric_limits<double>::infinity();
        for (const Anchor& a : anchors) best = std::min(best, a.reach + norm(q - a.at));
        best *= kGrow;
        return best * best;
    };
    auto finish = [&](std::uint32_t s) {
        if (max_neighbors > 0 && hits.size() == max_neighbors) {
            double far2 = 0.0;
            for (const auto& h : hits) far2 = std::max(far2, h.first);
            prev = Anchor{pts_[s], std::sqrt(far2)};
            anchors.push_back(*prev);
        }
        fn(ids_[s], hits);
    };

    if (max_neighbors == 0) {
        for (std::size_t leaf = first_leaf; leaf < last_leaf; ++leaf)
            for (std::uint32_t s = nodes_[leaves_[leaf]].begin; s < nodes_[leaves_[leaf]].end; ++s) finish(s);
        return;
    }
    for (std::size_t leaf = first_leaf; leaf < last_leaf; ++leaf) {
        const Node& n = nodes_[leaves_[leaf]];
        Vec3 lo = pts_[n.begin], hi = lo;
        for (std::uint32_t s = n.begin; s < n.end; ++s) {
            const Vec3& p = pts_[s];
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        }
        // The first query runs alone; its result then bounds every other
        // query of the leaf: their answers lie within `reach` of the box.
        std::uint32_t first = n.begin;
        anchors.clear();
        {
            const auto exclude = include_self ? std::nullopt : std::optional<std::size_t>(ids_[first]);
            nearest_in_ball(pts_[first], radius, max_neighbors, exclude, hits, bound2(pts_[first]));
            finish(first);
            ++first;
        }
        if (first == n.end) continue;
        double reach = radius;
        if (prev) {
            const Vec3 far{std::max(std::abs(prev->at.x - lo.x), std::abs(prev->at.x - hi.x)),
                           std::max(std::abs(prev->at.y - lo.y), std::abs(prev->at.y - hi.y)),
                           std::max(std::abs(prev->at.z - lo.z), std::abs(prev->at.z - hi.z))};
            reach = std::min(radius, (prev->reach + norm(far)) * kGrow);
        }

        bool shared = norm(hi - lo) <= reach;
        if (shared) {
            slots.clear();
            double gap[3] = {0.0, 0.0, 0.0};
            gather(0, lo, hi, reach * reach * kGrow, 0.0, gap, slots);
            shared = slots.size() <= kMaxShared;
        }
        if (!shared) {
            // Spread-out leaf in a dense region: separate searches are cheaper.
            for (std::uint32_t s = first; s < n.end; ++s) {
                const auto exclude = include_self ? std::nullopt : std::optional<std::size_t>(ids_[s]);
                nearest_in_ball(pts_[s], radius, max_neighbors, exclude, hits, bound2(pts_[s]));
                finish(s);
            }
            continue;
        }
        const std::size_t m = slots.size();
        cx.resize(m);
        cy.resize(m);
        cz.resize(m);
        cid.resize(m);
        d2.resize(m);
        sel.resize(m + 1);
        for (std::size_t k = 0; k < m; ++k) {
            cx[k] = xs_[slots[k]];
            cy[k] = ys_[slots[k]];
            cz[k] = zs_[slots[k]];
            cid[k] = ids_[slots[k]];
        }

        for (std::uint32_t s = first; s < n.end; ++s) {
            const Vec3 q = pts_[s];
            const double b2 = std::min(r2, bound2(q));
            const double limit = std::min(b2, r2);
            // Same expression as squared_distance(); branch-free compaction
            // of the candidates within the limit.
            std::size_t count = 0;
            for (std::size_t k = 0; k < m; ++k) {
                const double dx = cx[k] - q.x;
                const double dy = cy[k] - q.y;
                const double dz = cz[k] - q.z;
                const double dd = dx * dx + dy * dy + dz * dz;
                d2[k] = dd;
                sel[count] = static_cast<std::uint32_t>(k);
                count += dd <= limit ? 1 : 0;
            }
            const std::size_t self = include_self ? std::numeric_limits<std::size_t>::max() : ids_[s];
            hits.clear();
            for (std::size_t c = 0; c < count; ++c) {
                const std::uint32_t k = sel[c];
                if (cid[k] != self) hits.emplace_back(d2[k], cid[k]);
            }
            if (hits.size() > max_neighbors) keep_nearest(hits, max_neighbors, scratch, ties);
            finish(s);
        }
    }
}

std::vector<std::size_t> SpatialIndex::ball_query(const Vec3& query, double radius, std::size_t max_neighbors,
                                                  std::optional<std::size_t> exclude) const {
    std::vector<Neighbor> hits;
    nearest_in_ball(query, radius, max_neighbors, exclude, hits);
    std::vector<std::size_t> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back(h.second);
    return out;
}

}  // namespace ppc
