// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include "ppc/scene.hpp"

#include <cmath>
#include <limits>

namespace ppc {
namespace {

constexpr double kHitEpsilon = 1e-9;

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

Vec3 normalized(const Vec3& a) { return (1.0 / norm(a)) * a; }

struct PlaneFrame {
    Vec3 n, u, v;
};

PlaneFrame plane_frame(const PlanePrimitive& p) {
    const Vec3 n = normalized(p.normal);
    const Vec3 hint = std::abs(n.y) < 0.9 ? Vec3{0.0, 1.0, 0.0} : Vec3{1.0, 0.0, 0.0};
    const Vec3 u = normalized(cross(hint, n));
    return {n, u, cross(n, u)};
}

std::optional<double> intersect_plane(const PlanePrimitive& p, const Vec3& o, const Vec3& d) {
    const PlaneFrame f = plane_frame(p);
    const double denom = dot(d, f.n);
    if (std::abs(denom) < 1e-15) return std::nullopt;
    const double t = dot(p.center - o, f.n) / denom;
    if (!(t > kHitEpsilon)) return std::nullopt;
    const Vec3 local = (o + t * d) - p.center;
    if (std::abs(dot(local, f.u)) > 0.5 * p.size_u + kHitEpsilon) return std::nullopt;
    if (std::abs(dot(local, f.v)) > 0.5 * p.size_v + kHitEpsilon) return std::nullopt;
    return t;
}

std::optional<double> intersect_box(const BoxPrimitive& b, const Vec3& o, const Vec3& d) {
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    const double origin[3] = {o.x, o.y, o.z};
    const double dir[3] = {d.x, d.y, d.z};
    const double lo[3] = {b.min_corner.x, b.min_corner.y, b.min_corner.z};
    const double hi[3] = {b.max_corner.x, b.max_corner.y, b.max_corner.z};
    for (int a = 0; a < 3; ++a) {
        if (dir[a] == 0.0) {
            if (origin[a] < lo[a] || origin[a] > hi[a]) return std::nullopt;
            continue;
        }
        double t0 = (lo[a] - origin[a]) / dir[a];
        double t1 = (hi[a] - origin[a]) / dir[a];
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
    }
    if (tmin > tmax) return std::nullopt;
    if (tmin > kHitEpsilon) return tmin;
    if (tmax > kHitEpsilon) return tmax;
    return std::nullopt;
}

std::optional<double> intersect_sphere(const SpherePrimitive& s, const Vec3& o, const Vec3& d) {
    const Vec3 oc = o - s.center;
    const double a = dot(d, d);
    const double half_b = dot(d, oc);
    const double c = dot(oc, oc) - s.radius * s.radius;
    const double disc = half_b * half_b - a * c;
    if (disc < 0.0) return std::nullopt;
    const double root = std::sqrt(disc);
    const double t_near = (-half_b - root) / a;
    if (t_near > kHitEpsilon) return t_near;
    const double t_far = (-half_b + root) / a;
    if (t_far > kHitEpsilon) return t_far;
    return std::nullopt;
}

bool positive_albedo(double a) { return a > 0.0 && a <= 1.0; }

}  // namespace

CameraIntrinsics CameraIntrinsics::with_defaults(int width, int height) {
    return {width, height, static_cast<double>(width), static_cast<double>(width), width / 2.0, height / 2.0};
}

void CameraIntrinsics::validate() const {
    if (width < 1 || height < 1) throw ValidationError("camera width and height must be >= 1");
    if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("camera focal lengths must be positive");
    if (!std::isfinite(cx) || !std::isfinite(cy)) throw ValidationError("camera principal point must be finite");
}

ImagePoint project(const Vec3& point, const CameraIntrinsics& k) {
    if (!(point.z > 0.0)) throw DomainError("project: point must have positive z");
    return {k.fx * point.x / point.z + k.cx, k.fy * point.y / point.z + k.cy, point.z};
}

Vec3 unproject(double u, double v, double depth, const CameraIntrinsics& k) {
    if (!(depth > 0.0)) throw DomainError("unproject: depth must be positive");
    return {(u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth};
}

void SceneSpec::validate() const {
    for (std::size_t i = 0; i < primitives.size(); ++i) {
        const std::string where = "primitive " + std::to_string(i) + ": ";
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if (!positive_albedo(p.albedo)) throw ValidationError(where + "albedo must be in (0, 1]");
                if constexpr (std::is_same_v<T, PlanePrimitive>) {
                    if (!(p.size_u > 0.0) || !(p.size_v > 0.0)) throw ValidationError(where + "plane size must be positive");
                    if (!(norm(p.normal) > 0.0)) throw ValidationError(where + "plane normal must be non-zero");
                } else if constexpr (std::is_same_v<T, BoxPrimitive>) {
                    if (!(p.max_corner.x > p.min_corner.x) || !(p.max_corner.y > p.min_corner.y) ||
                        !(p.max_corner.z > p.min_corner.z))
                        throw ValidationError(where + "box extents must be positive");
                } else {
                    if (!(p.radius > 0.0) || !std::isfinite(p.radius)) throw ValidationError(where + "sphere radius must be positive");
                }
            },
            primitives[i]);
    }
    if (background_depth && !(*background_depth > 0.0)) throw ValidationError("background depth must be positive");
    if (!positive_albedo(background_albedo)) throw ValidationError("background albedo must be in (0, 1]");
    if (camera) camera->validate();
}

double implicit_value(const Primitive& primitive, const Vec3& point) {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PlanePrimitive>) {
                return dot(point - p.center, normalized(p.normal));
            } else if constexpr (std::is_same_v<T, BoxPrimitive>) {
                const Vec3 c = 0.5 * (p.min_corner + p.max_corner);
                const Vec3 h = 0.5 * (p.max_corner - p.min_corner);
                const Vec3 q{std::abs(point.x - c.x) - h.x, std::abs(point.y - c.y) - h.y, std::abs(point.z - c.z) - h.z};
                const Vec3 outside{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
                return norm(outside) + std::min(std::max({q.x, q.y, q.z}), 0.0);
            } else {
                return norm(point - p.center) - p.radius;
            }
        },
        primitive);
}

std::optional<double> intersect(const Primitive& primitive, const Vec3& origin, const Vec3& dir) {
    return std::visit(
        [&](const auto& p) -> std::optional<double> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PlanePrimitive>) return intersect_plane(p, origin, dir);
            else if constexpr (std::is_same_v<T, BoxPrimitive>) return intersect_box(p, origin, dir);
            else return intersect_sphere(p, origin, dir);
        },
        primitive);
}

std::size_t DepthMap::valid_count() const {
    std::size_t n = 0;
    for (float d : depth) n += is_sentinel(d) ? 0 : 1;
    return n;
}

RenderedScene render_scene(const SceneSpec& spec, const CameraIntrinsics& intrinsics, unsigned workers) {
    spec.validate();
    intrinsics.validate();

    RenderedScene out;
    out.depth.intrinsics = intrinsics;
    out.depth.depth.assign(intrinsics.pixel_count(), kNoReturn);
    out.albedo.width = intrinsics.width;
    out.albedo.height = intrinsics.height;
    out.albedo.albedo.assign(intrinsics.pixel_count(), kNoReturn);

    const Vec3 origin{};
    parallel_for(intrinsics.pixel_count(), workers, [&](std::size_t idx) {
        const int row = static_cast<int>(idx / intrinsics.width);
        const int col = static_cast<int>(idx % intrinsics.width);
        // z-component 1 so the ray parameter is the z-depth.
        const Vec3 dir{(col - intrinsics.cx) / intrinsics.fx, (row - intrinsics.cy) / intrinsics.fy, 1.0};

        double best = std::numeric_limits<double>::infinity();
        double albedo = 0.0;
        for (const auto& prim : spec.primitives) {
            const auto t = intersect(prim, origin, dir);
            if (t && *t < best) {
                best = *t;
                albedo = std::visit([](const auto& p) { return p.albedo; }, prim);
            }
        }
        if (std::isfinite(best)) {
            out.depth.depth[idx] = static_cast<float>(best);
            out.albedo.albedo[idx] = static_cast<float>(albedo);
        } else if (spec.background_depth) {
            out.depth.depth[idx] = static_cast<float>(*spec.background_depth);
            out.albedo.albedo[idx] = static_cast<float>(spec.background_albedo);
        }
    });
    return out;
}

SceneSpec standard_scene() {
    SceneSpec s;
    // Room shell: x in [-2.5, 2.5], y in [-1.5, 1.2] (y down), back wall at z = 6.
    s.primitives.push_back(PlanePrimitive{{0.0, -0.15, 6.0}, {0.0, 0.0, -1.0}, 5.1, 2.8, 0.7});
    s.primitives.push_back(PlanePrimitive{{0.0, 1.2, 3.0}, {0.0, -1.0, 0.0}, 6.1, 5.1, 0.5});
    s.primitives.push_back(PlanePrimitive{{0.0, -1.5, 3.0}, {0.0, 1.0, 0.0}, 6.1, 5.1, 0.8});
    s.primitives.push_back(PlanePrimitive{{-2.5, -0.15, 3.0}, {1.0, 0.0, 0.0}, 6.1, 2.8, 0.6});
    s.primitives.push_back(PlanePrimitive{{2.5, -0.15, 3.0}, {-1.0, 0.0, 0.0}, 6.1, 2.8, 0.6});
    // Furniture.
    s.primitives.push_back(BoxPrimitive{{-1.2, 0.45, 2.8}, {0.4, 1.2, 3.6}, 0.4});
    s.primitives.push_back(BoxPrimitive{{1.2, -0.2, 4.0}, {2.2, 1.2, 5.0}, 0.3});
    s.primitives.push_back(SpherePrimitive{{1.0, 0.8, 2.5}, 0.4, 0.9});
    s.primitives.push_back(SpherePrimitive{{-1.5, -0.3, 4.2}, 0.5, 0.35});
    return s;
}

}  // namespace ppc
