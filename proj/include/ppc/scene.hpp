// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic ground truth: pinhole camera model, procedural scenes of planes,
// boxes and spheres, and the depth / albedo maps they render to.
//
// Camera frame: +z forward, +x right, +y down. Pixel (col, row) samples the
// ray through image coordinates (u, v) = (col, row). Depth is the z-coordinate
// of the first hit, so the time of flight for a pixel is 2 * depth / C.

#ifndef PPC_SCENE_HPP_
#define PPC_SCENE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ppc/common.hpp"

namespace ppc {

struct CameraIntrinsics {
    int width = 0;
    int height = 0;
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;

    // fx = fy = width, principal point at the image centre.
    static CameraIntrinsics with_defaults(int width, int height);

    void validate() const;
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

struct ImagePoint {
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;
};

// Throws DomainError when point.z <= 0.
ImagePoint project(const Vec3& point, const CameraIntrinsics& intrinsics);
// Throws DomainError when depth <= 0.
Vec3 unproject(double u, double v, double depth, const CameraIntrinsics& intrinsics);

// Finite rectangle (or unbounded when a size component is infinite) through
// `center` with unit `normal`. The in-plane axes are derived from the normal.
struct PlanePrimitive {
    Vec3 center;
    Vec3 normal{0.0, 0.0, -1.0};
    double size_u = 0.0;
    double size_v = 0.0;
    double albedo = 1.0;
};

struct BoxPrimitive {
    Vec3 min_corner;
    Vec3 max_corner;
    double albedo = 1.0;
};

struct SpherePrimitive {
    Vec3 center;
    double radius = 0.0;
    double albedo = 1.0;
};

using Primitive = std::variant<PlanePrimitive, BoxPrimitive, SpherePrimitive>;

struct SceneSpec {
    std::vector<Primitive> primitives;
    // Frontoparallel far plane used for pixels that miss every primitive.
    std::optional<double> background_depth;
    double background_albedo = 0.5;
    // Optional camera carried by scene files; CLI flags override it.
    std::optional<CameraIntrinsics> camera;

    // Throws ValidationError on non-positive extents or albedo outside (0, 1].
    void validate() const;
};

// Signed implicit function of a primitive (zero on the surface). Used by
// tests to check that rendered hits lie on the surface.
double implicit_value(const Primitive& primitive, const Vec3& point);

// Nearest positive ray parameter along origin + t * dir, if any.
std::optional<double> intersect(const Primitive& primitive, const Vec3& origin, const Vec3& dir);

inline constexpr float kNoReturn = -1.0f;

// H x W grid stored row-major. Negative values mark "no return".
struct DepthMap {
    CameraIntrinsics intrinsics;
    std::vector<float> depth;

    float at(int row, int col) const { return depth[static_cast<std::size_t>(row) * intrinsics.width + col]; }
    static bool is_sentinel(float d) { return !(d > 0.0f); }
    std::size_t valid_count() const;
};

struct AlbedoMap {
    int width = 0;
    int height = 0;
    std::vector<float> albedo;
};

struct RenderedScene {
    DepthMap depth;
    AlbedoMap albedo;
};

RenderedScene render_scene(const SceneSpec& spec, const CameraIntrinsics& intrinsics, unsigned workers = 0);

// Plain-text scene description, see README for the grammar.
SceneSpec parse_scene(std::string_view text);
SceneSpec load_scene(const std::filesystem::path& path);
std::string format_scene(const SceneSpec& spec);

// Indoor room used by the acceptance suite and the CLI default: back wall,
// floor, ceiling, side walls, a table-like box, cabinet and two spheres.
SceneSpec standard_scene();

void write_depth_map(const DepthMap& map, const std::filesystem::path& path);
DepthMap read_depth_map(const std::filesystem::path& path);
void write_albedo_map(const AlbedoMap& map, const std::filesystem::path& path);
AlbedoMap read_albedo_map(const std::filesystem::path& path);

}  // namespace ppc

#endif  // PPC_SCENE_HPP_
