// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <limits>
#include <set>
#include <fstream>
#include <map>
#include <sstream>

#include "binary_io.hpp"
#include "ppc/scene.hpp"

namespace ppc {
namespace {

constexpr std::string_view kDepthMagic = "DPTHMAP1";
constexpr std::string_view kAlbedoMagic = "ALBMAP01";

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(std::string_view tok, const std::string& ctx) {
    if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ValidationError(ctx + ": invalid number '" + std::string(tok) + "'");
    return v;
}

std::vector<double> parse_numbers(std::string_view value, std::size_t expected, const std::string& ctx) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < value.size()) {
        while (pos < value.size() && (value[pos] == ' ' || value[pos] == '\t' || value[pos] == ',')) ++pos;
        std::size_t end = pos;
        while (end < value.size() && value[end] != ' ' && value[end] != '\t' && value[end] != ',') ++end;
        if (end > pos) out.push_back(parse_number(value.substr(pos, end - pos), ctx));
        pos = end;
    }
    if (out.size() != expected)
        throw ValidationError(ctx + ": expected " + std::to_string(expected) + " values, got " + std::to_string(out.size()));
    return out;
}

struct Section {
    std::string name;
    int line = 0;
    std::map<std::string, std::string> kv;
};

class SectionReader {
  public:
    explicit SectionReader(const Section& s) : s_(s) {}

    bool has(const std::string& key) const { return s_.kv.count(key) != 0; }

    std::vector<double> numbers(const std::string& key, std::size_t n) const {
        used_.insert(key);
        const auto it = s_.kv.find(key);
        if (it == s_.kv.end()) throw ValidationError(ctx() + ": missing key '" + key + "'");
        return parse_numbers(it->second, n, ctx() + " key '" + key + "'");
    }
    double number(const std::string& key) const { return numbers(key, 1)[0]; }
    double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }
    Vec3 vec(const std::string& key) const {
        const auto v = numbers(key, 3);
        return {v[0], v[1], v[2]};
    }
    std::string text(const std::string& key) const {
        used_.insert(key);
        return s_.kv.at(key);
    }

    void check_all_used() const {
        for (const auto& [k, _] : s_.kv)
            if (!used_.count(k)) throw ValidationError(ctx() + ": unknown key '" + k + "'");
    }

  private:
    std::string ctx() const { return "scene [" + s_.name + "] at line " + std::to_string(s_.line); }
    const Section& s_;
    mutable std::set<std::string> used_;
};

std::string fmt_num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string fmt_vec(const Vec3& v) { return fmt_num(v.x) + " " + fmt_num(v.y) + " " + fmt_num(v.z); }

void write_grid(const std::filesystem::path& path, std::string_view magic, int height, int width,
                const std::vector<float>& values) {
    auto os = detail::open_for_write(path);
    detail::write_magic(os, magic);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(height));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(width));
    for (float v : values) detail::put_le<float>(os, v);
    detail::finish_write(os, path);
}

std::vector<float> read_grid(const std::filesystem::path& path, std::string_view magic, int& height, int& width) {
    auto is = detail::open_for_read(path);
    detail::expect_magic(is, magic, path);
    const auto h = detail::get_le<std::uint32_t>(is);
    const auto w = detail::get_le<std::uint32_t>(is);
    if (h == 0 || w == 0 || h > (1u << 16) || w > (1u << 16)) throw IoError("'" + path.string() + "': bad grid size");
    height = static_cast<int>(h);
    width = static_cast<int>(w);
    std::vector<float> values(static_cast<std::size_t>(h) * w);
    for (auto& v : values) v = detail::get_le<float>(is);
    return values;
}

}  // namespace

SceneSpec parse_scene(std::string_view text) {
    std::vector<Section> sections;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ValidationError("scene line " + std::to_string(line_no) + ": malformed section header");
            sections.push_back({std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ValidationError("scene line " + std::to_string(line_no) + ": expected key = value");
        if (sections.empty()) throw ValidationError("scene line " + std::to_string(line_no) + ": key outside of a section");
        const std::string key(trim(line.substr(0, eq)));
        if (!sections.back().kv.emplace(key, std::string(trim(line.substr(eq + 1)))).second)
            throw ValidationError("scene line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }

    SceneSpec spec;
    for (const auto& s : sections) {
        SectionReader r(s);
        if (s.name == "scene") {
            if (r.has("background")) {
                const std::string bg = r.text("background");
                if (bg != "none") spec.background_depth = parse_number(bg, "scene background");
            }
            spec.background_albedo = r.number_or("background_albedo", spec.background_albedo);
        } else if (s.name == "camera") {
            const int w = static_cast<int>(r.number("width"));
            const int h = static_cast<int>(r.number("height"));
            auto cam = CameraIntrinsics::with_defaults(w, h);
            cam.fx = r.number_or("fx", cam.fx);
            cam.fy = r.number_or("fy", cam.fy);
            cam.cx = r.number_or("cx", cam.cx);
            cam.cy = r.number_or("cy", cam.cy);
            spec.camera = cam;
        } else if (s.name == "plane") {
            PlanePrimitive p;
            p.center = r.vec("center");
            p.normal = r.vec("normal");
            const auto size = r.numbers("size", 2);
            p.size_u = size[0];
            p.size_v = size[1];
            p.albedo = r.number("albedo");
            spec.primitives.emplace_back(p);
        } else if (s.name == "box") {
            BoxPrimitive b;
            b.min_corner = r.vec("min");
            b.max_corner = r.vec("max");
            b.albedo = r.number("albedo");
            spec.primitives.emplace_back(b);
        } else if (s.name == "sphere") {
            SpherePrimitive sp;
            sp.center = r.vec("center");
            sp.radius = r.number("radius");
            sp.albedo = r.number("albedo");
            spec.primitives.emplace_back(sp);
        } else {
            throw ValidationError("scene line " + std::to_string(s.line) + ": unknown section [" + s.name + "]");
        }
        r.check_all_used();
    }
    spec.validate();
    return spec;
}

SceneSpec load_scene(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open scene '" + path.string() + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_scene(ss.str());
}

std::string format_scene(const SceneSpec& spec) {
    std::ostringstream os;
    os << "[scene]\nbackground = " << (spec.background_depth ? fmt_num(*spec.background_depth) : "none") << "\n"
       << "background_albedo = " << fmt_num(spec.background_albedo) << "\n";
    if (spec.camera) {
        const auto& c = *spec.camera;
        os << "\n[camera]\nwidth = " << c.width << "\nheight = " << c.height << "\nfx = " << fmt_num(c.fx)
           << "\nfy = " << fmt_num(c.fy) << "\ncx = " << fmt_num(c.cx) << "\ncy = " << fmt_num(c.cy) << "\n";
    }
    for (const auto& prim : spec.primitives) {
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, PlanePrimitive>) {
                    os << "\n[plane]\ncenter = " << fmt_vec(p.center) << "\nnormal = " << fmt_vec(p.normal)
                       << "\nsize = " << fmt_num(p.size_u) << " " << fmt_num(p.size_v) << "\n";
                } else if constexpr (std::is_same_v<T, BoxPrimitive>) {
                    os << "\n[box]\nmin = " << fmt_vec(p.min_corner) << "\nmax = " << fmt_vec(p.max_corner) << "\n";
                } else {
                    os << "\n[sphere]\ncenter = " << fmt_vec(p.center) << "\nradius = " << fmt_num(p.radius) << "\n";
                }
                os << "albedo = " << fmt_num(p.albedo) << "\n";
            },
            prim);
    }
    return os.str();
}

void write_depth_map(const DepthMap& map, const std::filesystem::path& path) {
    write_grid(path, kDepthMagic, map.intrinsics.height, map.intrinsics.width, map.depth);
}

DepthMap read_depth_map(const std::filesystem::path& path) {
    DepthMap map;
    int h = 0, w = 0;
    map.depth = read_grid(path, kDepthMagic, h, w);
    map.intrinsics = CameraIntrinsics::with_defaults(w, h);
    return map;
}

void write_albedo_map(const AlbedoMap& map, const std::filesystem::path& path) {
    write_grid(path, kAlbedoMagic, map.height, map.width, map.albedo);
}

AlbedoMap read_albedo_map(const std::filesystem::path& path) {
    AlbedoMap map;
    map.albedo = read_grid(path, kAlbedoMagic, map.height, map.width);
    return map;
}

}  // namespace ppc
