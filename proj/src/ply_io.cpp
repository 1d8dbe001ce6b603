// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "binary_io.hpp"
#include "ppc/point_cloud.hpp"

namespace ppc {
namespace {

constexpr std::uint16_t kNoPixel = std::numeric_limits<std::uint16_t>::max();

enum class ScalarType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

std::optional<ScalarType> parse_type(const std::string& t) {
    if (t == "char" || t == "int8") return ScalarType::kInt8;
    if (t == "uchar" || t == "uint8") return ScalarType::kUInt8;
    if (t == "short" || t == "int16") return ScalarType::kInt16;
    if (t == "ushort" || t == "uint16") return ScalarType::kUInt16;
    if (t == "int" || t == "int32") return ScalarType::kInt32;
    if (t == "uint" || t == "uint32") return ScalarType::kUInt32;
    if (t == "float" || t == "float32") return ScalarType::kFloat32;
    if (t == "double" || t == "float64") return ScalarType::kFloat64;
    return std::nullopt;
}

std::size_t type_size(ScalarType t) {
    switch (t) {
        case ScalarType::kInt8:
        case ScalarType::kUInt8: return 1;
        case ScalarType::kInt16:
        case ScalarType::kUInt16: return 2;
        case ScalarType::kInt32:
        case ScalarType::kUInt32:
        case ScalarType::kFloat32: return 4;
        case ScalarType::kFloat64: return 8;
    }
    return 0;
}

double read_binary(std::istream& is, ScalarType t) {
    switch (t) {
        case ScalarType::kInt8: {
            char c;
            if (!is.get(c)) throw IoError("PLY: truncated vertex data");
            return static_cast<signed char>(c);
        }
        case ScalarType::kUInt8: {
            char c;
            if (!is.get(c)) throw IoError("PLY: truncated vertex data");
            return static_cast<unsigned char>(c);
        }
        case ScalarType::kInt16: return static_cast<std::int16_t>(detail::get_le<std::uint16_t>(is));
        case ScalarType::kUInt16: return detail::get_le<std::uint16_t>(is);
        case ScalarType::kInt32: return detail::get_le<std::int32_t>(is);
        case ScalarType::kUInt32: return detail::get_le<std::uint32_t>(is);
        case ScalarType::kFloat32: return detail::get_le<float>(is);
        case ScalarType::kFloat64: return detail::get_le<double>(is);
    }
    return 0.0;
}

// binary32 properties are parsed at binary32 so ASCII round trips are exact.
double read_ascii(std::istream& is, ScalarType t) {
    std::string tok;
    if (!(is >> tok)) throw IoError("PLY: truncated or malformed ASCII vertex data");
    const char* end = tok.data() + tok.size();
    std::from_chars_result r{};
    double v = 0.0;
    if (t == ScalarType::kFloat32) {
        float f = 0.0f;
        r = std::from_chars(tok.data(), end, f);
        v = f;
    } else {
        r = std::from_chars(tok.data(), end, v);
    }
    if (r.ec != std::errc{} || r.ptr != end) throw IoError("PLY: malformed ASCII value '" + tok + "'");
    return v;
}

struct Property {
    std::string name;
    ScalarType type;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
    bool has_list = false;
};

struct Header {
    bool binary = false;
    std::vector<Element> elements;
    CloudMetadata metadata;
};

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void apply_comment(CloudMetadata& md, std::istringstream& ls) {
    std::string tag, key;
    ls >> tag >> key;
    if (tag != "ppc") return;
    std::string value;
    std::getline(ls >> std::ws, value);
    try {
        if (key == "generator") md.generator = value;
        else if (key == "seed") md.seed = std::stoull(value);
        else if (key == "bin_width") md.bin_width = std::stod(value);
        else if (key == "num_bins") md.num_bins = std::stoi(value);
        else if (key == "width") md.width = std::stoi(value);
        else if (key == "height") md.height = std::stoi(value);
    } catch (const std::exception&) {
        throw IoError("PLY: bad metadata comment '" + key + "'");
    }
}

Header read_header(std::istream& is, const std::filesystem::path& path) {
    Header h;
    std::string line;
    if (!std::getline(is, line) || line.substr(0, 3) != "ply") throw IoError("'" + path.string() + "' is not a PLY file");
    bool have_format = false;
    for (;;) {
        if (!std::getline(is, line)) throw IoError("PLY: missing end_header in '" + path.string() + "'");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "end_header") break;
        if (word.empty() || word == "obj_info") continue;
        if (word == "comment") {
            apply_comment(h.metadata, ls);
        } else if (word == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt == "ascii") h.binary = false;
            else if (fmt == "binary_little_endian") h.binary = true;
            else throw IoError("PLY: unsupported format '" + fmt + "'");
            have_format = true;
        } else if (word == "element") {
            Element e;
            long long count = -1;
            ls >> e.name >> count;
            if (e.name.empty() || count < 0) throw IoError("PLY: malformed element line '" + line + "'");
            e.count = static_cast<std::size_t>(count);
            h.elements.push_back(e);
        } else if (word == "property") {
            if (h.elements.empty()) throw IoError("PLY: property before any element");
            std::string type, name;
            ls >> type;
            if (type == "list") {
                h.elements.back().has_list = true;
                continue;
            }
            ls >> name;
            const auto t = parse_type(type);
            if (!t || name.empty()) throw IoError("PLY: malformed property line '" + line + "'");
            h.elements.back().properties.push_back({name, *t});
        } else {
            throw IoError("PLY: unexpected header line '" + line + "'");
        }
    }
    if (!have_format) throw IoError("PLY: missing format line");
    return h;
}

}  // namespace

void write_ply(const ProbabilisticPointCloud& cloud, const std::filesystem::path& path, PlyFormat format) {
    auto os = detail::open_for_write(path);
    const auto& md = cloud.metadata;
    os << "ply\nformat " << (format == PlyFormat::kAscii ? "ascii" : "binary_little_endian") << " 1.0\n";
    os << "comment ppc generator " << md.generator << "\n";
    if (md.seed) os << "comment ppc seed " << *md.seed << "\n";
    if (md.bin_width) os << "comment ppc bin_width " << format_double(*md.bin_width) << "\n";
    if (md.num_bins) os << "comment ppc num_bins " << *md.num_bins << "\n";
    if (md.width) os << "comment ppc width " << *md.width << "\n";
    if (md.height) os << "comment ppc height " << *md.height << "\n";
    os << "element vertex " << cloud.size() << "\n"
       << "property float x\nproperty float y\nproperty float z\nproperty float probability\n"
       << "property ushort pixel_u\nproperty ushort pixel_v\nend_header\n";

    for (const auto& p : cloud.points) {
        const float xyz[3] = {static_cast<float>(p.position.x), static_cast<float>(p.position.y),
                              static_cast<float>(p.position.z)};
        const float prob = static_cast<float>(p.probability);
        const std::uint16_t u = p.has_pixel() ? static_cast<std::uint16_t>(p.pixel_u) : kNoPixel;
        const std::uint16_t v = p.has_pixel() ? static_cast<std::uint16_t>(p.pixel_v) : kNoPixel;
        if (format == PlyFormat::kAscii) {
            // Shortest round-trip representation of the binary32 values.
            char buf[32];
            for (float f : {xyz[0], xyz[1], xyz[2], prob}) {
                const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), f);
                os.write(buf, ptr - buf);
                os.put(' ');
            }
            os << u << ' ' << v << '\n';
        } else {
            for (float f : xyz) detail::put_le<float>(os, f);
            detail::put_le<float>(os, prob);
            detail::put_le<std::uint16_t>(os, u);
            detail::put_le<std::uint16_t>(os, v);
        }
    }
    detail::finish_write(os, path);
}

ProbabilisticPointCloud read_ply(const std::filesystem::path& path) {
    auto is = detail::open_for_read(path);
    Header h = read_header(is, path);

    ProbabilisticPointCloud cloud;
    cloud.metadata = h.metadata;

    bool found_vertex = false;
    for (const auto& e : h.elements) {
        if (e.name != "vertex") {
            if (found_vertex) break;  // trailing elements (faces, ...) are ignored
            if (e.has_list) throw IoError("PLY: list properties before the vertex element are not supported");
            if (h.binary) {
                std::size_t stride = 0;
                for (const auto& p : e.properties) stride += type_size(p.type);
                is.ignore(static_cast<std::streamsize>(stride * e.count));
            } else {
                std::string skip;
                for (std::size_t i = 0; i < e.count; ++i) std::getline(is, skip);
            }
            continue;
        }
        if (e.has_list) throw IoError("PLY: list properties in the vertex element are not supported");
        found_vertex = true;

        int ix = -1, iy = -1, iz = -1, iprob = -1, iu = -1, iv = -1;
        for (int i = 0; i < static_cast<int>(e.properties.size()); ++i) {
            const auto& n = e.properties[static_cast<std::size_t>(i)].name;
            if (n == "x") ix = i;
            else if (n == "y") iy = i;
            else if (n == "z") iz = i;
            else if (n == "probability") iprob = i;
            else if (n == "pixel_u") iu = i;
            else if (n == "pixel_v") iv = i;
        }
        if (ix < 0 || iy < 0 || iz < 0) throw IoError("PLY: vertex element lacks x/y/z");
        cloud.metadata.probability_defaulted = iprob < 0;

        std::vector<double> row(e.properties.size());
        cloud.points.reserve(e.count);
        for (std::size_t i = 0; i < e.count; ++i) {
            if (h.binary) {
                for (std::size_t j = 0; j < row.size(); ++j) row[j] = read_binary(is, e.properties[j].type);
            } else {
                for (std::size_t j = 0; j < row.size(); ++j) row[j] = read_ascii(is, e.properties[j].type);
            }
            ProbabilisticPoint p;
            p.position = {row[static_cast<std::size_t>(ix)], row[static_cast<std::size_t>(iy)],
                          row[static_cast<std::size_t>(iz)]};
            p.probability = iprob >= 0 ? row[static_cast<std::size_t>(iprob)] : 1.0;
            if (iu >= 0 && iv >= 0 && row[static_cast<std::size_t>(iu)] != kNoPixel &&
                row[static_cast<std::size_t>(iv)] != kNoPixel) {
                p.pixel_u = static_cast<int>(row[static_cast<std::size_t>(iu)]);
                p.pixel_v = static_cast<int>(row[static_cast<std::size_t>(iv)]);
            }
            if (!std::isfinite(p.position.x) || !std::isfinite(p.position.y) || !std::isfinite(p.position.z))
                throw IoError("PLY: non-finite vertex coordinate");
            cloud.points.push_back(p);
        }
    }
    if (!found_vertex) throw IoError("PLY: no vertex element in '" + path.string() + "'");
    return cloud;
}

}  // namespace ppc
