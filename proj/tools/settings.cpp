// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include "settings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ppc/common.hpp"

namespace ppc::cli {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

const std::vector<KeySpec>& known_keys() {
    static const std::vector<KeySpec> keys = {
        {"input", "", "input file (frame, PLY or Fourier code)"},
        {"out", "", "output path"},
        {"scene", "standard", "scene file, or 'standard' for the built-in room"},
        {"width", "128", "image width when the scene has no [camera]"},
        {"height", "96", "image height when the scene has no [camera]"},
        {"fx", "auto", "focal length x in pixels (auto: width)"},
        {"fy", "auto", "focal length y in pixels (auto: width)"},
        {"cx", "auto", "principal point x (auto: width/2)"},
        {"cy", "auto", "principal point y (auto: height/2)"},
        {"num_bins", "1024", "histogram bins N"},
        {"bin_width", "97e-12", "bin width in seconds"},
        {"period", "100e-9", "laser repetition period in seconds"},
        {"fwhm", "350e-12", "pulse FWHM in seconds"},
        {"qe", "0.5", "quantum efficiency"},
        {"dark_count", "0", "dark counts per bin"},
        {"sbr", "5:50", "signal:background photons per pixel, scene mean"},
        {"seed", "0", "RNG seed"},
        {"workers", "0", "worker threads (0: all cores)"},
        {"depth_out", "", "ground-truth depth map output (DPTHMAP1)"},
        {"albedo_out", "", "albedo map output (ALBMAP01)"},
        {"mode", "matched", "peak domain: matched or raw"},
        {"min_height", "auto", "peak validity threshold (auto: kernel max + 1e-9)"},
        {"correlation", "circular", "matched filter boundary: circular or linear"},
        {"spatial_denoise", "false", "5x5 Gaussian spatial denoising before extraction"},
        {"threshold", "none", "invalidate peaks with height <= threshold"},
        {"ply_format", "binary", "PLY encoding: binary or ascii"},
        {"alpha", "0.003", "NPD keep threshold"},
        {"radius", "0.2", "ball query radius in metres"},
        {"max_neighbors", "64", "ball query size L"},
        {"include_self", "true", "ball query may return the query point"},
        {"method", "fpps", "sampler: fps or fpps (eval also accepts none)"},
        {"count", "1024", "keypoints to sample"},
        {"beta", "0.01", "FPPS candidate probability cutoff"},
        {"random_start", "false", "seeded random FPS start instead of the first point"},
        {"indices_out", "", "sampled index list (default: <out>.indices.txt)"},
        {"gt", "", "ground-truth depth map (DPTHMAP1)"},
        {"epsilon_bins", "3", "ground-truth labelling tolerance in bins"},
        {"histogram_bins", "50", "score histogram bins"},
        {"repetitions", "5", "benchmark repetitions"},
        {"k", "32", "Fourier coefficients kept per pixel"},
    };
    return keys;
}

const KeySpec& key_spec(std::string_view name) {
    for (const auto& k : known_keys())
        if (name == k.name) return k;
    throw ValidationError("unknown config key '" + std::string(name) + "'");
}

Settings::Settings() {
    for (const auto& k : known_keys()) values_.emplace(k.name, k.default_value);
}

void Settings::load_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file '" + path.string() + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        set(trim(view.substr(0, eq)), std::string(trim(view.substr(eq + 1))));
    }
}

void Settings::set(std::string_view key, std::string value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
    it->second = std::move(value);
}

const std::string& Settings::get(std::string_view key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
    return it->second;
}

double parse_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw ValidationError(std::string(key) + ": '" + std::string(text) + "' is not a finite number");
    return v;
}

std::int64_t parse_int(std::string_view key, std::string_view text) {
    text = trim(text);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ValidationError(std::string(key) + ": '" + std::string(text) + "' is not an integer");
    return v;
}

double Settings::get_double(std::string_view key) const { return parse_double(key, get(key)); }

std::int64_t Settings::get_int(std::string_view key) const { return parse_int(key, get(key)); }

std::uint64_t Settings::get_u64(std::string_view key) const {
    const std::string& text = get(key);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ValidationError(std::string(key) + ": '" + text + "' is not an unsigned integer");
    return v;
}

bool Settings::get_bool(std::string_view key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ValidationError(std::string(key) + ": '" + v + "' is not a boolean");
}

std::optional<double> Settings::get_optional_double(std::string_view key) const {
    const std::string& v = get(key);
    if (v == "none" || v == "auto") return std::nullopt;
    return parse_double(key, v);
}

std::vector<std::string> Settings::get_list(std::string_view key) const {
    std::vector<std::string> out;
    std::string_view rest = get(key);
    for (;;) {
        const auto comma = rest.find(',');
        const auto item = trim(rest.substr(0, comma));
        if (item.empty()) throw ValidationError(std::string(key) + ": empty list item");
        out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

std::string Settings::dump(std::string_view command) const {
    std::ostringstream os;
    os << "# resolved configuration for: ppc " << command << "\n";
    for (const auto& k : known_keys()) os << k.name << " = " << get(k.name) << "\n";
    return os.str();
}

void Settings::write(const std::filesystem::path& path, std::string_view command) const {
    std::ofstream os(path, std::ios::binary);
    os << dump(command);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
}

}  // namespace ppc::cli
