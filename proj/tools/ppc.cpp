// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// ppc: command line front end for the probabilistic point cloud pipeline.
//
// Exit codes: 0 success, 1 internal error, 2 usage or validation error,
// 3 I/O error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppc/eval.hpp"
#include "ppc/fourier.hpp"
#include "settings.hpp"

namespace ppc::cli {
namespace {

constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

namespace fs = std::filesystem;

// Options bound to config keys; only flags actually given override.
struct Command {
    CLI::App* app = nullptr;
    std::vector<std::pair<std::string, CLI::Option*>> options;
    std::map<std::string, std::string> flag_values;
};

std::string flag_name(std::string_view key) {
    std::string s = "--" + std::string(key);
    for (char& c : s)
        if (c == '_') c = '-';
    return s;
}

void add_keys(Command& cmd, std::initializer_list<const char*> keys) {
    for (const char* key : keys) {
        const KeySpec& spec = key_spec(key);
        std::string help = std::string(spec.help);
        if (*spec.default_value) help += " [" + std::string(spec.default_value) + "]";
        auto* opt = cmd.app->add_option(flag_name(key), cmd.flag_values[key], help);
        cmd.options.emplace_back(key, opt);
    }
}

// Precedence: flag > PPC_SEED (seed only) > config file > defaults.
Settings resolve(const Command& cmd, const std::string& config_path) {
    Settings s;
    if (!config_path.empty()) s.load_file(config_path);
    if (const char* env = std::getenv("PPC_SEED"); env && *env) s.set("seed", env);
    for (const auto& [key, opt] : cmd.options)
        if (opt->count() > 0) s.set(key, cmd.flag_values.at(key));
    return s;
}

unsigned workers(const Settings& s) {
    const auto w = s.get_int("workers");
    if (w < 0) throw ValidationError("workers must be >= 0");
    return static_cast<unsigned>(w);
}

const std::string& require(const Settings& s, std::string_view key) {
    const std::string& v = s.get(key);
    if (v.empty()) throw ValidationError(flag_name(key) + " is required");
    return v;
}

const std::string& require_input(const Settings& s, std::string_view key = "input") {
    const std::string& v = require(s, key);
    if (!fs::exists(v)) throw IoError("input file '" + v + "' does not exist");
    return v;
}

void write_config(const Settings& s, std::string_view command, const fs::path& out) {
    s.write(fs::path(out.string() + ".config.txt"), command);
}

PulseModel pulse_from(const Settings& s) {
    PulseModel p;
    p.num_bins = static_cast<int>(s.get_int("num_bins"));
    p.bin_width = s.get_double("bin_width");
    p.repetition_period = s.get_double("period");
    p.fwhm = s.get_double("fwhm");
    p.validate();
    return p;
}

CameraIntrinsics intrinsics_from(const Settings& s, int width, int height) {
    CameraIntrinsics k = CameraIntrinsics::with_defaults(width, height);
    if (auto v = s.get_optional_double("fx")) k.fx = *v;
    if (auto v = s.get_optional_double("fy")) k.fy = *v;
    if (auto v = s.get_optional_double("cx")) k.cx = *v;
    if (auto v = s.get_optional_double("cy")) k.cy = *v;
    k.validate();
    return k;
}

SbrTarget sbr_from(const Settings& s) {
    const std::string& text = s.get("sbr");
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ValidationError("sbr: expected S:B, got '" + text + "'");
    SbrTarget t{parse_double("sbr", std::string_view(text).substr(0, colon)),
                parse_double("sbr", std::string_view(text).substr(colon + 1))};
    t.validate();
    return t;
}

ExtractOptions extract_options_from(const Settings& s) {
    ExtractOptions o;
    const std::string& mode = s.get("mode");
    if (mode == "matched") o.domain = PeakDomain::kMatched;
    else if (mode == "raw") o.domain = PeakDomain::kRaw;
    else throw ValidationError("mode must be 'matched' or 'raw'");
    const std::string& corr = s.get("correlation");
    if (corr == "circular") o.correlation = CorrelationMode::kCircular;
    else if (corr == "linear") o.correlation = CorrelationMode::kLinear;
    else throw ValidationError("correlation must be 'circular' or 'linear'");
    o.min_height = s.get_optional_double("min_height");
    return o;
}

NpdParams npd_from(const Settings& s) {
    NpdParams p;
    const auto L = s.get_int("max_neighbors");
    if (L < 1) throw ValidationError("max_neighbors must be >= 1");
    p.max_neighbors = static_cast<std::size_t>(L);
    p.radius = s.get_double("radius");
    p.alpha = s.get_double("alpha");
    p.include_self = s.get_bool("include_self");
    p.validate();
    return p;
}

FppsParams fpps_from(const Settings& s) {
    FppsParams p;
    const auto count = s.get_int("count");
    if (count < 1) throw ValidationError("count must be >= 1");
    p.count = static_cast<std::size_t>(count);
    p.beta = s.get_double("beta");
    p.validate();
    return p;
}

PlyFormat ply_format_from(const Settings& s) {
    const std::string& f = s.get("ply_format");
    if (f == "binary") return PlyFormat::kBinaryLittleEndian;
    if (f == "ascii") return PlyFormat::kAscii;
    throw ValidationError("ply_format must be 'binary' or 'ascii'");
}

std::string read_magic(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    char buf[8] = {};
    if (!is.read(buf, 8)) throw IoError("'" + path.string() + "' is too short to be a frame file");
    return std::string(buf, 8);
}

// Loads any supported frame encoding and runs extraction on it.
EstimateGrid extract_grid(const Settings& s, const fs::path& input) {
    const unsigned w = workers(s);
    const ExtractOptions opts = extract_options_from(s);
    const bool denoise = s.get_bool("spatial_denoise");
    const std::string magic = read_magic(input);

    std::optional<HistogramFrame> counts;
    std::optional<RealHistogramFrame> real;
    if (magic == "SPADHST1") {
        counts = read_frame(input);
    } else if (magic == "SPADHRF1") {
        real = read_real_frame(input);
    } else if (magic == "SPADFOU1") {
        real = decompress_frame(read_fourier_frame(input, pulse_from(s)), w);
    } else {
        throw IoError("'" + input.string() + "' is not a histogram, real-valued or Fourier frame");
    }

    CameraIntrinsics k = counts ? counts->intrinsics : real->intrinsics;
    k = intrinsics_from(s, k.width, k.height);
    if (counts) counts->intrinsics = k;
    else real->intrinsics = k;

    if (denoise) real = counts ? spatial_gaussian_denoise(*counts, 5, 1.0, w) : spatial_gaussian_denoise(*real, 5, 1.0, w);
    EstimateGrid grid = (counts && !denoise) ? estimate_frame(*counts, opts, w) : estimate_frame(*real, opts, w);
    if (auto t = s.get_optional_double("threshold")) grid = threshold_baseline(std::move(grid), *t);
    return grid;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os) throw IoError("cannot write '" + path.string() + "'");
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

int cmd_simulate(const Settings& s) {
    const fs::path out = require(s, "out");
    const std::string& scene_arg = s.get("scene");
    SceneSpec scene;
    if (scene_arg == "standard") {
        scene = standard_scene();
    } else {
        if (!fs::exists(scene_arg)) throw IoError("scene file '" + scene_arg + "' does not exist");
        scene = load_scene(scene_arg);
    }
    const PulseModel pulse = pulse_from(s);
    SensorConfig sensor;
    sensor.quantum_efficiency = s.get_double("qe");
    sensor.dark_count = s.get_double("dark_count");
    sensor.validate();
    const SbrTarget sbr = sbr_from(s);

    CameraIntrinsics k = scene.camera ? *scene.camera
                                      : intrinsics_from(s, static_cast<int>(s.get_int("width")),
                                                        static_cast<int>(s.get_int("height")));
    const unsigned w = workers(s);
    const RenderedScene rendered = render_scene(scene, k, w);
    const HistogramFrame frame = simulate_frame(rendered.depth, rendered.albedo, pulse, sensor, sbr, s.get_u64("seed"), w);

    write_frame(frame, out);
    if (const auto& p = s.get("depth_out"); !p.empty()) write_depth_map(rendered.depth, p);
    if (const auto& p = s.get("albedo_out"); !p.empty()) write_albedo_map(rendered.albedo, p);
    write_config(s, "simulate", out);
    return 0;
}

int cmd_extract(const Settings& s) {
    const fs::path input = require_input(s);
    const fs::path out = require(s, "out");
    const EstimateGrid grid = extract_grid(s, input);
    write_ply(build_ppc(grid), out, ply_format_from(s));
    write_config(s, "extract", out);
    return 0;
}

int cmd_filter(const Settings& s) {
    const fs::path input = require_input(s);
    const fs::path out = require(s, "out");
    const NpdFilterResult r = npd_filter(read_ply(input), npd_from(s), workers(s));
    write_ply(r.cloud, out, ply_format_from(s));
    write_config(s, "filter", out);
    return 0;
}

std::vector<std::size_t> run_sampler(const ProbabilisticPointCloud& cloud, const std::string& method,
                                     const FppsParams& params, bool random, std::uint64_t seed) {
    if (method == "fps") {
        const std::size_t start = random ? random_start(cloud.size(), seed) : 0;
        return fps(cloud.positions(), params.count, start);
    }
    if (method != "fpps") throw ValidationError("method must be 'fps' or 'fpps'");
    std::optional<std::size_t> start;
    if (random) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < cloud.size(); ++i)
            if (cloud.points[i].probability >= params.beta) candidates.push_back(i);
        if (!candidates.empty()) start = candidates[random_start(candidates.size(), seed)];
    }
    return fpps(cloud, params, start);
}

int cmd_sample(const Settings& s) {
    const fs::path input = require_input(s);
    const fs::path out = require(s, "out");
    const ProbabilisticPointCloud cloud = read_ply(input);
    const FppsParams params = fpps_from(s);
    if (params.count > cloud.size())
        throw ValidationError("count " + std::to_string(params.count) + " exceeds the cloud size " +
                              std::to_string(cloud.size()));
    const auto keys = run_sampler(cloud, s.get("method"), params, s.get_bool("random_start"), s.get_u64("seed"));

    write_ply(cloud.subset(keys), out, ply_format_from(s));
    std::string list;
    for (std::size_t k : keys) list += std::to_string(k) + "\n";
    const std::string& idx = s.get("indices_out");
    write_text(idx.empty() ? fs::path(out.string() + ".indices.txt") : fs::path(idx), list);
    write_config(s, "sample", out);
    return 0;
}

EvalOptions eval_options_from(const Settings& s) {
    EvalOptions o;
    o.epsilon_bins = s.get_double("epsilon_bins");
    o.npd = npd_from(s);
    const std::string& method = s.get("method");
    if (method == "fps" || method == "fpps") o.sampler = method;
    else if (method != "none") throw ValidationError("method must be 'fps', 'fpps' or 'none'");
    o.fpps = fpps_from(s);
    o.histogram_bins = static_cast<int>(s.get_int("histogram_bins"));
    o.workers = workers(s);
    return o;
}

void write_report(const EvalReport& report, const fs::path& out) {
    write_json(out, report);
    const fs::path stem = out.parent_path() / out.stem();
    write_text(fs::path(stem.string() + ".probability_hist.csv"), report.probability_histogram.to_csv());
    write_text(fs::path(stem.string() + ".npd_hist.csv"), report.npd_histogram.to_csv());
}

int cmd_eval(const Settings& s) {
    const fs::path input = require_input(s);
    const fs::path gt = require_input(s, "gt");
    const fs::path out = require(s, "out");
    const ProbabilisticPointCloud cloud = read_ply(input);
    const double bin_width = cloud.metadata.bin_width.value_or(s.get_double("bin_width"));
    const EvalReport report = evaluate(cloud, read_depth_map(gt), bin_width, eval_options_from(s));
    write_report(report, out);
    write_config(s, "eval", out);
    return 0;
}

int cmd_bench(const Settings& s) {
    const fs::path input = require_input(s);
    BenchmarkConfig cfg;
    cfg.repetitions = static_cast<int>(s.get_int("repetitions"));
    cfg.workers = workers(s);
    cfg.extract = extract_options_from(s);
    cfg.npd = npd_from(s);
    cfg.fpps = fpps_from(s);
    const BenchmarkResult r = benchmark(read_frame(input), cfg);
    const std::string& out = s.get("out");
    if (out.empty()) {
        std::cout << nlohmann::json(r).dump(2) << "\n";
    } else {
        write_json(out, r);
        write_config(s, "bench", out);
    }
    return 0;
}

int cmd_compress(const Settings& s) {
    const fs::path input = require_input(s);
    const fs::path out = require(s, "out");
    write_fourier_frame(compress_frame(read_frame(input), static_cast<int>(s.get_int("k")), workers(s)), out);
    write_config(s, "compress", out);
    return 0;
}

int cmd_decompress(const Settings& s) {
    const fs::path input = require_input(s);
    const fs::path out = require(s, "out");
    write_real_frame(decompress_frame(read_fourier_frame(input, pulse_from(s)), workers(s)), out);
    write_config(s, "decompress", out);
    return 0;
}

// Cartesian product over alpha, beta, max_neighbors, radius and threshold.
int cmd_sweep(const Settings& base) {
    const fs::path input = require_input(base);
    const fs::path gt_path = require_input(base, "gt");
    const fs::path out_dir = require(base, "out");
    fs::create_directories(out_dir);
    const DepthMap gt = read_depth_map(gt_path);

    const auto alphas = base.get_list("alpha");
    const auto betas = base.get_list("beta");
    const auto sizes = base.get_list("max_neighbors");
    const auto radii = base.get_list("radius");
    const auto thresholds = base.get_list("threshold");

    std::map<std::string, ProbabilisticPointCloud> clouds;  // per threshold
    std::ostringstream summary;
    summary << "cell,alpha,beta,max_neighbors,radius,threshold,num_points,num_ground_truth,precision,recall,f1,"
               "sampling_purity\n";
    int cell = 0;
    for (const auto& t : thresholds) {
        Settings s = base;
        s.set("threshold", t);
        auto [it, inserted] = clouds.try_emplace(t);
        if (inserted) it->second = build_ppc(extract_grid(s, input));
        const ProbabilisticPointCloud& cloud = it->second;
        const double bin_width = cloud.metadata.bin_width.value_or(s.get_double("bin_width"));
        for (const auto& a : alphas)
            for (const auto& b : betas)
                for (const auto& L : sizes)
                    for (const auto& r : radii) {
                        s.set("alpha", a);
                        s.set("beta", b);
                        s.set("max_neighbors", L);
                        s.set("radius", r);
                        const EvalReport report = evaluate(cloud, gt, bin_width, eval_options_from(s));
                        char name[32];
                        std::snprintf(name, sizeof(name), "cell_%04d.json", cell);
                        write_report(report, out_dir / name);
                        s.write(out_dir / (std::string(name) + ".config.txt"), "sweep");
                        summary << cell << ',' << a << ',' << b << ',' << L << ',' << r << ',' << t << ','
                                << report.num_points << ',' << report.num_ground_truth << ','
                                << report.filter.precision << ',' << report.filter.recall << ','
                                << report.filter.f1 << ',' << report.sampling_purity << '\n';
                        ++cell;
                    }
    }
    write_text(out_dir / "summary.csv", summary.str());
    base.write(out_dir / "sweep.config.txt", "sweep");
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"Probabilistic point clouds from simulated SPAD lidar histograms", "ppc"};
    app.set_version_flag("--version", std::string(PPC_VERSION));
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);

    using Handler = int (*)(const Settings&);
    struct Entry {
        const char* name;
        const char* help;
        Handler handler;
        std::initializer_list<const char*> keys;
    };
    const Entry entries[] = {
        {"simulate", "render a scene and simulate a histogram frame", cmd_simulate,
         {"scene", "width", "height", "fx", "fy", "cx", "cy", "num_bins", "bin_width", "period", "fwhm", "qe",
          "dark_count", "sbr", "seed", "out", "depth_out", "albedo_out", "workers"}},
        {"extract", "estimate depths and write a probabilistic point cloud", cmd_extract,
         {"input", "out", "mode", "min_height", "correlation", "spatial_denoise", "threshold", "fx", "fy", "cx", "cy",
          "num_bins", "bin_width", "period", "fwhm", "ply_format", "workers"}},
        {"filter", "NPD filtering of a point cloud", cmd_filter,
         {"input", "out", "alpha", "radius", "max_neighbors", "include_self", "ply_format", "workers"}},
        {"sample", "FPS or FPPS keypoint sampling", cmd_sample,
         {"input", "out", "method", "count", "beta", "random_start", "seed", "indices_out", "ply_format"}},
        {"eval", "ground-truth evaluation report", cmd_eval,
         {"input", "gt", "out", "epsilon_bins", "alpha", "radius", "max_neighbors", "include_self", "method", "count",
          "beta", "histogram_bins", "bin_width", "workers"}},
        {"bench", "stage timings on a histogram frame", cmd_bench,
         {"input", "out", "repetitions", "mode", "min_height", "correlation", "alpha", "radius", "max_neighbors",
          "include_self", "beta", "count", "workers"}},
        {"compress", "truncated Fourier compression of a frame", cmd_compress, {"input", "out", "k", "workers"}},
        {"decompress", "reconstruct a real-valued frame from Fourier codes", cmd_decompress,
         {"input", "out", "num_bins", "bin_width", "period", "fwhm", "workers"}},
        {"sweep", "evaluation over a parameter grid (comma separated lists)", cmd_sweep,
         {"input", "gt", "out", "alpha", "beta", "max_neighbors", "radius", "threshold", "mode", "min_height",
          "correlation", "spatial_denoise", "fx", "fy", "cx", "cy", "num_bins", "bin_width", "period", "fwhm",
          "epsilon_bins", "method", "count", "include_self", "histogram_bins", "workers"}},
    };

    std::vector<Command> commands(std::size(entries));
    for (std::size_t i = 0; i < std::size(entries); ++i) {
        commands[i].app = app.add_subcommand(entries[i].name, entries[i].help);
        add_keys(commands[i], entries[i].keys);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    for (std::size_t i = 0; i < std::size(entries); ++i) {
        if (!commands[i].app->parsed()) continue;
        return entries[i].handler(resolve(commands[i], config_path));
    }
    return kExitValidation;
}

}  // namespace
}  // namespace ppc::cli

int main(int argc, char** argv) {
    try {
        return ppc::cli::run(argc, argv);
    } catch (const ppc::IoError& e) {
        std::cerr << "ppc: I/O error: " << e.what() << "\n";
        return ppc::cli::kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "ppc: I/O error: " << e.what() << "\n";
        return ppc::cli::kExitIo;
    } catch (const ppc::Error& e) {
        std::cerr << "ppc: " << e.what() << "\n";
        return ppc::cli::kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "ppc: " << e.what() << "\n";
        return ppc::cli::kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "ppc: internal error: " << e.what() << "\n";
        return ppc::cli::kExitInternal;
    }
}
