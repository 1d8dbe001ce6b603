// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// Python bindings: scene rendering, simulation, extraction, NPD filtering,
// sampling, Fourier compression and evaluation. Array data crosses the
// boundary as numpy arrays.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <complex>
#include <cstring>
#include <string>

#include "ppc/eval.hpp"
#include "ppc/fourier.hpp"
#include "ppc/histogram_proc.hpp"
#include "ppc/point_cloud.hpp"
#include "ppc/scene.hpp"
#include "ppc/spad_sim.hpp"
#include "ppc/spatial.hpp"

namespace py = pybind11;
using namespace ppc;

namespace {

template <typename T>
using Array = py::array_t<T, py::array::c_style | py::array::forcecast>;

template <typename T>
py::array_t<T> to_numpy(const std::vector<T>& v, std::vector<py::ssize_t> shape) {
    py::array_t<T> out(shape);
    std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(T));
    return out;
}

template <typename T>
std::vector<T> to_vector(const Array<T>& a) {
    return std::vector<T>(a.data(), a.data() + a.size());
}

std::vector<Vec3> to_points(const Array<double>& xyz) {
    if (xyz.ndim() != 2 || xyz.shape(1) != 3) throw ValidationError("points must have shape (n, 3)");
    std::vector<Vec3> pts(static_cast<std::size_t>(xyz.shape(0)));
    const double* d = xyz.data();
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {d[3 * i], d[3 * i + 1], d[3 * i + 2]};
    return pts;
}

PeakDomain parse_domain(const std::string& s) {
    if (s == "matched") return PeakDomain::kMatched;
    if (s == "raw") return PeakDomain::kRaw;
    throw ValidationError("domain must be 'matched' or 'raw'");
}

CorrelationMode parse_correlation(const std::string& s) {
    if (s == "circular") return CorrelationMode::kCircular;
    if (s == "linear") return CorrelationMode::kLinear;
    throw ValidationError("correlation must be 'circular' or 'linear'");
}

ProbabilisticPointCloud cloud_from_arrays(const Array<double>& xyz, const Array<double>& probability,
                                          std::optional<Array<int>> pixels) {
    const auto pts = to_points(xyz);
    if (static_cast<std::size_t>(probability.size()) != pts.size())
        throw ValidationError("probability must have one entry per point");
    ProbabilisticPointCloud cloud;
    cloud.points.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        cloud.points[i].position = pts[i];
        cloud.points[i].probability = probability.data()[i];
    }
    if (pixels) {
        if (pixels->ndim() != 2 || pixels->shape(1) != 2 || static_cast<std::size_t>(pixels->shape(0)) != pts.size())
            throw ValidationError("pixels must have shape (n, 2)");
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cloud.points[i].pixel_u = pixels->data()[2 * i];
            cloud.points[i].pixel_v = pixels->data()[2 * i + 1];
        }
    }
    return cloud;
}

py::object json_to_python(const nlohmann::json& j) {
    py::module_ json = py::module_::import("json");
    return json.attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_ppc, m) {
    m.doc() = "Probabilistic point clouds from simulated single-photon LiDAR histograms";
    m.attr("__version__") = PPC_VERSION;
    m.attr("SPEED_OF_LIGHT") = kSpeedOfLight;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
        .def(py::init([](int width, int height, std::optional<double> fx, std::optional<double> fy,
                         std::optional<double> cx, std::optional<double> cy) {
                 auto k = CameraIntrinsics::with_defaults(width, height);
                 if (fx) k.fx = *fx;
                 if (fy) k.fy = *fy;
                 if (cx) k.cx = *cx;
                 if (cy) k.cy = *cy;
                 k.validate();
                 return k;
             }),
             py::arg("width"), py::arg("height"), py::arg("fx") = py::none(), py::arg("fy") = py::none(),
             py::arg("cx") = py::none(), py::arg("cy") = py::none())
        .def_readonly("width", &CameraIntrinsics::width)
        .def_readonly("height", &CameraIntrinsics::height)
        .def_readonly("fx", &CameraIntrinsics::fx)
        .def_readonly("fy", &CameraIntrinsics::fy)
        .def_readonly("cx", &CameraIntrinsics::cx)
        .def_readonly("cy", &CameraIntrinsics::cy);

    py::class_<PulseModel>(m, "PulseModel")
        .def(py::init([](int num_bins, double bin_width, double period, double fwhm) {
                 PulseModel p{num_bins, bin_width, period, fwhm};
                 p.validate();
                 return p;
             }),
             py::arg("num_bins") = 1024, py::arg("bin_width") = 97e-12, py::arg("repetition_period") = 100e-9,
             py::arg("fwhm") = 350e-12)
        .def_readonly("num_bins", &PulseModel::num_bins)
        .def_readonly("bin_width", &PulseModel::bin_width)
        .def_readonly("repetition_period", &PulseModel::repetition_period)
        .def_readonly("fwhm", &PulseModel::fwhm)
        .def("bin_depth", &PulseModel::bin_depth)
        .def("unambiguous_range", &PulseModel::unambiguous_range);

    py::class_<SensorConfig>(m, "SensorConfig")
        .def(py::init([](double qe, double dark) {
                 SensorConfig s{qe, dark};
                 s.validate();
                 return s;
             }),
             py::arg("quantum_efficiency") = 0.5, py::arg("dark_count") = 0.0)
        .def_readonly("quantum_efficiency", &SensorConfig::quantum_efficiency)
        .def_readonly("dark_count", &SensorConfig::dark_count);

    py::class_<RenderedScene>(m, "RenderedScene")
        .def_property_readonly("intrinsics", [](const RenderedScene& s) { return s.depth.intrinsics; })
        .def_property_readonly("depth",
                               [](const RenderedScene& s) {
                                   return to_numpy(s.depth.depth,
                                                   {s.depth.intrinsics.height, s.depth.intrinsics.width});
                               })
        .def_property_readonly("albedo", [](const RenderedScene& s) {
            return to_numpy(s.albedo.albedo, {s.albedo.height, s.albedo.width});
        });

    m.def(
        "render_standard_scene",
        [](const CameraIntrinsics& k, unsigned workers) { return render_scene(standard_scene(), k, workers); },
        py::arg("intrinsics"), py::arg("workers") = 0);
    m.def(
        "render_scene_text",
        [](const std::string& text, const CameraIntrinsics& k, unsigned workers) {
            return render_scene(parse_scene(text), k, workers);
        },
        py::arg("text"), py::arg("intrinsics"), py::arg("workers") = 0);

    py::class_<HistogramFrame>(m, "HistogramFrame")
        .def_property_readonly("intrinsics", [](const HistogramFrame& f) { return f.intrinsics; })
        .def_property_readonly("pulse", [](const HistogramFrame& f) { return f.pulse; })
        .def_readonly("seed", &HistogramFrame::seed)
        .def_property_readonly("counts",
                               [](const HistogramFrame& f) {
                                   return to_numpy(f.counts, {f.height(), f.width(), f.pulse.num_bins});
                               })
        .def("save", [](const HistogramFrame& f, const std::filesystem::path& p) { write_frame(f, p); })
        .def_static("load", &read_frame);

    m.def(
        "simulate",
        [](const RenderedScene& scene, const PulseModel& pulse, const SensorConfig& sensor, double signal,
           double background, std::uint64_t seed, unsigned workers) {
            SbrTarget sbr{signal, background};
            return simulate_frame(scene.depth, scene.albedo, pulse, sensor, sbr, seed, workers);
        },
        py::arg("scene"), py::arg("pulse") = PulseModel{}, py::arg("sensor") = SensorConfig{},
        py::arg("signal") = 5.0, py::arg("background") = 50.0, py::arg("seed") = 0, py::arg("workers") = 0);

    m.def(
        "matched_filter",
        [](const Array<double>& h, const PulseModel& pulse, const std::string& correlation) {
            const auto v = to_vector(h);
            return to_numpy(matched_filter(v, pulse_kernel(pulse), parse_correlation(correlation)),
                            {static_cast<py::ssize_t>(v.size())});
        },
        py::arg("histogram"), py::arg("pulse"), py::arg("correlation") = "circular");
    m.def(
        "point_probability", [](const Array<double>& v, int bin) { return point_probability(to_vector(v), bin); },
        py::arg("values"), py::arg("bin"));

    py::class_<ProbabilisticPointCloud>(m, "PointCloud")
        .def(py::init(&cloud_from_arrays), py::arg("positions"), py::arg("probability"),
             py::arg("pixels") = py::none())
        .def("__len__", &ProbabilisticPointCloud::size)
        .def_property_readonly("positions",
                               [](const ProbabilisticPointCloud& c) {
                                   std::vector<double> flat;
                                   flat.reserve(3 * c.size());
                                   for (const auto& p : c.points) {
                                       flat.push_back(p.position.x);
                                       flat.push_back(p.position.y);
                                       flat.push_back(p.position.z);
                                   }
                                   return to_numpy(flat, {static_cast<py::ssize_t>(c.size()), 3});
                               })
        .def_property_readonly("probability",
                               [](const ProbabilisticPointCloud& c) {
                                   return to_numpy(c.probabilities(), {static_cast<py::ssize_t>(c.size())});
                               })
        .def_property_readonly("pixels",
                               [](const ProbabilisticPointCloud& c) {
                                   std::vector<int> flat;
                                   flat.reserve(2 * c.size());
                                   for (const auto& p : c.points) {
                                       flat.push_back(p.pixel_u);
                                       flat.push_back(p.pixel_v);
                                   }
                                   return to_numpy(flat, {static_cast<py::ssize_t>(c.size()), 2});
                               })
        .def(
            "save",
            [](const ProbabilisticPointCloud& c, const std::filesystem::path& p, bool ascii) {
                write_ply(c, p, ascii ? PlyFormat::kAscii : PlyFormat::kBinaryLittleEndian);
            },
            py::arg("path"), py::arg("ascii") = false)
        .def_static("load", &read_ply);

    m.def(
        "extract",
        [](const HistogramFrame& frame, const std::string& domain, std::optional<double> min_height,
           std::optional<double> threshold, unsigned workers) {
            ExtractOptions opt;
            opt.domain = parse_domain(domain);
            opt.min_height = min_height;
            auto grid = estimate_frame(frame, opt, workers);
            if (threshold) grid = threshold_baseline(std::move(grid), *threshold);
            return build_ppc(grid);
        },
        py::arg("frame"), py::arg("domain") = "matched", py::arg("min_height") = py::none(),
        py::arg("threshold") = py::none(), py::arg("workers") = 0);

    m.def(
        "npd_scores",
        [](const ProbabilisticPointCloud& c, std::size_t max_neighbors, double radius, bool include_self,
           unsigned workers) {
            NpdParams p{max_neighbors, radius, 0.003, include_self};
            return to_numpy(npd_scores(c, p, workers), {static_cast<py::ssize_t>(c.size())});
        },
        py::arg("cloud"), py::arg("max_neighbors") = 64, py::arg("radius") = 0.2, py::arg("include_self") = true,
        py::arg("workers") = 0);
    m.def(
        "npd_filter",
        [](const ProbabilisticPointCloud& c, double alpha, std::size_t max_neighbors, double radius,
           bool include_self, unsigned workers) {
            NpdParams p{max_neighbors, radius, alpha, include_self};
            auto r = npd_filter(c, p, workers);
            return py::make_tuple(r.cloud, r.kept, to_numpy(r.scores, {static_cast<py::ssize_t>(c.size())}));
        },
        py::arg("cloud"), py::arg("alpha") = 0.003, py::arg("max_neighbors") = 64, py::arg("radius") = 0.2,
        py::arg("include_self") = true, py::arg("workers") = 0);

    m.def(
        "fps", [](const Array<double>& xyz, std::size_t count, std::size_t start) {
            return fps(to_points(xyz), count, start);
        },
        py::arg("points"), py::arg("count"), py::arg("start") = 0);
    m.def(
        "fpps",
        [](const ProbabilisticPointCloud& c, std::size_t count, double beta, std::optional<std::size_t> start) {
            FppsParams p{beta, count};
            return fpps(c, p, start);
        },
        py::arg("cloud"), py::arg("count") = 1024, py::arg("beta") = 0.01, py::arg("start") = py::none());

    m.def(
        "compress_fourier",
        [](const Array<double>& h, int k) {
            const auto code = compress_fourier(to_vector(h), k);
            return to_numpy(code.coefficients, {code.k()});
        },
        py::arg("histogram"), py::arg("k"));
    m.def(
        "decompress_fourier",
        [](const Array<std::complex<double>>& coeffs, int num_bins) {
            FourierCode code{num_bins, to_vector(coeffs)};
            return to_numpy(decompress_fourier(code), {num_bins});
        },
        py::arg("coefficients"), py::arg("num_bins"));

    m.def(
        "evaluate",
        [](const ProbabilisticPointCloud& c, const RenderedScene& scene, double bin_width, double epsilon_bins,
           std::optional<std::string> sampler, std::size_t count, double alpha, double beta, unsigned workers) {
            EvalOptions opt;
            opt.epsilon_bins = epsilon_bins;
            opt.npd.alpha = alpha;
            opt.sampler = sampler;
            opt.fpps.count = count;
            opt.fpps.beta = beta;
            opt.workers = workers;
            nlohmann::json j = evaluate(c, scene.depth, bin_width, opt);
            return json_to_python(j);
        },
        py::arg("cloud"), py::arg("scene"), py::arg("bin_width") = 97e-12, py::arg("epsilon_bins") = 3.0,
        py::arg("sampler") = py::none(), py::arg("count") = 1024, py::arg("alpha") = 0.003, py::arg("beta") = 0.01,
        py::arg("workers") = 0);
}
