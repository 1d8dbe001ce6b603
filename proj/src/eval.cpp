// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include "ppc/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace ppc {
namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double time_ms(Fn&& fn) {
    const auto t0 = Clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double safe_ratio(std::size_t num, std::size_t den, double fallback) {
    return den == 0 ? fallback : static_cast<double>(num) / static_cast<double>(den);
}

void finish_medians(BenchmarkResult& r) {
    for (const auto& [stage, samples] : r.samples_ms) r.median_ms[stage] = median(samples);
}

void time_cloud_stages(const ProbabilisticPointCloud& cloud, const BenchmarkConfig& cfg, BenchmarkResult& r) {
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        if (cloud.empty()) {
            r.samples_ms["npd_filter"].push_back(0.0);
            r.samples_ms["fpps"].push_back(0.0);
            r.samples_ms["fps"].push_back(0.0);
            continue;
        }
        NpdFilterResult filtered;
        r.samples_ms["npd_filter"].push_back(time_ms([&] { filtered = npd_filter(cloud, cfg.npd, cfg.workers); }));
        // Sampling runs on the filtered cloud, as in the pipeline.
        const ProbabilisticPointCloud& sampled = filtered.cloud.empty() ? cloud : filtered.cloud;
        FppsParams fp = cfg.fpps;
        fp.count = std::min(fp.count, sampled.size());
        r.samples_ms["fpps"].push_back(time_ms([&] { (void)fpps(sampled, fp); }));
        const auto pos = sampled.positions();
        r.samples_ms["fps"].push_back(time_ms([&] { (void)fps(pos, fp.count); }));
    }
}

}  // namespace

std::vector<PointLabel> label_points(const ProbabilisticPointCloud& cloud, const DepthMap& gt, double bin_width,
                                     double epsilon_bins) {
    if (!(bin_width > 0.0)) throw ValidationError("label_points: bin width must be positive");
    if (!(epsilon_bins >= 0.0)) throw ValidationError("label_points: epsilon must be >= 0");
    const double tolerance = epsilon_bins * bin_width * kSpeedOfLight / 2.0;
    const int W = gt.intrinsics.width;
    const int H = gt.intrinsics.height;
    std::vector<PointLabel> labels(cloud.size(), PointLabel::kNoise);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        if (!p.has_pixel()) throw ValidationError("label_points: point " + std::to_string(i) + " has no pixel provenance");
        if (p.pixel_u >= W || p.pixel_v >= H) throw ValidationError("label_points: pixel outside the depth map");
        const float truth = gt.at(p.pixel_v, p.pixel_u);
        if (DepthMap::is_sentinel(truth)) continue;
        // inf tolerance: every non-sentinel point is ground truth.
        if (std::isinf(tolerance) || std::abs(p.position.z - static_cast<double>(truth)) <= tolerance)
            labels[i] = PointLabel::kGroundTruth;
    }
    return labels;
}

std::size_t count_ground_truth(const std::vector<PointLabel>& labels) {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), PointLabel::kGroundTruth));
}

std::vector<PrPoint> filter_pr_curve(const std::vector<PointLabel>& labels, const std::vector<double>& scores,
                                     const std::vector<double>& thresholds) {
    if (labels.size() != scores.size()) throw ValidationError("filter_pr_curve: scores and labels differ in length");
    const std::size_t total_gt = count_ground_truth(labels);

    // Sort scores once; each threshold is then a binary search.
    std::vector<std::pair<double, bool>> sorted(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) sorted[i] = {scores[i], labels[i] == PointLabel::kGroundTruth};
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> gt_suffix(sorted.size() + 1, 0);
    for (std::size_t i = sorted.size(); i-- > 0;) gt_suffix[i] = gt_suffix[i + 1] + (sorted[i].second ? 1 : 0);

    std::vector<PrPoint> curve;
    curve.reserve(thresholds.size());
    for (double t : thresholds) {
        const auto first = std::lower_bound(sorted.begin(), sorted.end(), t,
                                            [](const auto& e, double v) { return e.first < v; });
        const std::size_t pos = static_cast<std::size_t>(first - sorted.begin());
        PrPoint p;
        p.threshold = t;
        p.kept = sorted.size() - pos;
        p.kept_gt = gt_suffix[pos];
        p.precision_defined = p.kept > 0;
        p.precision = safe_ratio(p.kept_gt, p.kept, 1.0);
        p.recall = safe_ratio(p.kept_gt, total_gt, 1.0);
        curve.push_back(p);
    }
    return curve;
}

std::vector<double> distinct_thresholds(const std::vector<double>& scores) {
    std::vector<double> t(scores);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

double precision_at_recall(const std::vector<PrPoint>& curve, double target_recall) {
    const PrPoint* best = nullptr;
    for (const auto& p : curve)
        if (p.recall >= target_recall && (!best || p.threshold > best->threshold)) best = &p;
    if (!best) throw ValidationError("precision_at_recall: no threshold reaches the target recall");
    return best->precision;
}

std::string ScoreHistogram::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "bin_left,bin_right,gt_frac,noise_frac\n";
    for (std::size_t b = 0; b + 1 < edges.size(); ++b)
        os << edges[b] << ',' << edges[b + 1] << ',' << gt_fraction[b] << ',' << noise_fraction[b] << '\n';
    return os.str();
}

ScoreHistogram score_histogram(const std::vector<double>& scores, const std::vector<PointLabel>& labels, int bins,
                               double lo, double hi) {
    if (bins < 2) throw ValidationError("score_histogram: need at least 2 bins");
    if (!(hi > lo)) throw ValidationError("score_histogram: empty range");
    if (labels.size() != scores.size()) throw ValidationError("score_histogram: scores and labels differ in length");
    ScoreHistogram h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
    h.gt_fraction.assign(static_cast<std::size_t>(bins), 0.0);
    h.noise_fraction.assign(static_cast<std::size_t>(bins), 0.0);
    std::size_t n_gt = 0, n_noise = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double x = (scores[i] - lo) / (hi - lo) * bins;
        const int b = std::clamp(static_cast<int>(std::floor(x)), 0, bins - 1);
        if (labels[i] == PointLabel::kGroundTruth) {
            h.gt_fraction[static_cast<std::size_t>(b)] += 1.0;
            ++n_gt;
        } else {
            h.noise_fraction[static_cast<std::size_t>(b)] += 1.0;
            ++n_noise;
        }
    }
    for (auto& v : h.gt_fraction) v = n_gt ? v / static_cast<double>(n_gt) : 0.0;
    for (auto& v : h.noise_fraction) v = n_noise ? v / static_cast<double>(n_noise) : 0.0;
    return h;
}

double sampling_purity(const std::vector<std::size_t>& keypoints, const std::vector<PointLabel>& labels) {
    if (keypoints.empty()) return 0.0;
    std::size_t gt = 0;
    for (std::size_t k : keypoints) {
        if (k >= labels.size()) throw ValidationError("sampling_purity: keypoint index out of range");
        gt += labels[k] == PointLabel::kGroundTruth ? 1 : 0;
    }
    return static_cast<double>(gt) / static_cast<double>(keypoints.size());
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

FilterCounts filter_counts(const std::vector<PointLabel>& labels, const std::vector<bool>& kept) {
    if (labels.size() != kept.size()) throw ValidationError("filter_counts: size mismatch");
    FilterCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool gt = labels[i] == PointLabel::kGroundTruth;
        if (kept[i]) (gt ? c.kept_gt : c.kept_noise)++;
        else (gt ? c.removed_gt : c.removed_noise)++;
    }
    c.precision_defined = c.kept_gt + c.kept_noise > 0;
    c.precision = safe_ratio(c.kept_gt, c.kept_gt + c.kept_noise, 1.0);
    c.recall = safe_ratio(c.kept_gt, c.kept_gt + c.removed_gt, 1.0);
    c.f1 = c.precision + c.recall > 0.0 ? 2.0 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
    return c;
}

EvalReport evaluate(const ProbabilisticPointCloud& cloud, const DepthMap& gt_depth, double bin_width,
                    const EvalOptions& options) {
    EvalReport r;
    r.epsilon_bins = options.epsilon_bins;
    r.npd = options.npd;
    r.fpps = options.fpps;

    std::vector<PointLabel> labels;
    r.timings_ms["label"] = time_ms([&] { labels = label_points(cloud, gt_depth, bin_width, options.epsilon_bins); });
    r.num_points = cloud.size();
    r.num_ground_truth = count_ground_truth(labels);
    r.num_noise = r.num_points - r.num_ground_truth;

    NpdFilterResult filtered;
    r.timings_ms["npd_filter"] = time_ms([&] { filtered = npd_filter(cloud, options.npd, options.workers); });
    std::vector<bool> kept(cloud.size(), false);
    for (std::size_t i : filtered.kept) kept[i] = true;
    r.filter = filter_counts(labels, kept);

    double sq = 0.0;
    std::size_t n_sq = 0;
    std::vector<double> prob_gt, prob_noise, npd_gt, npd_noise;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const bool gt = labels[i] == PointLabel::kGroundTruth;
        (gt ? prob_gt : prob_noise).push_back(cloud.points[i].probability);
        (gt ? npd_gt : npd_noise).push_back(filtered.scores[i]);
        if (gt && kept[i]) {
            const auto& p = cloud.points[i];
            const double err = p.position.z - gt_depth.at(p.pixel_v, p.pixel_u);
            sq += err * err;
            ++n_sq;
        }
    }
    r.depth_rmse_kept_gt = n_sq ? std::sqrt(sq / static_cast<double>(n_sq)) : 0.0;
    r.median_probability_gt = median(prob_gt);
    r.median_probability_noise = median(prob_noise);
    r.median_npd_gt = median(npd_gt);
    r.median_npd_noise = median(npd_noise);

    r.probability_histogram = score_histogram(cloud.probabilities(), labels, options.histogram_bins);
    r.npd_histogram = score_histogram(filtered.scores, labels, options.histogram_bins);

    // Keypoints are sampled from the filtered cloud, as in the pipeline.
    if (options.sampler && !filtered.cloud.empty()) {
        r.sampler = *options.sampler;
        if (r.sampler != "fpps" && r.sampler != "fps") throw ValidationError("unknown sampler '" + r.sampler + "'");
        FppsParams fp = options.fpps;
        fp.count = std::min(fp.count, filtered.cloud.size());
        r.fpps = fp;
        std::vector<std::size_t> keys;
        if (r.sampler == "fpps") {
            r.timings_ms["sample"] = time_ms([&] { keys = fpps(filtered.cloud, fp); });
        } else {
            const auto pos = filtered.cloud.positions();
            r.timings_ms["sample"] = time_ms([&] { keys = fps(pos, fp.count); });
        }
        std::vector<PointLabel> kept_labels;
        kept_labels.reserve(filtered.kept.size());
        for (std::size_t i : filtered.kept) kept_labels.push_back(labels[i]);
        r.sampling_purity = sampling_purity(keys, kept_labels);
    }
    return r;
}

namespace {

nlohmann::json histogram_json(const ScoreHistogram& h) {
    return {{"edges", h.edges}, {"gt_fraction", h.gt_fraction}, {"noise_fraction", h.noise_fraction}};
}

ScoreHistogram histogram_from_json(const nlohmann::json& j) {
    ScoreHistogram h;
    j.at("edges").get_to(h.edges);
    j.at("gt_fraction").get_to(h.gt_fraction);
    j.at("noise_fraction").get_to(h.noise_fraction);
    return h;
}

}  // namespace

void to_json(nlohmann::json& j, const EvalReport& r) {
    j = nlohmann::json{
        {"num_points", r.num_points},
        {"num_ground_truth", r.num_ground_truth},
        {"num_noise", r.num_noise},
        {"epsilon_bins", r.epsilon_bins},
        {"npd",
         {{"max_neighbors", r.npd.max_neighbors},
          {"radius", r.npd.radius},
          {"alpha", r.npd.alpha},
          {"include_self", r.npd.include_self}}},
        {"filter",
         {{"kept_gt", r.filter.kept_gt},
          {"removed_gt", r.filter.removed_gt},
          {"kept_noise", r.filter.kept_noise},
          {"removed_noise", r.filter.removed_noise},
          {"precision", r.filter.precision},
          {"recall", r.filter.recall},
          {"f1", r.filter.f1},
          {"precision_defined", r.filter.precision_defined}}},
        {"depth_rmse_kept_gt", r.depth_rmse_kept_gt},
        {"median_probability_gt", r.median_probability_gt},
        {"median_probability_noise", r.median_probability_noise},
        {"median_npd_gt", r.median_npd_gt},
        {"median_npd_noise", r.median_npd_noise},
        {"sampling",
         {{"method", r.sampler}, {"beta", r.fpps.beta}, {"count", r.fpps.count}, {"purity", r.sampling_purity}}},
        {"probability_histogram", histogram_json(r.probability_histogram)},
        {"npd_histogram", histogram_json(r.npd_histogram)},
        {"timings_ms", r.timings_ms},
    };
}

void from_json(const nlohmann::json& j, EvalReport& r) {
    j.at("num_points").get_to(r.num_points);
    j.at("num_ground_truth").get_to(r.num_ground_truth);
    j.at("num_noise").get_to(r.num_noise);
    j.at("epsilon_bins").get_to(r.epsilon_bins);
    const auto& npd = j.at("npd");
    npd.at("max_neighbors").get_to(r.npd.max_neighbors);
    npd.at("radius").get_to(r.npd.radius);
    npd.at("alpha").get_to(r.npd.alpha);
    npd.at("include_self").get_to(r.npd.include_self);
    const auto& f = j.at("filter");
    f.at("kept_gt").get_to(r.filter.kept_gt);
    f.at("removed_gt").get_to(r.filter.removed_gt);
    f.at("kept_noise").get_to(r.filter.kept_noise);
    f.at("removed_noise").get_to(r.filter.removed_noise);
    f.at("precision").get_to(r.filter.precision);
    f.at("recall").get_to(r.filter.recall);
    f.at("f1").get_to(r.filter.f1);
    f.at("precision_defined").get_to(r.filter.precision_defined);
    j.at("depth_rmse_kept_gt").get_to(r.depth_rmse_kept_gt);
    j.at("median_probability_gt").get_to(r.median_probability_gt);
    j.at("median_probability_noise").get_to(r.median_probability_noise);
    j.at("median_npd_gt").get_to(r.median_npd_gt);
    j.at("median_npd_noise").get_to(r.median_npd_noise);
    const auto& s = j.at("sampling");
    s.at("method").get_to(r.sampler);
    s.at("beta").get_to(r.fpps.beta);
    s.at("count").get_to(r.fpps.count);
    s.at("purity").get_to(r.sampling_purity);
    r.probability_histogram = histogram_from_json(j.at("probability_histogram"));
    r.npd_histogram = histogram_from_json(j.at("npd_histogram"));
    j.at("timings_ms").get_to(r.timings_ms);
}

BenchmarkResult benchmark(const HistogramFrame& frame, const BenchmarkConfig& cfg) {
    if (cfg.repetitions < 3) throw ValidationError("benchmark needs at least 3 repetitions");
    BenchmarkResult r;
    ProbabilisticPointCloud cloud;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        r.samples_ms["extract"].push_back(
            time_ms([&] { cloud = build_ppc(estimate_frame(frame, cfg.extract, cfg.workers)); }));
    }
    r.num_points = cloud.size();
    time_cloud_stages(cloud, cfg, r);
    finish_medians(r);
    const double base = r.median_ms["extract"];
    r.overhead_percent = base > 0.0 ? 100.0 * (r.median_ms["npd_filter"] + r.median_ms["fpps"]) / base : 0.0;
    return r;
}

BenchmarkResult benchmark(const ProbabilisticPointCloud& cloud, const BenchmarkConfig& cfg) {
    if (cfg.repetitions < 3) throw ValidationError("benchmark needs at least 3 repetitions");
    BenchmarkResult r;
    r.num_points = cloud.size();
    time_cloud_stages(cloud, cfg, r);
    finish_medians(r);
    return r;
}

void to_json(nlohmann::json& j, const BenchmarkResult& r) {
    j = nlohmann::json{{"num_points", r.num_points},
                       {"median_ms", r.median_ms},
                       {"samples_ms", r.samples_ms},
                       {"overhead_percent", r.overhead_percent}};
}

}  // namespace ppc
