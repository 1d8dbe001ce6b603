// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth aware evaluation of probabilistic point clouds.

#ifndef PPC_EVAL_HPP_
#define PPC_EVAL_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ppc/spatial.hpp"

namespace ppc {

enum class PointLabel : std::uint8_t { kGroundTruth = 0, kNoise = 1 };

inline constexpr double kDefaultEpsilonBins = 3.0;

// A point is ground truth iff |z - true depth at its pixel| <= eps_bins * dt * C / 2.
// Points on "no return" pixels are noise. Throws ValidationError for points
// without pixel provenance or outside the map.
std::vector<PointLabel> label_points(const ProbabilisticPointCloud& cloud, const DepthMap& gt_depth, double bin_width,
                                     double epsilon_bins = kDefaultEpsilonBins);

std::size_t count_ground_truth(const std::vector<PointLabel>& labels);

struct PrPoint {
    double threshold = 0.0;
    std::size_t kept = 0;
    std::size_t kept_gt = 0;
    double precision = 1.0;
    double recall = 1.0;
    // False when nothing was kept; precision is then reported as 1.
    bool precision_defined = true;
};

// Keeps points with score >= threshold for each threshold.
std::vector<PrPoint> filter_pr_curve(const std::vector<PointLabel>& labels, const std::vector<double>& scores,
                                     const std::vector<double>& thresholds);

// Every distinct score, ascending: the thresholds at which the kept set changes.
std::vector<double> distinct_thresholds(const std::vector<double>& scores);

// Precision at the largest threshold whose recall is still >= target.
double precision_at_recall(const std::vector<PrPoint>& curve, double target_recall);

struct ScoreHistogram {
    std::vector<double> edges;  // bins + 1 edges
    std::vector<double> gt_fraction;
    std::vector<double> noise_fraction;

    std::string to_csv() const;
};

// Per-class normalised histograms over [lo, hi]; values outside are clamped
// into the end bins. Throws ValidationError for bins < 2.
ScoreHistogram score_histogram(const std::vector<double>& scores, const std::vector<PointLabel>& labels, int bins,
                               double lo = 0.0, double hi = 1.0);

// Fraction of keypoints labelled ground truth (0 for no keypoints).
double sampling_purity(const std::vector<std::size_t>& keypoints, const std::vector<PointLabel>& labels);

double median(std::vector<double> values);

struct FilterCounts {
    std::size_t kept_gt = 0;
    std::size_t removed_gt = 0;
    std::size_t kept_noise = 0;
    std::size_t removed_noise = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
    bool precision_defined = true;
};

FilterCounts filter_counts(const std::vector<PointLabel>& labels, const std::vector<bool>& kept);

struct EvalReport {
    std::size_t num_points = 0;
    std::size_t num_ground_truth = 0;
    std::size_t num_noise = 0;
    double epsilon_bins = kDefaultEpsilonBins;

    NpdParams npd;
    FilterCounts filter;
    double depth_rmse_kept_gt = 0.0;  // metres

    double median_probability_gt = 0.0;
    double median_probability_noise = 0.0;
    double median_npd_gt = 0.0;
    double median_npd_noise = 0.0;

    std::string sampler;  // "fpps", "fps" or empty
    FppsParams fpps;
    double sampling_purity = 0.0;

    ScoreHistogram probability_histogram;
    ScoreHistogram npd_histogram;
    std::map<std::string, double> timings_ms;
};

struct EvalOptions {
    double epsilon_bins = kDefaultEpsilonBins;
    NpdParams npd;
    std::optional<std::string> sampler;  // "fps" or "fpps"
    FppsParams fpps;
    int histogram_bins = 50;
    unsigned workers = 0;
};

EvalReport evaluate(const ProbabilisticPointCloud& cloud, const DepthMap& gt_depth, double bin_width,
                    const EvalOptions& options = {});

void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);

struct BenchmarkConfig {
    int repetitions = 5;
    unsigned workers = 1;
    ExtractOptions extract;
    NpdParams npd;
    FppsParams fpps;
};

struct BenchmarkResult {
    std::size_t num_points = 0;
    std::map<std::string, std::vector<double>> samples_ms;
    std::map<std::string, double> median_ms;
    // (npd_filter + fpps) / extract, in percent.
    double overhead_percent = 0.0;
};

// Times extraction (frame to cloud), NPD filtering, FPPS and FPS, each
// stage run sequentially, `repetitions` times; medians reported.
BenchmarkResult benchmark(const HistogramFrame& frame, const BenchmarkConfig& config);
// Cloud-only stages (NPD, FPPS, FPS). Empty clouds time as zero.
BenchmarkResult benchmark(const ProbabilisticPointCloud& cloud, const BenchmarkConfig& config);

void to_json(nlohmann::json& j, const BenchmarkResult& r);

}  // namespace ppc

#endif  // PPC_EVAL_HPP_
