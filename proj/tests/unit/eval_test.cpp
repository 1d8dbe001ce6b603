// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ppc/eval.hpp"

namespace ppc {
namespace {

constexpr double kDt = 97e-12;

DepthMap flat_map(int w, int h, float d) {
    DepthMap m;
    m.intrinsics = CameraIntrinsics::with_defaults(w, h);
    m.depth.assign(m.intrinsics.pixel_count(), d);
    return m;
}

ProbabilisticPoint point_at(int u, int v, double z, double prob = 0.5) {
    ProbabilisticPoint p;
    p.position = {0.0, 0.0, z};
    p.probability = prob;
    p.pixel_u = u;
    p.pixel_v = v;
    return p;
}

TEST(Labels, ToleranceRule) {
    auto gt = flat_map(4, 1, 2.0f);
    gt.depth[3] = kNoReturn;
    const double tol = 3.0 * kDt * kSpeedOfLight / 2.0;
    ProbabilisticPointCloud c;
    c.points = {point_at(0, 0, 2.0 + 0.999 * tol), point_at(1, 0, 2.0 - 1.001 * tol), point_at(2, 0, 2.0),
                point_at(3, 0, 2.0)};
    const auto labels = label_points(c, gt, kDt, 3.0);
    EXPECT_EQ(labels[0], PointLabel::kGroundTruth);
    EXPECT_EQ(labels[1], PointLabel::kNoise);
    EXPECT_EQ(labels[2], PointLabel::kGroundTruth);
    EXPECT_EQ(labels[3], PointLabel::kNoise);  // no-return pixel
    const auto inf = label_points(c, gt, kDt, std::numeric_limits<double>::infinity());
    EXPECT_EQ(inf[1], PointLabel::kGroundTruth);
    EXPECT_EQ(inf[3], PointLabel::kNoise);
    EXPECT_EQ(count_ground_truth(labels), 2u);
}

TEST(Labels, Errors) {
    const auto gt = flat_map(2, 2, 1.0f);
    ProbabilisticPointCloud c;
    c.points = {point_at(0, 0, 1.0)};
    c.points[0].pixel_u = -1;
    EXPECT_THROW(label_points(c, gt, kDt), ValidationError);
    c.points = {point_at(2, 0, 1.0)};
    EXPECT_THROW(label_points(c, gt, kDt), ValidationError);
}

TEST(Labels, OrderIndependentAndIdempotent) {
    const auto gt = flat_map(10, 10, 3.0f);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> z(2.9, 3.1);
    ProbabilisticPointCloud c;
    for (int i = 0; i < 100; ++i) c.points.push_back(point_at(i % 10, i / 10, z(gen)));
    const auto a = label_points(c, gt, kDt);
    EXPECT_EQ(a, label_points(c, gt, kDt));
    auto rev = c;
    std::reverse(rev.points.begin(), rev.points.end());
    auto b = label_points(rev, gt, kDt);
    std::reverse(b.begin(), b.end());
    EXPECT_EQ(a, b);
}

TEST(Labels, CleanSimulationMostlyGroundTruth) {
    const auto k = CameraIntrinsics::with_defaults(40, 30);
    const auto scene = render_scene(standard_scene(), k, 2);
    const auto frame = simulate_frame(scene.depth, scene.albedo, PulseModel{}, SensorConfig{}, SbrTarget{50.0, 1e-6}, 5, 2);
    const auto cloud = build_ppc(estimate_frame(frame, {}, 2));
    const auto labels = label_points(cloud, scene.depth, kDt);
    EXPECT_GE(static_cast<double>(count_ground_truth(labels)), 0.99 * static_cast<double>(cloud.size()));
}

TEST(PrCurve, Boundaries) {
    const std::vector<PointLabel> labels = {PointLabel::kGroundTruth, PointLabel::kNoise, PointLabel::kGroundTruth,
                                            PointLabel::kNoise};
    const std::vector<double> scores = {0.9, 0.1, 0.5, 0.6};
    const auto curve = filter_pr_curve(labels, scores, {0.0, 0.5, 0.6, 0.95});
    EXPECT_EQ(curve[0].recall, 1.0);
    EXPECT_EQ(curve[0].precision, 0.5);
    EXPECT_EQ(curve[1].kept, 3u);  // score >= threshold is kept
    EXPECT_DOUBLE_EQ(curve[1].precision, 2.0 / 3.0);
    EXPECT_EQ(curve[2].kept_gt, 1u);
    EXPECT_EQ(curve[2].recall, 0.5);
    EXPECT_EQ(curve[3].kept, 0u);
    EXPECT_EQ(curve[3].precision, 1.0);
    EXPECT_FALSE(curve[3].precision_defined);
}

TEST(PrCurve, RecomputedFromCounts) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<PointLabel> labels(500);
    std::vector<double> scores(500);
    for (std::size_t i = 0; i < 500; ++i) {
        labels[i] = u(gen) < 0.6 ? PointLabel::kGroundTruth : PointLabel::kNoise;
        scores[i] = u(gen);
    }
    const auto thresholds = distinct_thresholds(scores);
    EXPECT_TRUE(std::is_sorted(thresholds.begin(), thresholds.end()));
    const auto curve = filter_pr_curve(labels, scores, thresholds);
    const auto gt = count_ground_truth(labels);
    double prev_recall = 2.0;
    for (const auto& p : curve) {
        std::size_t kept = 0, kept_gt = 0;
        for (std::size_t i = 0; i < 500; ++i)
            if (scores[i] >= p.threshold) {
                ++kept;
                kept_gt += labels[i] == PointLabel::kGroundTruth;
            }
        EXPECT_EQ(p.kept, kept);
        EXPECT_EQ(p.kept_gt, kept_gt);
        EXPECT_EQ(p.precision, static_cast<double>(kept_gt) / static_cast<double>(kept));
        EXPECT_EQ(p.recall, static_cast<double>(kept_gt) / static_cast<double>(gt));
        EXPECT_LE(p.recall, prev_recall);
        prev_recall = p.recall;
    }
}

TEST(PrCurve, PrecisionAtRecall) {
    std::vector<PrPoint> curve(3);
    curve[0] = {0.1, 10, 5, 0.5, 1.0, true};
    curve[1] = {0.2, 6, 4, 4.0 / 6.0, 0.8, true};
    curve[2] = {0.3, 2, 2, 1.0, 0.4, true};
    EXPECT_DOUBLE_EQ(precision_at_recall(curve, 0.8), 4.0 / 6.0);
    EXPECT_EQ(precision_at_recall(curve, 0.3), 1.0);
    curve.pop_back();
    curve.erase(curve.begin());
    EXPECT_THROW(precision_at_recall(curve, 0.9), ValidationError);
}

TEST(Histogram, NormalisedPerClass) {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(-0.2, 1.2);
    std::vector<PointLabel> labels(300);
    std::vector<double> scores(300);
    for (std::size_t i = 0; i < 300; ++i) {
        labels[i] = i % 3 ? PointLabel::kGroundTruth : PointLabel::kNoise;
        scores[i] = u(gen);
    }
    const auto h = score_histogram(scores, labels, 20);
    ASSERT_EQ(h.edges.size(), 21u);
    double gt = 0.0, noise = 0.0;
    for (std::size_t b = 0; b < 20; ++b) {
        gt += h.gt_fraction[b];
        noise += h.noise_fraction[b];
    }
    EXPECT_NEAR(gt, 1.0, 1e-9);
    EXPECT_NEAR(noise, 1.0, 1e-9);
    const auto csv = h.to_csv();
    EXPECT_EQ(csv.rfind("bin_left,bin_right,gt_frac,noise_frac\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
}

TEST(Histogram, AllGroundTruthHasZeroNoise) {
    const std::vector<PointLabel> labels(10, PointLabel::kGroundTruth);
    const std::vector<double> scores(10, 0.3);
    const auto h = score_histogram(scores, labels, 5);
    for (double v : h.noise_fraction) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(score_histogram(scores, labels, 1), ValidationError);
}

TEST(Purity, Boundaries) {
    const std::vector<PointLabel> labels = {PointLabel::kGroundTruth, PointLabel::kNoise, PointLabel::kNoise,
                                            PointLabel::kGroundTruth};
    EXPECT_EQ(sampling_purity({0, 3}, labels), 1.0);
    EXPECT_EQ(sampling_purity({1, 2}, labels), 0.0);
    EXPECT_EQ(sampling_purity({0, 1, 2, 3}, labels), 0.5);
    EXPECT_EQ(sampling_purity({}, labels), 0.0);
    EXPECT_THROW(sampling_purity({4}, labels), ValidationError);
}

TEST(Median, OddEvenEmpty) {
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
    EXPECT_EQ(median({}), 0.0);
}

TEST(FilterCounts, Consistent) {
    const std::vector<PointLabel> labels = {PointLabel::kGroundTruth, PointLabel::kGroundTruth, PointLabel::kNoise,
                                            PointLabel::kNoise, PointLabel::kNoise};
    const auto c = filter_counts(labels, {true, false, true, false, false});
    EXPECT_EQ(c.kept_gt, 1u);
    EXPECT_EQ(c.removed_gt, 1u);
    EXPECT_EQ(c.kept_noise, 1u);
    EXPECT_EQ(c.removed_noise, 2u);
    EXPECT_EQ(c.precision, 0.5);
    EXPECT_EQ(c.recall, 0.5);
    EXPECT_EQ(c.f1, 0.5);
    const auto none = filter_counts(labels, std::vector<bool>(5, false));
    EXPECT_FALSE(none.precision_defined);
    EXPECT_EQ(none.precision, 1.0);
}

class EvaluateTest : public ::testing::Test {
  protected:
    void SetUp() override {
        const auto k = CameraIntrinsics::with_defaults(48, 36);
        scene_ = render_scene(standard_scene(), k, 2);
        const auto frame =
            simulate_frame(scene_.depth, scene_.albedo, PulseModel{}, SensorConfig{}, SbrTarget{2.0, 50.0}, 11, 2);
        cloud_ = build_ppc(estimate_frame(frame, {}, 2));
    }
    RenderedScene scene_;
    ProbabilisticPointCloud cloud_;
};

TEST_F(EvaluateTest, ReportIsConsistentAndRoundTrips) {
    EvalOptions opt;
    opt.sampler = "fpps";
    opt.fpps.count = 64;
    opt.workers = 2;
    const auto r = evaluate(cloud_, scene_.depth, kDt, opt);
    EXPECT_EQ(r.num_points, cloud_.size());
    EXPECT_EQ(r.num_ground_truth + r.num_noise, r.num_points);
    const auto& f = r.filter;
    EXPECT_EQ(f.kept_gt + f.removed_gt, r.num_ground_truth);
    EXPECT_EQ(f.kept_noise + f.removed_noise, r.num_noise);
    if (f.kept_gt + f.kept_noise > 0) {
        EXPECT_EQ(f.precision, static_cast<double>(f.kept_gt) / static_cast<double>(f.kept_gt + f.kept_noise));
    }
    EXPECT_EQ(f.recall, static_cast<double>(f.kept_gt) / static_cast<double>(r.num_ground_truth));
    EXPECT_GE(r.sampling_purity, 0.0);
    EXPECT_LE(r.sampling_purity, 1.0);
    EXPECT_EQ(r.sampler, "fpps");
    EXPECT_TRUE(r.timings_ms.count("npd_filter"));

    const nlohmann::json j = r;
    const auto back = j.get<EvalReport>();
    const nlohmann::json j2 = back;
    EXPECT_EQ(j.dump(), j2.dump());
    EXPECT_EQ(back.filter.precision, r.filter.precision);
    EXPECT_EQ(back.median_npd_gt, r.median_npd_gt);
    EXPECT_EQ(back.npd_histogram.gt_fraction, r.npd_histogram.gt_fraction);
}

TEST_F(EvaluateTest, Benchmark) {
    BenchmarkConfig cfg;
    cfg.repetitions = 3;
    const auto r = benchmark(cloud_, cfg);
    EXPECT_EQ(r.num_points, cloud_.size());
    for (const char* stage : {"npd_filter", "fpps", "fps"}) {
        ASSERT_TRUE(r.median_ms.count(stage)) << stage;
        EXPECT_EQ(r.samples_ms.at(stage).size(), 3u);
        EXPECT_GE(r.median_ms.at(stage), 0.0);
    }
    const auto empty = benchmark(ProbabilisticPointCloud{}, cfg);
    EXPECT_EQ(empty.median_ms.at("npd_filter"), 0.0);
    cfg.repetitions = 2;
    EXPECT_THROW(benchmark(cloud_, cfg), ValidationError);
}

}  // namespace
}  // namespace ppc
