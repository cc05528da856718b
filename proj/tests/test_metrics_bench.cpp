#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "ghom/bench.hpp"

using namespace ghom;

namespace {

Mat3 axis_angle(const Vec3 &axis, double angle) { return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(); }

} // namespace

TEST(Metrics, IdenticalPosesHaveZeroError) {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        RelativePose p;
        p.R = axis_angle(Vec3(rng.normal(), rng.normal(), rng.normal()), rng.uniform(0.0, 3.0));
        p.t = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
        const PoseErrors e = pose_errors(p, p, 500.0, 500.0);
        EXPECT_EQ(e.e_R, 0.0);
        EXPECT_EQ(*e.e_t, 0.0);
        EXPECT_EQ(*e.e_f, 0.0);
    }
}

TEST(Metrics, RotationErrorSymmetric) {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const Mat3 a = axis_angle(Vec3(rng.normal(), rng.normal(), rng.normal()), rng.uniform(0.0, 3.0));
        const Mat3 b = axis_angle(Vec3(rng.normal(), rng.normal(), rng.normal()), rng.uniform(0.0, 3.0));
        EXPECT_EQ(rotation_error(a, b), rotation_error(b, a));
    }
}

TEST(Metrics, PlantedRotationRecovered) {
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const Mat3 base = axis_angle(Vec3(rng.normal(), rng.normal(), rng.normal()), rng.uniform(0.0, 3.0));
        const double angle = rng.uniform(0.1, 3.0);
        const Mat3 pert = axis_angle(Vec3(rng.normal(), rng.normal(), rng.normal()), angle);
        EXPECT_NEAR(rotation_error(pert * base, base), angle, 1e-12);
    }
}

TEST(Metrics, HalfTurn) {
    EXPECT_NEAR(rotation_error(rot_y(std::numbers::pi), Mat3::Identity()), std::numbers::pi, 1e-12);
    EXPECT_TRUE(std::isfinite(rotation_error(axis_angle(Vec3(1, 2, 3), std::numbers::pi), Mat3::Identity())));
}

TEST(Metrics, TranslationAngle) {
    EXPECT_NEAR(*translation_error(Vec3(1, 0, 0), Vec3(0, 1, 0)), std::numbers::pi / 2.0, 1e-15);
    EXPECT_NEAR(*translation_error(Vec3(1, 0, 0), Vec3(-2, 0, 0)), std::numbers::pi, 1e-15);
    EXPECT_FALSE(translation_error(Vec3::Zero(), Vec3(1, 0, 0)));
}

TEST(Metrics, FocalErrorIsRelativeToGroundTruth) {
    EXPECT_DOUBLE_EQ(focal_error(100.0, 150.0), 0.5);
    EXPECT_DOUBLE_EQ(focal_error(150.0, 100.0), 50.0 / 150.0);
    EXPECT_FALSE(pose_errors(RelativePose{}, RelativePose{}).e_f);
}

TEST(Metrics, HomographyError) {
    const Mat3 h = make_ground_homography(0.3, Vec3(0.1, 0.2, 0.3)).matrix();
    EXPECT_LT(homography_error(h, 2.5 * h), 1e-15);
    Mat3 g = h;
    g(0, 1) += 1e-3 * h(2, 2);
    EXPECT_NEAR(homography_error(h, g), 1e-3, 1e-15);
    Mat3 z = h;
    z(2, 2) = 0.0;
    EXPECT_TRUE(std::isinf(homography_error(h, z)));
}

TEST(Metrics, Quantiles) {
    const Quantiles q = quantiles({5.0, 1.0, std::nan(""), 3.0, 2.0, 4.0});
    EXPECT_EQ(q.median, 3.0);
    EXPECT_EQ(q.q25, 2.0);
    EXPECT_EQ(q.q75, 4.0);
    EXPECT_TRUE(std::isnan(quantiles({}).median));
}

TEST(Metrics, SolutionPoseOfGroundTruth) {
    const auto inst = generate_instance(3, SynthConfig{});
    const SolverSolution gt{inst.gt_h, inst.f1, inst.f2};
    const PoseErrors e = pose_errors(inst.gt_pose, solution_pose(gt, inst.cam1.attitude, inst.cam2.attitude));
    EXPECT_LT(e.e_R, 1e-7);
    EXPECT_LT(*e.e_t, 1e-7);
    // Camera-frame rotation equals R2 R1^T.
    EXPECT_TRUE(inst.gt_pose.R.isApprox(inst.cam2.rotation() * inst.cam1.rotation().transpose(), 1e-12));
    EXPECT_EQ(*solution_focal_error(gt, inst.f1, inst.f2), 0.0);
}

TEST(Csv, RoundTrip) {
    CsvTable t;
    t.meta = {{"experiment", "x"}, {"seed", "3"}};
    t.header = {"a", "b"};
    t.rows = {{format_double(0.1), format_double(std::nan(""))}, {format_double(-1e-300), format_double(INFINITY)}};
    std::stringstream ss;
    write_csv(ss, t);
    const CsvTable back = read_csv(ss);
    EXPECT_EQ(back.meta, t.meta);
    EXPECT_EQ(back.header, t.header);
    EXPECT_EQ(back.rows, t.rows);
    EXPECT_EQ(parse_double(back.rows[0][0]), 0.1);
    EXPECT_TRUE(std::isnan(parse_double(back.rows[0][1])));
    EXPECT_EQ(parse_double(back.rows[1][0]), -1e-300);
}

TEST(Csv, Errors) {
    std::stringstream no_version("a,b\n1,2\n");
    EXPECT_THROW(read_csv(no_version), Error);
    std::stringstream bad_row("# ghom-csv v1\na,b\n1,2\n1\n");
    try {
        read_csv(bad_row);
        FAIL();
    } catch (const Error &e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
    }
    EXPECT_THROW(parse_double("1.5x"), Error);
    EXPECT_THROW(CsvTable{}.column("missing"), Error);
}

TEST(Bench, StabilityRowsAndRoundTrip) {
    const auto recs = stability_run(SolverKind::FHF, 50, 4);
    ASSERT_EQ(recs.size(), 50u);
    const CsvTable t = stability_csv(SolverKind::FHF, 4, recs);
    EXPECT_EQ(t.rows.size(), 100u);
    std::stringstream ss;
    write_csv(ss, t);
    const auto back = stability_from_csv(read_csv(ss));
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(back[i].seed, recs[i].seed);
        EXPECT_EQ(back[i].log10_h, recs[i].log10_h);
        EXPECT_EQ(back[i].log10_f, recs[i].log10_f);
    }
    const auto s = summarize_stability(recs);
    EXPECT_EQ(s.found_fraction, 1.0);
    EXPECT_LT(s.median_log10_h, -10.0);
    EXPECT_EQ(stability_csv(SolverKind::Calibrated2pt, 4, stability_run(SolverKind::Calibrated2pt, 10, 4)).rows.size(),
              10u);
}

TEST(Bench, StabilityDeterministic) {
    const auto a = stability_run(SolverKind::F1HF2, 20, 9), b = stability_run(SolverKind::F1HF2, 20, 9);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].log10_h, b[i].log10_h);
}

TEST(Bench, Histogram) {
    const Histogram h = histogram({-20.0, -15.5, -15.4, -1.0, 5.0}, -16.0, 0.0, 16);
    EXPECT_EQ(h.underflow, 1u);
    EXPECT_EQ(h.overflow, 1u);
    EXPECT_EQ(h.counts[0], 2u);
    EXPECT_EQ(h.counts[15], 1u);
}

TEST(Bench, NoiseSweepShape) {
    const std::vector<double> grid = {0.0, 1.0};
    const auto recs = noise_sweep(SolverKind::HF, grid, 30, 5);
    EXPECT_EQ(recs.size(), 60u);
    EXPECT_EQ(noise_csv(SolverKind::HF, 5, recs).rows.size(), 60u);
    const auto sum = summarize_noise(recs);
    ASSERT_EQ(sum.size(), 2u);
    EXPECT_LT(sum[0].median_e_R, 1e-8);
    EXPECT_GT(sum[1].median_e_R, sum[0].median_e_R);
    // Same base instances at every level.
    EXPECT_EQ(recs[0].seed, recs[30].seed);
}

TEST(Bench, SpeedSummary) {
    std::vector<double> times;
    const auto s = speed_bench(SolverKind::Calibrated2pt, 300, 1, &times);
    EXPECT_EQ(s.n, 300u);
    EXPECT_EQ(times.size(), 300u);
    EXPECT_GT(s.mean_us, 0.0);
    EXPECT_LE(s.median_us, s.p95_us);
    EXPECT_EQ(s.mean_candidates, 2.0);
    EXPECT_EQ(speed_csv(1, {s, s}).rows.size(), 2u);
}

TEST(Bench, RansacBenchPairs) {
    RansacConfig rc;
    rc.threshold = 3.0;
    const auto trials = ransac_bench(SolverKind::FHF, 3, 2, rc, 0.25);
    ASSERT_EQ(trials.size(), 6u);
    for (std::size_t i = 0; i < trials.size(); i += 2) {
        EXPECT_FALSE(trials[i].consistency_check);
        EXPECT_TRUE(trials[i + 1].consistency_check);
        EXPECT_EQ(trials[i].seed, trials[i + 1].seed);
        // Scrambling picks from all 130 matches, planar or not.
        EXPECT_GE(trials[i].true_inliers, 70);
        EXPECT_LE(trials[i].true_inliers, 100);
        EXPECT_GT(trials[i].candidates_scored, trials[i + 1].candidates_scored);
    }
    EXPECT_EQ(ransac_csv(SolverKind::FHF, 2, trials).rows.size(), 6u);
}
