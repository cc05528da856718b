#include <gtest/gtest.h>

#include <numbers>

#include "ghom/metrics.hpp"
#include "ghom/solvers.hpp"
#include "ghom/synth.hpp"

using namespace ghom;

namespace {

constexpr SolverKind all_kinds[] = {SolverKind::Calibrated2pt, SolverKind::FHF, SolverKind::HF, SolverKind::F1HF2};

ProblemInstance instance(SolverKind kind, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.focal_mode = focal_mode_for(kind);
    return generate_instance(seed, cfg);
}

std::span<const Correspondence> sample(SolverKind kind, const ProblemInstance &inst) {
    return std::span<const Correspondence>(inst.corrs).first(minimal_sample_size(kind));
}

double best_error(const std::vector<SolverSolution> &sols, const GroundHomography &gt,
                  const SolverSolution **match = nullptr) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto &s : sols) {
        const double e = homography_error(gt.matrix(), s.h.matrix());
        if (e < best) {
            best = e;
            if (match) *match = &s;
        }
    }
    return best;
}

} // namespace

TEST(Solvers, Names) {
    for (auto k : all_kinds) EXPECT_EQ(parse_solver_kind(solver_name(k)), k);
    EXPECT_FALSE(parse_solver_kind("7pt"));
    EXPECT_EQ(minimal_sample_size(SolverKind::Calibrated2pt), 2);
    EXPECT_EQ(minimal_sample_size(SolverKind::F1HF2), 3);
    EXPECT_TRUE(has_spare_equation(SolverKind::FHF));
    EXPECT_FALSE(has_spare_equation(SolverKind::F1HF2));
}

TEST(Solvers, RecoverGroundTruth) {
    for (auto kind : all_kinds) {
        SCOPED_TRACE(std::string(solver_name(kind)));
        int found = 0;
        for (std::uint64_t s = 0; s < 200; ++s) {
            const ProblemInstance inst = instance(kind, s);
            const auto sols = solve(kind, sample(kind, inst), inst.known_for(kind));
            const SolverSolution *m = nullptr;
            const double e = best_error(sols, inst.gt_h, &m);
            if (e < 1e-8) {
                ++found;
                if (m->f1) EXPECT_LT(focal_error(inst.f1, *m->f1), 1e-7);
                if (m->f2) EXPECT_LT(focal_error(inst.f2, *m->f2), 1e-7);
            }
        }
        EXPECT_GE(found, 199);
    }
}

TEST(Solvers, CandidateCountBounds) {
    const int bound[] = {2, 7, 4, 5};
    for (auto kind : all_kinds) {
        SCOPED_TRACE(std::string(solver_name(kind)));
        SolverOptions both;
        both.both_signs = true;
        for (std::uint64_t s = 0; s < 300; ++s) {
            const ProblemInstance inst = instance(kind, s);
            const auto one = solve(kind, sample(kind, inst), inst.known_for(kind));
            const auto two = solve(kind, sample(kind, inst), inst.known_for(kind), both);
            const int b = bound[static_cast<int>(kind)];
            if (kind == SolverKind::Calibrated2pt) {
                EXPECT_EQ(one.size(), 2u);
                EXPECT_EQ(two.size(), 2u);
            } else {
                EXPECT_LE(static_cast<int>(one.size()), b);
                EXPECT_LE(static_cast<int>(two.size()), 2 * b);
            }
        }
    }
}

TEST(Solvers, CalibratedCheiralFirst) {
    const ProblemInstance inst = instance(SolverKind::Calibrated2pt, 4);
    const auto sols = solve(SolverKind::Calibrated2pt, sample(SolverKind::Calibrated2pt, inst), inst.known());
    ASSERT_EQ(sols.size(), 2u);
    EXPECT_GT(sols[0].h.h4, 0.0);
    EXPECT_EQ(sols[1].h.vector(), -sols[0].h.vector());
    EXPECT_LT(homography_error(inst.gt_h.matrix(), sols[0].h.matrix()), 1e-9);
}

TEST(Solvers, DuplicatePointIsDegenerate) {
    const ProblemInstance inst = instance(SolverKind::Calibrated2pt, 1);
    try {
        solve_calibrated_2pt(inst.corrs[0], inst.corrs[0], Intrinsics(inst.f1), Intrinsics(inst.f2));
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateConfiguration);
    }
    const ProblemInstance i3 = instance(SolverKind::F1HF2, 1);
    EXPECT_THROW(solve_f1Hf2_3pt(i3.corrs[0], i3.corrs[0], i3.corrs[1]), Error);
    // The 2.5-point solvers either refuse or return nothing near the truth.
    const ProblemInstance i2 = instance(SolverKind::FHF, 1);
    try {
        const auto sols = solve_fHf_2_5pt(i2.corrs[0], i2.corrs[0], i2.corrs[1]);
        for (const auto &s : sols) EXPECT_TRUE(s.h.vector().allFinite());
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateConfiguration);
    }
}

TEST(Solvers, PureYaw) {
    // Same camera centre, rotation about gravity only: Hy = Ry(yaw).
    const double f = 700.0;
    CameraPose c1, c2;
    c1.attitude = ImuAttitude::from_pitch_roll(-1.0, 0.05);
    c2.attitude = ImuAttitude::from_pitch_roll(-0.9, -0.1);
    c1.yaw = 0.2;
    c2.yaw = 0.45;
    c1.center = c2.center = Vec3(0.0, 2.0, 0.0);
    std::vector<Correspondence> corrs;
    for (const Vec3 &X : {Vec3(0.3, 0.0, 2.0), Vec3(-0.5, 0.0, 3.0), Vec3(0.1, 0.0, 4.0)}) {
        const Vec3 p1 = project(c1, f, X), p2 = project(c2, f, X);
        ASSERT_GT(p1.z(), 0.0);
        ASSERT_GT(p2.z(), 0.0);
        corrs.push_back({{p1.x(), p1.y()}, {p2.x(), p2.y()}, c1.attitude, c2.attitude});
    }
    const GroundHomography gt = ground_truth_homography(c1, c2);
    EXPECT_NEAR(gt.h3, 0.0, 1e-15);
    EXPECT_NEAR(gt.h4, 1.0, 1e-15);
    EXPECT_NEAR(gt.h5, 0.0, 1e-15);
    const auto sols = solve_fHf_2_5pt(corrs[0], corrs[1], corrs[2]);
    const SolverSolution *m = nullptr;
    ASSERT_LT(best_error(sols, gt, &m), 1e-8);
    const RelativePose p = ground_homography_to_pose(m->h);
    EXPECT_LT(p.t_norm, 1e-7);
    EXPECT_NEAR(std::abs(wrap_angle(p.yaw)), 0.25, 1e-8);
    EXPECT_LT(best_error(solve_calibrated_2pt(corrs[0], corrs[1], Intrinsics(f), Intrinsics(f)), gt), 1e-9);
}

TEST(Solvers, NegatedPixelsGiveNegatedFocal) {
    // x / f is unchanged when both pixel coordinates and f change sign.
    SolverOptions opt;
    opt.positive_focal_only = false;
    for (std::uint64_t s = 0; s < 20; ++s) {
        ProblemInstance inst = instance(SolverKind::FHF, s);
        auto corrs = inst.corrs;
        for (auto &c : corrs) c.x1 = {-c.x1.u, -c.x1.v}, c.x2 = {-c.x2.u, -c.x2.v};
        const auto sols = solve_fHf_2_5pt(corrs[0], corrs[1], corrs[2], opt);
        const SolverSolution *m = nullptr;
        ASSERT_LT(best_error(sols, inst.gt_h, &m), 1e-8);
        ASSERT_TRUE(m->f1);
        EXPECT_NEAR(*m->f1 / -inst.f1, 1.0, 1e-8);
        for (const auto &sol : solve_fHf_2_5pt(corrs[0], corrs[1], corrs[2])) EXPECT_GT(*sol.f1, 0.0);
    }
}

TEST(Solvers, HfQuarticMatchesEigen) {
    SolverOptions eig;
    eig.hf_method = HfMethod::Eigen4x4;
    for (std::uint64_t s = 0; s < 300; ++s) {
        const ProblemInstance inst = instance(SolverKind::HF, s);
        const Intrinsics k1(inst.f1);
        auto a = solve_Hf_2_5pt(inst.corrs[0], inst.corrs[1], inst.corrs[2], k1);
        auto b = solve_Hf_2_5pt(inst.corrs[0], inst.corrs[1], inst.corrs[2], k1, eig);
        EXPECT_LT(best_error(a, inst.gt_h), 1e-6);
        EXPECT_LT(best_error(b, inst.gt_h), 1e-6);
        // Every quartic root has an eigen counterpart; the two paths round
        // differently on poorly conditioned samples.
        for (const auto &sa : a) EXPECT_LT(best_error(b, sa.h), 1e-4) << "seed " << s;
    }
}

TEST(Solvers, GroundTruthInDltNullspace) {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const ProblemInstance inst = instance(SolverKind::F1HF2, s);
        const auto smp = sample(SolverKind::F1HF2, inst);
        const NullspaceBasis basis = dlt_nullspace(smp);
        const Intrinsics k1(inst.f1), k2(inst.f2);
        const Mat3 H = pixel_homography(inst.gt_h.matrix(), inst.cam1.attitude, inst.cam2.attitude, k1, k2);
        Eigen::Matrix<double, 9, 3> B;
        Eigen::Matrix<double, 9, 1> target;
        for (int m = 0; m < 3; ++m)
            for (int i = 0; i < 9; ++i) B(i, m) = basis.H[m](i / 3, i % 3);
        for (int i = 0; i < 9; ++i) target[i] = H(i / 3, i % 3);
        target.normalize();
        const Eigen::Vector3d b = B.colPivHouseholderQr().solve(target);
        EXPECT_LT((B * b - target).norm(), 1e-8);
        const Mat3 hy = general_hy(basis, b[1] / b[0], b[2] / b[0], 1.0 / inst.f1, inst.f2, inst.cam1.attitude,
                                   inst.cam2.attitude);
        EXPECT_LT(structural_residuals(hy).cwiseAbs().maxCoeff(), 1e-8);
        // A generic member of the family is not a ground homography.
        const Mat3 other = general_hy(basis, b[1] / b[0] + 0.3, b[2] / b[0], 1.0 / inst.f1, inst.f2,
                                      inst.cam1.attitude, inst.cam2.attitude);
        EXPECT_GT(structural_residuals(other).cwiseAbs().maxCoeff(), 1e-4);
    }
}

TEST(Solvers, ScaleEquivariance) {
    // Scaling pixels and focals together leaves Hy unchanged.
    for (auto kind : all_kinds) {
        SCOPED_TRACE(std::string(solver_name(kind)));
        for (std::uint64_t s = 0; s < 20; ++s) {
            const ProblemInstance inst = instance(kind, s);
            const double k = 3.7;
            std::vector<Correspondence> scaled(sample(kind, inst).begin(), sample(kind, inst).end());
            for (auto &c : scaled) c.x1 = {k * c.x1.u, k * c.x1.v}, c.x2 = {k * c.x2.u, k * c.x2.v};
            KnownFocals known = inst.known_for(kind);
            if (known.f1) known.f1 = *known.f1 * k;
            if (known.f2) known.f2 = *known.f2 * k;
            const auto sols = solve(kind, scaled, known);
            const SolverSolution *m = nullptr;
            ASSERT_LT(best_error(sols, inst.gt_h, &m), 1e-8);
            if (m->f1) EXPECT_NEAR(*m->f1 / (k * inst.f1), 1.0, 1e-8);
            if (m->f2) EXPECT_NEAR(*m->f2 / (k * inst.f2), 1.0, 1e-8);
        }
    }
}

TEST(Solvers, NormalizationDoesNotChangeSolutions) {
    SolverOptions raw;
    raw.normalize = false;
    for (auto kind : all_kinds) {
        SCOPED_TRACE(std::string(solver_name(kind)));
        for (std::uint64_t s = 0; s < 20; ++s) {
            const ProblemInstance inst = instance(kind, s);
            EXPECT_LT(best_error(solve(kind, sample(kind, inst), inst.known_for(kind), raw), inst.gt_h), 1e-6);
        }
    }
}

TEST(Solvers, GroundTruthSatisfiesEquations) {
    const ProblemInstance inst = instance(SolverKind::FHF, 9);
    const SolverSolution gt{inst.gt_h, inst.f1, inst.f2};
    for (double r : equation_residuals(gt, inst.corrs, {})) EXPECT_LT(r, 1e-12);
    EXPECT_LT(consistency_residual(gt, inst.corrs[2], {}), 1e-8);
    SolverSolution wrong = gt;
    wrong.h = make_ground_homography(std::atan2(gt.h.h2, gt.h.h1) + 0.1, Vec3(gt.h.h3, gt.h.h4 - 1.0, gt.h.h5));
    EXPECT_GT(consistency_residual(wrong, inst.corrs[2], {}), 1.0);
}

TEST(Solvers, RejectsBadInput) {
    ProblemInstance inst = instance(SolverKind::FHF, 2);
    EXPECT_THROW(solve(SolverKind::FHF, std::span<const Correspondence>(inst.corrs).first(2), {}), Error);
    EXPECT_THROW(solve(SolverKind::HF, sample(SolverKind::HF, inst), {}), Error);
    EXPECT_THROW(solve(SolverKind::Calibrated2pt, sample(SolverKind::Calibrated2pt, inst), {inst.f1, std::nullopt}),
                 Error);
    auto corrs = inst.corrs;
    corrs[1].x2.u = std::numeric_limits<double>::quiet_NaN();
    try {
        solve(SolverKind::FHF, std::span<const Correspondence>(corrs).first(3), {});
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
    }
    corrs = inst.corrs;
    corrs[1].att2 = ImuAttitude::from_pitch_roll(0.1, 0.1);
    EXPECT_THROW(solve(SolverKind::FHF, std::span<const Correspondence>(corrs).first(3), {}), Error);
}

TEST(Solvers, FocalsPositiveAndFinite) {
    for (auto kind : {SolverKind::FHF, SolverKind::HF, SolverKind::F1HF2}) {
        for (std::uint64_t s = 0; s < 200; ++s) {
            const ProblemInstance inst = instance(kind, s);
            for (const auto &sol : solve(kind, sample(kind, inst), inst.known_for(kind))) {
                EXPECT_TRUE(sol.h.vector().allFinite());
                EXPECT_NEAR(sol.h.trig_residual(), 0.0, 1e-12);
                for (const auto &f : {sol.f1, sol.f2})
                    if (f) EXPECT_TRUE(std::isfinite(*f) && *f > 0.0);
            }
        }
    }
}
