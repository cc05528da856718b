// Two-view example: estimate yaw, translation direction and the shared focal
// length from noisy ground-plane matches with outliers.

#include <cstdio>
#include <numbers>

#include "ghom/ghom.hpp"

int main() {
    using namespace ghom;

    SynthConfig cfg;
    cfg.n_planar = 100;
    cfg.n_nonplanar = 30;
    cfg.outlier_fraction = 0.2;
    cfg.sigma = 0.25;
    cfg.focal_mode = FocalMode::FHF;
    const ProblemInstance inst = generate_instance(42, cfg);

    RansacConfig rc;
    rc.threshold = 3.0;
    rc.seed = 1;
    const RansacResult res = ransac(inst.corrs, SolverKind::FHF, rc);

    const RelativePose est = solution_pose(res.best, inst.cam1.attitude, inst.cam2.attitude);
    const PoseErrors err = pose_errors(inst.gt_pose, est, inst.f1, res.best.f1);
    constexpr double deg = 180.0 / std::numbers::pi;

    std::printf("inliers      %d of %zu\n", res.inlier_count, inst.corrs.size());
    std::printf("yaw          %.3f deg (true %.3f)\n", est.yaw * deg, inst.gt_rectified.yaw * deg);
    std::printf("focal        %.1f px (true %.1f)\n", *res.best.f1, inst.f1);
    std::printf("e_R %.4f deg  e_t %.4f deg  e_f %.4f\n", err.e_R * deg, err.e_t.value_or(0.0) * deg,
                err.e_f.value_or(0.0));
    std::printf("%d iterations, %ld candidates scored, %ld rejected early, %.2f ms\n", res.iterations,
                res.candidates_scored, res.candidates_rejected, res.wall_time_s * 1e3);
    return 0;
}
