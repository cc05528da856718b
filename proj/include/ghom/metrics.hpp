#ifndef GHOM_METRICS_HPP
#define GHOM_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "ghom/geom_core.hpp"
#include "ghom/solvers/common.hpp"

namespace ghom {

struct PoseErrors {
    double e_R = 0.0;
    // Not applicable when either translation is zero.
    std::optional<double> e_t;
    std::optional<double> e_f;
    std::optional<double> e_H;
};

// Angle of R_gt R_est^T, from both its sine and cosine so that it stays
// accurate near 0 and pi.
inline double rotation_error(const Mat3 &r_gt, const Mat3 &r_est) {
    // Fixed summation order so d(i,j) and d(j,i) round identically; e(R,R) is then exactly 0.
    Mat3 d;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            d(i, j) = r_gt(i, 0) * r_est(j, 0) + r_gt(i, 1) * r_est(j, 1) + r_gt(i, 2) * r_est(j, 2);
    const Vec3 axis(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
    return std::atan2(0.5 * axis.norm(), 0.5 * (d.trace() - 1.0));
}

inline std::optional<double> translation_error(const Vec3 &t_gt, const Vec3 &t_est) {
    const double n = t_gt.norm() * t_est.norm();
    if (!(n > 0.0) || !std::isfinite(n)) return std::nullopt;
    return std::atan2(t_gt.cross(t_est).norm(), t_gt.dot(t_est));
}

// Relative to the ground truth, so not symmetric.
inline double focal_error(double f_gt, double f_est) { return std::abs(f_gt - f_est) / f_gt; }

// Max abs entry difference after scaling both to unit last entry.
inline double homography_error(const Mat3 &gt, const Mat3 &est) {
    if (gt(2, 2) == 0.0 || est(2, 2) == 0.0) return std::numeric_limits<double>::infinity();
    return (gt / gt(2, 2) - est / est(2, 2)).cwiseAbs().maxCoeff();
}

inline PoseErrors pose_errors(const RelativePose &gt, const RelativePose &est, std::optional<double> f_gt = {},
                              std::optional<double> f_est = {}) {
    PoseErrors e;
    e.e_R = rotation_error(gt.R, est.R);
    e.e_t = translation_error(gt.t, est.t);
    if (f_gt && f_est) e.e_f = focal_error(*f_gt, *f_est);
    return e;
}

// Camera-frame relative pose of a candidate.
inline RelativePose solution_pose(const SolverSolution &sol, const ImuAttitude &att1, const ImuAttitude &att2) {
    PoseExtractionOptions opt;
    opt.trig_tol = 1e-3;
    return compose_world_pose(ground_homography_to_pose(sol.h, opt), att1, att2);
}

// Worst relative error over the focals a candidate estimated; nullopt if none.
inline std::optional<double> solution_focal_error(const SolverSolution &sol, double f1_gt, double f2_gt) {
    std::optional<double> e;
    if (sol.f1) e = focal_error(f1_gt, *sol.f1);
    if (sol.f2) e = std::max(e.value_or(0.0), focal_error(f2_gt, *sol.f2));
    return e;
}

struct Quantiles {
    double median = std::numeric_limits<double>::quiet_NaN();
    double q05 = median, q25 = median, q75 = median, q95 = median;
};

inline double quantile_sorted(const std::vector<double> &s, double q) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

inline Quantiles quantiles(std::vector<double> v) {
    std::erase_if(v, [](double x) { return std::isnan(x); });
    std::sort(v.begin(), v.end());
    return {quantile_sorted(v, 0.5), quantile_sorted(v, 0.05), quantile_sorted(v, 0.25), quantile_sorted(v, 0.75),
            quantile_sorted(v, 0.95)};
}

} // namespace ghom

#endif // GHOM_METRICS_HPP
