#ifndef GHOM_SOLVERS_CALIBRATED_2PT_HPP
#define GHOM_SOLVERS_CALIBRATED_2PT_HPP

#include <Eigen/LU>

#include "ghom/solvers/common.hpp"

namespace ghom {

namespace detail {

// Null vector of a 4x5 matrix from its signed maximal minors.
inline Vec5 null_vector_4x5(const Eigen::Matrix<double, 4, 5> &a) {
    Vec5 n;
    for (int j = 0; j < 5; ++j) {
        Eigen::Matrix4d m;
        for (int k = 0, col = 0; k < 5; ++k) {
            if (k == j) continue;
            m.col(col++) = a.col(k);
        }
        n[j] = ((j % 2) ? -1.0 : 1.0) * m.determinant();
    }
    return n;
}

} // namespace detail

// Calibrated ground-plane solver from two correspondences. Returns both
// scalings of the one-dimensional null space, the h4 > 0 one first.
inline std::vector<SolverSolution> solve_calibrated_2pt(const Correspondence &c1, const Correspondence &c2,
                                                        const Intrinsics &intr1, const Intrinsics &intr2,
                                                        const SolverOptions & = {}) {
    const Correspondence sample[2] = {c1, c2};
    detail::require_finite(sample);
    detail::require_shared_attitudes(sample);

    Eigen::Matrix<double, 4, 5> a;
    for (int i = 0; i < 2; ++i) {
        const Vec3 y1 = rectify(sample[i].x1, sample[i].att1, intr1).y;
        const Vec3 y2 = rectify(sample[i].x2, sample[i].att2, intr2).y;
        a.middleRows<2>(2 * i) = detail::dlt_rows(y1, y2);
    }
    const Vec5 n = detail::null_vector_4x5(a);
    double bound = 1.0;
    for (int i = 0; i < 4; ++i) bound *= a.row(i).norm();
    if (!(n.norm() > 1e-10 * bound)) throw Error(ErrorKind::DegenerateConfiguration, "rank-deficient 4x5 system");

    const auto signed_h = normalize_ground_homography(n);
    const GroundHomography &first = signed_h.cheiral();
    const GroundHomography second = first.negated();
    return {{first, std::nullopt, std::nullopt}, {second, std::nullopt, std::nullopt}};
}

} // namespace ghom

#endif // GHOM_SOLVERS_CALIBRATED_2PT_HPP
