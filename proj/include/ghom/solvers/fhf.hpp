#ifndef GHOM_SOLVERS_FHF_HPP
#define GHOM_SOLVERS_FHF_HPP

// Equal unknown focal length, 2.5 correspondences.
//
// With w = 1/f the rectified rays are y = w a + b, where a = A^T (u, v, 0)
// and b = A^T (0, 0, 1) is shared by every point of a view. The five kept
// DLT equations read M(w) h = 0 with M quadratic in w. All constant rows of
// M coincide per equation type, so subtracting the first correspondence's
// rows from the others removes a w^3 factor (the saturated w = 0
// component). What remains is
//     (P0 + w P1) h + w^2 P2 h = 0,   P2 nonzero in two rows only,
// which linearises with g = w P2r h into a 7x7 eigenproblem in f = 1/w.
// Each real eigenvalue yields one (h, f); h and -h make the 14 signed
// solutions.

#include <Eigen/LU>

#include "ghom/polysolve.hpp"
#include "ghom/solvers/common.hpp"

namespace ghom {

using Mat7 = Eigen::Matrix<double, 7, 7>;

namespace detail {

struct FhfSystem {
    Mat5 p0;
    Mat5 p1;
    Eigen::Matrix<double, 2, 5> p2;
};

// Rows, in order: E1(c1), E2(c1), E1(c2)-E1(c1), E2(c2)-E2(c1), E1(c3)-E1(c1);
// the differences are divided by w. E2(c3) is the discarded equation.
inline FhfSystem fhf_system(std::span<const Correspondence> s, double scale) {
    const Mat3 &A1 = s[0].att1.matrix();
    const Mat3 &A2 = s[0].att2.matrix();
    const Vec3 b1 = A1.row(2).transpose();
    const Vec3 b2 = A2.row(2).transpose();
    Row2x5 c1[3], c2[3];
    for (int i = 0; i < 3; ++i) {
        const Vec3 a1 = A1.transpose() * Vec3(s[i].x1.u / scale, s[i].x1.v / scale, 0.0);
        const Vec3 a2 = A2.transpose() * Vec3(s[i].x2.u / scale, s[i].x2.v / scale, 0.0);
        c1[i] = dlt_rows(b1, a2) + dlt_rows(a1, b2);
        c2[i] = dlt_rows(a1, a2);
    }
    FhfSystem sys;
    sys.p0.topRows<2>() = dlt_rows(b1, b2);
    sys.p0.middleRows<2>(2) = c1[1] - c1[0];
    sys.p0.row(4) = c1[2].row(0) - c1[0].row(0);
    sys.p1.topRows<2>() = c1[0];
    sys.p1.middleRows<2>(2) = c2[1] - c2[0];
    sys.p1.row(4) = c2[2].row(0) - c2[0].row(0);
    sys.p2 = c2[0];
    return sys;
}

// Action matrix whose eigenvalues are the normalised focal lengths.
inline std::optional<Mat7> fhf_action_matrix(const FhfSystem &sys) {
    Eigen::PartialPivLU<Mat5> lu(sys.p0);
    if (!(lu.rcond() > 1e-14)) return std::nullopt;
    Eigen::Matrix<double, 5, 2> e = Eigen::Matrix<double, 5, 2>::Zero();
    e(0, 0) = 1.0;
    e(1, 1) = 1.0;
    Mat7 m;
    m.topLeftCorner<5, 5>() = -lu.solve(sys.p1);
    m.topRightCorner<5, 2>() = -lu.solve(e);
    m.bottomLeftCorner<2, 5>() = sys.p2;
    m.bottomRightCorner<2, 2>().setZero();
    return m;
}

} // namespace detail

inline std::vector<SolverSolution> solve_fHf_2_5pt(const Correspondence &c1, const Correspondence &c2,
                                                   const Correspondence &c3, const SolverOptions &opt = {}) {
    const Correspondence sample[3] = {c1, c2, c3};
    detail::require_finite(sample);
    detail::require_shared_attitudes(sample);
    const double scale = opt.normalize ? detail::mean_abs_coordinate(sample) : 1.0;

    std::vector<SolverSolution> out;
    const auto m = detail::fhf_action_matrix(detail::fhf_system(sample, scale));
    if (!m || !m->allFinite()) return out;

    EigenOptions eopt;
    eopt.imag_tol = opt.imag_tol;
    for (const auto &pair : real_eigenpairs(*m, eopt)) {
        const double f = pair.value;
        if (opt.positive_focal_only && !(f > 0.0)) continue;
        if (f == 0.0 || std::abs(1.0 / f) < opt.saturation) continue;
        const double focal = f * scale;
        detail::emit_signed(out, pair.vector.head<5>(), focal, focal, opt);
    }
    return out;
}

} // namespace ghom

#endif // GHOM_SOLVERS_FHF_HPP
