#ifndef GHOM_SOLVERS_HF_HPP
#define GHOM_SOLVERS_HF_HPP

// Known first focal, unknown second focal, 2.5 correspondences.
//
// View-1 rays are numeric, so M(w) = M0 + w M1 is linear in w = 1/f2. At
// w = 0 every view-2 ray equals b2 = A2^T e3 and n0 = (0, 0, b2) spans the
// kernel of M0; this is the saturated component. Writing h = alpha n0 + Q g
// with Q an orthonormal complement of n0 and dividing the alpha column by w
// leaves a pencil whose finite spectrum in f2 is the spectrum of a 4x4 block.

#include <Eigen/LU>

#include "ghom/polysolve.hpp"
#include "ghom/solvers/common.hpp"

namespace ghom {

namespace detail {

struct HfReduction {
    Eigen::Matrix4d block;         // eigenvalues are normalised f2
    Eigen::RowVector4d alpha_row;  // alpha = alpha_row * g
    Vec5 n0;
    Eigen::Matrix<double, 5, 4> q;
};

inline std::optional<HfReduction> hf_reduction(std::span<const Correspondence> s, double f1, double scale) {
    const Mat3 &A1 = s[0].att1.matrix();
    const Mat3 &A2 = s[0].att2.matrix();
    const Vec3 b2 = A2.row(2).transpose();
    Eigen::Matrix<double, 5, 5> m0, m1;
    for (int i = 0; i < 3; ++i) {
        const Vec3 y1 = A1.transpose() * Vec3(s[i].x1.u / scale, s[i].x1.v / scale, f1 / scale);
        const Vec3 a2 = A2.transpose() * Vec3(s[i].x2.u / scale, s[i].x2.v / scale, 0.0);
        const Row2x5 r0 = dlt_rows(y1, b2);
        const Row2x5 r1 = dlt_rows(y1, a2);
        const int rows = i < 2 ? 2 : 1;
        m0.middleRows(2 * i, rows) = r0.topRows(rows);
        m1.middleRows(2 * i, rows) = r1.topRows(rows);
    }

    HfReduction red;
    red.n0 << 0.0, 0.0, b2;
    red.n0.normalize();
    // Householder reflector mapping n0 onto e1; its last four columns are
    // orthonormal and orthogonal to n0.
    Vec5 v = red.n0;
    v[0] += std::copysign(1.0, red.n0[0] == 0.0 ? 1.0 : red.n0[0]);
    const Mat5 refl = Mat5::Identity() - (2.0 / v.squaredNorm()) * v * v.transpose();
    red.q = refl.rightCols<4>();

    Mat5 a, b;
    a.col(0) = m1 * red.n0;
    a.rightCols<4>() = m0 * red.q;
    b.col(0).setZero();
    b.rightCols<4>() = m1 * red.q;
    Eigen::PartialPivLU<Mat5> lu(a);
    if (!(lu.rcond() > 1e-14)) return std::nullopt;
    const Mat5 c = -lu.solve(b);
    red.block = c.bottomRightCorner<4, 4>();
    red.alpha_row = c.row(0).tail<4>();
    if (!red.block.allFinite()) return std::nullopt;
    return red;
}

// Monic characteristic polynomial (low to high) by Faddeev-LeVerrier.
inline Quartic characteristic_quartic(const Eigen::Matrix4d &a) {
    Quartic q;
    q.c[4] = 1.0;
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    for (int k = 1; k <= 4; ++k) {
        m = a * m + q.c[4 - k + 1] * Eigen::Matrix4d::Identity();
        q.c[4 - k] = -(a * m).trace() / k;
    }
    return q;
}

// Kernel direction of a rank-3 4x4 matrix: the largest adjugate column.
inline Eigen::Vector4d kernel_4x4(const Eigen::Matrix4d &m) {
    Eigen::Vector4d best = Eigen::Vector4d::Zero();
    for (int drop = 0; drop < 4; ++drop) {
        Eigen::Matrix<double, 3, 4> rows;
        for (int i = 0, r = 0; i < 4; ++i)
            if (i != drop) rows.row(r++) = m.row(i);
        Eigen::Vector4d v;
        for (int j = 0; j < 4; ++j) {
            Eigen::Matrix3d minor;
            for (int k = 0, col = 0; k < 4; ++k)
                if (k != j) minor.col(col++) = rows.col(k);
            v[j] = ((j % 2) ? -1.0 : 1.0) * minor.determinant();
        }
        if (v.squaredNorm() > best.squaredNorm()) best = v;
    }
    return best;
}

} // namespace detail

inline std::vector<SolverSolution> solve_Hf_2_5pt(const Correspondence &c1, const Correspondence &c2,
                                                  const Correspondence &c3, const Intrinsics &intr1,
                                                  const SolverOptions &opt = {}) {
    const Correspondence sample[3] = {c1, c2, c3};
    detail::require_finite(sample);
    detail::require_shared_attitudes(sample);
    const double scale = opt.normalize ? detail::mean_abs_coordinate(sample) : 1.0;

    std::vector<SolverSolution> out;
    const auto red = detail::hf_reduction(sample, intr1.focal(), scale);
    if (!red) return out;

    const auto emit = [&](double f, const Eigen::Vector4d &g) {
        if (opt.positive_focal_only && !(f > 0.0)) return;
        if (f == 0.0 || std::abs(1.0 / f) < opt.saturation) return;
        const Vec5 h = (red->alpha_row * g) * red->n0 + red->q * g;
        detail::emit_signed(out, h, std::nullopt, f * scale, opt);
    };

    if (opt.hf_method == HfMethod::Eigen4x4) {
        EigenOptions eopt;
        eopt.imag_tol = opt.imag_tol;
        for (const auto &pair : real_eigenpairs(red->block, eopt)) emit(pair.value, pair.vector);
    } else {
        const Quartic q = detail::characteristic_quartic(red->block);
        for (double f : real_roots_quartic(q)) {
            const Eigen::Vector4d g = detail::kernel_4x4(red->block - f * Eigen::Matrix4d::Identity());
            if (g.squaredNorm() == 0.0) continue;
            emit(f, g.normalized());
        }
    }
    return out;
}

} // namespace ghom

#endif // GHOM_SOLVERS_HF_HPP
