#ifndef GHOM_SOLVERS_F1HF2_HPP
#define GHOM_SOLVERS_F1HF2_HPP

// Two unknown focals, three correspondences.
//
// The six pixel DLT equations leave a 3-dimensional family
// H = b0 H0 + b1 H1 + b2 H2. A ground homography is a similarity of the
// ground plane, so it maps the circular points of the plane onto each other.
// In view i the circular point sits on the ray c_i = A_i (1, 0, i) and in
// pixels on K_i c_i. With v = 1/f1 and d1 = (c1x, c1y, v c1z), requiring
// H d1 ~ K2 c2 gives
//   - one complex linear equation in b, fixing b = Re(psi) x Im(psi) up to
//     scale (quadratic in v), and
//   - a reality condition on the remaining unknown f2, a degree-5 polynomial
//     in v once its vanishing leading term is dropped.
// f2 and Hy then follow by back substitution.

#include <Eigen/LU>

#include <array>
#include <complex>

#include "ghom/polysolve.hpp"
#include "ghom/solvers/common.hpp"

namespace ghom {

struct NullspaceBasis {
    std::array<Mat3, 3> H;

    // H0 + a1 H1 + a2 H2.
    Mat3 combine(double a1, double a2) const { return H[0] + a1 * H[1] + a2 * H[2]; }
};

// Six pixel DLT rows of x2 ~ H x1, H stored row-major.
inline Eigen::Matrix<double, 6, 9> pixel_dlt_matrix(std::span<const Correspondence> s, double scale = 1.0) {
    if (s.size() != 3) throw Error(ErrorKind::InvalidInput, "three correspondences required");
    Eigen::Matrix<double, 6, 9> d = Eigen::Matrix<double, 6, 9>::Zero();
    for (int i = 0; i < 3; ++i) {
        const Eigen::RowVector3d p(s[i].x1.u / scale, s[i].x1.v / scale, 1.0);
        const double u2 = s[i].x2.u / scale;
        const double v2 = s[i].x2.v / scale;
        d.block<1, 3>(2 * i, 3) = -p;
        d.block<1, 3>(2 * i, 6) = v2 * p;
        d.block<1, 3>(2 * i + 1, 0) = p;
        d.block<1, 3>(2 * i + 1, 6) = -u2 * p;
    }
    return d;
}

// Basis of the DLT null space of three correspondences, from a fully
// pivoted LU of the 6x9 system.
inline NullspaceBasis dlt_nullspace(std::span<const Correspondence> s, double scale = 1.0) {
    detail::require_finite(s);
    const Eigen::Matrix<double, 6, 9> d = pixel_dlt_matrix(s, scale);
    Eigen::FullPivLU<Eigen::Matrix<double, 6, 9>> lu(d);
    lu.setThreshold(1e-10);
    if (lu.rank() < 6) throw Error(ErrorKind::DegenerateConfiguration, "DLT null space has dimension above 3");
    const Eigen::Matrix<double, 9, 3> k = lu.kernel();
    NullspaceBasis basis;
    for (int m = 0; m < 3; ++m) {
        const Eigen::Matrix<double, 9, 1> v = k.col(m).normalized();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) basis.H[m](i, j) = v[3 * i + j];
    }
    return basis;
}

// Hy = A2^T K2^-1 H K1 A1 in the (w1, w2) parameterisation K1 = diag(1, 1, w1),
// K2^-1 = diag(1, 1, w2), up to scale. Entries are cubic in (a1, a2, w1, w2).
inline Mat3 general_hy(const NullspaceBasis &basis, double a1, double a2, double w1, double w2,
                       const ImuAttitude &att1, const ImuAttitude &att2) {
    const Mat3 k1 = Vec3(1.0, 1.0, w1).asDiagonal();
    const Mat3 k2inv = Vec3(1.0, 1.0, w2).asDiagonal();
    return att2.matrix().transpose() * k2inv * basis.combine(a1, a2) * k1 * att1.matrix();
}

// The four linear equations a ground homography satisfies, with Hy
// flattened row-major as h1..h9: h1 - h9, h3 + h7, h4, h6. Relative to the
// largest entry.
inline Eigen::Vector4d structural_residuals(const Mat3 &hy) {
    const double n = std::max(hy.cwiseAbs().maxCoeff(), 1e-300);
    return Eigen::Vector4d(hy(0, 0) - hy(2, 2), hy(0, 2) + hy(2, 0), hy(1, 0), hy(1, 2)) / n;
}

namespace detail {

using cplx = std::complex<double>;

template <std::size_t N>
using CPoly = std::array<cplx, N>;

template <std::size_t A, std::size_t B>
CPoly<A + B - 1> poly_mul(const CPoly<A> &a, const CPoly<B> &b) {
    CPoly<A + B - 1> r{};
    for (std::size_t i = 0; i < A; ++i)
        for (std::size_t j = 0; j < B; ++j) r[i + j] += a[i] * b[j];
    return r;
}

template <std::size_t N>
CPoly<N> poly_add(const CPoly<N> &a, const CPoly<N> &b) {
    CPoly<N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
    return r;
}

template <std::size_t N>
cplx poly_at(const CPoly<N> &c, double x) {
    cplx r = 0.0;
    for (std::size_t i = N; i-- > 0;) r = r * x + c[i];
    return r;
}

struct F1hf2Elimination {
    std::array<CPoly<3>, 3> beta;  // real coefficients, quadratic in v
    std::array<double, 7> q;       // reality condition, low to high
};

inline F1hf2Elimination f1hf2_eliminate(const NullspaceBasis &basis, const Vec3 &c1r, const Vec3 &c1i,
                                        const Vec3 &c2r, const Vec3 &c2i) {
    const cplx c1x(c1r.x(), c1i.x()), c1y(c1r.y(), c1i.y()), c1z(c1r.z(), c1i.z());
    const cplx c2x(c2r.x(), c2i.x()), c2y(c2r.y(), c2i.y()), c2z(c2r.z(), c2i.z());

    // Columns of H applied to d1 = (c1x, c1y, v c1z), linear in v.
    std::array<std::array<CPoly<2>, 3>, 3> l;  // l[m][row]
    std::array<CPoly<2>, 3> psi;
    for (int m = 0; m < 3; ++m) {
        const Mat3 &h = basis.H[m];
        for (int row = 0; row < 3; ++row) l[m][row] = {h(row, 0) * c1x + h(row, 1) * c1y, h(row, 2) * c1z};
        for (int k = 0; k < 2; ++k) psi[m][k] = c2y * l[m][0][k] - c2x * l[m][1][k];
    }

    F1hf2Elimination out;
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        const CPoly<2> rj{psi[j][0].real(), psi[j][1].real()}, ik{psi[k][0].imag(), psi[k][1].imag()};
        const CPoly<2> rk{psi[k][0].real(), psi[k][1].real()}, ij{psi[j][0].imag(), psi[j][1].imag()};
        const auto a = poly_mul(rj, ik);
        const auto b = poly_mul(rk, ij);
        for (int d = 0; d < 3; ++d) out.beta[i][d] = a[d] - b[d];
    }

    std::array<CPoly<4>, 3> big_l{};
    for (int row = 0; row < 3; ++row)
        for (int m = 0; m < 3; ++m) big_l[row] = poly_add(big_l[row], poly_mul(out.beta[m], l[m][row]));

    CPoly<4> lxy, lz_conj;
    for (int d = 0; d < 4; ++d) {
        lxy[d] = big_l[0][d] * std::conj(c2x) + big_l[1][d] * std::conj(c2y);
        lz_conj[d] = std::conj(big_l[2][d]) * c2z;
    }
    const auto num = poly_mul(lxy, lz_conj);
    for (int d = 0; d < 7; ++d) out.q[d] = num[d].imag();
    return out;
}

} // namespace detail

inline std::vector<SolverSolution> solve_f1Hf2_3pt(const Correspondence &c1, const Correspondence &c2,
                                                   const Correspondence &c3, const SolverOptions &opt = {}) {
    const Correspondence sample[3] = {c1, c2, c3};
    detail::require_finite(sample);
    detail::require_shared_attitudes(sample);
    const double scale = opt.normalize ? detail::mean_abs_coordinate(sample) : 1.0;
    const NullspaceBasis basis = dlt_nullspace(sample, scale);

    const Mat3 &A1 = c1.att1.matrix();
    const Mat3 &A2 = c1.att2.matrix();
    const Vec3 c1r = A1.col(0), c1i = A1.col(2);
    const Vec3 c2r = A2.col(0), c2i = A2.col(2);
    const auto elim = detail::f1hf2_eliminate(basis, c1r, c1i, c2r, c2i);

    std::vector<SolverSolution> out;
    const std::span<const double> quintic(elim.q.data(), 6);
    if (detail::inf_norm(quintic) == 0.0) return out;
    const detail::cplx c2x(c2r.x(), c2i.x()), c2y(c2r.y(), c2i.y()), c2z(c2r.z(), c2i.z());

    for (double v : real_roots_companion(quintic, 1e-10, opt.imag_tol)) {
        if (opt.positive_focal_only && !(v > 0.0)) continue;
        if (std::abs(v) < opt.saturation) continue;
        Mat3 h = Mat3::Zero();
        for (int m = 0; m < 3; ++m) h += detail::poly_at(elim.beta[m], v).real() * basis.H[m];
        const Vec3 dr(c1r.x(), c1r.y(), v * c1r.z());
        const Vec3 di(c1i.x(), c1i.y(), v * c1i.z());
        const Vec3 lr = h * dr, li = h * di;
        const detail::cplx lx(lr.x(), li.x()), ly(lr.y(), li.y()), lz(lr.z(), li.z());
        const double den = std::norm(c2x) + std::norm(c2y);
        if (den == 0.0 || lz == 0.0) continue;
        const double w2 = (((lx * std::conj(c2x) + ly * std::conj(c2y)) / den) / (lz / c2z)).real();
        if (!std::isfinite(w2) || w2 == 0.0) continue;
        if (opt.positive_focal_only && !(w2 > 0.0)) continue;
        if (std::abs(1.0 / w2) < opt.saturation) continue;

        const Mat3 k1 = Vec3(1.0, 1.0, v).asDiagonal();
        const Mat3 k2inv = Vec3(1.0, 1.0, w2).asDiagonal();
        const Mat3 hy = A2.transpose() * k2inv * h * k1 * A1;
        Vec5 raw;
        raw << 0.5 * (hy(0, 0) + hy(2, 2)), 0.5 * (hy(0, 2) - hy(2, 0)), hy(0, 1), hy(1, 1), hy(2, 1);
        detail::emit_signed(out, raw, scale / v, w2 * scale, opt);
    }
    return out;
}

} // namespace ghom

#endif // GHOM_SOLVERS_F1HF2_HPP
