#ifndef GHOM_POLYSOLVE_HPP
#define GHOM_POLYSOLVE_HPP

// Small numeric back-end: closed-form real roots of polynomials up to
// degree four, companion-matrix roots for higher degrees, and real
// eigenpairs of small dense matrices. Coefficients are stored low to high.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "ghom/error.hpp"

namespace ghom {

// c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0, stored as {c0, c1, c2, c3, c4}.
struct Quartic {
    std::array<double, 5> c{};

    double operator()(double x) const { return (((c[4] * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0]; }
};

inline double poly_eval(std::span<const double> c, double x) {
    double r = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
    return r;
}

inline double poly_eval_derivative(std::span<const double> c, double x) {
    double r = 0.0;
    for (std::size_t i = c.size(); i-- > 1;) r = r * x + static_cast<double>(i) * c[i];
    return r;
}

inline double newton_step(std::span<const double> c, double x) {
    const double d = poly_eval_derivative(c, x);
    if (d == 0.0 || !std::isfinite(d)) return x;
    const double nx = x - poly_eval(c, x) / d;
    // Keep the step only when it does not increase the residual.
    return std::isfinite(nx) && std::abs(poly_eval(c, nx)) <= std::abs(poly_eval(c, x)) ? nx : x;
}

namespace detail {

inline void collapse_roots(std::vector<double> &roots, double tol) {
    std::sort(roots.begin(), roots.end());
    std::vector<double> out;
    for (double r : roots) {
        if (!out.empty() && std::abs(r - out.back()) <= tol * std::max(1.0, std::abs(r))) continue;
        out.push_back(r);
    }
    roots.swap(out);
}

inline double inf_norm(std::span<const double> c) {
    double m = 0.0;
    for (double v : c) m = std::max(m, std::abs(v));
    return m;
}

// Real roots of a x^2 + b x + c with a != 0, cancellation-free.
inline void quadratic_roots(double a, double b, double c, std::vector<double> &out, double disc_tol = 0.0) {
    double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
        if (disc < -disc_tol) return;
        disc = 0.0;
    }
    if (disc == 0.0) {
        out.push_back(-b / (2.0 * a));
        return;
    }
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    out.push_back(q / a);
    if (q != 0.0) out.push_back(c / q);
    else out.push_back(-q / a);
}

// Real roots of the monic cubic x^3 + a x^2 + b x + c.
inline std::vector<double> monic_cubic_roots(double a, double b, double c) {
    std::vector<double> out;
    const double a3 = a / 3.0;
    const double p = b - a * a3;
    const double q = 2.0 * a3 * a3 * a3 - a3 * b + c;
    const double half_q = 0.5 * q;
    const double third_p = p / 3.0;
    const double disc = half_q * half_q + third_p * third_p * third_p;
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-half_q + (half_q < 0.0 ? s : -s));
        const double y = u == 0.0 ? 0.0 : u - third_p / u;
        out.push_back(y - a3);
    } else if (third_p == 0.0) {
        out.push_back(-a3);
    } else {
        const double r = std::sqrt(-third_p);
        const double phi = std::acos(std::clamp(-half_q / (r * r * r), -1.0, 1.0));
        for (int k = 0; k < 3; ++k) out.push_back(2.0 * r * std::cos((phi - 2.0 * std::numbers::pi * k) / 3.0) - a3);
    }
    return out;
}

} // namespace detail

// Real roots of the polynomial given by `coeffs` (low to high) of degree <= 3.
inline std::vector<double> real_roots_low_degree(std::span<const double> coeffs, double tol = 1e-8) {
    const double scale = detail::inf_norm(coeffs);
    if (scale == 0.0) throw Error(ErrorKind::InvalidInput, "all-zero polynomial");
    std::size_t deg = coeffs.size() - 1;
    while (deg > 0 && std::abs(coeffs[deg]) <= 1e-14 * scale) --deg;
    std::vector<double> roots;
    if (deg == 0) return roots;
    if (deg == 1) {
        roots.push_back(-coeffs[0] / coeffs[1]);
    } else if (deg == 2) {
        detail::quadratic_roots(coeffs[2], coeffs[1], coeffs[0], roots);
    } else if (deg == 3) {
        roots = detail::monic_cubic_roots(coeffs[2] / coeffs[3], coeffs[1] / coeffs[3], coeffs[0] / coeffs[3]);
    } else {
        throw Error(ErrorKind::InvalidInput, "degree above three");
    }
    for (double &r : roots) r = newton_step(coeffs.first(deg + 1), r);
    detail::collapse_roots(roots, tol);
    return roots;
}

// Real roots of a quartic via Ferrari's resolvent, each polished by Newton.
// Falls back to the low-degree path when the leading coefficient vanishes.
inline std::vector<double> real_roots_quartic(const Quartic &q, double tol = 1e-8) {
    for (double v : q.c)
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "non-finite quartic coefficient");
    const double scale = detail::inf_norm(q.c);
    if (scale == 0.0) throw Error(ErrorKind::InvalidInput, "all-zero polynomial");
    if (std::abs(q.c[4]) <= 1e-14 * scale) return real_roots_low_degree(std::span<const double>(q.c).first(4), tol);

    const double a = q.c[3] / q.c[4], b = q.c[2] / q.c[4], c = q.c[1] / q.c[4], d = q.c[0] / q.c[4];
    // x = y - a/4  ->  y^4 + p y^2 + r1 y + r0
    const double a4 = a / 4.0;
    const double p = b - 6.0 * a4 * a4;
    const double r1 = c - 2.0 * b * a4 + 8.0 * a4 * a4 * a4;
    const double r0 = d - c * a4 + b * a4 * a4 - 3.0 * a4 * a4 * a4 * a4;

    std::vector<double> ys;
    const double mag = std::max({1.0, std::abs(p), std::sqrt(std::abs(r0))});
    if (std::abs(r1) <= 1e-14 * mag * mag * mag) {
        std::vector<double> zs;
        detail::quadratic_roots(1.0, p, r0, zs, 1e-12 * mag * mag);
        for (double z : zs) {
            if (z < -1e-12 * mag) continue;
            const double s = std::sqrt(std::max(z, 0.0));
            ys.push_back(s);
            ys.push_back(-s);
        }
    } else {
        // m^3 + p m^2 + (p^2/4 - r0) m - r1^2/8 = 0 has a positive root.
        const auto ms = detail::monic_cubic_roots(p, 0.25 * p * p - r0, -0.125 * r1 * r1);
        double m = *std::max_element(ms.begin(), ms.end());
        if (!(m > 0.0)) m = std::abs(m);
        const double sq = std::sqrt(2.0 * m);
        const double k = r1 / (2.0 * sq);
        const double dtol = 1e-12 * mag * mag;
        detail::quadratic_roots(1.0, sq, 0.5 * p + m - k, ys, dtol);
        detail::quadratic_roots(1.0, -sq, 0.5 * p + m + k, ys, dtol);
    }

    std::vector<double> roots;
    roots.reserve(ys.size());
    for (double y : ys) {
        double x = y - a4;
        x = newton_step(q.c, x);
        if (std::isfinite(x)) roots.push_back(x);
    }
    detail::collapse_roots(roots, tol);
    return roots;
}

struct EigenPairResult {
    double value;
    Eigen::VectorXd vector;
};

struct EigenOptions {
    // Accept |Im(lambda)| < imag_tol * (1 + |Re(lambda)|).
    double imag_tol = 1e-6;
    // Accept ||M v - lambda v|| / ||v|| < residual_tol * ||M||.
    double residual_tol = 1e-6;
};

inline bool is_real_eigenvalue(std::complex<double> lambda, double imag_tol) {
    return std::abs(lambda.imag()) < imag_tol * (1.0 + std::abs(lambda.real()));
}

// Real eigenpairs of a small dense matrix. Complex-conjugate pairs are
// discarded; returned vectors have unit norm.
template <typename Derived>
std::vector<EigenPairResult> real_eigenpairs(const Eigen::MatrixBase<Derived> &m, const EigenOptions &opt = {}) {
    using Matrix = Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
    if (m.rows() == 0 || m.rows() != m.cols()) throw Error(ErrorKind::InvalidInput, "matrix must be square and non-empty");
    const Matrix mat = m;
    if (!mat.allFinite()) throw Error(ErrorKind::InvalidInput, "non-finite matrix entry");
    Eigen::EigenSolver<Matrix> es(mat, true);
    if (es.info() != Eigen::Success) return {};
    const double norm = mat.norm();
    std::vector<EigenPairResult> out;
    const auto &values = es.eigenvalues();
    const auto &vectors = es.eigenvectors();
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (!is_real_eigenvalue(values[i], opt.imag_tol)) continue;
        Eigen::VectorXd v = vectors.col(i).real();
        const double vn = v.norm();
        if (vn == 0.0) continue;
        v /= vn;
        const double lambda = values[i].real();
        if ((mat * v - lambda * v).norm() >= opt.residual_tol * std::max(norm, 1e-300)) continue;
        out.push_back({lambda, std::move(v)});
    }
    return out;
}

// Real eigenvalues only; cheaper when vectors are not needed.
template <typename Derived>
std::vector<double> real_eigenvalues(const Eigen::MatrixBase<Derived> &m, double imag_tol = 1e-6) {
    using Matrix = Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
    if (m.rows() == 0 || m.rows() != m.cols()) throw Error(ErrorKind::InvalidInput, "matrix must be square and non-empty");
    Eigen::EigenSolver<Matrix> es(Matrix(m), false);
    std::vector<double> out;
    if (es.info() != Eigen::Success) return out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (is_real_eigenvalue(es.eigenvalues()[i], imag_tol)) out.push_back(es.eigenvalues()[i].real());
    return out;
}

// Companion matrix whose characteristic polynomial is the monic version of `coeffs`.
inline Eigen::MatrixXd companion_matrix(std::span<const double> coeffs) {
    const auto n = static_cast<Eigen::Index>(coeffs.size()) - 1;
    if (n < 1 || coeffs.back() == 0.0) throw Error(ErrorKind::InvalidInput, "leading coefficient must be nonzero");
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i) c(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) c(i, n - 1) = -coeffs[i] / coeffs.back();
    return c;
}

namespace detail {

template <int N>
std::vector<double> companion_eigenvalues_fixed(std::span<const double> c, double imag_tol) {
    Eigen::Matrix<double, N, N> m = Eigen::Matrix<double, N, N>::Zero();
    for (int i = 1; i < N; ++i) m(i, i - 1) = 1.0;
    for (int i = 0; i < N; ++i) m(i, N - 1) = -c[i] / c[N];
    return real_eigenvalues(m, imag_tol);
}

} // namespace detail

// Real roots of an arbitrary-degree polynomial via its companion matrix.
inline std::vector<double> real_roots_companion(std::span<const double> coeffs, double tol = 1e-8,
                                                double imag_tol = 1e-6) {
    const double scale = detail::inf_norm(coeffs);
    if (scale == 0.0) throw Error(ErrorKind::InvalidInput, "all-zero polynomial");
    std::size_t deg = coeffs.size() - 1;
    while (deg > 0 && std::abs(coeffs[deg]) <= 1e-14 * scale) --deg;
    if (deg == 0) return {};
    const auto c = coeffs.first(deg + 1);
    std::vector<double> roots;
    // The quintic of the two-focal solver is the hot path.
    if (deg == 5)
        roots = detail::companion_eigenvalues_fixed<5>(c, imag_tol);
    else
        roots = real_eigenvalues(companion_matrix(c), imag_tol);
    for (double &r : roots) r = newton_step(c, r);
    detail::collapse_roots(roots, tol);
    return roots;
}

} // namespace ghom

#endif // GHOM_POLYSOLVE_HPP
