#ifndef GHOM_SOLVERS_COMMON_HPP
#define GHOM_SOLVERS_COMMON_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghom/error.hpp"
#include "ghom/geom_core.hpp"

namespace ghom {

using Mat5 = Eigen::Matrix<double, 5, 5>;

enum class SolverKind { Calibrated2pt, FHF, HF, F1HF2 };

inline std::string_view solver_name(SolverKind kind) {
    switch (kind) {
    case SolverKind::Calibrated2pt: return "2pt";
    case SolverKind::FHF: return "fhf";
    case SolverKind::HF: return "hf";
    case SolverKind::F1HF2: return "f1hf2";
    }
    return "?";
}

inline std::optional<SolverKind> parse_solver_kind(std::string_view name) {
    if (name == "2pt") return SolverKind::Calibrated2pt;
    if (name == "fhf") return SolverKind::FHF;
    if (name == "hf") return SolverKind::HF;
    if (name == "f1hf2") return SolverKind::F1HF2;
    return std::nullopt;
}

inline int minimal_sample_size(SolverKind kind) { return kind == SolverKind::Calibrated2pt ? 2 : 3; }

// 2.5-point solvers leave one equation of the third correspondence unused.
inline bool has_spare_equation(SolverKind kind) { return kind == SolverKind::FHF || kind == SolverKind::HF; }

// One candidate emitted by a minimal solver. A focal is std::nullopt when it
// was supplied by the caller rather than estimated.
struct SolverSolution {
    GroundHomography h;
    std::optional<double> f1;
    std::optional<double> f2;
};

struct KnownFocals {
    std::optional<double> f1;
    std::optional<double> f2;
};

enum class HfMethod { Quartic, Eigen4x4 };

struct SolverOptions {
    // Rescale pixel coordinates by their mean absolute value before solving.
    bool normalize = true;
    // Emit both signs of h instead of only the h4 > 0 one.
    bool both_signs = false;
    // Keep solutions whose recovered focal is negative.
    bool positive_focal_only = true;
    // Reject |w| = |1/f| below this, measured after normalisation.
    double saturation = 1e-8;
    double imag_tol = 1e-6;
    double duplicate_tol = 1e-7;
    HfMethod hf_method = HfMethod::Quartic;
};

struct NormalizationState {
    double scale = 1.0;
};

namespace detail {

inline double mean_abs_coordinate(std::span<const Correspondence> corrs) {
    double sum = 0.0;
    for (const auto &c : corrs) sum += std::abs(c.x1.u) + std::abs(c.x1.v) + std::abs(c.x2.u) + std::abs(c.x2.v);
    const double s = corrs.empty() ? 0.0 : sum / (4.0 * static_cast<double>(corrs.size()));
    return std::isfinite(s) && s > 0.0 ? s : 1.0;
}

inline void require_finite(std::span<const Correspondence> corrs) {
    for (const auto &c : corrs)
        if (!c.x1.finite() || !c.x2.finite()) throw Error(ErrorKind::InvalidInput, "non-finite pixel coordinate");
}

inline void require_shared_attitudes(std::span<const Correspondence> corrs) {
    for (std::size_t i = 1; i < corrs.size(); ++i)
        if (!(corrs[i].att1 == corrs[0].att1) || !(corrs[i].att2 == corrs[0].att2))
            throw Error(ErrorKind::InvalidInput, "sample correspondences must share the view attitudes");
}

using Row2x5 = Eigen::Matrix<double, 2, 5>;

// The two DLT equations of y2 ~ Hy y1 that divide through by the gravity
// component: E1 = y2y (Hy y1)x - y2x (Hy y1)y, E2 = y2y (Hy y1)z - y2z (Hy y1)y.
// Bilinear in (y1, y2), linear in h.
inline Row2x5 dlt_rows(const Vec3 &y1, const Vec3 &y2) {
    Row2x5 r;
    r << y2.y() * y1.x(), y2.y() * y1.z(), y2.y() * y1.y(), -y2.x() * y1.y(), 0.0, //
        y2.y() * y1.z(), -y2.y() * y1.x(), 0.0, -y2.z() * y1.y(), y2.y() * y1.y();
    return r;
}

// Homography distance after scaling both matrices to unit last entry.
inline double normalized_distance(const Mat3 &a, const Mat3 &b) {
    if (a(2, 2) == 0.0 || b(2, 2) == 0.0) return std::numeric_limits<double>::infinity();
    return (a / a(2, 2) - b / b(2, 2)).cwiseAbs().maxCoeff();
}

inline bool same_focal(const std::optional<double> &a, const std::optional<double> &b, double tol) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    return std::abs(*a - *b) <= tol * std::max(std::abs(*a), std::abs(*b));
}

inline void push_unique(std::vector<SolverSolution> &out, const SolverSolution &s, double tol) {
    for (const auto &o : out) {
        if ((o.h.h4 >= 0.0) != (s.h.h4 >= 0.0)) continue;
        if (normalized_distance(o.h.matrix(), s.h.matrix()) < tol && same_focal(o.f1, s.f1, tol) &&
            same_focal(o.f2, s.f2, tol))
            return;
    }
    out.push_back(s);
}

// Normalises a raw null vector and emits one or both signs.
inline void emit_signed(std::vector<SolverSolution> &out, const Vec5 &h_raw, std::optional<double> f1,
                        std::optional<double> f2, const SolverOptions &opt) {
    if (!h_raw.allFinite()) return;
    const double s2 = h_raw[0] * h_raw[0] + h_raw[1] * h_raw[1];
    if (!(s2 > 1e-24 * h_raw.squaredNorm())) return;
    const auto signed_h = normalize_ground_homography(h_raw);
    if (opt.both_signs) {
        push_unique(out, {signed_h.positive, f1, f2}, opt.duplicate_tol);
        push_unique(out, {signed_h.negative, f1, f2}, opt.duplicate_tol);
    } else {
        push_unique(out, {signed_h.cheiral(), f1, f2}, opt.duplicate_tol);
    }
}

} // namespace detail

// Divides all pixel coordinates by the mean absolute coordinate of the sample.
inline std::pair<std::vector<Correspondence>, NormalizationState>
normalize_inputs(std::span<const Correspondence> corrs) {
    NormalizationState state{detail::mean_abs_coordinate(corrs)};
    std::vector<Correspondence> out(corrs.begin(), corrs.end());
    for (auto &c : out) {
        c.x1 = {c.x1.u / state.scale, c.x1.v / state.scale};
        c.x2 = {c.x2.u / state.scale, c.x2.v / state.scale};
    }
    return {std::move(out), state};
}

// Ground homographies live in ray space, so only estimated focals rescale.
inline SolverSolution denormalize_solution(const SolverSolution &sol, const NormalizationState &state) {
    SolverSolution out = sol;
    if (out.f1) *out.f1 *= state.scale;
    if (out.f2) *out.f2 *= state.scale;
    return out;
}

inline Intrinsics normalize_intrinsics(const Intrinsics &intr, const NormalizationState &state) {
    return Intrinsics(intr.focal() / state.scale);
}

// Focals of a candidate, filling caller-known ones.
inline std::pair<Intrinsics, Intrinsics> resolve_intrinsics(const SolverSolution &sol, const KnownFocals &known) {
    const auto pick = [](const std::optional<double> &est, const std::optional<double> &k) {
        if (est) return Intrinsics(*est);
        if (k) return Intrinsics(*k);
        throw Error(ErrorKind::InvalidInput, "focal neither estimated nor supplied");
    };
    return {pick(sol.f1, known.f1), pick(sol.f2, known.f2)};
}

// Pixel-space homography of a candidate (x2 ~ H x1).
inline FullHomography solution_pixel_homography(const SolverSolution &sol, const ImuAttitude &att1,
                                                const ImuAttitude &att2, const KnownFocals &known) {
    const auto [k1, k2] = resolve_intrinsics(sol, known);
    return pixel_homography(sol.h.matrix(), att1, att2, k1, k2);
}

// Relative residuals |E| / (||y2|| ||Hy y1||) of both DLT equations of every
// correspondence, two entries per correspondence.
inline std::vector<double> equation_residuals(const SolverSolution &sol, std::span<const Correspondence> corrs,
                                              const KnownFocals &known) {
    const auto [k1, k2] = resolve_intrinsics(sol, known);
    std::vector<double> out;
    const Mat3 H = sol.h.matrix();
    for (const auto &c : corrs) {
        const Vec3 y1 = rectify(c.x1, c.att1, k1).y;
        const Vec3 y2 = rectify(c.x2, c.att2, k2).y;
        const Vec3 z = H * y1;
        const double denom = std::max(y2.norm() * z.norm(), 1e-300);
        const Eigen::Vector2d e = detail::dlt_rows(y1, y2) * sol.h.vector();
        out.push_back(std::abs(e[0]) / denom);
        out.push_back(std::abs(e[1]) / denom);
    }
    return out;
}

// The equation a 2.5-point solver discards (E2 of the third correspondence),
// in ratio form and scaled by the view-2 focal so that it reads roughly in
// pixels.
inline double consistency_residual(const SolverSolution &sol, const Correspondence &c, const KnownFocals &known) {
    const auto [k1, k2] = resolve_intrinsics(sol, known);
    const Vec3 y1 = rectify(c.x1, c.att1, k1).y;
    const Vec3 y2 = rectify(c.x2, c.att2, k2).y;
    const Vec3 z = sol.h.matrix() * y1;
    const double denom = y2.y() * z.y();
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    return k2.focal() * std::abs(y2.y() * z.z() - y2.z() * z.y()) / std::abs(denom);
}

} // namespace ghom

#endif // GHOM_SOLVERS_COMMON_HPP
