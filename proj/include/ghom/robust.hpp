#ifndef GHOM_ROBUST_HPP
#define GHOM_ROBUST_HPP

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ghom/error.hpp"
#include "ghom/random.hpp"
#include "ghom/solvers.hpp"

namespace ghom {

struct RansacConfig {
    int max_iterations = 200;
    // Inlier threshold on the symmetric transfer error, pixels.
    double threshold = 2.0;
    // Bound on the discarded equation of 2.5-point samples, pixel-like units.
    double consistency_threshold = 20.0;
    bool consistency_check = true;
    // Adaptive early stop when set, e.g. 0.999.
    std::optional<double> confidence;
    std::uint64_t seed = 0;
    bool local_optimization = false;
    int lo_iterations = 10;
    KnownFocals known;
    SolverOptions solver;
};

struct RansacResult {
    SolverSolution best;
    std::vector<bool> inlier_mask;
    int inlier_count = 0;
    double inlier_residual = 0.0;
    int best_iteration = -1;
    int iterations = 0;
    // Iterations whose candidates never reached scoring (all rejected by the
    // consistency check, solver failure, or no real solution).
    int skipped = 0;
    int solved = 0;
    long candidates_scored = 0;
    long candidates_rejected = 0;
    double wall_time_s = 0.0;
};

struct ScoreResult {
    std::vector<bool> inlier_mask;
    int inlier_count = 0;
    double total_residual = 0.0;
};

namespace detail {

inline double transfer_distance(const Mat3 &h, const PixelPoint &from, const PixelPoint &to) {
    const Vec3 p = h * from.homogeneous();
    if (!(std::abs(p.z()) > 1e-12 * p.head<2>().norm())) return std::numeric_limits<double>::infinity();
    return std::hypot(p.x() / p.z() - to.u, p.y() / p.z() - to.v);
}

} // namespace detail

// Mean of forward and backward transfer distances, in pixels.
inline double symmetric_transfer_error(const FullHomography &h, const FullHomography &h_inv, const Correspondence &c) {
    return 0.5 * (detail::transfer_distance(h, c.x1, c.x2) + detail::transfer_distance(h_inv, c.x2, c.x1));
}

inline ScoreResult score_homography(const FullHomography &h, std::span<const Correspondence> corrs, double tau) {
    ScoreResult r;
    r.inlier_mask.assign(corrs.size(), false);
    Eigen::FullPivLU<Mat3> lu(h);
    if (!lu.isInvertible() || !h.allFinite()) return r;
    const Mat3 h_inv = lu.inverse();
    for (std::size_t i = 0; i < corrs.size(); ++i) {
        const double e = symmetric_transfer_error(h, h_inv, corrs[i]);
        if (e < tau) {
            r.inlier_mask[i] = true;
            ++r.inlier_count;
            r.total_residual += e;
        }
    }
    return r;
}

// Inliers of a candidate under the pixel homography K2 A2 Hy A1^T K1^-1.
// Attitudes are read from the first correspondence.
inline ScoreResult score_model(const SolverSolution &sol, std::span<const Correspondence> corrs, double tau,
                               const KnownFocals &known = {}) {
    if (corrs.empty()) return {};
    return score_homography(solution_pixel_homography(sol, corrs[0].att1, corrs[0].att2, known), corrs, tau);
}

namespace detail {

// Parameters: yaw, t'x, t'y, t'z, then log of each estimated focal. A shared
// focal is one parameter.
struct LoModel {
    SolverSolution base;
    bool shared_focal = false;

    Eigen::VectorXd pack() const {
        std::vector<double> p = {std::atan2(base.h.h2, base.h.h1), base.h.h3, base.h.h4 - 1.0, base.h.h5};
        if (base.f1) p.push_back(std::log(*base.f1));
        if (base.f2 && !shared_focal) p.push_back(std::log(*base.f2));
        return Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
    }

    SolverSolution unpack(const Eigen::VectorXd &p) const {
        SolverSolution s = base;
        s.h = make_ground_homography(p[0], Vec3(p[1], p[2], p[3]));
        int k = 4;
        if (base.f1) s.f1 = std::exp(p[k++]);
        if (base.f2) s.f2 = shared_focal ? s.f1 : std::optional<double>(std::exp(p[k++]));
        return s;
    }
};

inline Eigen::VectorXd lo_residuals(const LoModel &m, const Eigen::VectorXd &p, std::span<const Correspondence> pts,
                                    const KnownFocals &known) {
    const SolverSolution s = m.unpack(p);
    const Mat3 h = solution_pixel_homography(s, pts[0].att1, pts[0].att2, known);
    const Mat3 h_inv = h.inverse();
    Eigen::VectorXd r(4 * pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec3 a = h * pts[i].x1.homogeneous();
        const Vec3 b = h_inv * pts[i].x2.homogeneous();
        r.segment<4>(4 * i) << a.x() / a.z() - pts[i].x2.u, a.y() / a.z() - pts[i].x2.v, b.x() / b.z() - pts[i].x1.u,
            b.y() / b.z() - pts[i].x1.v;
    }
    return r;
}

} // namespace detail

// Levenberg-Marquardt on the transfer residuals of the given inliers.
inline SolverSolution refine_model(const SolverSolution &sol, std::span<const Correspondence> inliers,
                                   const KnownFocals &known, int iterations = 10, bool shared_focal = false) {
    if (inliers.size() < 3) return sol;
    const detail::LoModel m{sol, shared_focal && sol.f1 && sol.f2};
    Eigen::VectorXd p = m.pack();
    Eigen::VectorXd r = detail::lo_residuals(m, p, inliers, known);
    if (!r.allFinite()) return sol;
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    for (int it = 0; it < iterations; ++it) {
        Eigen::MatrixXd j(r.size(), p.size());
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            const double step = 1e-7 * std::max(1.0, std::abs(p[k]));
            Eigen::VectorXd q = p;
            q[k] += step;
            j.col(k) = (detail::lo_residuals(m, q, inliers, known) - r) / step;
        }
        const Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::VectorXd g = j.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 8 && !improved; ++tries) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() *= 1.0 + lambda;
            const Eigen::VectorXd dp = a.ldlt().solve(-g);
            const Eigen::VectorXd q = p + dp;
            const Eigen::VectorXd rq = detail::lo_residuals(m, q, inliers, known);
            if (rq.allFinite() && rq.squaredNorm() < cost) {
                p = q;
                r = rq;
                cost = rq.squaredNorm();
                lambda = std::max(lambda * 0.1, 1e-12);
                improved = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!improved) break;
    }
    return m.unpack(p);
}

namespace detail {

inline bool better(const ScoreResult &a, int ia, const ScoreResult &b, int ib) {
    if (a.inlier_count != b.inlier_count) return a.inlier_count > b.inlier_count;
    if (a.total_residual != b.total_residual) return a.total_residual < b.total_residual;
    return ia < ib;
}

inline int adaptive_iterations(double confidence, double inlier_ratio, int sample_size, int cap) {
    if (inlier_ratio <= 0.0) return cap;
    const double p_good = std::pow(inlier_ratio, sample_size);
    if (p_good >= 1.0) return 1;
    const double n = std::log(1.0 - confidence) / std::log(1.0 - p_good);
    return std::isfinite(n) ? static_cast<int>(std::min<double>(cap, std::ceil(n))) : cap;
}

} // namespace detail

inline RansacResult ransac(std::span<const Correspondence> corrs, SolverKind kind, const RansacConfig &cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const int k = minimal_sample_size(kind);
    if (static_cast<int>(corrs.size()) < k) throw Error(ErrorKind::InvalidInput, "too few correspondences");
    if (!(cfg.threshold > 0.0) || cfg.max_iterations < 1)
        throw Error(ErrorKind::InvalidInput, "threshold must be > 0 and max_iterations >= 1");
    detail::require_shared_attitudes(corrs);

    const bool check = cfg.consistency_check && has_spare_equation(kind);
    RansacResult res;
    ScoreResult best_score;
    bool have = false;
    int limit = cfg.max_iterations;
    std::vector<Correspondence> sample(k);

    for (int it = 0; it < limit; ++it) {
        ++res.iterations;
        Rng rng(sub_seed(cfg.seed, static_cast<std::uint64_t>(it)));
        const auto idx = rng.sample_indices(corrs.size(), k);
        for (int i = 0; i < k; ++i) sample[i] = corrs[idx[i]];

        std::vector<SolverSolution> cands;
        try {
            cands = solve(kind, sample, cfg.known, cfg.solver);
        } catch (const Error &) {
            ++res.skipped;
            continue;
        }
        bool scored_any = false;
        for (const auto &cand : cands) {
            if (check && !(consistency_residual(cand, sample[2], cfg.known) <= cfg.consistency_threshold)) {
                ++res.candidates_rejected;
                continue;
            }
            ++res.candidates_scored;
            scored_any = true;
            ScoreResult s = score_model(cand, corrs, cfg.threshold, cfg.known);
            if (!have || detail::better(s, it, best_score, res.best_iteration)) {
                best_score = std::move(s);
                res.best = cand;
                res.best_iteration = it;
                have = true;
            }
        }
        if (scored_any)
            ++res.solved;
        else
            ++res.skipped;
        if (cfg.confidence && have) {
            const double ratio = static_cast<double>(best_score.inlier_count) / static_cast<double>(corrs.size());
            limit = std::min(limit, std::max(it + 1, detail::adaptive_iterations(*cfg.confidence, ratio, k,
                                                                                   cfg.max_iterations)));
        }
    }
    if (!have) throw Error(ErrorKind::NoModel, "no candidate produced in any iteration");

    if (cfg.local_optimization && best_score.inlier_count >= 3) {
        std::vector<Correspondence> inl;
        for (std::size_t i = 0; i < corrs.size(); ++i)
            if (best_score.inlier_mask[i]) inl.push_back(corrs[i]);
        const SolverSolution refined =
            refine_model(res.best, inl, cfg.known, cfg.lo_iterations, kind == SolverKind::FHF);
        ScoreResult s = score_model(refined, corrs, cfg.threshold, cfg.known);
        if (s.inlier_count >= best_score.inlier_count) {
            res.best = refined;
            best_score = std::move(s);
        }
    }

    res.inlier_mask = std::move(best_score.inlier_mask);
    res.inlier_count = best_score.inlier_count;
    res.inlier_residual = best_score.total_residual;
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace ghom

#endif // GHOM_ROBUST_HPP
