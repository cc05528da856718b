#ifndef GHOM_SYNTH_HPP
#define GHOM_SYNTH_HPP

// Synthetic two-view ground-plane problems with known answers.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "ghom/error.hpp"
#include "ghom/geom_core.hpp"
#include "ghom/random.hpp"
#include "ghom/solvers/common.hpp"

namespace ghom {

enum class FocalMode { Calibrated, FHF, HF, F1HF2 };

inline FocalMode focal_mode_for(SolverKind kind) {
    switch (kind) {
    case SolverKind::Calibrated2pt: return FocalMode::Calibrated;
    case SolverKind::FHF: return FocalMode::FHF;
    case SolverKind::HF: return FocalMode::HF;
    case SolverKind::F1HF2: return FocalMode::F1HF2;
    }
    return FocalMode::Calibrated;
}

struct SynthConfig {
    int n_planar = 3;
    int n_nonplanar = 0;
    double sigma = 0.0;
    double outlier_fraction = 0.0;
    FocalMode focal_mode = FocalMode::FHF;
    double focal_min = 300.0;
    double focal_max = 1500.0;
    // Camera tilt away from straight down, degrees. Exactly downward views
    // leave the focal unobservable from a ground homography.
    double tilt_min_deg = 15.0;
    double tilt_max_deg = 50.0;
    double roll_max_deg = 20.0;
    double distance_min = 2.0;
    double distance_max = 4.0;
    double min_depth = 0.2;
    int max_attempts = 100;
};

struct CameraPose {
    ImuAttitude attitude;
    double yaw = 0.0;
    Vec3 center = Vec3::Zero();

    // World to camera rotation A Ry(yaw).
    Mat3 rotation() const { return attitude.matrix() * rot_y(yaw); }
    Vec3 to_camera(const Vec3 &X) const { return rotation() * (X - center); }
};

struct ProblemInstance {
    std::uint64_t seed = 0;
    SynthConfig config;
    std::vector<Vec3> points;
    std::vector<bool> nonplanar;
    CameraPose cam1, cam2;
    double f1 = 1.0, f2 = 1.0;
    GroundHomography gt_h;
    RelativePose gt_pose;   // camera frame, via compose_world_pose
    RelativePose gt_rectified;
    std::vector<Correspondence> corrs;
    std::vector<Correspondence> clean; // before noise and scrambling
    double sigma = 0.0;
    std::vector<bool> outlier_mask;

    KnownFocals known() const { return {f1, f2}; }

    // Focals a solver of this kind may use as input.
    KnownFocals known_for(SolverKind kind) const {
        switch (kind) {
        case SolverKind::Calibrated2pt: return {f1, f2};
        case SolverKind::HF: return {f1, std::nullopt};
        default: return {};
        }
    }
};

inline Vec3 project(const CameraPose &cam, double f, const Vec3 &X) {
    const Vec3 xc = cam.to_camera(X);
    return Vec3(f * xc.x() / xc.z(), f * xc.y() / xc.z(), xc.z());
}

// Ground-truth Hy for cameras above the plane y = 0.
inline GroundHomography ground_truth_homography(const CameraPose &c1, const CameraPose &c2) {
    const Vec3 t_prime = rot_y(c2.yaw) * (c2.center - c1.center) / c1.center.y();
    return make_ground_homography(wrap_angle(c2.yaw - c1.yaw), t_prime);
}

inline CameraPose random_camera(Rng &rng, const SynthConfig &cfg) {
    constexpr double deg = std::numbers::pi / 180.0;
    const double pitch = (-90.0 + rng.uniform(cfg.tilt_min_deg, cfg.tilt_max_deg)) * deg;
    const double roll = rng.uniform(-cfg.roll_max_deg, cfg.roll_max_deg) * deg;
    CameraPose cam{ImuAttitude::from_pitch_roll(pitch, roll), rng.uniform(-std::numbers::pi, std::numbers::pi),
                   Vec3::Zero()};
    const Vec3 target(rng.normal(0.0, 0.5), 0.0, rng.normal(0.0, 0.5));
    const double dist = rng.uniform(cfg.distance_min, cfg.distance_max);
    cam.center = target - dist * cam.rotation().transpose() * Vec3::UnitZ();
    return cam;
}

inline void scramble_outliers(Rng &rng, ProblemInstance &inst, double pixel_range) {
    const std::size_t n = inst.corrs.size();
    const auto count = static_cast<std::size_t>(std::llround(inst.config.outlier_fraction * static_cast<double>(n)));
    inst.outlier_mask.assign(n, false);
    if (count == 0) return;
    std::vector<std::size_t> idx = rng.sample_indices(n, count);
    for (std::size_t i : idx) inst.outlier_mask[i] = true;
    if (count == 1) {
        inst.corrs[idx[0]].x2 = {rng.uniform(-pixel_range, pixel_range), rng.uniform(-pixel_range, pixel_range)};
        return;
    }
    // Sattolo's shuffle: a single cycle, so no correspondence keeps its own x2.
    std::vector<std::size_t> perm = idx;
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i)]);
    std::vector<PixelPoint> x2(count);
    for (std::size_t k = 0; k < count; ++k) x2[k] = inst.corrs[perm[k]].x2;
    for (std::size_t k = 0; k < count; ++k) inst.corrs[idx[k]].x2 = x2[k];
}

// Adds N(0, sigma^2) to every pixel coordinate of both views.
inline ProblemInstance perturb(const ProblemInstance &inst, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorKind::InvalidInput, "sigma must be >= 0");
    ProblemInstance out = inst;
    if (sigma == 0.0) return out;
    Rng rng(seed);
    for (auto &c : out.corrs) {
        c.x1.u += rng.normal(0.0, sigma);
        c.x1.v += rng.normal(0.0, sigma);
        c.x2.u += rng.normal(0.0, sigma);
        c.x2.v += rng.normal(0.0, sigma);
    }
    out.sigma = std::sqrt(inst.sigma * inst.sigma + sigma * sigma);
    return out;
}

inline ProblemInstance generate_instance(std::uint64_t seed, const SynthConfig &cfg) {
    if (cfg.n_planar < 3 || cfg.n_nonplanar < 0) throw Error(ErrorKind::InvalidInput, "need n_planar >= 3");
    if (!(cfg.outlier_fraction >= 0.0 && cfg.outlier_fraction < 1.0))
        throw Error(ErrorKind::InvalidInput, "outlier_fraction must be in [0, 1)");
    if (!(cfg.sigma >= 0.0)) throw Error(ErrorKind::InvalidInput, "sigma must be >= 0");

    Rng rng(sub_seed(seed, 0));
    ProblemInstance inst;
    inst.seed = seed;
    inst.config = cfg;
    inst.f1 = rng.log_uniform(cfg.focal_min, cfg.focal_max);
    inst.f2 = cfg.focal_mode == FocalMode::FHF ? inst.f1 : rng.log_uniform(cfg.focal_min, cfg.focal_max);

    const int n = cfg.n_planar + cfg.n_nonplanar;
    bool ok = false;
    for (int attempt = 0; attempt < cfg.max_attempts && !ok; ++attempt) {
        inst.points.clear();
        inst.nonplanar.clear();
        for (int i = 0; i < n; ++i) {
            const bool off = i >= cfg.n_planar;
            const double y = off ? rng.uniform(0.1, 0.5) : 0.0;
            const double x = rng.normal();
            const double z = rng.normal();
            inst.points.emplace_back(x, y, z);
            inst.nonplanar.push_back(off);
        }
        inst.cam1 = random_camera(rng, cfg);
        inst.cam2 = random_camera(rng, cfg);
        ok = inst.cam1.center.y() > 0.0 && inst.cam2.center.y() > 0.0;
        for (const auto &X : inst.points)
            ok = ok && inst.cam1.to_camera(X).z() > cfg.min_depth && inst.cam2.to_camera(X).z() > cfg.min_depth;
    }
    if (!ok) throw Error(ErrorKind::GenerationFailure, "points behind a camera after all redraws");

    for (const auto &X : inst.points) {
        const Vec3 p1 = project(inst.cam1, inst.f1, X);
        const Vec3 p2 = project(inst.cam2, inst.f2, X);
        inst.corrs.push_back({{p1.x(), p1.y()}, {p2.x(), p2.y()}, inst.cam1.attitude, inst.cam2.attitude});
    }
    inst.clean = inst.corrs;
    inst.gt_h = ground_truth_homography(inst.cam1, inst.cam2);
    inst.gt_rectified = ground_homography_to_pose(inst.gt_h);
    inst.gt_pose = compose_world_pose(inst.gt_rectified, inst.cam1.attitude, inst.cam2.attitude);

    scramble_outliers(rng, inst, std::max(inst.f1, inst.f2));
    if (cfg.sigma > 0.0) inst = perturb(inst, cfg.sigma, sub_seed(seed, 1));
    return inst;
}

// Serialised form: points, attitudes (row-major 3x3), pixels as
// [u1, v1, u2, v2], focals, sigma, outlier_mask, seed.
inline nlohmann::json instance_to_json(const ProblemInstance &inst) {
    using nlohmann::json;
    const auto mat = [](const Mat3 &m) {
        json a = json::array();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a.push_back(m(i, j));
        return a;
    };
    json j;
    j["points"] = json::array();
    for (const auto &p : inst.points) j["points"].push_back({p.x(), p.y(), p.z()});
    j["attitudes"] = {mat(inst.cam1.attitude.matrix()), mat(inst.cam2.attitude.matrix())};
    j["pixels"] = json::array();
    for (const auto &c : inst.corrs) j["pixels"].push_back({c.x1.u, c.x1.v, c.x2.u, c.x2.v});
    j["focals"] = {inst.f1, inst.f2};
    j["sigma"] = inst.sigma;
    j["outlier_mask"] = inst.outlier_mask;
    j["seed"] = inst.seed;
    return j;
}

// Observations only; camera positions and yaw are not part of the format.
inline ProblemInstance instance_from_json(const nlohmann::json &j) {
    try {
        const auto mat = [](const nlohmann::json &a) {
            if (a.size() != 9) throw Error(ErrorKind::Parse, "attitude needs 9 entries");
            Mat3 m;
            for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = a.at(i).get<double>();
            return m;
        };
        ProblemInstance inst;
        inst.seed = j.at("seed").get<std::uint64_t>();
        inst.sigma = j.at("sigma").get<double>();
        const auto &f = j.at("focals");
        inst.f1 = f.at(0).get<double>();
        inst.f2 = f.at(1).get<double>();
        inst.cam1.attitude = ImuAttitude(mat(j.at("attitudes").at(0)));
        inst.cam2.attitude = ImuAttitude(mat(j.at("attitudes").at(1)));
        for (const auto &p : j.at("points")) inst.points.emplace_back(p.at(0), p.at(1), p.at(2));
        for (const auto &p : j.at("pixels"))
            inst.corrs.push_back({{p.at(0).get<double>(), p.at(1).get<double>()},
                                  {p.at(2).get<double>(), p.at(3).get<double>()},
                                  inst.cam1.attitude,
                                  inst.cam2.attitude});
        inst.outlier_mask = j.at("outlier_mask").get<std::vector<bool>>();
        inst.nonplanar.assign(inst.points.size(), false);
        for (std::size_t i = 0; i < inst.points.size(); ++i) inst.nonplanar[i] = inst.points[i].y() != 0.0;
        if (inst.outlier_mask.size() != inst.corrs.size())
            throw Error(ErrorKind::Parse, "outlier_mask and pixels differ in length");
        return inst;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::Parse, e.what());
    }
}

} // namespace ghom

#endif // GHOM_SYNTH_HPP
