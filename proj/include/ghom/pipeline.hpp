#ifndef GHOM_PIPELINE_HPP
#define GHOM_PIPELINE_HPP

// Frame sequences: JSON-lines I/O, synthetic sequences, per-pair robust
// estimation and trajectory chaining.
//
// One frame per line:
//   {"id": 3, "attitude": [9 numbers, row-major],
//    "keypoints": [[kp_id, u, v], ...],
//    "gt_pose": {"R": [9], "c": [3]}, "gt_focal": 500.0}
// gt_pose and gt_focal are optional. R maps world to camera and c is the
// camera centre in world coordinates (y up, ground plane y = 0).

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ghom/csv.hpp"
#include "ghom/error.hpp"
#include "ghom/geom_core.hpp"
#include "ghom/metrics.hpp"
#include "ghom/random.hpp"
#include "ghom/robust.hpp"

namespace ghom {

struct WorldPose {
    Mat3 R = Mat3::Identity();
    Vec3 c = Vec3::Zero();
};

struct Keypoint {
    int id = 0;
    PixelPoint x;
};

struct SequenceFrame {
    int id = 0;
    ImuAttitude attitude;
    std::vector<Keypoint> keypoints;
    std::optional<WorldPose> gt_pose;
    std::optional<double> gt_focal;
};

// ------------------------------------------------------------------ ingest

inline constexpr double attitude_exact_tol = 1e-6;
inline constexpr double attitude_repair_tol = 1e-3;

namespace detail {

inline Mat3 mat3_from_json(const nlohmann::json &a, const char *what) {
    if (!a.is_array() || a.size() != 9) throw Error(ErrorKind::Parse, std::string(what) + " needs 9 numbers");
    Mat3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = a.at(i).get<double>();
    return m;
}

inline nlohmann::json mat3_to_json(const Mat3 &m) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a.push_back(m(i, j));
    return a;
}

inline double orthonormality_defect(const Mat3 &r) {
    return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

} // namespace detail

// Accepts attitudes within 1e-6 of orthonormal as given, re-orthonormalises
// up to 1e-3 and rejects anything worse.
inline ImuAttitude checked_attitude(const Mat3 &r, int frame_id) {
    const double defect = detail::orthonormality_defect(r);
    if (!std::isfinite(defect) || defect > attitude_repair_tol || !(r.determinant() > 0.0))
        throw Error(ErrorKind::Data, "frame " + std::to_string(frame_id) + ": attitude is not a rotation");
    if (defect <= attitude_exact_tol) return ImuAttitude(r, attitude_exact_tol * 4.0);
    return ImuAttitude(orthonormalize(r), 1e-9);
}

inline SequenceFrame parse_frame(const std::string &line, std::size_t lineno) {
    const std::string where = "line " + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::Parse, where + e.what());
    }
    SequenceFrame f;
    Mat3 att;
    try {
        f.id = j.at("id").get<int>();
        att = detail::mat3_from_json(j.at("attitude"), "attitude");
        std::set<int> seen;
        for (const auto &kp : j.at("keypoints")) {
            if (!kp.is_array() || kp.size() != 3) throw Error(ErrorKind::Parse, "keypoint needs [id, u, v]");
            Keypoint k{kp.at(0).get<int>(), {kp.at(1).get<double>(), kp.at(2).get<double>()}};
            if (!k.x.finite()) throw Error(ErrorKind::Parse, "non-finite keypoint");
            if (!seen.insert(k.id).second) throw Error(ErrorKind::Parse, "duplicate keypoint id " + std::to_string(k.id));
            f.keypoints.push_back(k);
        }
        if (j.contains("gt_pose")) {
            const auto &p = j.at("gt_pose");
            WorldPose gt;
            gt.R = detail::mat3_from_json(p.at("R"), "gt_pose.R");
            const auto &c = p.at("c");
            if (!c.is_array() || c.size() != 3) throw Error(ErrorKind::Parse, "gt_pose.c needs 3 numbers");
            gt.c = Vec3(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>());
            f.gt_pose = gt;
        }
        if (j.contains("gt_focal")) f.gt_focal = j.at("gt_focal").get<double>();
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::Parse, where + e.what());
    } catch (const Error &e) {
        throw Error(e.kind(), where + e.message());
    }
    f.attitude = checked_attitude(att, f.id);
    return f;
}

inline std::vector<SequenceFrame> ingest(std::istream &is) {
    std::vector<SequenceFrame> frames;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        frames.push_back(parse_frame(line, lineno));
    }
    return frames;
}

inline std::vector<SequenceFrame> ingest_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
    return ingest(in);
}

inline std::string frame_to_line(const SequenceFrame &f) {
    nlohmann::json j;
    j["id"] = f.id;
    j["attitude"] = detail::mat3_to_json(f.attitude.matrix());
    j["keypoints"] = nlohmann::json::array();
    for (const auto &k : f.keypoints) j["keypoints"].push_back({k.id, k.x.u, k.x.v});
    if (f.gt_pose) {
        j["gt_pose"]["R"] = detail::mat3_to_json(f.gt_pose->R);
        j["gt_pose"]["c"] = {f.gt_pose->c.x(), f.gt_pose->c.y(), f.gt_pose->c.z()};
    }
    if (f.gt_focal) j["gt_focal"] = *f.gt_focal;
    return j.dump();
}

inline void emit(std::ostream &os, const std::vector<SequenceFrame> &frames) {
    for (const auto &f : frames) os << frame_to_line(f) << '\n';
}

// --------------------------------------------------------- synthetic sequence

struct SequenceConfig {
    int n_frames = 50;
    int n_ground = 400;
    int n_cluster = 20;
    double sigma = 0.5;
    // Share of observations per frame whose pixels are exchanged.
    double outlier_fraction = 0.2;
    double focal = 500.0;
    double radius = 4.0;
    double height = 1.5;
    double image_half_width = 320.0;
    double image_half_height = 240.0;
    double roll_max_deg = 4.0;
};

struct SyntheticSequence {
    std::uint64_t seed = 0;
    std::vector<SequenceFrame> frames;
    // Keypoint ids of the off-plane cluster.
    std::vector<int> cluster_ids;
};

inline int cluster_id_base(const SequenceConfig &cfg) { return cfg.n_ground; }

// The camera circles the origin at constant height looking at it; a vertical
// panel of points stands at the origin.
inline SyntheticSequence generate_sequence(std::uint64_t seed, const SequenceConfig &cfg = {}) {
    if (cfg.n_frames < 2 || cfg.n_ground < 3) throw Error(ErrorKind::InvalidInput, "sequence too small");
    Rng rng(sub_seed(seed, 0));
    SyntheticSequence seq;
    seq.seed = seed;

    std::vector<Vec3> pts;
    for (int i = 0; i < cfg.n_ground; ++i) {
        const double r = cfg.radius * std::sqrt(rng.uniform());
        const double a = rng.uniform(-std::numbers::pi, std::numbers::pi);
        pts.emplace_back(r * std::cos(a), 0.0, r * std::sin(a));
    }
    for (int i = 0; i < cfg.n_cluster; ++i) {
        pts.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(0.3, 1.4), rng.uniform(-0.05, 0.05));
        seq.cluster_ids.push_back(cluster_id_base(cfg) + i);
    }

    constexpr double deg = std::numbers::pi / 180.0;
    for (int k = 0; k < cfg.n_frames; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / cfg.n_frames;
        const Vec3 c(cfg.radius * std::cos(phi), cfg.height + rng.uniform(-0.1, 0.1), cfg.radius * std::sin(phi));
        const Vec3 dir = (Vec3(rng.normal(0.0, 0.2), 0.0, rng.normal(0.0, 0.2)) - c).normalized();
        const double yaw = std::atan2(-dir.x(), dir.z());
        const double pitch = std::asin(std::clamp(dir.y(), -1.0, 1.0));
        const double roll = rng.uniform(-cfg.roll_max_deg, cfg.roll_max_deg) * deg;
        const ImuAttitude att = ImuAttitude::from_pitch_roll(pitch, roll);
        const Mat3 R = att.matrix() * rot_y(yaw);

        SequenceFrame f;
        f.id = k;
        f.attitude = att;
        f.gt_pose = WorldPose{R, c};
        f.gt_focal = cfg.focal;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Vec3 xc = R * (pts[i] - c);
            if (xc.z() < 0.2) continue;
            const PixelPoint x{cfg.focal * xc.x() / xc.z(), cfg.focal * xc.y() / xc.z()};
            if (std::abs(x.u) > cfg.image_half_width || std::abs(x.v) > cfg.image_half_height) continue;
            f.keypoints.push_back({static_cast<int>(i), x});
        }
        // Exchange pixels within a random subset of observations.
        const auto n_out = static_cast<std::size_t>(std::llround(cfg.outlier_fraction * f.keypoints.size()));
        if (n_out >= 2) {
            const auto idx = rng.sample_indices(f.keypoints.size(), n_out);
            std::vector<PixelPoint> xs;
            for (std::size_t i : idx) xs.push_back(f.keypoints[i].x);
            for (std::size_t i = 0; i < idx.size(); ++i) f.keypoints[idx[i]].x = xs[(i + 1) % xs.size()];
        }
        for (auto &kp : f.keypoints) {
            kp.x.u += rng.normal(0.0, cfg.sigma);
            kp.x.v += rng.normal(0.0, cfg.sigma);
        }
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

// ------------------------------------------------------------ estimation

struct PairEstimate {
    int frame1 = 0, frame2 = 0;
    // False when the pair could not be estimated (too few matches, no model).
    bool ok = false;
    std::string note;
    RelativePose pose; // camera frame: R = R2 R1^T, t ~ R2 (c2 - c1)
    std::optional<double> f1, f2;
    std::vector<int> inlier_ids, outlier_ids;
    std::size_t n_matches = 0;
};

struct EstimateOptions {
    RansacConfig ransac;
    // Pair frame k with frame k + stride.
    int stride = 1;
};

namespace detail {

inline KnownFocals pair_known_focals(SolverKind kind, const SequenceFrame &a, const SequenceFrame &b) {
    const auto need = [](const SequenceFrame &f) {
        if (!f.gt_focal) throw Error(ErrorKind::Configuration, "frame " + std::to_string(f.id) + " has no focal");
        return *f.gt_focal;
    };
    switch (kind) {
    case SolverKind::Calibrated2pt: return {need(a), need(b)};
    case SolverKind::HF: return {need(a), std::nullopt};
    default: return {};
    }
}

} // namespace detail

inline PairEstimate estimate_pair(const SequenceFrame &a, const SequenceFrame &b, SolverKind kind,
                                  const RansacConfig &base) {
    PairEstimate pe;
    pe.frame1 = a.id;
    pe.frame2 = b.id;
    std::map<int, PixelPoint> lookup;
    for (const auto &k : a.keypoints) lookup[k.id] = k.x;
    std::vector<Correspondence> corrs;
    std::vector<int> ids;
    double motion = 0.0;
    for (const auto &k : b.keypoints) {
        const auto it = lookup.find(k.id);
        if (it == lookup.end()) continue;
        corrs.push_back({it->second, k.x, a.attitude, b.attitude});
        ids.push_back(k.id);
        motion = std::max(motion, std::hypot(k.x.u - it->second.u, k.x.v - it->second.v));
    }
    pe.n_matches = corrs.size();
    if (static_cast<int>(corrs.size()) < minimal_sample_size(kind)) {
        pe.note = "too few matches";
        return pe;
    }
    // No image motion at all: rotation from the attitudes, no translation.
    if (motion == 0.0 && a.attitude == b.attitude) {
        pe.ok = true;
        pe.note = "static";
        pe.pose.R = b.attitude.matrix() * a.attitude.matrix().transpose();
        pe.inlier_ids = ids;
        return pe;
    }
    RansacConfig cfg = base;
    cfg.known = detail::pair_known_focals(kind, a, b);
    try {
        const RansacResult res = ransac(corrs, kind, cfg);
        pe.pose = solution_pose(res.best, a.attitude, b.attitude);
        pe.f1 = res.best.f1;
        pe.f2 = res.best.f2;
        for (std::size_t i = 0; i < ids.size(); ++i) (res.inlier_mask[i] ? pe.inlier_ids : pe.outlier_ids).push_back(ids[i]);
        pe.ok = true;
    } catch (const Error &e) {
        if (e.kind() != ErrorKind::NoModel) throw;
        pe.note = "no model";
    }
    return pe;
}

inline std::vector<PairEstimate> estimate_sequence(const std::vector<SequenceFrame> &frames, SolverKind kind,
                                                   const EstimateOptions &opt = {}) {
    if (frames.size() < 2) throw Error(ErrorKind::InvalidInput, "need at least two frames");
    if (opt.stride < 1) throw Error(ErrorKind::InvalidInput, "stride must be >= 1");
    std::vector<PairEstimate> out;
    for (std::size_t k = 0; k + opt.stride < frames.size(); k += opt.stride) {
        RansacConfig cfg = opt.ransac;
        cfg.seed = sub_seed(opt.ransac.seed, k);
        out.push_back(estimate_pair(frames[k], frames[k + opt.stride], kind, cfg));
    }
    return out;
}

// ---------------------------------------------------------------- chaining

struct TrajectoryFrame {
    int frame_id = 0;
    WorldPose pose;
    bool gap = false;
    std::vector<int> inlier_ids, outlier_ids;
};

struct Trajectory {
    std::vector<TrajectoryFrame> frames;
};

// Pose k = rel_k applied to pose k-1. With `scale_to_gt` each translation
// is rescaled to the ground-truth step length, otherwise to unit length.
// Gaps repeat the previous pose.
inline Trajectory chain_trajectory(const std::vector<PairEstimate> &rel, const std::vector<SequenceFrame> &frames,
                                   bool scale_to_gt = true, int stride = 1) {
    Trajectory traj;
    if (frames.empty()) return traj;
    const auto gt_of = [&](std::size_t idx) -> const WorldPose & {
        if (!frames[idx].gt_pose)
            throw Error(ErrorKind::Configuration, "frame " + std::to_string(frames[idx].id) + " has no ground truth");
        return *frames[idx].gt_pose;
    };
    TrajectoryFrame first;
    first.frame_id = frames[0].id;
    if (scale_to_gt)
        first.pose = gt_of(0);
    else if (frames[0].gt_pose)
        first.pose = *frames[0].gt_pose;
    traj.frames.push_back(first);

    for (std::size_t k = 0; k < rel.size(); ++k) {
        const std::size_t idx = (k + 1) * static_cast<std::size_t>(stride);
        if (idx >= frames.size()) break;
        const WorldPose &prev = traj.frames.back().pose;
        TrajectoryFrame tf;
        tf.frame_id = frames[idx].id;
        const PairEstimate &pe = rel[k];
        if (!pe.ok) {
            tf.gap = true;
            tf.pose = prev;
            traj.frames.push_back(tf);
            continue;
        }
        double step = 1.0;
        if (scale_to_gt) step = (gt_of(idx).c - gt_of(idx - stride).c).norm();
        tf.pose.R = pe.pose.R * prev.R;
        tf.pose.c = prev.c + step * (tf.pose.R.transpose() * pe.pose.t);
        tf.inlier_ids = pe.inlier_ids;
        tf.outlier_ids = pe.outlier_ids;
        traj.frames.push_back(tf);
    }
    return traj;
}

// Relative pose between two world poses in the pair convention above.
inline RelativePose relative_from_world(const WorldPose &a, const WorldPose &b) {
    RelativePose r;
    r.R = b.R * a.R.transpose();
    const Vec3 t = b.R * (b.c - a.c);
    r.t_norm = t.norm();
    r.t = r.t_norm > 0.0 ? Vec3(t / r.t_norm) : Vec3::Zero();
    return r;
}

struct TrajectoryErrorRow {
    int frame_id = 0;
    double e_R = 0.0;                 // absolute orientation vs ground truth
    double position_error = 0.0;
    std::optional<double> e_t_rel;    // relative translation direction of the incoming pair
    std::optional<double> e_R_rel;
    std::optional<double> e_f;
    bool gap = false;
    std::size_t inliers = 0, outliers = 0;
};

inline std::vector<TrajectoryErrorRow> trajectory_errors(const Trajectory &traj, const std::vector<PairEstimate> &rel,
                                                         const std::vector<SequenceFrame> &frames, int stride = 1) {
    std::vector<TrajectoryErrorRow> rows;
    for (std::size_t k = 0; k < traj.frames.size(); ++k) {
        const std::size_t idx = k * static_cast<std::size_t>(stride);
        const auto &tf = traj.frames[k];
        TrajectoryErrorRow r;
        r.frame_id = tf.frame_id;
        r.gap = tf.gap;
        r.inliers = tf.inlier_ids.size();
        r.outliers = tf.outlier_ids.size();
        if (frames[idx].gt_pose) {
            r.e_R = rotation_error(frames[idx].gt_pose->R, tf.pose.R);
            r.position_error = (frames[idx].gt_pose->c - tf.pose.c).norm();
        }
        if (k > 0 && rel[k - 1].ok && frames[idx].gt_pose && frames[idx - stride].gt_pose) {
            const RelativePose gt = relative_from_world(*frames[idx - stride].gt_pose, *frames[idx].gt_pose);
            const PoseErrors e = pose_errors(gt, rel[k - 1].pose);
            r.e_R_rel = e.e_R;
            r.e_t_rel = e.e_t;
            const auto &pe = rel[k - 1];
            if (pe.f2 && frames[idx].gt_focal) r.e_f = focal_error(*frames[idx].gt_focal, *pe.f2);
        }
        rows.push_back(r);
    }
    return rows;
}

inline nlohmann::json trajectory_to_json(const Trajectory &traj, SolverKind kind, std::uint64_t seed) {
    nlohmann::json j;
    j["solver"] = std::string(solver_name(kind));
    j["seed"] = seed;
    j["frames"] = nlohmann::json::array();
    for (const auto &f : traj.frames) {
        nlohmann::json fj;
        fj["id"] = f.frame_id;
        fj["R"] = detail::mat3_to_json(f.pose.R);
        fj["c"] = {f.pose.c.x(), f.pose.c.y(), f.pose.c.z()};
        fj["gap"] = f.gap;
        fj["inliers"] = f.inlier_ids;
        fj["outliers"] = f.outlier_ids;
        j["frames"].push_back(fj);
    }
    return j;
}

inline CsvTable trajectory_errors_csv(const std::vector<TrajectoryErrorRow> &rows, SolverKind kind,
                                      std::uint64_t seed) {
    CsvTable t;
    t.meta = {{"experiment", "trajectory"}, {"solver", std::string(solver_name(kind))}, {"seed", std::to_string(seed)}};
    t.header = {"frame", "seed", "gap", "e_R", "position_error", "e_R_rel", "e_t_rel", "e_f", "inliers", "outliers"};
    const auto opt = [](const std::optional<double> &x) { return x ? format_double(*x) : std::string("nan"); };
    for (const auto &r : rows)
        t.rows.push_back({std::to_string(r.frame_id), std::to_string(seed), r.gap ? "1" : "0", format_double(r.e_R),
                          format_double(r.position_error), opt(r.e_R_rel), opt(r.e_t_rel), opt(r.e_f),
                          std::to_string(r.inliers), std::to_string(r.outliers)});
    return t;
}

} // namespace ghom

#endif // GHOM_PIPELINE_HPP
