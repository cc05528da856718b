#ifndef GHOM_BENCH_HPP
#define GHOM_BENCH_HPP

// Experiment harnesses: noise-free stability, noise sweeps, solver timing
// and paired RANSAC runs. Each returns plain records plus a CSV form.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ghom/csv.hpp"
#include "ghom/metrics.hpp"
#include "ghom/robust.hpp"
#include "ghom/solvers.hpp"
#include "ghom/synth.hpp"

namespace ghom {

inline constexpr double log10_floor = -300.0;

inline double safe_log10(double x) {
    if (std::isnan(x)) return x;
    return x > 0.0 ? std::max(std::log10(x), log10_floor) : log10_floor;
}

// Candidate closest to the ground truth in homography error.
struct BestCandidate {
    int index = -1;
    int n_candidates = 0;
    double h_error = std::numeric_limits<double>::infinity();
    std::optional<double> f_error;
};

inline BestCandidate best_candidate(const std::vector<SolverSolution> &sols, const ProblemInstance &inst) {
    BestCandidate b;
    b.n_candidates = static_cast<int>(sols.size());
    for (std::size_t i = 0; i < sols.size(); ++i) {
        const double e = homography_error(inst.gt_h.matrix(), sols[i].h.matrix());
        if (e < b.h_error) {
            b.h_error = e;
            b.index = static_cast<int>(i);
            b.f_error = solution_focal_error(sols[i], inst.f1, inst.f2);
        }
    }
    return b;
}

inline SynthConfig minimal_config(SolverKind kind, double sigma = 0.0) {
    SynthConfig cfg;
    cfg.n_planar = 3;
    cfg.sigma = sigma;
    cfg.focal_mode = focal_mode_for(kind);
    return cfg;
}

inline std::span<const Correspondence> minimal_sample(SolverKind kind, const ProblemInstance &inst) {
    return std::span<const Correspondence>(inst.corrs).first(static_cast<std::size_t>(minimal_sample_size(kind)));
}

// ---------------------------------------------------------------- stability

struct StabilityRecord {
    std::uint64_t seed = 0;
    int n_candidates = 0;
    double log10_h = std::numeric_limits<double>::infinity();
    double log10_f = std::numeric_limits<double>::quiet_NaN(); // NaN when no focal is estimated
};

struct StabilitySummary {
    std::size_t n = 0;
    double median_log10_h = 0.0;
    double median_log10_f = 0.0;
    // log10 error above -3, or no candidate at all.
    double failure_fraction = 0.0;
    // Ground truth among the candidates: homography and focal errors below 1e-6.
    double found_fraction = 0.0;
    int max_candidates = 0;
};

inline std::vector<StabilityRecord> stability_run(SolverKind kind, std::size_t n, std::uint64_t seed,
                                                  const SolverOptions &opt = {}) {
    std::vector<StabilityRecord> out;
    out.reserve(n);
    const SynthConfig cfg = minimal_config(kind);
    for (std::size_t i = 0; i < n; ++i) {
        StabilityRecord r;
        r.seed = sub_seed(seed, i);
        const ProblemInstance inst = generate_instance(r.seed, cfg);
        std::vector<SolverSolution> sols;
        try {
            sols = solve(kind, minimal_sample(kind, inst), inst.known_for(kind), opt);
        } catch (const Error &) {
        }
        const BestCandidate b = best_candidate(sols, inst);
        r.n_candidates = b.n_candidates;
        r.log10_h = b.index < 0 ? std::numeric_limits<double>::infinity() : safe_log10(b.h_error);
        if (kind != SolverKind::Calibrated2pt)
            r.log10_f = b.f_error ? safe_log10(*b.f_error) : std::numeric_limits<double>::infinity();
        out.push_back(r);
    }
    return out;
}

inline StabilitySummary summarize_stability(const std::vector<StabilityRecord> &recs) {
    StabilitySummary s;
    s.n = recs.size();
    std::vector<double> h, f;
    std::size_t fail = 0, found = 0;
    for (const auto &r : recs) {
        h.push_back(r.log10_h);
        if (!std::isnan(r.log10_f)) f.push_back(r.log10_f);
        const double worst = std::isnan(r.log10_f) ? r.log10_h : std::max(r.log10_h, r.log10_f);
        fail += worst > -3.0;
        found += worst < -6.0;
        s.max_candidates = std::max(s.max_candidates, r.n_candidates);
    }
    s.median_log10_h = quantiles(h).median;
    s.median_log10_f = f.empty() ? std::numeric_limits<double>::quiet_NaN() : quantiles(f).median;
    if (s.n) {
        s.failure_fraction = static_cast<double>(fail) / static_cast<double>(s.n);
        s.found_fraction = static_cast<double>(found) / static_cast<double>(s.n);
    }
    return s;
}

struct Histogram {
    double lo = -17.0, hi = 1.0;
    std::vector<std::size_t> counts;
    std::size_t underflow = 0, overflow = 0;
};

inline Histogram histogram(const std::vector<double> &values, double lo, double hi, std::size_t bins) {
    Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
    for (double v : values) {
        if (std::isnan(v)) continue;
        if (v < lo) {
            ++h.underflow;
        } else if (v >= hi) {
            ++h.overflow;
        } else {
            auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
            ++h.counts[std::min(b, bins - 1)];
        }
    }
    return h;
}

// Long format: one row per (metric, instance).
inline CsvTable stability_csv(SolverKind kind, std::uint64_t seed, const std::vector<StabilityRecord> &recs) {
    CsvTable t;
    t.meta = {{"experiment", "stability"}, {"solver", std::string(solver_name(kind))},
              {"seed", std::to_string(seed)}, {"n", std::to_string(recs.size())}};
    t.header = {"metric", "seed", "n_candidates", "log10_error"};
    for (const auto &r : recs)
        t.rows.push_back({"homography", std::to_string(r.seed), std::to_string(r.n_candidates), format_double(r.log10_h)});
    if (kind != SolverKind::Calibrated2pt)
        for (const auto &r : recs)
            t.rows.push_back({"focal", std::to_string(r.seed), std::to_string(r.n_candidates), format_double(r.log10_f)});
    return t;
}

inline std::vector<StabilityRecord> stability_from_csv(const CsvTable &t) {
    std::vector<StabilityRecord> out;
    const std::size_t cm = t.column("metric"), cs = t.column("seed"), cn = t.column("n_candidates"),
                      ce = t.column("log10_error");
    for (const auto &row : t.rows) {
        if (row[cm] != "homography") continue;
        out.push_back({std::stoull(row[cs]), std::stoi(row[cn]), parse_double(row[ce])});
    }
    std::size_t k = 0;
    for (const auto &row : t.rows)
        if (row[cm] == "focal" && k < out.size()) out[k++].log10_f = parse_double(row[ce]);
    return out;
}

// --------------------------------------------------------------- noise sweep

struct NoiseRecord {
    double sigma = 0.0;
    std::uint64_t seed = 0;
    int n_candidates = 0;
    double e_R = std::numeric_limits<double>::quiet_NaN();
    double e_t = std::numeric_limits<double>::quiet_NaN();
    double e_f = std::numeric_limits<double>::quiet_NaN();
    double log10_h = std::numeric_limits<double>::quiet_NaN();
};

struct NoiseLevelSummary {
    double sigma = 0.0;
    std::size_t n = 0;
    std::size_t failures = 0;
    double median_e_R = 0.0, median_e_t = 0.0, median_e_f = 0.0, median_log10_h = 0.0;
};

// The same n base instances are reused at every level; only the noise draw
// changes with sigma.
inline std::vector<NoiseRecord> noise_sweep(SolverKind kind, const std::vector<double> &sigmas, std::size_t n,
                                            std::uint64_t seed, const SolverOptions &opt = {}) {
    std::vector<NoiseRecord> out;
    const SynthConfig cfg = minimal_config(kind);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t s = sub_seed(seed, i);
        const ProblemInstance base = generate_instance(s, cfg);
        for (std::size_t l = 0; l < sigmas.size(); ++l) {
            const ProblemInstance inst = perturb(base, sigmas[l], sub_seed(s, 1000 + l));
            NoiseRecord r;
            r.sigma = sigmas[l];
            r.seed = s;
            std::vector<SolverSolution> sols;
            try {
                sols = solve(kind, minimal_sample(kind, inst), inst.known_for(kind), opt);
            } catch (const Error &) {
            }
            const BestCandidate b = best_candidate(sols, inst);
            r.n_candidates = b.n_candidates;
            if (b.index >= 0) {
                const auto &sol = sols[static_cast<std::size_t>(b.index)];
                const PoseErrors e = pose_errors(inst.gt_pose, solution_pose(sol, inst.cam1.attitude, inst.cam2.attitude));
                r.e_R = e.e_R;
                r.e_t = e.e_t.value_or(0.0);
                r.e_f = b.f_error.value_or(0.0);
                r.log10_h = safe_log10(b.h_error);
            }
            out.push_back(r);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const NoiseRecord &a, const NoiseRecord &b) { return a.sigma < b.sigma; });
    return out;
}

inline std::vector<NoiseLevelSummary> summarize_noise(const std::vector<NoiseRecord> &recs) {
    std::vector<NoiseLevelSummary> out;
    for (std::size_t i = 0; i < recs.size();) {
        std::size_t j = i;
        std::vector<double> r, t, f, h;
        NoiseLevelSummary s;
        s.sigma = recs[i].sigma;
        for (; j < recs.size() && recs[j].sigma == s.sigma; ++j) {
            ++s.n;
            if (std::isnan(recs[j].e_R)) {
                ++s.failures;
                continue;
            }
            r.push_back(recs[j].e_R);
            t.push_back(recs[j].e_t);
            f.push_back(recs[j].e_f);
            h.push_back(recs[j].log10_h);
        }
        s.median_e_R = quantiles(r).median;
        s.median_e_t = quantiles(t).median;
        s.median_e_f = quantiles(f).median;
        s.median_log10_h = quantiles(h).median;
        out.push_back(s);
        i = j;
    }
    return out;
}

inline CsvTable noise_csv(SolverKind kind, std::uint64_t seed, const std::vector<NoiseRecord> &recs) {
    CsvTable t;
    t.meta = {{"experiment", "noise"}, {"solver", std::string(solver_name(kind))}, {"seed", std::to_string(seed)}};
    t.header = {"sigma", "seed", "n_candidates", "e_R", "e_t", "e_f", "log10_h"};
    for (const auto &r : recs)
        t.rows.push_back({format_double(r.sigma), std::to_string(r.seed), std::to_string(r.n_candidates),
                          format_double(r.e_R), format_double(r.e_t), format_double(r.e_f), format_double(r.log10_h)});
    return t;
}

// -------------------------------------------------------------------- speed

struct SpeedSummary {
    SolverKind kind = SolverKind::FHF;
    std::size_t n = 0;
    double mean_us = 0.0, median_us = 0.0, p95_us = 0.0;
    double mean_candidates = 0.0;
};

// Times the solver call only, one call per instance, after a warm-up pass.
inline SpeedSummary speed_bench(SolverKind kind, std::size_t n, std::uint64_t seed, std::vector<double> *times_us = nullptr,
                                const SolverOptions &opt = {}) {
    std::vector<ProblemInstance> insts;
    insts.reserve(n);
    const SynthConfig cfg = minimal_config(kind);
    for (std::size_t i = 0; i < n; ++i) insts.push_back(generate_instance(sub_seed(seed, i), cfg));

    std::size_t sink = 0;
    const auto run = [&](const ProblemInstance &inst) {
        try {
            sink += solve(kind, minimal_sample(kind, inst), inst.known_for(kind), opt).size();
        } catch (const Error &) {
        }
    };
    for (std::size_t i = 0; i < std::min<std::size_t>(n, 200); ++i) run(insts[i]);
    sink = 0;

    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = std::chrono::steady_clock::now();
        run(insts[i]);
        const auto b = std::chrono::steady_clock::now();
        t[i] = std::chrono::duration<double, std::micro>(b - a).count();
    }
    SpeedSummary s;
    s.kind = kind;
    s.n = n;
    if (n) {
        double sum = 0.0;
        for (double x : t) sum += x;
        s.mean_us = sum / static_cast<double>(n);
        const Quantiles q = quantiles(t);
        s.median_us = q.median;
        s.p95_us = q.q95;
        s.mean_candidates = static_cast<double>(sink) / static_cast<double>(n);
    }
    if (times_us) *times_us = std::move(t);
    return s;
}

inline CsvTable speed_csv(std::uint64_t seed, const std::vector<SpeedSummary> &rows) {
    CsvTable t;
    t.meta = {{"experiment", "speed"}, {"seed", std::to_string(seed)}};
    t.header = {"solver", "seed", "n", "mean_us", "median_us", "p95_us", "mean_candidates"};
    for (const auto &s : rows)
        t.rows.push_back({std::string(solver_name(s.kind)), std::to_string(seed), std::to_string(s.n),
                          format_double(s.mean_us), format_double(s.median_us), format_double(s.p95_us),
                          format_double(s.mean_candidates)});
    return t;
}

// -------------------------------------------------------------- RANSAC bench

// 100 ground points, 30 off-plane points, 20 % scrambled.
inline SynthConfig robust_workload_config(SolverKind kind, double sigma = 0.5) {
    SynthConfig cfg;
    cfg.n_planar = 100;
    cfg.n_nonplanar = 30;
    cfg.outlier_fraction = 0.2;
    cfg.sigma = sigma;
    cfg.focal_mode = focal_mode_for(kind);
    return cfg;
}

struct RansacTrial {
    std::uint64_t seed = 0;
    bool consistency_check = false;
    int inlier_count = 0;
    int true_inliers = 0;
    // Fraction of true ground-plane inliers recovered.
    double recall = 0.0;
    int iterations = 0;
    int skipped = 0;
    long candidates_scored = 0;
    long candidates_rejected = 0;
    double time_us = 0.0;
    bool model_found = false;
};

inline std::vector<bool> true_inlier_mask(const ProblemInstance &inst) {
    std::vector<bool> m(inst.corrs.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = !inst.nonplanar[i] && !inst.outlier_mask[i];
    return m;
}

inline RansacTrial ransac_trial(const ProblemInstance &inst, SolverKind kind, RansacConfig cfg) {
    cfg.known = inst.known_for(kind);
    RansacTrial r;
    r.seed = inst.seed;
    r.consistency_check = cfg.consistency_check;
    const auto truth = true_inlier_mask(inst);
    for (bool b : truth) r.true_inliers += b;
    try {
        const RansacResult res = ransac(inst.corrs, kind, cfg);
        int hit = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] && res.inlier_mask[i];
        r.model_found = true;
        r.inlier_count = res.inlier_count;
        r.recall = r.true_inliers ? static_cast<double>(hit) / r.true_inliers : 0.0;
        r.iterations = res.iterations;
        r.skipped = res.skipped;
        r.candidates_scored = res.candidates_scored;
        r.candidates_rejected = res.candidates_rejected;
        r.time_us = res.wall_time_s * 1e6;
    } catch (const Error &e) {
        if (e.kind() != ErrorKind::NoModel) throw;
    }
    return r;
}

// Paired runs: for every trial the same instance and RANSAC seed with the
// consistency check off and on.
inline std::vector<RansacTrial> ransac_bench(SolverKind kind, std::size_t trials, std::uint64_t seed,
                                             const RansacConfig &base, double sigma = 0.5) {
    std::vector<RansacTrial> out;
    const SynthConfig cfg = robust_workload_config(kind, sigma);
    for (std::size_t i = 0; i < trials; ++i) {
        const ProblemInstance inst = generate_instance(sub_seed(seed, i), cfg);
        RansacConfig rc = base;
        rc.seed = sub_seed(seed ^ 0x5eedULL, i);
        for (bool check : {false, true}) {
            rc.consistency_check = check;
            out.push_back(ransac_trial(inst, kind, rc));
        }
    }
    return out;
}

inline CsvTable ransac_csv(SolverKind kind, std::uint64_t seed, const std::vector<RansacTrial> &trials) {
    CsvTable t;
    t.meta = {{"experiment", "ransac"}, {"solver", std::string(solver_name(kind))}, {"seed", std::to_string(seed)}};
    t.header = {"seed", "check", "model_found", "inliers", "true_inliers", "recall", "iterations", "skipped",
                "scored", "rejected", "time_us"};
    for (const auto &r : trials)
        t.rows.push_back({std::to_string(r.seed), r.consistency_check ? "1" : "0", r.model_found ? "1" : "0",
                          std::to_string(r.inlier_count), std::to_string(r.true_inliers), format_double(r.recall),
                          std::to_string(r.iterations), std::to_string(r.skipped),
                          std::to_string(r.candidates_scored), std::to_string(r.candidates_rejected),
                          format_double(r.time_us)});
    return t;
}

} // namespace ghom

#endif // GHOM_BENCH_HPP
