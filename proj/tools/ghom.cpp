// ghom: experiments and trajectory estimation for gravity-aligned ground
// homographies.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ghom/ghom.hpp"

namespace {

using namespace ghom;

struct Common {
    std::string solver = "fhf";
    std::uint64_t seed = 1;
    std::string out;
};

const std::map<std::string, SolverKind> solver_map = {
    {"2pt", SolverKind::Calibrated2pt}, {"fhf", SolverKind::FHF}, {"hf", SolverKind::HF}, {"f1hf2", SolverKind::F1HF2}};

void add_common(CLI::App *cmd, Common &c, const std::string &out_help) {
    cmd->add_option("--solver", c.solver, "Solver: 2pt, fhf, hf or f1hf2")
        ->check(CLI::IsMember({"2pt", "fhf", "hf", "f1hf2"}))
        ->capture_default_str();
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd->add_option("--out", c.out, out_help + " ('-' or empty for stdout)");
}

// Output stream for --out; stdout when empty or '-'.
class Output {
  public:
    explicit Output(const std::string &path) {
        if (path.empty() || path == "-") return;
        if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty())
            std::filesystem::create_directories(dir);
        file_.open(path, std::ios::binary);
        if (!file_) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
    }
    std::ostream &stream() { return file_.is_open() ? static_cast<std::ostream &>(file_) : std::cout; }

  private:
    std::ofstream file_;
};

// Status lines go to stderr so that stdout can carry data.
template <typename... Args>
void report(const char *fmt, Args... args) {
    std::fprintf(stderr, fmt, args...);
}

std::vector<double> parse_grid(const std::string &s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const double v = parse_double(item);
        if (!(v >= 0.0)) throw Error(ErrorKind::InvalidInput, "sigma grid entries must be >= 0");
        out.push_back(v);
    }
    if (out.empty()) throw Error(ErrorKind::InvalidInput, "empty sigma grid");
    return out;
}

std::string sibling_path(const std::string &path, const std::string &suffix) {
    std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix)).string();
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Ground-plane homography solvers with IMU attitude: benchmarks and trajectories"};
    app.require_subcommand(1);

    // stability
    Common st;
    std::size_t st_n = 10000;
    bool st_raw = false;
    auto *stability = app.add_subcommand("stability", "Noise-free error histogram of a solver");
    add_common(stability, st, "CSV of log10 errors");
    stability->add_option("--n", st_n, "Number of random instances")->capture_default_str();
    stability->add_flag("--no-normalize", st_raw, "Solve in raw pixel coordinates");

    // noise
    Common nz;
    std::size_t nz_n = 1000;
    std::string nz_grid = "0,0.25,0.5,1,1.5,2";
    auto *noise = app.add_subcommand("noise", "Pose and focal errors against pixel noise");
    add_common(noise, nz, "CSV of per-instance errors");
    noise->add_option("--n", nz_n, "Instances per noise level")->capture_default_str();
    noise->add_option("--sigma-grid", nz_grid, "Comma-separated noise levels in pixels")->capture_default_str();

    // speed
    Common sp;
    std::size_t sp_n = 10000;
    bool sp_all = false;
    auto *speed = app.add_subcommand("speed", "Mean, median and p95 time per solver call");
    add_common(speed, sp, "CSV of timings");
    speed->add_option("--n", sp_n, "Number of random instances")->capture_default_str();
    speed->add_flag("--all", sp_all, "Time all four solvers");

    // ransac-bench
    Common rb;
    std::size_t rb_n = 100;
    RansacConfig rb_cfg;
    rb_cfg.threshold = 3.0;
    double rb_sigma = 0.25;
    auto *rbench = app.add_subcommand("ransac-bench", "Paired RANSAC runs with and without the consistency check");
    add_common(rbench, rb, "CSV with one row per run");
    rbench->add_option("--n", rb_n, "Number of trials")->capture_default_str();
    rbench->add_option("--iters", rb_cfg.max_iterations, "RANSAC iterations")->capture_default_str();
    rbench->add_option("--threshold", rb_cfg.threshold, "Inlier threshold, pixels")->capture_default_str();
    rbench->add_option("--kappa", rb_cfg.consistency_threshold, "Consistency-check threshold")->capture_default_str();
    rbench->add_option("--sigma", rb_sigma, "Pixel noise of the workload")->capture_default_str();
    rbench->add_flag("--lo", rb_cfg.local_optimization, "Refine the best model on its inliers");

    // trajectory
    Common tj;
    std::string tj_input, tj_errors;
    EstimateOptions tj_opt;
    bool tj_no_scale = false;
    auto *traj = app.add_subcommand("trajectory", "Estimate and chain relative poses along a frame sequence");
    add_common(traj, tj, "Trajectory JSON");
    traj->add_option("--input", tj_input, "JSON-lines frame file (default: synthetic sequence from --seed)");
    traj->add_option("--errors", tj_errors, "Per-frame error CSV (default: <out>_errors.csv, skipped for stdout)");
    traj->add_option("--iters", tj_opt.ransac.max_iterations, "RANSAC iterations per pair")->capture_default_str();
    traj->add_option("--threshold", tj_opt.ransac.threshold, "Inlier threshold, pixels")->capture_default_str();
    traj->add_option("--kappa", tj_opt.ransac.consistency_threshold, "Consistency-check threshold")
        ->capture_default_str();
    traj->add_option("--stride", tj_opt.stride, "Pair frame k with frame k + stride")->capture_default_str();
    traj->add_flag("--lo", tj_opt.ransac.local_optimization, "Refine each model on its inliers");
    traj->add_flag("--no-scale", tj_no_scale, "Chain unit-length steps instead of ground-truth step lengths");

    // gen
    Common gn;
    std::string gn_what = "sequence";
    SequenceConfig gn_seq;
    SynthConfig gn_inst;
    auto *gen = app.add_subcommand("gen", "Write a synthetic sequence (JSON lines) or two-view instance (JSON)");
    add_common(gen, gn, "Output file");
    gen->add_option("--what", gn_what, "sequence or instance")
        ->check(CLI::IsMember({"sequence", "instance"}))
        ->capture_default_str();
    gen->add_option("--n", gn_seq.n_frames, "Frames of a sequence")->capture_default_str();
    gen->add_option("--sigma", gn_seq.sigma, "Pixel noise")->capture_default_str();
    gen->add_option("--outliers", gn_seq.outlier_fraction, "Outlier fraction")->capture_default_str();
    gen->add_option("--planar", gn_inst.n_planar, "Ground points of an instance")->capture_default_str();
    gen->add_option("--nonplanar", gn_inst.n_nonplanar, "Off-plane points of an instance")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*stability) {
            const SolverKind kind = solver_map.at(st.solver);
            SolverOptions opt;
            opt.normalize = !st_raw;
            const auto recs = stability_run(kind, st_n, st.seed, opt);
            Output out(st.out);
            write_csv(out.stream(), stability_csv(kind, st.seed, recs));
            const auto s = summarize_stability(recs);
            report("%s: n=%zu median log10 H=%.2f median log10 f=%.2f found=%.4f fail=%.4f max candidates=%d\n",
                   st.solver.c_str(), s.n, s.median_log10_h, s.median_log10_f, s.found_fraction, s.failure_fraction,
                   s.max_candidates);
        } else if (*noise) {
            const SolverKind kind = solver_map.at(nz.solver);
            const auto recs = noise_sweep(kind, parse_grid(nz_grid), nz_n, nz.seed);
            Output out(nz.out);
            write_csv(out.stream(), noise_csv(kind, nz.seed, recs));
            for (const auto &l : summarize_noise(recs))
                report("sigma=%g median e_R=%.3g e_t=%.3g e_f=%.3g failures=%zu\n", l.sigma, l.median_e_R,
                       l.median_e_t, l.median_e_f, l.failures);
        } else if (*speed) {
            std::vector<SpeedSummary> rows;
            if (sp_all)
                for (auto k : {SolverKind::Calibrated2pt, SolverKind::HF, SolverKind::F1HF2, SolverKind::FHF})
                    rows.push_back(speed_bench(k, sp_n, sp.seed));
            else
                rows.push_back(speed_bench(solver_map.at(sp.solver), sp_n, sp.seed));
            Output out(sp.out);
            write_csv(out.stream(), speed_csv(sp.seed, rows));
            for (const auto &r : rows)
                report("%s: mean %.2f us, median %.2f us, p95 %.2f us\n", std::string(solver_name(r.kind)).c_str(),
                       r.mean_us, r.median_us, r.p95_us);
        } else if (*rbench) {
            const SolverKind kind = solver_map.at(rb.solver);
            const auto trials = ransac_bench(kind, rb_n, rb.seed, rb_cfg, rb_sigma);
            Output out(rb.out);
            write_csv(out.stream(), ransac_csv(kind, rb.seed, trials));
            double t[2] = {0, 0};
            long scored[2] = {0, 0};
            int good[2] = {0, 0};
            for (const auto &r : trials) {
                t[r.consistency_check] += r.time_us;
                scored[r.consistency_check] += r.candidates_scored;
                good[r.consistency_check] += r.recall >= 0.95;
            }
            for (int c : {0, 1})
                report("check=%d: total %.1f ms, scored %ld, trials with >=95%% inliers %d/%zu\n", c, t[c] / 1000.0,
                       scored[c], good[c], rb_n);
        } else if (*traj) {
            const SolverKind kind = solver_map.at(tj.solver);
            const std::vector<SequenceFrame> frames =
                tj_input.empty() ? generate_sequence(tj.seed).frames : ingest_file(tj_input);
            tj_opt.ransac.seed = tj.seed;
            const auto rel = estimate_sequence(frames, kind, tj_opt);
            const Trajectory tr = chain_trajectory(rel, frames, !tj_no_scale, tj_opt.stride);
            {
                Output out(tj.out);
                out.stream() << trajectory_to_json(tr, kind, tj.seed).dump(1) << '\n';
            }
            std::string err_path = tj_errors;
            if (err_path.empty() && !tj.out.empty() && tj.out != "-") err_path = sibling_path(tj.out, "_errors.csv");
            const auto rows = trajectory_errors(tr, rel, frames, tj_opt.stride);
            if (!err_path.empty()) {
                Output eout(err_path);
                write_csv(eout.stream(), trajectory_errors_csv(rows, kind, tj.seed));
            }
            double mean = 0.0;
            int gaps = 0;
            for (const auto &r : rows) {
                mean += r.e_R;
                gaps += r.gap;
            }
            report("%zu frames, %d gaps, mean orientation error %.3f deg\n", rows.size(), gaps,
                   rows.empty() ? 0.0 : mean / rows.size() * 180.0 / std::numbers::pi);
        } else if (*gen) {
            Output out(gn.out);
            if (gn_what == "sequence") {
                emit(out.stream(), generate_sequence(gn.seed, gn_seq).frames);
            } else {
                gn_inst.focal_mode = focal_mode_for(solver_map.at(gn.solver));
                gn_inst.sigma = gn_seq.sigma;
                gn_inst.outlier_fraction = gn_seq.outlier_fraction;
                out.stream() << instance_to_json(generate_instance(gn.seed, gn_inst)).dump() << '\n';
            }
        }
    } catch (const Error &e) {
        std::fprintf(stderr, "ghom: %s\n", e.what());
        return 2;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "ghom: %s\n", e.what());
        return 3;
    }
    return 0;
}
