#ifndef GHOM_SOLVERS_HPP
#define GHOM_SOLVERS_HPP

#include "ghom/solvers/calibrated_2pt.hpp"
#include "ghom/solvers/common.hpp"
#include "ghom/solvers/f1hf2.hpp"
#include "ghom/solvers/fhf.hpp"
#include "ghom/solvers/hf.hpp"

namespace ghom {

// Runs the solver of the given kind on a minimal sample. Focals the solver
// treats as known are taken from `known`.
inline std::vector<SolverSolution> solve(SolverKind kind, std::span<const Correspondence> sample,
                                         const KnownFocals &known, const SolverOptions &opt = {}) {
    if (static_cast<int>(sample.size()) != minimal_sample_size(kind))
        throw Error(ErrorKind::InvalidInput, "wrong sample size for " + std::string(solver_name(kind)));
    const auto need = [](const std::optional<double> &f, const char *what) {
        if (!f) throw Error(ErrorKind::InvalidInput, std::string(what) + " focal required");
        return Intrinsics(*f);
    };
    switch (kind) {
    case SolverKind::Calibrated2pt:
        return solve_calibrated_2pt(sample[0], sample[1], need(known.f1, "view-1"), need(known.f2, "view-2"), opt);
    case SolverKind::FHF: return solve_fHf_2_5pt(sample[0], sample[1], sample[2], opt);
    case SolverKind::HF: return solve_Hf_2_5pt(sample[0], sample[1], sample[2], need(known.f1, "view-1"), opt);
    case SolverKind::F1HF2: return solve_f1Hf2_3pt(sample[0], sample[1], sample[2], opt);
    }
    return {};
}

} // namespace ghom

#endif // GHOM_SOLVERS_HPP
