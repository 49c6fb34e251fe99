#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace freight::nlp {

struct SimplexBlock {
    int offset = 0;
    int size = 0;
};

/// Evaluates value and writes the full-dimension gradient into `grad`
/// (overwriting its contents).
using GradFn = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Complementarity pair: the solution must satisfy a >= 0, b >= 0, a*b = 0.
struct CompPair {
    GradFn a;
    GradFn b;
};

struct NlpProblem {
    int n_free = 0;                     // leading unconstrained variables
    std::vector<SimplexBlock> blocks;   // each constrained to the probability simplex
    GradFn objective;
    std::vector<GradFn> ineq;           // g(x) <= 0
    std::vector<GradFn> eq;             // h(x) = 0
    std::vector<CompPair> comp;

    int dim() const;
};

struct SolveOptions {
    double step_tol = 1e-6;
    double constraint_tol = 1e-6;
    int max_outer_iters = 40;
    int max_inner_iters = 3000;
    int multistart = 10;
    std::uint64_t seed = 0;
    double relax_t0 = 1e-1;
    double relax_sigma = 0.2;
    std::optional<std::vector<double>> warm_start;
    // additional deterministic starting points tried after the warm start
    std::vector<std::vector<double>> extra_starts;
    double free_init_lo = 0.0;     // random init range for free variables
    double free_init_hi = 100.0;
};

enum class SolveStatus { converged, max_iters, infeasible_start, relaxation_stalled };

std::string to_string(SolveStatus s);

struct SolveResult {
    std::vector<double> point;
    double objective = 0;
    double kkt_residual = 0;        // projected-gradient norm of the final subproblem
    double max_ineq_violation = 0;  // recomputed at the returned point
    double max_eq_violation = 0;
    double max_comp_violation = 0;
    SolveStatus status = SolveStatus::max_iters;
    int iterations = 0;
    int restarts_used = 0;
    std::vector<double> restart_objectives;
    std::vector<double> relax_schedule;
};

/// Euclidean projection onto {x >= 0, sum x = 1}.
void project_simplex_inplace(std::span<double> v);
std::vector<double> project_simplex(std::vector<double> v);

/// Augmented-Lagrangian outer loop, spectral projected-gradient inner loop.
SolveResult solve(const NlpProblem& problem, const SolveOptions& options);

/// Scholtes-style relaxation driver for problems with comp pairs.
SolveResult solve_mpcc(const NlpProblem& problem, const SolveOptions& options);

/// Central finite differences against the analytic gradients of the objective
/// and every constraint; returns the max relative discrepancy.
double grad_check(const NlpProblem& problem, std::span<const double> point, double h);

}  // namespace freight::nlp
