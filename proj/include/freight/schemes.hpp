#pragma once

#include "freight/assignment.hpp"
#include "freight/nlp.hpp"

#include <optional>
#include <string>

namespace freight {

enum class SchemeId { ue, so, ops, aops, aops_ept, cpurr };

std::string to_string(SchemeId s);

/// Payment tensor pi[c][j][w][r], currency; positive = driver pays.
/// CPURR payments are stored expanded but are constant across (c, w).
struct PaymentSchedule {
    PolicyMode mode = PolicyMode::scenario_dependent;
    Tensor4 pi;

    double at(int c, int j, int w, int r) const {
        return pi[mode == PolicyMode::scenario_independent ? 0 : c][j][w][r];
    }
};

struct VerificationReport {
    double pareto_exante_resid = 0;    // hours, max over (j,w)
    double truthful_exante_resid = 0;  // hours, max over (j,i,k)
    double budget_resid = 0;           // currency, |expected net payments|
    double robust_pareto_resid = 0;    // hours, max over (c,j,w,r) with alpha > 1e-6
    double truthful_expost_resid = 0;  // hours, max over (c,j,i,k)
    double ue_comp_resid = 0;          // UE/CPURR complementarity exceedance
    bool has_ue_comp = false;
};

struct SolverAuxiliaries {
    std::vector<std::vector<double>> zeta;   // zeta[j][w], hours (UE/CPURR)
    std::vector<std::vector<double>> tolls;  // tolls[j][r], currency (CPURR)
};

struct SchemeResult {
    SchemeId scheme = SchemeId::ue;
    RoutingPolicy policy;
    std::optional<PaymentSchedule> payments;
    FlowMetrics metrics;          // recomputed from policy, never copied from solver state
    nlp::SolveResult solver;
    VerificationReport verification;
    SolverAuxiliaries aux;
    bool degenerate_class = false;
};

SchemeResult solve_ue(const ProblemInstance& inst, const nlp::SolveOptions& opts);

SchemeResult solve_so(const ProblemInstance& inst, const nlp::SolveOptions& opts,
                      const RoutingPolicy* warm = nullptr);

/// Joint (alpha, pi) program, Pareto + truthfulness + budget constraints.
/// Warm-started from (warm_policy, warm_payments) when given, else (UE, 0).
SchemeResult solve_ops(const ProblemInstance& inst, const UeReference& ue_ref,
                       const nlp::SolveOptions& opts,
                       const RoutingPolicy* warm_policy = nullptr,
                       const PaymentSchedule* warm_payments = nullptr);

/// Closed-form AOPS payments for a scenario-dependent routing.
/// A class with zero total demand in some scenario receives a zero share there
/// and the share denominator spans the remaining classes; `degenerate` is set.
PaymentSchedule aops_payments(const ProblemInstance& inst, const RoutingPolicy& policy,
                              const UeReference& ue_ref, bool* degenerate = nullptr);

SchemeResult solve_aops(const ProblemInstance& inst, const UeReference& ue_ref,
                        const nlp::SolveOptions& opts);

SchemeResult solve_aops_ept(const ProblemInstance& inst, const UeReference& ue_ref,
                            const nlp::SolveOptions& opts);

SchemeResult solve_cpurr(const ProblemInstance& inst, const nlp::SolveOptions& opts,
                         const RoutingPolicy* warm = nullptr);

/// Recomputes every residual from first principles (assignment algebra only).
/// Results without payments are checked with pi = 0.
VerificationReport verify(const ProblemInstance& inst, const SchemeResult& result,
                          const UeReference& ue_ref);

/// Builds the scheme's program (no solve) and runs nlp::grad_check at `points`
/// random feasible points; returns the worst discrepancy. ue_ref is required
/// for ops/aops/aops-ept.
double program_grad_check(const ProblemInstance& inst, SchemeId scheme,
                          const UeReference* ue_ref, int points, std::uint64_t seed, double h);

// Constraint gaps reused by the brute-force oracle filters (signed, not clamped).
double monetary_gap(const ProblemInstance& inst, const RoutingPolicy& policy,
                    const UeReference& ue_ref);                       // E[T_mon] - E[T_mon,UE]
double exante_truthful_gap(const ProblemInstance& inst, const RoutingPolicy& policy,
                           const UeReference& ue_ref);                // max (j,i,k) H - N
double expost_truthful_gap(const ProblemInstance& inst, const RoutingPolicy& policy,
                           const UeReference& ue_ref);                // max (c,j,i,k) Q - U

}  // namespace freight
