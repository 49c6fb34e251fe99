#pragma once

#include "freight/schemes.hpp"

namespace freight::oracle {

struct GridSpec {
    double step = 0.01;                   // simplex grid resolution
    long long max_cells = 300'000'000;    // safety cap on enumerated cells
    double feas_tol = 1e-9;               // constraint slack for filtered objectives
};

/// Closed forms for fixture P1: route A constant time 1, route B time x_B^4.
struct PigouResult {
    double ue_split = 0;   // trucks on route B at UE
    double so_split = 0;   // trucks on route B at SO
    double ue_total = 0;   // total truck time at UE
    double so_total = 0;   // total truck time at SO
    double toll_a = 0;     // budget-balanced tolls supporting the SO split
    double toll_b = 0;
};
PigouResult pigou_analytic(double d, double s);

enum class GridObjective { so, aops, aops_ept };

struct GridBest {
    bool feasible = false;   // false when the constraint filter rejects every cell
    RoutingPolicy point;
    double value = 0;
};

/// Exhaustive search over the product of simplex grids; ties broken
/// lexicographically. aops/aops_ept apply the monetary + truthfulness filters
/// and require ue_ref.
GridBest grid_search_best(const ProblemInstance& inst, GridObjective obj, const GridSpec& grid,
                          const UeReference* ue_ref = nullptr);

struct BestResponseResult {
    RoutingPolicy policy;
    bool converged = false;
    int iterations = 0;
    double regret = 0;
};

/// Damped best-response (Frank-Wolfe) iteration on the scenario-independent
/// equilibrium; independent of the MPCC machinery.
BestResponseResult best_response_ue(const ProblemInstance& inst, int iters, double damping,
                                    const RoutingPolicy* start = nullptr);

/// Conservative bound on sum_i max |d objective / d alpha_i| of the SO
/// objective; |f(x) - f(y)| <= bound * max_i |x_i - y_i| on the feasible set.
double so_lipschitz_bound(const ProblemInstance& inst);

}  // namespace freight::oracle
