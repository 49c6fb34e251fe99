#include "freight/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace freight::nlp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int NlpProblem::dim() const {
    int d = n_free;
    for (const SimplexBlock& b : blocks) d = std::max(d, b.offset + b.size);
    return d;
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iters: return "max_iters";
        case SolveStatus::infeasible_start: return "infeasible_start";
        case SolveStatus::relaxation_stalled: return "relaxation_stalled";
    }
    return "unknown";
}

void project_simplex_inplace(std::span<double> v) {
    if (v.empty()) throw std::invalid_argument("project_simplex: empty vector");
    // Michelot threshold: x_i = max(0, v_i - tau) with sum = 1
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0, tau = 0;
    int k = 0;
    for (int i = 0; i < static_cast<int>(u.size()); ++i) {
        css += u[i];
        double t = (css - 1.0) / (i + 1);
        if (u[i] - t > 0) {
            tau = t;
            k = i + 1;
        }
    }
    (void)k;
    double sum = 0;
    for (double& x : v) {
        x = std::max(0.0, x - tau);
        sum += x;
    }
    // absorb roundoff into the largest coordinate so the sum is exact
    if (sum != 1.0) {
        auto it = std::max_element(v.begin(), v.end());
        *it += 1.0 - sum;
        if (*it < 0) *it = 0;
    }
}

std::vector<double> project_simplex(std::vector<double> v) {
    project_simplex_inplace(v);
    return v;
}

namespace {

void project_feasible(const NlpProblem& p, std::vector<double>& x) {
    for (const SimplexBlock& b : p.blocks)
        project_simplex_inplace(std::span<double>(x.data() + b.offset, b.size));
}

double block_infeasibility(const NlpProblem& p, const std::vector<double>& x) {
    double v = 0;
    for (const SimplexBlock& b : p.blocks) {
        double sum = 0;
        for (int i = 0; i < b.size; ++i) {
            sum += x[b.offset + i];
            v = std::max(v, -x[b.offset + i]);
        }
        v = std::max(v, std::abs(sum - 1.0));
    }
    return v;
}

struct Multipliers {
    std::vector<double> ineq;
    std::vector<double> eq;
    double rho = 1.0;
};

// Augmented-Lagrangian value and gradient; also reports the raw objective and
// the max constraint violation at x.
class AlEval {
public:
    AlEval(const NlpProblem& p, const Multipliers& m) : p_(p), m_(m), gbuf_(p.dim()) {}

    double operator()(std::span<const double> x, std::span<double> grad,
                      double* raw_f, double* viol) {
        double f = p_.objective(x, grad);
        double L = f;
        double v = 0;
        for (std::size_t i = 0; i < p_.ineq.size(); ++i) {
            double g = p_.ineq[i](x, gbuf_);
            v = std::max(v, g);
            double t = std::max(0.0, m_.ineq[i] + m_.rho * g);
            L += (t * t - m_.ineq[i] * m_.ineq[i]) / (2 * m_.rho);
            if (t > 0)
                for (int k = 0; k < static_cast<int>(grad.size()); ++k) grad[k] += t * gbuf_[k];
        }
        for (std::size_t i = 0; i < p_.eq.size(); ++i) {
            double h = p_.eq[i](x, gbuf_);
            v = std::max(v, std::abs(h));
            double t = m_.eq[i] + m_.rho * h;
            L += m_.eq[i] * h + 0.5 * m_.rho * h * h;
            for (int k = 0; k < static_cast<int>(grad.size()); ++k) grad[k] += t * gbuf_[k];
        }
        if (raw_f) *raw_f = f;
        if (viol) *viol = std::max(v, 0.0);
        return L;
    }

private:
    const NlpProblem& p_;
    const Multipliers& m_;
    std::vector<double> gbuf_;
};

struct BestPoint {
    bool found = false;
    std::vector<double> x;
    double f = kInf;

    void offer(std::span<const double> x_, double f_, double viol, double tol) {
        if (viol <= tol && f_ < f) {
            found = true;
            x.assign(x_.begin(), x_.end());
            f = f_;
        }
    }
};

struct SpgOutcome {
    double pg_norm = kInf;
    int iters = 0;
};

// Nonmonotone spectral projected gradient on the current AL subproblem.
SpgOutcome spg_minimize(const NlpProblem& p, AlEval& eval, std::vector<double>& x,
                        int max_iters, double step_tol, double ctol, BestPoint& best) {
    const int n = p.dim();
    std::vector<double> g(n), gnew(n), xt(n), gt(n), d(n), pgv(n);
    double raw_f, viol;
    double f = eval(x, g, &raw_f, &viol);
    best.offer(x, raw_f, viol, ctol);

    auto pg_norm = [&](const std::vector<double>& xx, const std::vector<double>& gg) {
        for (int i = 0; i < n; ++i) pgv[i] = xx[i] - gg[i];
        for (const SimplexBlock& b : p.blocks)
            project_simplex_inplace(std::span<double>(pgv.data() + b.offset, b.size));
        double nrm = 0;
        for (int i = 0; i < n; ++i) nrm = std::max(nrm, std::abs(pgv[i] - xx[i]));
        return nrm;
    };

    std::vector<double> fhist{f};
    double lam = 1.0;
    {
        double pn = pg_norm(x, g);
        if (pn <= step_tol) return {pn, 0};
        lam = 1.0 / std::max(1e-12, pn);
    }

    SpgOutcome out;
    int tiny_steps = 0;
    for (int it = 0; it < max_iters; ++it) {
        ++out.iters;
        for (int i = 0; i < n; ++i) d[i] = x[i] - lam * g[i];
        for (const SimplexBlock& b : p.blocks)
            project_simplex_inplace(std::span<double>(d.data() + b.offset, b.size));
        double gtd = 0, dn = 0;
        for (int i = 0; i < n; ++i) {
            d[i] -= x[i];
            gtd += g[i] * d[i];
            dn = std::max(dn, std::abs(d[i]));
        }
        if (dn <= 1e-18 || gtd >= 0) break;

        double fref = *std::max_element(fhist.begin(), fhist.end());
        double t = 1.0, fnew = kInf;
        for (int bt = 0; bt < 50; ++bt) {
            for (int i = 0; i < n; ++i) xt[i] = x[i] + t * d[i];
            fnew = eval(xt, gt, &raw_f, &viol);
            if (fnew <= fref + 1e-4 * t * gtd) break;
            t *= 0.5;
        }
        best.offer(xt, raw_f, viol, ctol);

        double ss = 0, sy = 0;
        for (int i = 0; i < n; ++i) {
            double s = xt[i] - x[i];
            double y = gt[i] - g[i];
            ss += s * s;
            sy += s * y;
        }
        x.swap(xt);
        g.swap(gt);
        f = fnew;
        fhist.push_back(f);
        if (fhist.size() > 10) fhist.erase(fhist.begin());
        lam = sy > 1e-14 * ss ? std::clamp(ss / sy, 1e-12, 1e8) : 1e6;

        double pn = pg_norm(x, g);
        out.pg_norm = pn;
        if (pn <= step_tol) return out;
        // constraint-pinned iterates make no progress however small the
        // gradient tolerance; give up after a run of negligible moves
        tiny_steps = t * dn <= 0.1 * step_tol ? tiny_steps + 1 : 0;
        if (tiny_steps >= 25) return out;
    }
    out.pg_norm = pg_norm(x, g);
    return out;
}

struct AlOutcome {
    std::vector<double> x;
    bool converged = false;
    int iterations = 0;
    double pg_norm = kInf;
    double objective = 0;
};

// `conv_tol` is the feasibility level at which convergence is declared;
// multiplier updates keep chasing opts.constraint_tol, which MPCC stages set
// tighter so relaxed-constraint slack cannot floor the complementarity.
AlOutcome run_augmented_lagrangian(const NlpProblem& p, std::vector<double> x,
                                   const SolveOptions& opts, double conv_tol) {
    project_feasible(p, x);
    Multipliers m;
    m.ineq.assign(p.ineq.size(), 0.0);
    m.eq.assign(p.eq.size(), 0.0);
    m.rho = 1.0;

    AlOutcome out;
    BestPoint best;
    std::vector<double> gscratch(p.dim());
    double prev_viol = kInf;
    std::vector<double> x_before(p.dim());
    for (int outer = 0; outer < opts.max_outer_iters; ++outer) {
        x_before = x;
        AlEval eval(p, m);
        SpgOutcome spg = spg_minimize(p, eval, x, opts.max_inner_iters, opts.step_tol,
                                      conv_tol, best);
        out.iterations += spg.iters;
        out.pg_norm = spg.pg_norm;
        double step_inf = 0;
        for (std::size_t i = 0; i < x.size(); ++i)
            step_inf = std::max(step_inf, std::abs(x[i] - x_before[i]));

        // raw constraint values at the subproblem solution
        double viol = 0;
        std::vector<double> gvals(p.ineq.size()), hvals(p.eq.size());
        for (std::size_t i = 0; i < p.ineq.size(); ++i) {
            gvals[i] = p.ineq[i](x, gscratch);
            viol = std::max(viol, gvals[i]);
        }
        for (std::size_t i = 0; i < p.eq.size(); ++i) {
            hvals[i] = p.eq[i](x, gscratch);
            viol = std::max(viol, std::abs(hvals[i]));
        }
        viol = std::max(viol, 0.0);

        // feasible and either stationary or pinned: the step-tolerance
        // convergence contract
        if (viol <= conv_tol &&
            (spg.pg_norm <= opts.step_tol || (outer > 0 && step_inf <= opts.step_tol))) {
            out.converged = true;
            break;
        }
        for (std::size_t i = 0; i < p.ineq.size(); ++i)
            m.ineq[i] = std::max(0.0, m.ineq[i] + m.rho * gvals[i]);
        for (std::size_t i = 0; i < p.eq.size(); ++i) m.eq[i] += m.rho * hvals[i];
        if (viol > 0.25 * prev_viol) m.rho = std::min(m.rho * 10.0, 1e10);
        prev_viol = viol;
    }
    // prefer the best feasible point seen over the last iterate
    if (best.found) {
        double raw_f_last = p.objective(x, gscratch);
        double viol_last = 0;
        for (const auto& g : p.ineq) viol_last = std::max(viol_last, g(x, gscratch));
        for (const auto& h : p.eq) viol_last = std::max(viol_last, std::abs(h(x, gscratch)));
        if (viol_last > conv_tol || best.f <= raw_f_last) x = best.x;
    }
    out.objective = p.objective(x, gscratch);
    out.x = std::move(x);
    return out;
}

std::vector<std::vector<double>> make_starts(const NlpProblem& p, const SolveOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> ufree(opts.free_init_lo, opts.free_init_hi);
    std::exponential_distribution<double> dexp(1.0);
    std::vector<std::vector<double>> starts;
    if (opts.warm_start) starts.push_back(*opts.warm_start);
    for (const auto& s : opts.extra_starts)
        if (static_cast<int>(starts.size()) < opts.multistart) starts.push_back(s);
    while (static_cast<int>(starts.size()) < std::max(1, opts.multistart)) {
        std::vector<double> x(p.dim(), 0.0);
        for (int i = 0; i < p.n_free; ++i) x[i] = ufree(rng);
        for (const SimplexBlock& b : p.blocks) {
            double sum = 0;
            for (int i = 0; i < b.size; ++i) {
                x[b.offset + i] = dexp(rng);
                sum += x[b.offset + i];
            }
            for (int i = 0; i < b.size; ++i) x[b.offset + i] /= sum;
        }
        starts.push_back(std::move(x));
    }
    return starts;
}

double comp_violation(const NlpProblem& p, std::span<const double> x, std::vector<double>& scratch) {
    double v = 0;
    for (const CompPair& cp : p.comp) {
        double a = cp.a(x, scratch);
        double b = cp.b(x, scratch);
        v = std::max({v, -a, -b, std::min(a, b)});
    }
    return std::max(v, 0.0);
}

void fill_violations(const NlpProblem& p, SolveResult& r) {
    std::vector<double> scratch(p.dim());
    r.max_ineq_violation = 0;
    r.max_eq_violation = 0;
    for (const auto& g : p.ineq)
        r.max_ineq_violation = std::max(r.max_ineq_violation, std::max(0.0, g(r.point, scratch)));
    for (const auto& h : p.eq)
        r.max_eq_violation = std::max(r.max_eq_violation, std::abs(h(r.point, scratch)));
    r.max_comp_violation = p.comp.empty() ? 0.0 : comp_violation(p, r.point, scratch);
    r.objective = p.objective(r.point, scratch);
}

}  // namespace

SolveResult solve(const NlpProblem& problem, const SolveOptions& options) {
    if (!problem.comp.empty())
        throw std::logic_error("solve: problem has complementarity pairs, use solve_mpcc");
    SolveResult result;
    if (options.warm_start) {
        if (static_cast<int>(options.warm_start->size()) != problem.dim())
            throw std::invalid_argument("warm start has wrong dimension");
        if (block_infeasibility(problem, *options.warm_start) > 1e-6) {
            result.status = SolveStatus::infeasible_start;
            result.point = *options.warm_start;
            return result;
        }
    }
    auto starts = make_starts(problem, options);
    bool best_feasible = false;
    double best_obj = kInf;
    for (auto& x0 : starts) {
        AlOutcome al = run_augmented_lagrangian(problem, std::move(x0), options,
                                                options.constraint_tol);
        result.restart_objectives.push_back(al.objective);
        ++result.restarts_used;
        result.iterations += al.iterations;
        std::vector<double> scratch(problem.dim());
        double viol = 0;
        for (const auto& g : problem.ineq) viol = std::max(viol, g(al.x, scratch));
        for (const auto& h : problem.eq) viol = std::max(viol, std::abs(h(al.x, scratch)));
        bool feas = viol <= options.constraint_tol;
        bool better = (feas && !best_feasible) ||
                      (feas == best_feasible && al.objective < best_obj);
        if (result.point.empty() || better) {
            result.point = al.x;
            result.kkt_residual = al.pg_norm;
            result.status = al.converged ? SolveStatus::converged : SolveStatus::max_iters;
            best_feasible = feas;
            best_obj = al.objective;
        }
    }
    fill_violations(problem, result);
    return result;
}

SolveResult solve_mpcc(const NlpProblem& problem, const SolveOptions& options) {
    if (problem.comp.empty())
        throw std::logic_error("solve_mpcc: no complementarity pairs");
    SolveResult result;
    if (options.warm_start && block_infeasibility(problem, *options.warm_start) > 1e-6) {
        result.status = SolveStatus::infeasible_start;
        result.point = *options.warm_start;
        return result;
    }
    auto starts = make_starts(problem, options);
    std::vector<double> scratch(problem.dim());
    bool best_feasible = false;
    double best_obj = kInf;

    for (auto& x0 : starts) {
        std::vector<double> x = std::move(x0);
        for (const SimplexBlock& b : problem.blocks)
            project_simplex_inplace(std::span<double>(x.data() + b.offset, b.size));
        // skip relaxation stages a near-complementary start already satisfies,
        // so the objective cannot wander far off the equilibrium manifold
        double cv0 = comp_violation(problem, x, scratch);
        double t = std::min(options.relax_t0, std::max(10.0 * cv0, 10.0 * options.constraint_tol));
        bool reached = false, stalled = false;
        double pg_norm = kInf;
        int iters = 0;
        std::vector<double> schedule, cviol_hist;
        for (;;) {
            schedule.push_back(t);
            NlpProblem relaxed;
            relaxed.n_free = problem.n_free;
            relaxed.blocks = problem.blocks;
            relaxed.objective = problem.objective;
            relaxed.ineq = problem.ineq;
            relaxed.eq = problem.eq;
            for (const CompPair& cp : problem.comp) {
                relaxed.ineq.push_back([&cp, t](std::span<const double> xx, std::span<double> g) {
                    thread_local std::vector<double> ga, gb;
                    ga.assign(xx.size(), 0.0);
                    gb.assign(xx.size(), 0.0);
                    double a = cp.a(xx, ga);
                    double b = cp.b(xx, gb);
                    for (std::size_t i = 0; i < xx.size(); ++i) g[i] = a * gb[i] + b * ga[i];
                    return a * b - t;
                });
                relaxed.ineq.push_back([&cp, t](std::span<const double> xx, std::span<double> g) {
                    double a = cp.a(xx, g);
                    for (double& v : g) v = -v;
                    return -a - t;
                });
                relaxed.ineq.push_back([&cp, t](std::span<const double> xx, std::span<double> g) {
                    double b = cp.b(xx, g);
                    for (double& v : g) v = -v;
                    return -b - t;
                });
            }
            // solve each relaxed stage tighter than the final target so the
            // product constraints' slack does not floor the comp violation;
            // early stages only feed the next warm start and get less effort
            SolveOptions inner = options;
            inner.constraint_tol = 0.1 * options.constraint_tol;
            if (t > 1e-4) {
                inner.step_tol = std::max(options.step_tol, 1e-3 * t);
                inner.max_outer_iters = std::min(options.max_outer_iters, 15);
            }
            AlOutcome al = run_augmented_lagrangian(relaxed, x, inner,
                                                    inner.constraint_tol);
            x = al.x;
            iters += al.iterations;
            pg_norm = al.pg_norm;

            double base_viol = 0;
            for (const auto& g : problem.ineq) base_viol = std::max(base_viol, g(x, scratch));
            for (const auto& h : problem.eq) base_viol = std::max(base_viol, std::abs(h(x, scratch)));
            double cviol = comp_violation(problem, x, scratch);
            if (cviol <= options.constraint_tol && base_viol <= options.constraint_tol) {
                reached = true;
                break;
            }
            // shrinking t further cannot help once the violation stops moving
            cviol_hist.push_back(cviol);
            if (cviol_hist.size() >= 4 && cviol > 100 * options.constraint_tol &&
                cviol > 0.9 * cviol_hist[cviol_hist.size() - 4]) {
                stalled = true;
                break;
            }
            t *= options.relax_sigma;
            if (t < 1e-14) {
                stalled = true;
                break;
            }
        }
        double obj = problem.objective(x, scratch);
        result.restart_objectives.push_back(obj);
        ++result.restarts_used;
        result.iterations += iters;
        bool better = (reached && !best_feasible) || (reached == best_feasible && obj < best_obj);
        if (result.point.empty() || better) {
            result.point = x;
            result.kkt_residual = pg_norm;
            result.relax_schedule = schedule;
            // reached means every tolerance holds at the returned point: the
            // relaxation contract for convergence
            result.status = reached ? SolveStatus::converged
                                    : (stalled ? SolveStatus::relaxation_stalled
                                               : SolveStatus::max_iters);
            best_feasible = reached;
            best_obj = obj;
        }
    }
    fill_violations(problem, result);
    return result;
}

double grad_check(const NlpProblem& problem, std::span<const double> point, double h) {
    const int n = problem.dim();
    std::vector<double> x(point.begin(), point.end());
    std::vector<double> analytic(n), scratch(n);

    auto check_fn = [&](const GradFn& fn) {
        fn(x, analytic);
        double worst = 0;
        for (int i = 0; i < n; ++i) {
            double keep = x[i];
            x[i] = keep + h;
            double fp = fn(x, scratch);
            x[i] = keep - h;
            double fm = fn(x, scratch);
            x[i] = keep;
            double fd = (fp - fm) / (2 * h);
            worst = std::max(worst, std::abs(fd - analytic[i]) / std::max(1.0, std::abs(analytic[i])));
        }
        return worst;
    };

    double worst = check_fn(problem.objective);
    for (const auto& g : problem.ineq) worst = std::max(worst, check_fn(g));
    for (const auto& hh : problem.eq) worst = std::max(worst, check_fn(hh));
    for (const auto& cp : problem.comp) {
        worst = std::max(worst, check_fn(cp.a));
        worst = std::max(worst, check_fn(cp.b));
    }
    return worst;
}

}  // namespace freight::nlp
