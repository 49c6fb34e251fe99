#include "freight/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_map>

namespace freight::oracle {

PigouResult pigou_analytic(double d, double s) {
    if (d <= 0) throw InputError("pigou_analytic: demand must be positive");
    PigouResult r;
    // UE: route costs 1 and x_B^4 equalize at x_B = 1
    r.ue_split = std::min(d, 1.0);
    r.ue_total = (d - r.ue_split) * 1.0 + std::pow(r.ue_split, 5);
    // SO: minimize (d - x) + x^5, stationary at 5x^4 = 1
    r.so_split = std::min(d, std::pow(5.0, -0.25));
    r.so_total = (d - r.so_split) * 1.0 + std::pow(r.so_split, 5);
    // tolls equalizing 1 + toll_a/s = x^4 + toll_b/s with zero net revenue
    if (r.so_split < d) {
        double diff = s * (1.0 - std::pow(r.so_split, 4));  // toll_b - toll_a
        r.toll_a = -r.so_split * diff / d;
        r.toll_b = (d - r.so_split) * diff / d;
    }
    return r;
}

namespace {

// all compositions of `steps` grid increments over `size` coordinates, as
// alpha vectors, in lexicographic order; includes the simplex vertices exactly
std::vector<std::vector<double>> simplex_grid(int size, int steps) {
    std::vector<std::vector<double>> out;
    std::vector<int> comp(size, 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == size - 1) {
            comp[pos] = left;
            std::vector<double> a(size);
            for (int i = 0; i < size; ++i) a[i] = static_cast<double>(comp[i]) / steps;
            out.push_back(std::move(a));
            return;
        }
        for (int v = 0; v <= left; ++v) {
            comp[pos] = v;
            rec(pos + 1, left - v);
        }
    };
    rec(0, steps);
    return out;
}

struct BlockRef {
    int c, j, w;
};

// Enumerates the product of the given blocks' grids, maintaining per-scenario
// link flows incrementally; calls leaf() at every full assignment.
class GridWalker {
public:
    GridWalker(const ProblemInstance& inst, std::vector<BlockRef> blocks, int steps)
        : inst_(inst), blocks_(std::move(blocks)) {
        alpha_ = RoutingPolicy::zero_tensor(inst, PolicyMode::scenario_dependent);
        flow_.assign(inst.n_scenarios(), std::vector<double>(inst.network.num_links(), 0.0));
        for (const auto& b : blocks_) {
            int size = static_cast<int>(inst.routes[b.j].size());
            if (grids_.find(size) == grids_.end()) grids_[size] = simplex_grid(size, steps);
        }
    }

    long long cell_count() const {
        long long total = 1;
        for (const auto& b : blocks_) {
            long long n = static_cast<long long>(
                grids_.at(static_cast<int>(inst_.routes[b.j].size())).size());
            if (total > std::numeric_limits<long long>::max() / n) return -1;
            total *= n;
        }
        return total;
    }

    const Tensor4& alpha() const { return alpha_; }
    const std::vector<std::vector<double>>& flow() const { return flow_; }

    void walk(const std::function<void()>& leaf) { rec(0, leaf); }

private:
    void apply(const BlockRef& b, const std::vector<double>& a, double sign) {
        double d = inst_.scenarios[b.c].demand[b.j][b.w];
        for (std::size_t r = 0; r < a.size(); ++r) {
            if (sign > 0) alpha_[b.c][b.j][b.w][r] = a[r];
            if (d == 0 || a[r] == 0) continue;
            for (int li : inst_.routes[b.j][r].links) flow_[b.c][li] += sign * d * a[r];
        }
    }

    void rec(std::size_t level, const std::function<void()>& leaf) {
        if (level == blocks_.size()) {
            leaf();
            return;
        }
        const BlockRef& b = blocks_[level];
        for (const auto& a : grids_.at(static_cast<int>(inst_.routes[b.j].size()))) {
            apply(b, a, +1.0);
            rec(level + 1, leaf);
            apply(b, a, -1.0);
        }
    }

    const ProblemInstance& inst_;
    std::vector<BlockRef> blocks_;
    std::unordered_map<int, std::vector<std::vector<double>>> grids_;
    Tensor4 alpha_;
    std::vector<std::vector<double>> flow_;
};

// scenario-c share of the SO objective, computed from the walker's state
double scenario_value(const ProblemInstance& inst, const GridWalker& w, int c) {
    double ttr = 0, tp = 0, tmon = 0;
    std::vector<double> times(inst.network.num_links());
    for (int l = 0; l < inst.network.num_links(); ++l) {
        times[l] = link_time(inst.network.links[l], w.flow()[c][l], inst.pce);
        ttr += w.flow()[c][l] * times[l];
        tp += inst.network.links[l].x_lp * times[l];
    }
    for (int j = 0; j < inst.n_od(); ++j)
        for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
            double jt = 0;
            for (int li : inst.routes[j][r].links) jt += times[li];
            for (int ww = 0; ww < inst.n_classes(); ++ww)
                tmon += inst.scenarios[c].demand[j][ww] * w.alpha()[c][j][ww][r] *
                        inst.classes[ww].vot * jt;
        }
    return inst.lambda * (inst.mu * ttr + (1 - inst.mu) * tp) + (1 - inst.lambda) * tmon;
}

}  // namespace

GridBest grid_search_best(const ProblemInstance& inst, GridObjective obj, const GridSpec& grid,
                          const UeReference* ue_ref) {
    if (grid.step <= 0 || grid.step > 0.5) throw InputError("grid step out of range");
    if (obj != GridObjective::so && !ue_ref)
        throw InputError("constrained grid objective requires a UE reference");
    int steps = static_cast<int>(std::lround(1.0 / grid.step));

    GridBest best;
    best.point.mode = PolicyMode::scenario_dependent;
    best.point.alpha = RoutingPolicy::zero_tensor(inst, PolicyMode::scenario_dependent);

    if (obj == GridObjective::so) {
        // the SO objective separates across scenarios, so solve each
        // scenario's grid independently and sum
        double total = 0;
        for (int c = 0; c < inst.n_scenarios(); ++c) {
            std::vector<BlockRef> blocks;
            for (int j = 0; j < inst.n_od(); ++j)
                for (int w = 0; w < inst.n_classes(); ++w) blocks.push_back({c, j, w});
            GridWalker walker(inst, blocks, steps);
            long long cells = walker.cell_count();
            if (cells < 0 || cells > grid.max_cells)
                throw InputError("grid search cell cap exceeded");
            double bval = std::numeric_limits<double>::infinity();
            Tensor4 barg;
            walker.walk([&] {
                double v = scenario_value(inst, walker, c);
                if (v < bval) {
                    bval = v;
                    barg = walker.alpha();
                }
            });
            total += inst.scenarios[c].probability * bval;
            best.point.alpha[c] = barg[c];
        }
        best.value = total;
        best.feasible = true;
        return best;
    }

    std::vector<BlockRef> blocks;
    for (int c = 0; c < inst.n_scenarios(); ++c)
        for (int j = 0; j < inst.n_od(); ++j)
            for (int w = 0; w < inst.n_classes(); ++w) blocks.push_back({c, j, w});
    GridWalker walker(inst, blocks, steps);
    long long cells = walker.cell_count();
    if (cells < 0 || cells > grid.max_cells) throw InputError("grid search cell cap exceeded");
    double bval = std::numeric_limits<double>::infinity();
    bool found = false;
    Tensor4 barg;
    RoutingPolicy probe;
    probe.mode = PolicyMode::scenario_dependent;
    walker.walk([&] {
        probe.alpha = walker.alpha();
        if (monetary_gap(inst, probe, *ue_ref) > grid.feas_tol) return;
        double tgap = obj == GridObjective::aops ? exante_truthful_gap(inst, probe, *ue_ref)
                                                 : expost_truthful_gap(inst, probe, *ue_ref);
        if (tgap > grid.feas_tol) return;
        double v = 0;
        for (int c = 0; c < inst.n_scenarios(); ++c)
            v += inst.scenarios[c].probability * scenario_value(inst, walker, c);
        if (!found || v < bval) {
            found = true;
            bval = v;
            barg = walker.alpha();
        }
    });
    best.feasible = found;
    if (found) {
        best.value = bval;
        best.point.alpha = barg;
    }
    return best;
}

namespace {

// Newton refinement of a near-equilibrium: equalize expected route times over
// the used routes of each OD, treating classes symmetrically (route times are
// class-independent, so a class-symmetric equilibrium always exists). Returns
// false when the system is singular or fails to settle; the input is only
// overwritten on success.
bool newton_polish(const ProblemInstance& inst, RoutingPolicy& pol) {
    const int v = inst.n_od(), ns = inst.n_scenarios(), nw = inst.n_classes();
    const int m = inst.network.num_links();
    // aggregate demand per (scenario, od)
    std::vector<std::vector<double>> D(ns, std::vector<double>(v, 0.0));
    for (int c = 0; c < ns; ++c)
        for (int j = 0; j < v; ++j)
            for (int w = 0; w < nw; ++w) D[c][j] += inst.scenarios[c].demand[j][w];

    // class-symmetrized split, demand-weighted so zero-demand classes don't
    // skew the aggregate flows
    std::vector<std::vector<double>> a(v);
    std::vector<std::vector<char>> used(v);
    std::vector<char> frozen(v, 0);  // zero-demand ODs carry no flow: leave untouched
    for (int j = 0; j < v; ++j) {
        int nr = static_cast<int>(inst.routes[j].size());
        a[j].assign(nr, 0.0);
        used[j].assign(nr, 0);
        double dj = 0, dw = 0;
        for (int c = 0; c < ns; ++c)
            for (int w = 0; w < nw; ++w) dj += inst.scenarios[c].probability *
                                               inst.scenarios[c].demand[j][w];
        for (int r = 0; r < nr; ++r) {
            double num = 0;
            for (int c = 0; c < ns; ++c)
                for (int w = 0; w < nw; ++w)
                    num += inst.scenarios[c].probability * inst.scenarios[c].demand[j][w] *
                           pol.alpha[0][j][w][r];
            a[j][r] = dj > 0 ? num / dj : pol.alpha[0][j][0][r];
            dw += a[j][r];
        }
        frozen[j] = dj <= 0;
        double amax = 0;
        for (int r = 0; r < nr; ++r) amax = std::max(amax, a[j][r] /= dw);
        // Frank-Wolfe leaves geometric dust on abandoned routes; a dropped
        // route that genuinely belongs re-enters via the growth check below
        double mass = 0;
        for (int r = 0; r < nr; ++r) {
            used[j][r] = a[j][r] > 1e-3 * amax;
            if (!used[j][r]) a[j][r] = 0;
            mass += a[j][r];
        }
        for (int r = 0; r < nr; ++r) a[j][r] /= mass;
    }

    std::vector<double> flow(m), times(m), dts(m);
    std::vector<std::vector<double>> F(v);
    auto refresh = [&](std::vector<std::vector<double>>& tcl, std::vector<std::vector<double>>& dcl) {
        tcl.assign(ns, {});
        dcl.assign(ns, {});
        for (int j = 0; j < v; ++j) F[j].assign(inst.routes[j].size(), 0.0);
        for (int c = 0; c < ns; ++c) {
            std::fill(flow.begin(), flow.end(), 0.0);
            for (int j = 0; j < v; ++j)
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    if (a[j][r] > 0)
                        for (int li : inst.routes[j][r].links) flow[li] += D[c][j] * a[j][r];
            tcl[c].resize(m);
            dcl[c].resize(m);
            for (int l = 0; l < m; ++l) {
                tcl[c][l] = link_time(inst.network.links[l], flow[l], inst.pce);
                dcl[c][l] = link_time_deriv(inst.network.links[l], flow[l], inst.pce);
            }
            for (int j = 0; j < v; ++j)
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    for (int li : inst.routes[j][r].links)
                        F[j][r] += inst.scenarios[c].probability * tcl[c][li];
        }
    };

    std::vector<std::vector<double>> tcl, dcl;
    for (int pass = 0; pass < 60; ++pass) {
        refresh(tcl, dcl);

        // variable layout: used routes in (j, r) order
        std::vector<std::pair<int, int>> vars;
        std::vector<int> head(v + 1, 0);
        for (int j = 0; j < v; ++j) {
            head[j] = static_cast<int>(vars.size());
            if (frozen[j]) continue;
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                if (used[j][r]) vars.emplace_back(j, static_cast<int>(r));
        }
        head[v] = static_cast<int>(vars.size());
        const int n = static_cast<int>(vars.size());

        // dF[j][r]/da[j2][r2] = sum_c p_c D[c][j2] sum_{l in r cap r2} dt_c,l
        auto dF = [&](int j, int r, int j2, int r2) {
            double s = 0;
            for (int c = 0; c < ns; ++c) {
                double acc = 0;
                // link sets are short; mark-and-scan over the smaller route
                for (int la : inst.routes[j][r].links)
                    for (int lb : inst.routes[j2][r2].links)
                        if (la == lb) acc += dcl[c][la];
                s += inst.scenarios[c].probability * D[c][j2] * acc;
            }
            return s;
        };

        std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
        std::vector<double> rhs(n, 0.0);
        int row = 0;
        double resid = 0;
        for (int j = 0; j < v; ++j) {
            if (head[j] == head[j + 1]) continue;
            int r0 = vars[head[j]].second;
            for (int q = head[j] + 1; q < head[j + 1]; ++q) {
                int r = vars[q].second;
                for (int col = 0; col < n; ++col)
                    A[row][col] = dF(j, r, vars[col].first, vars[col].second) -
                                  dF(j, r0, vars[col].first, vars[col].second);
                rhs[row] = -(F[j][r] - F[j][r0]);
                resid = std::max(resid, std::abs(rhs[row]));
                ++row;
            }
            double sum = -1.0;
            for (int q = head[j]; q < head[j + 1]; ++q) {
                A[row][q] = 1.0;
                sum += a[j][vars[q].second];
            }
            rhs[row] = -sum;
            resid = std::max(resid, std::abs(rhs[row]));
            ++row;
        }

        if (resid <= 1e-11) {
            // equalized on the used set; pull in any strictly cheaper unused route
            bool grew = false;
            for (int j = 0; j < v; ++j) {
                if (frozen[j]) continue;
                double fmin = std::numeric_limits<double>::infinity();
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    if (used[j][r]) fmin = std::min(fmin, F[j][r]);
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    if (!used[j][r] && F[j][r] < fmin - 1e-9) {
                        used[j][r] = 1;
                        grew = true;
                    }
            }
            if (!grew) {
                for (int j = 0; j < v; ++j) {
                    if (frozen[j]) continue;
                    for (int w = 0; w < nw; ++w)
                        for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                            pol.alpha[0][j][w][r] = used[j][r] ? a[j][r] : 0.0;
                }
                return true;
            }
            continue;
        }

        // dense Gaussian elimination with partial pivoting
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r2 = col + 1; r2 < n; ++r2)
                if (std::abs(A[r2][col]) > std::abs(A[piv][col])) piv = r2;
            if (std::abs(A[piv][col]) < 1e-12) return false;
            std::swap(A[col], A[piv]);
            std::swap(rhs[col], rhs[piv]);
            for (int r2 = col + 1; r2 < n; ++r2) {
                double f = A[r2][col] / A[col][col];
                if (f == 0) continue;
                for (int c2 = col; c2 < n; ++c2) A[r2][c2] -= f * A[col][c2];
                rhs[r2] -= f * rhs[col];
            }
        }
        std::vector<double> delta(n);
        for (int r2 = n - 1; r2 >= 0; --r2) {
            double s = rhs[r2];
            for (int c2 = r2 + 1; c2 < n; ++c2) s -= A[r2][c2] * delta[c2];
            delta[r2] = s / A[r2][r2];
        }

        // step back from the nonnegativity boundary; routes driven to zero
        // leave the used set
        double gamma = 1.0;
        for (int q = 0; q < n; ++q) {
            double av = a[vars[q].first][vars[q].second];
            if (delta[q] < 0 && av + delta[q] < 0) gamma = std::min(gamma, av / -delta[q]);
        }
        for (int q = 0; q < n; ++q) {
            auto [j, r] = vars[q];
            a[j][r] = std::max(0.0, a[j][r] + gamma * delta[q]);
            if (a[j][r] <= 1e-14 && head[j + 1] - head[j] > 1) {
                a[j][r] = 0;
                used[j][r] = 0;
            }
        }
    }
    return false;
}

}  // namespace

BestResponseResult best_response_ue(const ProblemInstance& inst, int iters, double damping,
                                    const RoutingPolicy* start) {
    if (damping <= 0 || damping > 1) throw InputError("damping must be in (0,1]");
    BestResponseResult out;
    out.policy = start ? *start : RoutingPolicy::uniform(inst, PolicyMode::scenario_independent);
    if (out.policy.mode != PolicyMode::scenario_independent)
        throw InputError("best response requires a scenario-independent start");
    const double target = 1e-7;

    // Frank-Wolfe closes the last decades only sublinearly; once near the
    // equilibrium, a Newton step on the used-route system finishes the job
    auto try_polish = [&]() {
        RoutingPolicy cand = out.policy;
        if (!newton_polish(inst, cand)) return;
        double rr = marginal_regret(inst, cand);
        if (rr < out.regret) {
            out.policy = std::move(cand);
            out.regret = rr;
        }
    };

    auto expected_times = [&](const RoutingPolicy& pol) {
        std::vector<std::vector<double>> f(inst.n_od());
        for (int j = 0; j < inst.n_od(); ++j) f[j].assign(inst.routes[j].size(), 0.0);
        for (int c = 0; c < inst.n_scenarios(); ++c) {
            auto flow = truck_link_flows(inst, pol, c);
            std::vector<double> times(inst.network.num_links());
            for (int l = 0; l < inst.network.num_links(); ++l)
                times[l] = link_time(inst.network.links[l], flow[l], inst.pce);
            for (int j = 0; j < inst.n_od(); ++j)
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    for (int li : inst.routes[j][r].links)
                        f[j][r] += inst.scenarios[c].probability * times[li];
        }
        return f;
    };

    bool polished = false;
    for (int it = 0; it < iters; ++it) {
        out.iterations = it;
        out.regret = marginal_regret(inst, out.policy);
        if (!polished && out.regret <= 1e-3) {
            polished = true;
            try_polish();
        }
        if (out.regret <= target) {
            out.converged = true;
            return out;
        }
        auto f = expected_times(out.policy);
        // best-response target: all mass on a cheapest route (lowest index wins)
        RoutingPolicy br = out.policy;
        for (int j = 0; j < inst.n_od(); ++j) {
            std::size_t arg = 0;
            for (std::size_t r = 1; r < inst.routes[j].size(); ++r)
                if (f[j][r] < f[j][arg]) arg = r;
            for (int w = 0; w < inst.n_classes(); ++w) {
                std::fill(br.alpha[0][j][w].begin(), br.alpha[0][j][w].end(), 0.0);
                br.alpha[0][j][w][arg] = 1.0;
            }
        }
        // line search along (br - current) on the equilibrium map: bisect the
        // sign of the expected-demand-weighted gap <br - cur, F(mix)>, which
        // is <= 0 at gamma = 0 and vanishes exactly at an equilibrium
        std::vector<std::vector<double>> dbar(inst.n_od());
        for (int j = 0; j < inst.n_od(); ++j) {
            dbar[j].assign(inst.n_classes(), 0.0);
            for (int c = 0; c < inst.n_scenarios(); ++c)
                for (int w = 0; w < inst.n_classes(); ++w)
                    dbar[j][w] += inst.scenarios[c].probability * inst.scenarios[c].demand[j][w];
        }
        auto dphi = [&](double gamma) {
            RoutingPolicy mix = out.policy;
            for (int j = 0; j < inst.n_od(); ++j)
                for (int w = 0; w < inst.n_classes(); ++w)
                    for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                        mix.alpha[0][j][w][r] = (1 - gamma) * out.policy.alpha[0][j][w][r] +
                                                gamma * br.alpha[0][j][w][r];
            auto fm = expected_times(mix);
            double g = 0;
            for (int j = 0; j < inst.n_od(); ++j)
                for (int w = 0; w < inst.n_classes(); ++w)
                    for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                        g += dbar[j][w] *
                             (br.alpha[0][j][w][r] - out.policy.alpha[0][j][w][r]) * fm[j][r];
            return g;
        };
        double step = damping;
        if (dphi(0.0) >= 0) {
            step = 0.0;  // no descent along best response: keep the point
        } else if (dphi(damping) < 0) {
            step = damping;
        } else {
            double lo = 0, hi = damping;
            for (int b = 0; b < 60; ++b) {
                double mid = 0.5 * (lo + hi);
                (dphi(mid) < 0 ? lo : hi) = mid;
            }
            step = 0.5 * (lo + hi);
        }
        if (step == 0.0) {
            try_polish();
            out.converged = out.regret <= 1e-5;
            return out;
        }
        for (int j = 0; j < inst.n_od(); ++j)
            for (int w = 0; w < inst.n_classes(); ++w)
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    out.policy.alpha[0][j][w][r] =
                        (1 - step) * out.policy.alpha[0][j][w][r] + step * br.alpha[0][j][w][r];
    }
    out.iterations = iters;
    out.regret = marginal_regret(inst, out.policy);
    try_polish();
    out.converged = out.regret <= 1e-5;
    return out;
}

double so_lipschitz_bound(const ProblemInstance& inst) {
    double total = 0;
    for (int c = 0; c < inst.n_scenarios(); ++c) {
        double pc = inst.scenarios[c].probability;
        double dc = 0, wc = 0;  // worst-case truck load and monetary link weight
        for (int j = 0; j < inst.n_od(); ++j)
            for (int w = 0; w < inst.n_classes(); ++w) {
                dc += inst.scenarios[c].demand[j][w];
                wc += inst.scenarios[c].demand[j][w] * inst.classes[w].vot;
            }
        std::vector<double> tmax(inst.network.num_links()), dtmax(inst.network.num_links());
        for (int l = 0; l < inst.network.num_links(); ++l) {
            tmax[l] = link_time(inst.network.links[l], dc, inst.pce);
            dtmax[l] = link_time_deriv(inst.network.links[l], dc, inst.pce);
        }
        for (int j = 0; j < inst.n_od(); ++j)
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                double a = 0, b = 0, jr = 0, dts = 0;
                for (int li : inst.routes[j][r].links) {
                    a += tmax[li] + dc * dtmax[li];
                    b += inst.network.links[li].x_lp * dtmax[li];
                    jr += tmax[li];
                    dts += dtmax[li];
                }
                for (int w = 0; w < inst.n_classes(); ++w) {
                    double d = inst.scenarios[c].demand[j][w];
                    double mon = inst.classes[w].vot * jr + dts * wc;
                    total += pc * d *
                             (inst.lambda * (inst.mu * a + (1 - inst.mu) * b) +
                              (1 - inst.lambda) * mon);
                }
            }
    }
    return total;
}

}  // namespace freight::oracle
