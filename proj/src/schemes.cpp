#include "freight/schemes.hpp"

#include "freight/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>

namespace freight {

namespace {

// Shared per-point workspace: decoded alpha plus per-scenario flows, times,
// time derivatives, route times J and monetary link weights W. Every
// objective/constraint evaluator of one program points at the same instance,
// so an NLP iteration costs one network loading regardless of constraint count.
class Evaluator {
public:
    Evaluator(const ProblemInstance& inst, PolicyMode mode, int n_free)
        : inst_(inst), mode_(mode), n_free_(n_free) {
        nc_stored_ = mode == PolicyMode::scenario_independent ? 1 : inst.n_scenarios();
        int off = n_free_;
        offsets_.resize(nc_stored_);
        for (int cs = 0; cs < nc_stored_; ++cs) {
            offsets_[cs].assign(inst.n_od() * inst.n_classes(), 0);
            for (int j = 0; j < inst.n_od(); ++j)
                for (int w = 0; w < inst.n_classes(); ++w) {
                    offsets_[cs][j * inst.n_classes() + w] = off;
                    off += static_cast<int>(inst.routes[j].size());
                }
        }
        dim_ = off;
        link_routes_.resize(inst.network.num_links());
        for (int j = 0; j < inst.n_od(); ++j)
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                for (int li : inst.routes[j][r].links)
                    link_routes_[li].push_back({j, static_cast<int>(r)});
        int ns = inst.n_scenarios(), m = inst.network.num_links();
        flow_.assign(ns, std::vector<double>(m, 0.0));
        t_ = dt_ = w_ = flow_;
        jt_.resize(ns);
        for (int c = 0; c < ns; ++c) {
            jt_[c].resize(inst.n_od());
            for (int j = 0; j < inst.n_od(); ++j) jt_[c][j].assign(inst.routes[j].size(), 0.0);
        }
    }

    int dim() const { return dim_; }
    int n_free() const { return n_free_; }
    PolicyMode mode() const { return mode_; }

    int alpha_index(int c, int j, int w, int r) const {
        int cs = mode_ == PolicyMode::scenario_independent ? 0 : c;
        return offsets_[cs][j * inst_.n_classes() + w] + r;
    }

    std::vector<nlp::SimplexBlock> blocks() const {
        std::vector<nlp::SimplexBlock> b;
        for (int cs = 0; cs < nc_stored_; ++cs)
            for (int j = 0; j < inst_.n_od(); ++j)
                for (int w = 0; w < inst_.n_classes(); ++w)
                    b.push_back({offsets_[cs][j * inst_.n_classes() + w],
                                 static_cast<int>(inst_.routes[j].size())});
        return b;
    }

    RoutingPolicy decode(std::span<const double> x) const {
        RoutingPolicy p;
        p.mode = mode_;
        p.alpha = RoutingPolicy::zero_tensor(inst_, mode_);
        for (int cs = 0; cs < nc_stored_; ++cs)
            for (int j = 0; j < inst_.n_od(); ++j)
                for (int w = 0; w < inst_.n_classes(); ++w)
                    for (std::size_t r = 0; r < inst_.routes[j].size(); ++r)
                        p.alpha[cs][j][w][r] = x[alpha_index(cs, j, w, static_cast<int>(r))];
        return p;
    }

    std::vector<double> encode(const RoutingPolicy& p) const {
        std::vector<double> x(dim_, 0.0);
        for (int cs = 0; cs < nc_stored_; ++cs)
            for (int j = 0; j < inst_.n_od(); ++j)
                for (int w = 0; w < inst_.n_classes(); ++w)
                    for (std::size_t r = 0; r < inst_.routes[j].size(); ++r)
                        x[alpha_index(cs, j, w, static_cast<int>(r))] =
                            p.at(cs, j, w, static_cast<int>(r));
        return x;
    }

    void refresh(std::span<const double> x) const {
        if (x.size() == last_x_.size() && std::equal(x.begin(), x.end(), last_x_.begin())) return;
        last_x_.assign(x.begin(), x.end());
        int m = inst_.network.num_links();
        for (int c = 0; c < inst_.n_scenarios(); ++c) {
            std::fill(flow_[c].begin(), flow_[c].end(), 0.0);
            std::fill(w_[c].begin(), w_[c].end(), 0.0);
            const auto& dem = inst_.scenarios[c].demand;
            for (int j = 0; j < inst_.n_od(); ++j)
                for (int w = 0; w < inst_.n_classes(); ++w) {
                    double d = dem[j][w];
                    if (d == 0) continue;
                    double sw = inst_.classes[w].vot;
                    for (std::size_t r = 0; r < inst_.routes[j].size(); ++r) {
                        double a = x[alpha_index(c, j, w, static_cast<int>(r))];
                        if (a == 0) continue;
                        for (int li : inst_.routes[j][r].links) {
                            flow_[c][li] += d * a;
                            w_[c][li] += d * sw * a;
                        }
                    }
                }
            for (int l = 0; l < m; ++l) {
                t_[c][l] = link_time(inst_.network.links[l], flow_[c][l], inst_.pce);
                dt_[c][l] = link_time_deriv(inst_.network.links[l], flow_[c][l], inst_.pce);
            }
            for (int j = 0; j < inst_.n_od(); ++j)
                for (std::size_t r = 0; r < inst_.routes[j].size(); ++r) {
                    double s = 0;
                    for (int li : inst_.routes[j][r].links) s += t_[c][li];
                    jt_[c][j][r] = s;
                }
        }
    }

    double J(int c, int j, int r) const { return jt_[c][j][r]; }
    double alpha(int c, int j, int w, int r) const { return last_x_[alpha_index(c, j, w, r)]; }

    /// Adds coeff * d(J_cjr)/dx onto g.
    void stamp_J(int c, int j, int r, double coeff, std::span<double> g) const {
        if (coeff == 0) return;
        const auto& dem = inst_.scenarios[c].demand;
        for (int li : inst_.routes[j][r].links) {
            double u = coeff * dt_[c][li];
            if (u == 0) continue;
            for (auto [j2, r2] : link_routes_[li])
                for (int w2 = 0; w2 < inst_.n_classes(); ++w2)
                    g[alpha_index(c, j2, w2, r2)] += u * dem[j2][w2];
        }
    }

    // Metric pieces; each returns the value and adds coeff times its gradient.
    double add_e_t_tr(double coeff, std::span<double> g) const {
        double val = 0;
        for (int c = 0; c < inst_.n_scenarios(); ++c) {
            double pc = inst_.scenarios[c].probability;
            for (int l = 0; l < inst_.network.num_links(); ++l) val += pc * flow_[c][l] * t_[c][l];
            add_route_sums(c, coeff * pc,
                           [&](int l) { return t_[c][l] + flow_[c][l] * dt_[c][l]; }, g);
        }
        return val;
    }

    double add_e_t_p(double coeff, std::span<double> g) const {
        double val = 0;
        for (int c = 0; c < inst_.n_scenarios(); ++c) {
            double pc = inst_.scenarios[c].probability;
            for (int l = 0; l < inst_.network.num_links(); ++l)
                val += pc * inst_.network.links[l].x_lp * t_[c][l];
            add_route_sums(c, coeff * pc,
                           [&](int l) { return inst_.network.links[l].x_lp * dt_[c][l]; }, g);
        }
        return val;
    }

    double add_e_t_mon(double coeff, std::span<double> g) const {
        double val = 0;
        for (int c = 0; c < inst_.n_scenarios(); ++c) {
            double pc = inst_.scenarios[c].probability;
            const auto& dem = inst_.scenarios[c].demand;
            for (int j = 0; j < inst_.n_od(); ++j)
                for (int w = 0; w < inst_.n_classes(); ++w) {
                    double d = dem[j][w];
                    if (d == 0) continue;
                    double sw = inst_.classes[w].vot;
                    for (std::size_t r = 0; r < inst_.routes[j].size(); ++r) {
                        val += pc * d * sw * alpha(c, j, w, static_cast<int>(r)) *
                               jt_[c][j][r];
                        if (coeff != 0)
                            g[alpha_index(c, j, w, static_cast<int>(r))] +=
                                coeff * pc * d * sw * jt_[c][j][r];
                    }
                }
            add_route_sums(c, coeff * pc, [&](int l) { return dt_[c][l] * w_[c][l]; }, g);
        }
        return val;
    }

    const ProblemInstance& inst() const { return inst_; }

private:
    // For a per-link weight u_l, adds coeff * d_cjw * (sum_{l in r} u_l) to
    // every alpha coordinate (c,j,w,r): the shared pattern of all metric grads.
    template <class F>
    void add_route_sums(int c, double coeff, F&& u, std::span<double> g) const {
        if (coeff == 0) return;
        const auto& dem = inst_.scenarios[c].demand;
        for (int j = 0; j < inst_.n_od(); ++j)
            for (std::size_t r = 0; r < inst_.routes[j].size(); ++r) {
                double s = 0;
                for (int li : inst_.routes[j][r].links) s += u(li);
                if (s == 0) continue;
                for (int w = 0; w < inst_.n_classes(); ++w)
                    g[alpha_index(c, j, w, static_cast<int>(r))] += coeff * dem[j][w] * s;
            }
    }

    const ProblemInstance& inst_;
    PolicyMode mode_;
    int n_free_;
    int nc_stored_;
    int dim_ = 0;
    std::vector<std::vector<int>> offsets_;
    std::vector<std::vector<std::pair<int, int>>> link_routes_;
    mutable std::vector<double> last_x_;
    mutable std::vector<std::vector<double>> flow_, t_, dt_, w_;
    mutable std::vector<std::vector<std::vector<double>>> jt_;
};

using EvPtr = std::shared_ptr<Evaluator>;

nlp::GradFn make_so_objective(EvPtr ev, double lambda, double mu, double scale) {
    return [ev, lambda, mu, scale](std::span<const double> x, std::span<double> g) {
        ev->refresh(x);
        std::fill(g.begin(), g.end(), 0.0);
        double ttr = ev->add_e_t_tr(scale * lambda * mu, g);
        double tp = ev->add_e_t_p(scale * lambda * (1 - mu), g);
        double tmon = ev->add_e_t_mon(scale * (1 - lambda), g);
        return scale * (lambda * (mu * ttr + (1 - mu) * tp) + (1 - lambda) * tmon);
    };
}

nlp::GradFn make_ue_objective(EvPtr ev, double lambda, double scale) {
    return [ev, lambda, scale](std::span<const double> x, std::span<double> g) {
        ev->refresh(x);
        std::fill(g.begin(), g.end(), 0.0);
        double ttr = ev->add_e_t_tr(scale * lambda, g);
        double tmon = ev->add_e_t_mon(scale * (1 - lambda), g);
        return scale * (lambda * ttr + (1 - lambda) * tmon);
    };
}

// AOPS payment coefficients with the degenerate-class fallback:
// shr(c,w) multiplies E[T_mon,M] - E[T_mon,UE] in class w's scenario-c payment.
struct AopsCoefs {
    std::vector<std::vector<double>> shr;  // shr[c][w]
    std::vector<double> t_over_s;          // T_w = sum_c p_c shr(c,w)/s_w
    double t_max = 0;
    std::vector<double> a_bar;             // sum_c p_c A^UE_cj
    bool degenerate = false;
};

AopsCoefs aops_coefs(const ProblemInstance& inst, const UeReference& ue_ref) {
    AopsCoefs k;
    int ns = inst.n_scenarios(), nw = inst.n_classes();
    k.shr.assign(ns, std::vector<double>(nw, 0.0));
    k.t_over_s.assign(nw, 0.0);
    for (int c = 0; c < ns; ++c) {
        std::vector<double> D(nw, 0.0);
        double s_sum = 0;
        for (int w = 0; w < nw; ++w) {
            for (int j = 0; j < inst.n_od(); ++j) D[w] += inst.scenarios[c].demand[j][w];
            if (D[w] > 0) s_sum += inst.classes[w].vot;
            else k.degenerate = true;
        }
        for (int w = 0; w < nw; ++w)
            if (D[w] > 0 && s_sum > 0) {
                k.shr[c][w] = inst.classes[w].vot / (s_sum * D[w]);
                k.t_over_s[w] += inst.scenarios[c].probability * k.shr[c][w] / inst.classes[w].vot;
            }
    }
    for (double t : k.t_over_s) k.t_max = std::max(k.t_max, t);
    k.a_bar.assign(inst.n_od(), 0.0);
    for (int j = 0; j < inst.n_od(); ++j)
        for (int c = 0; c < ns; ++c)
            k.a_bar[j] += inst.scenarios[c].probability * ue_ref.a_ue[c][j];
    return k;
}

double objective_scale(const ProblemInstance& inst, double lambda, double mu, bool ue_form) {
    auto m = flow_metrics(inst, RoutingPolicy::uniform(inst, PolicyMode::scenario_dependent));
    double v = ue_form ? lambda * m.e_t_tr + (1 - lambda) * m.e_t_mon
                       : lambda * (mu * m.e_t_tr + (1 - mu) * m.e_t_p) + (1 - lambda) * m.e_t_mon;
    return 1.0 / std::max(1.0, std::abs(v));
}

RoutingPolicy expand_policy(const ProblemInstance& inst, const RoutingPolicy& p, PolicyMode mode) {
    if (p.mode == mode) return p;
    if (mode == PolicyMode::scenario_independent)
        throw InputError("cannot collapse a scenario-dependent policy");
    RoutingPolicy q;
    q.mode = mode;
    q.alpha.assign(inst.n_scenarios(), p.alpha[0]);
    return q;
}

void finish(SchemeResult& res, const ProblemInstance& inst, const EvPtr& ev,
            const nlp::SolveResult& sr) {
    res.solver = sr;
    res.policy = ev->decode(sr.point);
    // snap roundoff so downstream validate() at tolerance 1e-9 passes
    for (auto& cj : res.policy.alpha)
        for (auto& jw : cj)
            for (auto& wr : jw)
                nlp::project_simplex_inplace(wr);
    res.metrics = flow_metrics(inst, res.policy);
}

}  // namespace

std::string to_string(SchemeId s) {
    switch (s) {
        case SchemeId::ue: return "ue";
        case SchemeId::so: return "so";
        case SchemeId::ops: return "ops";
        case SchemeId::aops: return "aops";
        case SchemeId::aops_ept: return "aops-ept";
        case SchemeId::cpurr: return "cpurr";
    }
    return "unknown";
}

namespace {

// Frank-Wolfe equilibria used as MPCC starting points: the complementarity
// system is near-feasible there, so the relaxation stages stay cheap. The
// first entry starts from the uniform policy, the rest from random ones.
std::vector<RoutingPolicy> equilibrium_starts(const ProblemInstance& inst, int count,
                                              std::uint64_t seed) {
    std::vector<RoutingPolicy> out;
    out.push_back(oracle::best_response_ue(inst, 3000, 1.0).policy);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::exponential_distribution<double> dexp(1.0);
    while (static_cast<int>(out.size()) < count) {
        RoutingPolicy rp = RoutingPolicy::uniform(inst, PolicyMode::scenario_independent);
        for (int j = 0; j < inst.n_od(); ++j)
            for (int w = 0; w < inst.n_classes(); ++w) {
                double sum = 0;
                for (double& a : rp.alpha[0][j][w]) sum += (a = dexp(rng));
                for (double& a : rp.alpha[0][j][w]) a /= sum;
            }
        out.push_back(oracle::best_response_ue(inst, 3000, 1.0, &rp).policy);
    }
    return out;
}

// One scheme's NLP program plus the free-variable layout needed to read the
// solution back; shared between the solvers and program_grad_check.
struct Program {
    EvPtr ev;
    nlp::NlpProblem p;
    std::vector<std::vector<int>> pi_off;  // OPS payment slots, [c][j*nw+w]
    std::vector<int> toll_off;             // CPURR toll slots, [j]
    bool degenerate = false;
};

Program build_ue_program(const ProblemInstance& inst) {
    int v = inst.n_od(), nw = inst.n_classes();
    Program prog;
    prog.ev = std::make_shared<Evaluator>(inst, PolicyMode::scenario_independent, v * nw);
    const EvPtr& ev = prog.ev;
    prog.p.n_free = ev->n_free();
    prog.p.blocks = ev->blocks();
    prog.p.objective =
        make_ue_objective(ev, inst.lambda, objective_scale(inst, inst.lambda, inst.mu, true));
    for (int j = 0; j < v; ++j)
        for (int w = 0; w < nw; ++w) {
            int zidx = j * nw + w;
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                int aidx = ev->alpha_index(0, j, w, static_cast<int>(r));
                nlp::CompPair cp;
                cp.a = [aidx](std::span<const double> x, std::span<double> g) {
                    std::fill(g.begin(), g.end(), 0.0);
                    g[aidx] = 1;
                    return x[aidx];
                };
                int ri = static_cast<int>(r);
                cp.b = [ev, j, ri, zidx, &inst](std::span<const double> x, std::span<double> g) {
                    ev->refresh(x);
                    std::fill(g.begin(), g.end(), 0.0);
                    double f = 0;
                    for (int c = 0; c < inst.n_scenarios(); ++c) {
                        double pc = inst.scenarios[c].probability;
                        f += pc * ev->J(c, j, ri);
                        ev->stamp_J(c, j, ri, pc, g);
                    }
                    g[zidx] -= 1;
                    return f - x[zidx];
                };
                prog.p.comp.push_back(std::move(cp));
            }
        }
    return prog;
}

Program build_so_program(const ProblemInstance& inst) {
    Program prog;
    prog.ev = std::make_shared<Evaluator>(inst, PolicyMode::scenario_dependent, 0);
    prog.p.blocks = prog.ev->blocks();
    prog.p.objective = make_so_objective(prog.ev, inst.lambda, inst.mu,
                                         objective_scale(inst, inst.lambda, inst.mu, false));
    return prog;
}

Program build_ops_program(const ProblemInstance& inst, const UeReference& ue_ref) {
    int v = inst.n_od(), nw = inst.n_classes(), ns = inst.n_scenarios();
    Program prog;
    // free variables: payments pi[c][j][w][r]
    int n_pi = 0;
    prog.pi_off.assign(ns, {});
    for (int c = 0; c < ns; ++c) {
        prog.pi_off[c].assign(v * nw, 0);
        for (int j = 0; j < v; ++j)
            for (int w = 0; w < nw; ++w) {
                prog.pi_off[c][j * nw + w] = n_pi;
                n_pi += static_cast<int>(inst.routes[j].size());
            }
    }
    auto pidx = [po = prog.pi_off, nw](int c, int j, int w, int r) {
        return po[c][j * nw + w] + r;
    };
    prog.ev = std::make_shared<Evaluator>(inst, PolicyMode::scenario_dependent, n_pi);
    const EvPtr& ev = prog.ev;
    AopsCoefs K = aops_coefs(inst, ue_ref);
    prog.degenerate = K.degenerate;

    prog.p.n_free = n_pi;
    prog.p.blocks = ev->blocks();
    prog.p.objective = make_so_objective(ev, inst.lambda, inst.mu,
                                         objective_scale(inst, inst.lambda, inst.mu, false));

    // Pareto-improvement, hours, per (j,w)
    for (int j = 0; j < v; ++j)
        for (int w = 0; w < nw; ++w) {
            double sw = inst.classes[w].vot;
            double abar = K.a_bar[j];
            prog.p.ineq.push_back([ev, &inst, pidx, j, w, sw, abar](std::span<const double> x,
                                                                    std::span<double> g) {
                ev->refresh(x);
                std::fill(g.begin(), g.end(), 0.0);
                double val = -abar;
                for (int c = 0; c < inst.n_scenarios(); ++c) {
                    double pc = inst.scenarios[c].probability;
                    for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                        int ri = static_cast<int>(r);
                        double a = ev->alpha(c, j, w, ri), pi = x[pidx(c, j, w, ri)];
                        val += pc * a * (ev->J(c, j, ri) + pi / sw);
                        g[ev->alpha_index(c, j, w, ri)] += pc * (ev->J(c, j, ri) + pi / sw);
                        g[pidx(c, j, w, ri)] += pc * a / sw;
                        ev->stamp_J(c, j, ri, pc * a, g);
                    }
                }
                return val;
            });
        }
    // ex-ante truthfulness, hours, per (j, i != k)
    for (int j = 0; j < v; ++j)
        for (int i = 0; i < nw; ++i)
            for (int k = 0; k < nw; ++k) {
                if (i == k) continue;
                double si = inst.classes[i].vot;
                prog.p.ineq.push_back([ev, &inst, pidx, j, i, k, si](std::span<const double> x,
                                                                     std::span<double> g) {
                    ev->refresh(x);
                    std::fill(g.begin(), g.end(), 0.0);
                    double val = 0;
                    for (int c = 0; c < inst.n_scenarios(); ++c) {
                        double pc = inst.scenarios[c].probability;
                        for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                            int ri = static_cast<int>(r);
                            double ai = ev->alpha(c, j, i, ri), ak = ev->alpha(c, j, k, ri);
                            double pi_i = x[pidx(c, j, i, ri)], pi_k = x[pidx(c, j, k, ri)];
                            double jv = ev->J(c, j, ri);
                            val += pc * (ai * (jv + pi_i / si) - ak * (jv + pi_k / si));
                            g[ev->alpha_index(c, j, i, ri)] += pc * (jv + pi_i / si);
                            g[ev->alpha_index(c, j, k, ri)] -= pc * (jv + pi_k / si);
                            g[pidx(c, j, i, ri)] += pc * ai / si;
                            g[pidx(c, j, k, ri)] -= pc * ak / si;
                            ev->stamp_J(c, j, ri, pc * (ai - ak), g);
                        }
                    }
                    return val;
                });
            }
    // budget balance, scaled to currency-free units
    double bscale = 1.0 / std::max(1.0, ue_ref.e_t_mon_ue);
    prog.p.eq.push_back([ev, &inst, pidx, bscale](std::span<const double> x,
                                                  std::span<double> g) {
        ev->refresh(x);
        std::fill(g.begin(), g.end(), 0.0);
        double val = 0;
        for (int c = 0; c < inst.n_scenarios(); ++c) {
            double pc = inst.scenarios[c].probability;
            for (int j = 0; j < inst.n_od(); ++j)
                for (int w = 0; w < inst.n_classes(); ++w) {
                    double d = inst.scenarios[c].demand[j][w];
                    if (d == 0) continue;
                    for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                        int ri = static_cast<int>(r);
                        double a = ev->alpha(c, j, w, ri), pi = x[pidx(c, j, w, ri)];
                        val += bscale * pc * d * a * pi;
                        g[ev->alpha_index(c, j, w, ri)] += bscale * pc * d * pi;
                        g[pidx(c, j, w, ri)] += bscale * pc * d * a;
                    }
                }
        }
        return val;
    });
    return prog;
}

Program build_aops_program(const ProblemInstance& inst, const UeReference& ue_ref, bool ex_post) {
    int v = inst.n_od(), nw = inst.n_classes(), ns = inst.n_scenarios();
    Program prog;
    prog.ev = std::make_shared<Evaluator>(inst, PolicyMode::scenario_dependent, 0);
    const EvPtr& ev = prog.ev;
    AopsCoefs K = aops_coefs(inst, ue_ref);
    prog.degenerate = K.degenerate;
    double mon_ue = ue_ref.e_t_mon_ue;

    prog.p.blocks = ev->blocks();
    prog.p.objective = make_so_objective(ev, inst.lambda, inst.mu,
                                         objective_scale(inst, inst.lambda, inst.mu, false));
    // E[T_mon] <= E[T_mon,UE], scaled by T_max so the tolerance is in hours:
    // the worst per-class Pareto residual under the closed-form payments equals
    // (E[T_mon] - E[T_mon,UE]) * T_w <= this constraint's violation.
    double t_max = std::max(K.t_max, 1e-12);
    prog.p.ineq.push_back([ev, t_max, mon_ue](std::span<const double> x, std::span<double> g) {
        ev->refresh(x);
        std::fill(g.begin(), g.end(), 0.0);
        double mon = ev->add_e_t_mon(t_max, g);
        return t_max * (mon - mon_ue);
    });
    if (!ex_post) {
        // H <= N per (j, i != k)
        for (int j = 0; j < v; ++j)
            for (int i = 0; i < nw; ++i)
                for (int k = 0; k < nw; ++k) {
                    if (i == k) continue;
                    double ratio = inst.classes[k].vot / inst.classes[i].vot;
                    double kik = K.t_over_s[i] - ratio * K.t_over_s[k];
                    double abar = K.a_bar[j];
                    prog.p.ineq.push_back([ev, &inst, j, k, ratio, kik, abar, mon_ue](
                                              std::span<const double> x, std::span<double> g) {
                        ev->refresh(x);
                        std::fill(g.begin(), g.end(), 0.0);
                        double mon = ev->add_e_t_mon(kik, g);
                        double b = 0;
                        for (int c = 0; c < inst.n_scenarios(); ++c) {
                            double pc = inst.scenarios[c].probability;
                            for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                                int ri = static_cast<int>(r);
                                b += pc * ev->alpha(c, j, k, ri) * ev->J(c, j, ri);
                                g[ev->alpha_index(c, j, k, ri)] -=
                                    (1 - ratio) * pc * ev->J(c, j, ri);
                                ev->stamp_J(c, j, ri, -(1 - ratio) * pc * ev->alpha(c, j, k, ri),
                                            g);
                            }
                        }
                        return (1 - ratio) * (abar - b) + kik * (mon - mon_ue);
                    });
                }
    } else {
        // Q <= U per (c, j, i != k)
        for (int c = 0; c < ns; ++c)
            for (int j = 0; j < v; ++j)
                for (int i = 0; i < nw; ++i)
                    for (int k = 0; k < nw; ++k) {
                        if (i == k) continue;
                        double si = inst.classes[i].vot;
                        double ratio = inst.classes[k].vot / si;
                        double kc = K.shr[c][i] / si - ratio * K.shr[c][k] / inst.classes[k].vot;
                        double a_cj = ue_ref.a_ue[c][j];
                        prog.p.ineq.push_back([ev, &inst, c, j, k, ratio, kc, a_cj, mon_ue](
                                                  std::span<const double> x, std::span<double> g) {
                            ev->refresh(x);
                            std::fill(g.begin(), g.end(), 0.0);
                            double mon = ev->add_e_t_mon(kc, g);
                            double b = 0;
                            for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                                int ri = static_cast<int>(r);
                                b += ev->alpha(c, j, k, ri) * ev->J(c, j, ri);
                                g[ev->alpha_index(c, j, k, ri)] -= (1 - ratio) * ev->J(c, j, ri);
                                ev->stamp_J(c, j, ri, -(1 - ratio) * ev->alpha(c, j, k, ri), g);
                            }
                            return (1 - ratio) * (a_cj - b) + kc * (mon - mon_ue);
                        });
                    }
    }
    return prog;
}

Program build_cpurr_program(const ProblemInstance& inst) {
    int v = inst.n_od(), nw = inst.n_classes(), ns = inst.n_scenarios();
    Program prog;
    // free variables: zeta[j][w] then tolls[j][r]
    int n_zeta = v * nw, n_tolls = 0;
    prog.toll_off.assign(v, 0);
    for (int j = 0; j < v; ++j) {
        prog.toll_off[j] = n_zeta + n_tolls;
        n_tolls += static_cast<int>(inst.routes[j].size());
    }
    prog.ev = std::make_shared<Evaluator>(inst, PolicyMode::scenario_independent,
                                          n_zeta + n_tolls);
    const EvPtr& ev = prog.ev;
    // expected demand per (j,w), used by the budget constraint
    std::vector<std::vector<double>> dbar(v, std::vector<double>(nw, 0.0));
    double money = 0;
    for (int c = 0; c < ns; ++c)
        for (int j = 0; j < v; ++j)
            for (int w = 0; w < nw; ++w) {
                dbar[j][w] += inst.scenarios[c].probability * inst.scenarios[c].demand[j][w];
                money += inst.scenarios[c].probability * inst.scenarios[c].demand[j][w] *
                         inst.classes[w].vot;
            }
    double bscale = 1.0 / std::max(1.0, money);

    prog.p.n_free = n_zeta + n_tolls;
    prog.p.blocks = ev->blocks();
    prog.p.objective = make_so_objective(ev, inst.lambda, inst.mu,
                                         objective_scale(inst, inst.lambda, inst.mu, false));
    for (int j = 0; j < v; ++j)
        for (int w = 0; w < nw; ++w) {
            int zidx = j * nw + w;
            double sw = inst.classes[w].vot;
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                int ri = static_cast<int>(r);
                int aidx = ev->alpha_index(0, j, w, ri), tidx = prog.toll_off[j] + ri;
                nlp::CompPair cp;
                cp.a = [aidx](std::span<const double> x, std::span<double> g) {
                    std::fill(g.begin(), g.end(), 0.0);
                    g[aidx] = 1;
                    return x[aidx];
                };
                cp.b = [ev, &inst, j, ri, zidx, tidx, sw](std::span<const double> x,
                                                          std::span<double> g) {
                    ev->refresh(x);
                    std::fill(g.begin(), g.end(), 0.0);
                    double f = x[tidx] / sw - x[zidx];
                    for (int c = 0; c < inst.n_scenarios(); ++c) {
                        double pc = inst.scenarios[c].probability;
                        f += pc * ev->J(c, j, ri);
                        ev->stamp_J(c, j, ri, pc, g);
                    }
                    g[tidx] += 1 / sw;
                    g[zidx] -= 1;
                    return f;
                };
                prog.p.comp.push_back(std::move(cp));
            }
        }
    prog.p.eq.push_back([ev, &inst, dbar, toll_off = prog.toll_off, bscale](
                            std::span<const double> x, std::span<double> g) {
        std::fill(g.begin(), g.end(), 0.0);
        double val = 0;
        for (int j = 0; j < inst.n_od(); ++j)
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                int ri = static_cast<int>(r), tidx = toll_off[j] + ri;
                for (int w = 0; w < inst.n_classes(); ++w) {
                    int aidx = ev->alpha_index(0, j, w, ri);
                    val += bscale * dbar[j][w] * x[aidx] * x[tidx];
                    g[aidx] += bscale * dbar[j][w] * x[tidx];
                    g[tidx] += bscale * dbar[j][w] * x[aidx];
                }
            }
        return val;
    });
    return prog;
}

}  // namespace

SchemeResult solve_ue(const ProblemInstance& inst, const nlp::SolveOptions& opts) {
    inst.validate();
    int v = inst.n_od(), nw = inst.n_classes();
    Program prog = build_ue_program(inst);
    const EvPtr& ev = prog.ev;

    nlp::SolveOptions o = opts;
    // verification measures complementarity against the implied zeta = min F,
    // up to twice the solver's own slack; leave margin for that
    o.constraint_tol = 0.4 * opts.constraint_tol;
    if (!o.warm_start) {
        auto zeta_point = [&](const RoutingPolicy& pol) {
            std::vector<double> x0 = ev->encode(pol);
            for (int j = 0; j < v; ++j) {
                double fmin = std::numeric_limits<double>::infinity();
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    fmin = std::min(fmin,
                                    expected_route_time(inst, pol, j, 0, static_cast<int>(r)));
                for (int w = 0; w < nw; ++w) x0[j * nw + w] = fmin;
            }
            return x0;
        };
        auto starts = equilibrium_starts(inst, o.multistart, o.seed);
        o.warm_start = zeta_point(starts[0]);
        for (std::size_t i = 1; i < starts.size(); ++i)
            o.extra_starts.push_back(zeta_point(starts[i]));
    }
    nlp::SolveResult sr = nlp::solve_mpcc(prog.p, o);
    SchemeResult res;
    res.scheme = SchemeId::ue;
    finish(res, inst, ev, sr);
    res.aux.zeta.assign(v, std::vector<double>(nw, 0.0));
    for (int j = 0; j < v; ++j)
        for (int w = 0; w < nw; ++w) res.aux.zeta[j][w] = sr.point[j * nw + w];
    // among equal-cost decompositions of the same equilibrium, prefer the
    // class-symmetric representative the payment machinery assumes; the MPCC
    // point is kept whenever symmetry costs objective or equilibrium quality
    {
        auto br = oracle::best_response_ue(inst, 50, 1.0, &res.policy);
        FlowMetrics cm = flow_metrics(inst, br.policy);
        double cur = inst.lambda * res.metrics.e_t_tr + (1 - inst.lambda) * res.metrics.e_t_mon;
        double cand = inst.lambda * cm.e_t_tr + (1 - inst.lambda) * cm.e_t_mon;
        // equal cost up to the solver's own resolution (the 1e-5 regret band)
        if (br.converged && cand <= cur + 1e-5 * std::max(1.0, std::abs(cur))) {
            res.policy = std::move(br.policy);
            res.metrics = cm;
            for (int j = 0; j < v; ++j) {
                double fmin = std::numeric_limits<double>::infinity();
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    fmin = std::min(
                        fmin, expected_route_time(inst, res.policy, j, 0, static_cast<int>(r)));
                for (int w = 0; w < nw; ++w) res.aux.zeta[j][w] = fmin;
            }
        }
    }
    res.verification = verify(inst, res, ue_reference(inst, res.policy));
    return res;
}

SchemeResult solve_so(const ProblemInstance& inst, const nlp::SolveOptions& opts,
                      const RoutingPolicy* warm) {
    inst.validate();
    Program prog = build_so_program(inst);
    const EvPtr& ev = prog.ev;
    nlp::SolveOptions o = opts;
    if (warm) o.warm_start = ev->encode(expand_policy(inst, *warm, PolicyMode::scenario_dependent));
    nlp::SolveResult sr = nlp::solve(prog.p, o);
    SchemeResult res;
    res.scheme = SchemeId::so;
    finish(res, inst, ev, sr);
    return res;
}

SchemeResult solve_ops(const ProblemInstance& inst, const UeReference& ue_ref,
                       const nlp::SolveOptions& opts, const RoutingPolicy* warm_policy,
                       const PaymentSchedule* warm_payments) {
    inst.validate();
    int v = inst.n_od(), nw = inst.n_classes(), ns = inst.n_scenarios();
    Program prog = build_ops_program(inst, ue_ref);
    const EvPtr& ev = prog.ev;
    auto pidx = [&](int c, int j, int w, int r) { return prog.pi_off[c][j * nw + w] + r; };

    nlp::SolveOptions o = opts;
    {
        const RoutingPolicy& wp = warm_policy ? *warm_policy : ue_ref.policy;
        auto x0 = ev->encode(expand_policy(inst, wp, PolicyMode::scenario_dependent));
        if (warm_payments)
            for (int c = 0; c < ns; ++c)
                for (int j = 0; j < v; ++j)
                    for (int w = 0; w < nw; ++w)
                        for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                            x0[pidx(c, j, w, static_cast<int>(r))] =
                                warm_payments->at(c, j, w, static_cast<int>(r));
        o.warm_start = std::move(x0);
        // restarts: perturbed routings carrying their closed-form payments,
        // which keep the budget/Pareto constraints near-feasible; uniform
        // random payments would start every restart deep in infeasibility
        if (o.extra_starts.empty()) {
            std::mt19937_64 rng(o.seed ^ 0x94d049bb133111ebull);
            std::exponential_distribution<double> dexp(1.0);
            RoutingPolicy base = expand_policy(inst, wp, PolicyMode::scenario_dependent);
            for (int t = 1; t < o.multistart; ++t) {
                RoutingPolicy rp = base;
                for (auto& pc : rp.alpha)
                    for (auto& pj : pc)
                        for (auto& pw : pj) {
                            double sum = 0;
                            std::vector<double> noise(pw.size());
                            for (double& z : noise) sum += (z = dexp(rng));
                            for (std::size_t r = 0; r < pw.size(); ++r)
                                pw[r] = 0.95 * pw[r] + 0.05 * noise[r] / sum;
                        }
                PaymentSchedule pk = aops_payments(inst, rp, ue_ref);
                auto xk = ev->encode(rp);
                for (int c = 0; c < ns; ++c)
                    for (int j = 0; j < v; ++j)
                        for (int w = 0; w < nw; ++w)
                            for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                                xk[pidx(c, j, w, static_cast<int>(r))] =
                                    pk.at(c, j, w, static_cast<int>(r));
                o.extra_starts.push_back(std::move(xk));
            }
        }
    }
    nlp::SolveResult sr = nlp::solve(prog.p, o);
    SchemeResult res;
    res.scheme = SchemeId::ops;
    finish(res, inst, ev, sr);
    PaymentSchedule ps;
    ps.mode = PolicyMode::scenario_dependent;
    ps.pi = RoutingPolicy::zero_tensor(inst, PolicyMode::scenario_dependent);
    for (int c = 0; c < ns; ++c)
        for (int j = 0; j < v; ++j)
            for (int w = 0; w < nw; ++w)
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    ps.pi[c][j][w][r] = sr.point[pidx(c, j, w, static_cast<int>(r))];
    res.payments = std::move(ps);
    res.degenerate_class = prog.degenerate;
    res.verification = verify(inst, res, ue_ref);
    return res;
}

PaymentSchedule aops_payments(const ProblemInstance& inst, const RoutingPolicy& policy,
                              const UeReference& ue_ref, bool* degenerate) {
    RoutingPolicy pol = expand_policy(inst, policy, PolicyMode::scenario_dependent);
    AopsCoefs K = aops_coefs(inst, ue_ref);
    if (degenerate) *degenerate = K.degenerate;
    double dmon = flow_metrics(inst, pol).e_t_mon - ue_ref.e_t_mon_ue;
    PaymentSchedule ps;
    ps.mode = PolicyMode::scenario_dependent;
    ps.pi = RoutingPolicy::zero_tensor(inst, PolicyMode::scenario_dependent);
    for (int c = 0; c < inst.n_scenarios(); ++c) {
        auto flow = truck_link_flows(inst, pol, c);
        std::vector<double> times(inst.network.num_links());
        for (int l = 0; l < inst.network.num_links(); ++l)
            times[l] = link_time(inst.network.links[l], flow[l], inst.pce);
        for (int j = 0; j < inst.n_od(); ++j)
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                double jt = 0;
                for (int li : inst.routes[j][r].links) jt += times[li];
                for (int w = 0; w < inst.n_classes(); ++w)
                    ps.pi[c][j][w][r] =
                        inst.classes[w].vot * (ue_ref.a_ue[c][j] - jt) + K.shr[c][w] * dmon;
            }
    }
    return ps;
}

namespace {

SchemeResult solve_aops_impl(const ProblemInstance& inst, const UeReference& ue_ref,
                             const nlp::SolveOptions& opts, bool ex_post) {
    inst.validate();
    Program prog = build_aops_program(inst, ue_ref, ex_post);
    const EvPtr& ev = prog.ev;

    nlp::SolveOptions o = opts;
    o.warm_start = ev->encode(expand_policy(inst, ue_ref.policy, PolicyMode::scenario_dependent));
    nlp::SolveResult sr = nlp::solve(prog.p, o);
    SchemeResult res;
    res.scheme = ex_post ? SchemeId::aops_ept : SchemeId::aops;
    finish(res, inst, ev, sr);
    res.payments = aops_payments(inst, res.policy, ue_ref, &res.degenerate_class);
    res.verification = verify(inst, res, ue_ref);
    return res;
}

}  // namespace

SchemeResult solve_aops(const ProblemInstance& inst, const UeReference& ue_ref,
                        const nlp::SolveOptions& opts) {
    return solve_aops_impl(inst, ue_ref, opts, false);
}

SchemeResult solve_aops_ept(const ProblemInstance& inst, const UeReference& ue_ref,
                            const nlp::SolveOptions& opts) {
    return solve_aops_impl(inst, ue_ref, opts, true);
}

SchemeResult solve_cpurr(const ProblemInstance& inst, const nlp::SolveOptions& opts,
                         const RoutingPolicy* warm) {
    inst.validate();
    int v = inst.n_od(), nw = inst.n_classes();
    Program prog = build_cpurr_program(inst);
    const EvPtr& ev = prog.ev;
    const std::vector<int>& toll_off = prog.toll_off;

    nlp::SolveOptions o = opts;
    // margin against the implied-zeta verification, as in solve_ue
    o.constraint_tol = 0.4 * opts.constraint_tol;
    // implied zeta: expected tolled time of a best route at zero tolls
    auto zeta_point = [&](const RoutingPolicy& pol) {
        auto x0 = ev->encode(pol);
        for (int j = 0; j < v; ++j) {
            double fmin = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                fmin = std::min(fmin,
                                expected_route_time(inst, pol, j, 0, static_cast<int>(r)));
            for (int w = 0; w < nw; ++w) x0[j * nw + w] = fmin;
        }
        return x0;
    };
    if (!o.warm_start) {
        std::vector<RoutingPolicy> starts;
        if (warm) starts.push_back(*warm);
        for (auto& s : equilibrium_starts(inst, o.multistart - static_cast<int>(starts.size()),
                                          o.seed))
            starts.push_back(std::move(s));
        o.warm_start = zeta_point(starts[0]);
        for (std::size_t i = 1; i < starts.size(); ++i)
            o.extra_starts.push_back(zeta_point(starts[i]));
    }
    nlp::SolveResult sr = nlp::solve_mpcc(prog.p, o);
    SchemeResult res;
    res.scheme = SchemeId::cpurr;
    finish(res, inst, ev, sr);
    res.aux.zeta.assign(v, std::vector<double>(nw, 0.0));
    res.aux.tolls.resize(v);
    for (int j = 0; j < v; ++j) {
        for (int w = 0; w < nw; ++w) res.aux.zeta[j][w] = sr.point[j * nw + w];
        res.aux.tolls[j].resize(inst.routes[j].size());
        for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
            res.aux.tolls[j][r] = sr.point[toll_off[j] + static_cast<int>(r)];
    }
    PaymentSchedule ps;
    ps.mode = PolicyMode::scenario_independent;
    ps.pi = RoutingPolicy::zero_tensor(inst, PolicyMode::scenario_independent);
    for (int j = 0; j < v; ++j)
        for (int w = 0; w < nw; ++w)
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                ps.pi[0][j][w][r] = res.aux.tolls[j][r];
    res.payments = std::move(ps);
    // CPURR has no external UE reference; budget and complementarity are the
    // meaningful residuals, the Pareto fields are relative to its own times.
    res.verification = verify(inst, res, ue_reference(inst, res.policy));
    return res;
}

namespace {
// per-(c,j,r) route times under a policy
std::vector<std::vector<std::vector<double>>> route_times_all(const ProblemInstance& inst,
                                                              const RoutingPolicy& pol) {
    std::vector<std::vector<std::vector<double>>> jt(inst.n_scenarios());
    for (int c = 0; c < inst.n_scenarios(); ++c) {
        auto flow = truck_link_flows(inst, pol, c);
        std::vector<double> times(inst.network.num_links());
        for (int l = 0; l < inst.network.num_links(); ++l)
            times[l] = link_time(inst.network.links[l], flow[l], inst.pce);
        jt[c].resize(inst.n_od());
        for (int j = 0; j < inst.n_od(); ++j) {
            jt[c][j].assign(inst.routes[j].size(), 0.0);
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                for (int li : inst.routes[j][r].links) jt[c][j][r] += times[li];
        }
    }
    return jt;
}
}  // namespace

VerificationReport verify(const ProblemInstance& inst, const SchemeResult& result,
                          const UeReference& ue_ref) {
    VerificationReport rep;
    const RoutingPolicy& pol = result.policy;
    auto jt = route_times_all(inst, pol);
    auto pi_at = [&](int c, int j, int w, int r) {
        return result.payments ? result.payments->at(c, j, w, r) : 0.0;
    };
    int v = inst.n_od(), nw = inst.n_classes(), ns = inst.n_scenarios();

    // expected cost in hours per (j,w) declaring class k's routing/payments,
    // charged at class w's VOT; and its per-scenario version
    auto cost_exante = [&](int j, int w, int k) {
        double val = 0;
        for (int c = 0; c < ns; ++c) {
            double pc = inst.scenarios[c].probability;
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                val += pc * pol.at(c, j, k, static_cast<int>(r)) *
                       (jt[c][j][r] + pi_at(c, j, k, static_cast<int>(r)) / inst.classes[w].vot);
        }
        return val;
    };
    auto cost_expost = [&](int c, int j, int w, int k) {
        double val = 0;
        for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
            val += pol.at(c, j, k, static_cast<int>(r)) *
                   (jt[c][j][r] + pi_at(c, j, k, static_cast<int>(r)) / inst.classes[w].vot);
        return val;
    };

    std::vector<double> a_bar(v, 0.0);
    for (int j = 0; j < v; ++j)
        for (int c = 0; c < ns; ++c)
            a_bar[j] += inst.scenarios[c].probability * ue_ref.a_ue[c][j];

    for (int j = 0; j < v; ++j)
        for (int w = 0; w < nw; ++w) {
            rep.pareto_exante_resid =
                std::max(rep.pareto_exante_resid, cost_exante(j, w, w) - a_bar[j]);
            for (int k = 0; k < nw; ++k) {
                if (k == w) continue;
                rep.truthful_exante_resid = std::max(
                    rep.truthful_exante_resid, cost_exante(j, w, w) - cost_exante(j, w, k));
                for (int c = 0; c < ns; ++c)
                    rep.truthful_expost_resid =
                        std::max(rep.truthful_expost_resid,
                                 cost_expost(c, j, w, w) - cost_expost(c, j, w, k));
            }
            for (int c = 0; c < ns; ++c)
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    if (pol.at(c, j, w, static_cast<int>(r)) > 1e-6)
                        rep.robust_pareto_resid =
                            std::max(rep.robust_pareto_resid,
                                     jt[c][j][r] +
                                         pi_at(c, j, w, static_cast<int>(r)) /
                                             inst.classes[w].vot -
                                         ue_ref.a_ue[c][j]);
        }
    rep.pareto_exante_resid = std::max(rep.pareto_exante_resid, 0.0);
    rep.truthful_exante_resid = std::max(rep.truthful_exante_resid, 0.0);
    rep.truthful_expost_resid = std::max(rep.truthful_expost_resid, 0.0);
    rep.robust_pareto_resid = std::max(rep.robust_pareto_resid, 0.0);

    double budget = 0;
    for (int c = 0; c < ns; ++c) {
        double pc = inst.scenarios[c].probability;
        for (int j = 0; j < v; ++j)
            for (int w = 0; w < nw; ++w)
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    budget += pc * inst.scenarios[c].demand[j][w] *
                              pol.at(c, j, w, static_cast<int>(r)) *
                              pi_at(c, j, w, static_cast<int>(r));
    }
    rep.budget_resid = std::abs(budget);

    if (result.scheme == SchemeId::ue || result.scheme == SchemeId::cpurr) {
        rep.has_ue_comp = true;
        for (int j = 0; j < v; ++j)
            for (int w = 0; w < nw; ++w) {
                std::vector<double> f(inst.routes[j].size(), 0.0);
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                    for (int c = 0; c < ns; ++c)
                        f[r] += inst.scenarios[c].probability * jt[c][j][r];
                    if (result.scheme == SchemeId::cpurr)
                        f[r] += result.aux.tolls[j][r] / inst.classes[w].vot;
                }
                double zeta = *std::min_element(f.begin(), f.end());
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    rep.ue_comp_resid =
                        std::max(rep.ue_comp_resid,
                                 std::min(pol.at(0, j, w, static_cast<int>(r)), f[r] - zeta));
            }
    }
    return rep;
}

double program_grad_check(const ProblemInstance& inst, SchemeId scheme,
                          const UeReference* ue_ref, int points, std::uint64_t seed, double h) {
    inst.validate();
    bool needs_ref =
        scheme == SchemeId::ops || scheme == SchemeId::aops || scheme == SchemeId::aops_ept;
    if (needs_ref && !ue_ref) throw InputError("program_grad_check: scheme requires a UE reference");
    Program prog;
    switch (scheme) {
        case SchemeId::ue: prog = build_ue_program(inst); break;
        case SchemeId::so: prog = build_so_program(inst); break;
        case SchemeId::ops: prog = build_ops_program(inst, *ue_ref); break;
        case SchemeId::aops: prog = build_aops_program(inst, *ue_ref, false); break;
        case SchemeId::aops_ept: prog = build_aops_program(inst, *ue_ref, true); break;
        case SchemeId::cpurr: prog = build_cpurr_program(inst); break;
    }
    std::mt19937_64 rng(seed ^ 0xd1b54a32d192ed03ull);
    std::uniform_real_distribution<double> ufree(0.0, 100.0), ua(0.0, 1.0);
    double worst = 0;
    for (int t = 0; t < points; ++t) {
        std::vector<double> x(prog.p.dim(), 0.0);
        for (int i = 0; i < prog.p.n_free; ++i) x[i] = ufree(rng);
        for (const nlp::SimplexBlock& b : prog.p.blocks) {
            std::span<double> blk(x.data() + b.offset, b.size);
            for (double& a : blk) a = ua(rng);
            nlp::project_simplex_inplace(blk);
        }
        worst = std::max(worst, nlp::grad_check(prog.p, x, h));
    }
    return worst;
}

double monetary_gap(const ProblemInstance& inst, const RoutingPolicy& policy,
                    const UeReference& ue_ref) {
    return flow_metrics(inst, policy).e_t_mon - ue_ref.e_t_mon_ue;
}

double exante_truthful_gap(const ProblemInstance& inst, const RoutingPolicy& policy,
                           const UeReference& ue_ref) {
    RoutingPolicy pol = expand_policy(inst, policy, PolicyMode::scenario_dependent);
    AopsCoefs K = aops_coefs(inst, ue_ref);
    double dmon = monetary_gap(inst, pol, ue_ref);
    auto jt = route_times_all(inst, pol);
    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < inst.n_od(); ++j)
        for (int i = 0; i < inst.n_classes(); ++i)
            for (int k = 0; k < inst.n_classes(); ++k) {
                if (i == k) continue;
                double ratio = inst.classes[k].vot / inst.classes[i].vot;
                double b = 0;
                for (int c = 0; c < inst.n_scenarios(); ++c)
                    for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                        b += inst.scenarios[c].probability * pol.at(c, j, k, static_cast<int>(r)) *
                             jt[c][j][r];
                double gap = (1 - ratio) * (K.a_bar[j] - b) +
                             (K.t_over_s[i] - ratio * K.t_over_s[k]) * dmon;
                worst = std::max(worst, gap);
            }
    return worst;
}

double expost_truthful_gap(const ProblemInstance& inst, const RoutingPolicy& policy,
                           const UeReference& ue_ref) {
    RoutingPolicy pol = expand_policy(inst, policy, PolicyMode::scenario_dependent);
    AopsCoefs K = aops_coefs(inst, ue_ref);
    double dmon = monetary_gap(inst, pol, ue_ref);
    auto jt = route_times_all(inst, pol);
    double worst = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < inst.n_scenarios(); ++c)
        for (int j = 0; j < inst.n_od(); ++j)
            for (int i = 0; i < inst.n_classes(); ++i)
                for (int k = 0; k < inst.n_classes(); ++k) {
                    if (i == k) continue;
                    double si = inst.classes[i].vot, sk = inst.classes[k].vot;
                    double ratio = sk / si;
                    double b = 0;
                    for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                        b += pol.at(c, j, k, static_cast<int>(r)) * jt[c][j][r];
                    double gap = (1 - ratio) * (ue_ref.a_ue[c][j] - b) +
                                 (K.shr[c][i] / si - ratio * K.shr[c][k] / sk) * dmon;
                    worst = std::max(worst, gap);
                }
    return worst;
}

}  // namespace freight
