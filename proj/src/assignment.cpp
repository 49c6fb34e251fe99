#include "freight/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <iomanip>

namespace freight {

Tensor4 RoutingPolicy::zero_tensor(const ProblemInstance& inst, PolicyMode mode) {
    int nc = mode == PolicyMode::scenario_independent ? 1 : inst.n_scenarios();
    Tensor4 t(nc);
    for (int c = 0; c < nc; ++c) {
        t[c].resize(inst.n_od());
        for (int j = 0; j < inst.n_od(); ++j)
            t[c][j].assign(inst.n_classes(), std::vector<double>(inst.routes[j].size(), 0.0));
    }
    return t;
}

RoutingPolicy RoutingPolicy::uniform(const ProblemInstance& inst, PolicyMode mode) {
    RoutingPolicy p;
    p.mode = mode;
    p.alpha = zero_tensor(inst, mode);
    for (auto& cj : p.alpha)
        for (auto& jw : cj)
            for (auto& wr : jw)
                std::fill(wr.begin(), wr.end(), 1.0 / wr.size());
    return p;
}

void RoutingPolicy::validate(const ProblemInstance& inst, double tol) const {
    int expect = mode == PolicyMode::scenario_independent ? 1 : inst.n_scenarios();
    if (stored_scenarios() != expect) throw InputError("policy scenario dimension mismatch");
    for (const auto& cj : alpha) {
        if (static_cast<int>(cj.size()) != inst.n_od()) throw InputError("policy OD dimension mismatch");
        for (int j = 0; j < inst.n_od(); ++j) {
            if (static_cast<int>(cj[j].size()) != inst.n_classes())
                throw InputError("policy class dimension mismatch");
            for (const auto& wr : cj[j]) {
                if (wr.size() != inst.routes[j].size()) throw InputError("policy route dimension mismatch");
                double sum = 0;
                for (double a : wr) {
                    if (a < -tol) throw InputError("negative route proportion");
                    sum += a;
                }
                if (std::abs(sum - 1.0) > tol) throw InputError("route proportions do not sum to 1");
            }
        }
    }
}

std::vector<double> truck_link_flows(const ProblemInstance& inst, const RoutingPolicy& policy, int c) {
    std::vector<double> flow(inst.network.num_links(), 0.0);
    const auto& dem = inst.scenarios[c].demand;
    for (int j = 0; j < inst.n_od(); ++j)
        for (int w = 0; w < inst.n_classes(); ++w) {
            double d = dem[j][w];
            if (d == 0) continue;
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                double load = d * policy.at(c, j, w, static_cast<int>(r));
                if (load == 0) continue;
                for (int li : inst.routes[j][r].links) flow[li] += load;
            }
        }
    return flow;
}

double link_time(const Link& l, double x_lt, double pce) {
    double ratio = (l.x_lp + pce * x_lt) / l.eps_c;
    double r2 = ratio * ratio;
    return l.eps_a + l.eps_b * r2 * r2;
}

double link_time_deriv(const Link& l, double x_lt, double pce) {
    double ratio = (l.x_lp + pce * x_lt) / l.eps_c;
    return 4.0 * l.eps_b * ratio * ratio * ratio * pce / l.eps_c;
}

double route_time(const ProblemInstance& inst, const Route& route, int c, const RoutingPolicy& policy) {
    auto flow = truck_link_flows(inst, policy, c);
    double t = 0;
    for (int li : route.links) t += link_time(inst.network.links[li], flow[li], inst.pce);
    return t;
}

double expected_route_time(const ProblemInstance& inst, const RoutingPolicy& policy, int j, int w, int r) {
    (void)w;  // route times are class-independent
    double f = 0;
    for (int c = 0; c < inst.n_scenarios(); ++c)
        f += inst.scenarios[c].probability * route_time(inst, inst.routes[j][r], c, policy);
    return f;
}

FlowMetrics flow_metrics(const ProblemInstance& inst, const RoutingPolicy& policy) {
    FlowMetrics m;
    // fixed accumulation order: scenario-major, link-minor
    for (int c = 0; c < inst.n_scenarios(); ++c) {
        double pc = inst.scenarios[c].probability;
        auto flow = truck_link_flows(inst, policy, c);
        std::vector<double> times(inst.network.num_links());
        for (int l = 0; l < inst.network.num_links(); ++l) {
            times[l] = link_time(inst.network.links[l], flow[l], inst.pce);
            m.e_t_tr += pc * flow[l] * times[l];
            m.e_t_p += pc * inst.network.links[l].x_lp * times[l];
        }
        for (int j = 0; j < inst.n_od(); ++j)
            for (int w = 0; w < inst.n_classes(); ++w) {
                double d = inst.scenarios[c].demand[j][w];
                if (d == 0) continue;
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                    double a = policy.at(c, j, w, static_cast<int>(r));
                    if (a == 0) continue;
                    double jt = 0;
                    for (int li : inst.routes[j][r].links) jt += times[li];
                    m.e_t_mon += pc * d * a * inst.classes[w].vot * jt;
                }
            }
    }
    m.e_t_s = m.e_t_p + m.e_t_tr;
    m.objective = inst.lambda * (inst.mu * m.e_t_tr + (1 - inst.mu) * m.e_t_p) +
                  (1 - inst.lambda) * m.e_t_mon;
    return m;
}

UeReference ue_reference(const ProblemInstance& inst, const RoutingPolicy& ue_policy) {
    if (ue_policy.mode != PolicyMode::scenario_independent)
        throw InputError("UE reference requires a scenario-independent policy");
    UeReference ref;
    ref.policy = ue_policy;
    ref.a_ue.assign(inst.n_scenarios(), std::vector<double>(inst.n_od(), 0.0));
    for (int c = 0; c < inst.n_scenarios(); ++c) {
        auto flow = truck_link_flows(inst, ue_policy, c);
        std::vector<double> times(inst.network.num_links());
        for (int l = 0; l < inst.network.num_links(); ++l)
            times[l] = link_time(inst.network.links[l], flow[l], inst.pce);
        for (int j = 0; j < inst.n_od(); ++j) {
            // per-class averages; the UE makes these identical, so we report the
            // demand-weighted mean and record the numerical spread
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            double num = 0, den = 0, plain = 0;
            for (int w = 0; w < inst.n_classes(); ++w) {
                double aw = 0;
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r) {
                    double jt = 0;
                    for (int li : inst.routes[j][r].links) jt += times[li];
                    aw += ue_policy.at(c, j, w, static_cast<int>(r)) * jt;
                }
                lo = std::min(lo, aw);
                hi = std::max(hi, aw);
                double d = inst.scenarios[c].demand[j][w];
                num += d * aw;
                den += d;
                plain += aw;
            }
            ref.a_ue[c][j] = den > 0 ? num / den : plain / inst.n_classes();
            ref.class_spread = std::max(ref.class_spread, hi - lo);
        }
    }
    ref.e_t_mon_ue = flow_metrics(inst, ue_policy).e_t_mon;
    return ref;
}

double marginal_regret(const ProblemInstance& inst, const RoutingPolicy& policy) {
    // expected route times F[j][r]
    std::vector<std::vector<double>> f(inst.n_od());
    for (int j = 0; j < inst.n_od(); ++j) f[j].assign(inst.routes[j].size(), 0.0);
    for (int c = 0; c < inst.n_scenarios(); ++c) {
        double pc = inst.scenarios[c].probability;
        auto flow = truck_link_flows(inst, policy, c);
        std::vector<double> times(inst.network.num_links());
        for (int l = 0; l < inst.network.num_links(); ++l)
            times[l] = link_time(inst.network.links[l], flow[l], inst.pce);
        for (int j = 0; j < inst.n_od(); ++j)
            for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                for (int li : inst.routes[j][r].links) f[j][r] += pc * times[li];
    }
    double num = 0, den = 0;
    for (int c = 0; c < inst.n_scenarios(); ++c) {
        double pc = inst.scenarios[c].probability;
        for (int j = 0; j < inst.n_od(); ++j) {
            double fmin = *std::min_element(f[j].begin(), f[j].end());
            for (int w = 0; w < inst.n_classes(); ++w) {
                double d = inst.scenarios[c].demand[j][w];
                double gap = 0;
                for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                    gap += policy.at(c, j, w, static_cast<int>(r)) * (f[j][r] - fmin);
                num += pc * d * gap;
                den += pc * d;
            }
        }
    }
    return den > 0 ? num / den : 0.0;
}

std::string metrics_csv_header() {
    return "scheme,lambda,mu,e_t_tr,e_t_mon,e_t_p,e_t_s,objective";
}

std::string metrics_csv_row(const std::string& scheme, double lambda, double mu, const FlowMetrics& m) {
    std::ostringstream os;
    os << scheme << ',' << std::fixed << std::setprecision(6)
       << lambda << ',' << mu << ',' << m.e_t_tr << ',' << m.e_t_mon << ','
       << m.e_t_p << ',' << m.e_t_s << ',' << m.objective;
    return os.str();
}

}  // namespace freight
