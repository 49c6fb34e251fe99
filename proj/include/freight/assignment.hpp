#pragma once

#include "freight/netmodel.hpp"

#include <string>
#include <vector>

namespace freight {

// alpha[c][j][w][r]; scenario-independent policies store the c dimension once.
using Tensor4 = std::vector<std::vector<std::vector<std::vector<double>>>>;

enum class PolicyMode { scenario_independent, scenario_dependent };

struct RoutingPolicy {
    PolicyMode mode = PolicyMode::scenario_independent;
    Tensor4 alpha;

    double at(int c, int j, int w, int r) const {
        return alpha[mode == PolicyMode::scenario_independent ? 0 : c][j][w][r];
    }
    int stored_scenarios() const { return static_cast<int>(alpha.size()); }

    static RoutingPolicy uniform(const ProblemInstance& inst, PolicyMode mode);
    static Tensor4 zero_tensor(const ProblemInstance& inst, PolicyMode mode);
    void validate(const ProblemInstance& inst, double tol = 1e-9) const;
};

struct FlowMetrics {
    double e_t_tr = 0;    // expected total truck time, truck-hours
    double e_t_mon = 0;   // expected total truck monetary cost, currency
    double e_t_p = 0;     // expected total passenger time, vehicle-hours
    double e_t_s = 0;     // e_t_p + e_t_tr
    double objective = 0; // lambda*(mu*e_t_tr + (1-mu)*e_t_p) + (1-lambda)*e_t_mon
};

struct UeReference {
    std::vector<std::vector<double>> a_ue;   // A^UE[c][j], hours
    double e_t_mon_ue = 0;
    RoutingPolicy policy;
    // max over (c,j) of the cross-class spread of per-class average times;
    // nonzero when the converged UE is only approximately class-symmetric
    double class_spread = 0;
};

std::vector<double> truck_link_flows(const ProblemInstance& inst, const RoutingPolicy& policy, int c);

double link_time(const Link& l, double x_lt, double pce);
/// d(link_time)/d(X_lT)
double link_time_deriv(const Link& l, double x_lt, double pce);

double route_time(const ProblemInstance& inst, const Route& route, int c, const RoutingPolicy& policy);
double expected_route_time(const ProblemInstance& inst, const RoutingPolicy& policy, int j, int w, int r);

FlowMetrics flow_metrics(const ProblemInstance& inst, const RoutingPolicy& policy);

UeReference ue_reference(const ProblemInstance& inst, const RoutingPolicy& ue_policy);

/// Demand-weighted average expected time saving from switching to a best
/// route; zero characterizes a user equilibrium.
double marginal_regret(const ProblemInstance& inst, const RoutingPolicy& policy);

std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& scheme, double lambda, double mu, const FlowMetrics& m);

}  // namespace freight
