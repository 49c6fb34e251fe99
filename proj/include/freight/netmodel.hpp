#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace freight {

/// Thrown for malformed input files and invalid configurations.
/// The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Link {
    std::string id;
    int tail = 0;   // 1-based node number
    int head = 0;
    double eps_a = 0;   // free-flow time, hours
    double eps_b = 0;   // congestion coefficient, hours
    double eps_c = 1;   // capacity, passenger-car equivalents
    double x_lp = 0;    // passenger-vehicle volume, deterministic
};

struct Network {
    int n_nodes = 0;
    std::vector<Link> links;
    std::vector<std::vector<int>> out_links;            // per node (1-based; index 0 unused)
    std::unordered_map<std::string, int> link_index;

    int num_links() const { return static_cast<int>(links.size()); }
    void rebuild_adjacency();
    void validate() const;
};

/// Ordered list of link indices forming a simple path for OD pair `od`.
struct Route {
    int od = 0;
    std::vector<int> links;
};

struct VotClass {
    int index = 0;
    double vot = 0;   // currency per hour
};

struct DemandScenario {
    int index = 0;
    double probability = 0;
    // demand[j][w]: truck flow for OD pair j, class w (continuum, fractional ok)
    std::vector<std::vector<double>> demand;
};

struct ProblemInstance {
    Network network;
    std::vector<std::pair<int, int>> od_pairs;          // (origin, destination), 1-based nodes
    std::vector<std::vector<Route>> routes;             // routes[j] = R_j
    std::vector<VotClass> classes;
    std::vector<DemandScenario> scenarios;
    double lambda = 0.9;
    double mu = 0.9;
    double pce = 3.0;   // truck passenger-car-equivalent factor

    int n_od() const { return static_cast<int>(od_pairs.size()); }
    int n_classes() const { return static_cast<int>(classes.size()); }
    int n_scenarios() const { return static_cast<int>(scenarios.size()); }
    void validate() const;
};

/// Static truck-free link time C_lT(x_lp, 0), the route enumeration metric.
double free_flow_link_time(const Link& l);

Network parse_network(const std::string& text);
std::string serialize_network(const Network& net);

/// Import adapter for the community TNTP link-table layout.
/// free_flow_time -> eps_a, B*free_flow_time -> eps_b, capacity -> eps_c; x_lp = 0.
Network import_tntp(const std::string& text);

/// K shortest loopless routes for one OD pair, ranked ascending by the
/// truck-free BPR time; ties broken by lexicographic link-id sequence.
std::vector<Route> enumerate_k_least_congested(const Network& net, int od_index,
                                               std::pair<int, int> od, int k);

ProblemInstance load_instance(const std::string& config, const Network& net);
std::string serialize_instance(const ProblemInstance& inst);

/// Parameter ranges for synthetic instance generation.
struct SyntheticSpec {
    int n_od = 6;
    int n_classes = 2;
    int n_scenarios = 2;
    int k_routes = 10;
    double eps_a_min = 0.05, eps_a_max = 0.5;
    double eps_b_min = 0.05, eps_b_max = 0.5;
    double eps_c_min = 20.0, eps_c_max = 60.0;
    double x_lp_min = 5.0, x_lp_max = 40.0;
    double demand_min = 1.0, demand_max = 10.0;
    std::vector<double> vots;   // empty: drawn distinct from [vot_min, vot_max]
    double vot_min = 20.0, vot_max = 250.0;
    double lambda = 0.9;
    double mu = 0.9;
    double pce = 3.0;
    void validate() const;
};

/// Deterministic function of (net topology, seed, spec). Link cost parameters
/// are redrawn from the spec ranges; OD pairs, demands and classes are drawn
/// from the same stream.
ProblemInstance gen_synthetic(const Network& net, std::uint64_t seed, const SyntheticSpec& spec);

/// The 76 directed arcs of the Sioux Falls benchmark topology (24 nodes).
const std::vector<std::pair<int, int>>& sioux_falls_arcs();

/// Sioux Falls topology with placeholder unit parameters; pair with
/// gen_synthetic to obtain a full instance.
Network sioux_falls_network();

}  // namespace freight
