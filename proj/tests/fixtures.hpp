#pragma once

#include "freight/cli.hpp"

#include <random>
#include <string>

namespace freight::testfix {

// fixture P1: two parallel links, route A constant time 1, route B time x_B^4
inline const char* p1_network =
    "nodes 2\n"
    "link A 1 2 1 0 1 0\n"
    "link B 1 2 0 1 3 0\n";

inline const char* p1_instance =
    "[classes]\n"
    "vot 100\n"
    "[od_pairs]\n"
    "od 1 2\n"
    "[routes]\n"
    "k 2\n"
    "[scenarios]\n"
    "scenario 1\n"
    "demand 2\n"
    "[weights]\n"
    "lambda 1\n"
    "mu 1\n"
    "pce 3\n";

inline ProblemInstance make_p1() {
    Network net = parse_network(p1_network);
    return load_instance(p1_instance, net);
}

// route index of link B in the k-enumerated P1 route list
inline int p1_route_b(const ProblemInstance& inst) {
    for (std::size_t r = 0; r < inst.routes[0].size(); ++r)
        if (inst.network.links[inst.routes[0][r].links[0]].id == "B")
            return static_cast<int>(r);
    return -1;
}

// scenario-independent P1 policy with the given share on route B
inline RoutingPolicy p1_policy(const ProblemInstance& inst, double alpha_b) {
    RoutingPolicy pol = RoutingPolicy::uniform(inst, PolicyMode::scenario_independent);
    int rb = p1_route_b(inst);
    pol.alpha[0][0][0][rb] = alpha_b;
    pol.alpha[0][0][0][1 - rb] = 1.0 - alpha_b;
    return pol;
}

// 1 OD pair, three parallel links, 2 classes, 2 scenarios; parameters drawn
// deterministically from the seed
inline ProblemInstance small_random_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 1);
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    std::string nettxt = "nodes 2\n";
    const char* ids[] = {"A", "B", "C"};
    for (const char* id : ids) {
        nettxt += "link " + std::string(id) + " 1 2 " + std::to_string(uni(0.1, 0.5)) + ' ' +
                  std::to_string(uni(0.1, 0.5)) + ' ' + std::to_string(uni(5.0, 15.0)) + ' ' +
                  std::to_string(uni(0.0, 10.0)) + '\n';
    }
    double p = uni(0.3, 0.7);
    std::string insttxt = "[classes]\nvot " + std::to_string(uni(20.0, 80.0)) + "\nvot " +
                          std::to_string(uni(100.0, 250.0)) +
                          "\n[od_pairs]\nod 1 2\n[routes]\nk 3\n[scenarios]\n";
    for (int c = 0; c < 2; ++c) {
        insttxt += "scenario " + std::to_string(c == 0 ? p : 1.0 - p) + "\n";
        for (int w = 0; w < 2; ++w) insttxt += "demand " + std::to_string(uni(1.0, 6.0)) + "\n";
    }
    insttxt += "[weights]\nlambda 0.9\nmu 0.9\npce 3\n";
    Network net = parse_network(nettxt);
    return load_instance(insttxt, net);
}

// like small_random_instance, but the two scenarios scale a fixed class mix
// (demand uncertainty in total volume only) and lambda = 1: the UE aggregate
// flows are then unique and the objective is flat across the remaining
// per-class decompositions, so independent methods find the same equilibrium
inline ProblemInstance small_scaled_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 2);
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    std::string nettxt = "nodes 2\n";
    const char* ids[] = {"A", "B", "C"};
    for (const char* id : ids) {
        nettxt += "link " + std::string(id) + " 1 2 " + std::to_string(uni(0.1, 0.5)) + ' ' +
                  std::to_string(uni(0.1, 0.5)) + ' ' + std::to_string(uni(5.0, 15.0)) + ' ' +
                  std::to_string(uni(0.0, 10.0)) + '\n';
    }
    double p = uni(0.3, 0.7);
    double mix[2] = {uni(1.0, 4.0), uni(1.0, 4.0)};
    double load[2] = {uni(0.5, 1.0), uni(1.0, 2.0)};
    std::string insttxt = "[classes]\nvot " + std::to_string(uni(20.0, 80.0)) + "\nvot " +
                          std::to_string(uni(100.0, 250.0)) +
                          "\n[od_pairs]\nod 1 2\n[routes]\nk 3\n[scenarios]\n";
    for (int c = 0; c < 2; ++c) {
        insttxt += "scenario " + std::to_string(c == 0 ? p : 1.0 - p) + "\n";
        for (int w = 0; w < 2; ++w) insttxt += "demand " + std::to_string(load[c] * mix[w]) + "\n";
    }
    insttxt += "[weights]\nlambda 1\nmu 0.9\npce 3\n";
    Network net = parse_network(nettxt);
    return load_instance(insttxt, net);
}

// random scenario-dependent policy, uniform over each simplex block
inline RoutingPolicy random_policy(const ProblemInstance& inst, std::mt19937_64& rng) {
    RoutingPolicy pol = RoutingPolicy::uniform(inst, PolicyMode::scenario_dependent);
    std::exponential_distribution<double> ex(1.0);
    for (auto& pc : pol.alpha)
        for (auto& pj : pc)
            for (auto& pw : pj) {
                double sum = 0;
                for (double& a : pw) {
                    a = ex(rng);
                    sum += a;
                }
                for (double& a : pw) a /= sum;
            }
    return pol;
}

}  // namespace freight::testfix
