#include "doctest.h"
#include "fixtures.hpp"

#include <cmath>

using namespace freight;

TEST_CASE("pigou_analytic closed forms") {
    oracle::PigouResult r = oracle::pigou_analytic(2.0, 100.0);
    CHECK(r.ue_split == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.ue_total == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.so_split == doctest::Approx(std::pow(5.0, -0.25)).epsilon(1e-12));
    CHECK(r.so_total == doctest::Approx(1.4650077560188624).epsilon(1e-12));
    CHECK(r.toll_a == doctest::Approx(-26.74961219905688).epsilon(1e-10));
    CHECK(r.toll_b == doctest::Approx(53.25038780094312).epsilon(1e-10));

    // substitute back into the defining equations
    CHECK(std::abs(std::pow(r.ue_split, 4) - 1.0) <= 1e-12);                // UE equalization
    CHECK(std::abs(5 * std::pow(r.so_split, 4) - 1.0) <= 1e-12);            // SO stationarity
    CHECK(std::abs((2 - r.so_split) * r.toll_a + r.so_split * r.toll_b) <= 1e-10);  // budget
    double ca = 1.0 + r.toll_a / 100.0;
    double cb = std::pow(r.so_split, 4) + r.toll_b / 100.0;
    CHECK(ca == doctest::Approx(cb).epsilon(1e-12));  // tolled costs equalized
}

TEST_CASE("pigou_analytic below the splits routes everything on B") {
    oracle::PigouResult r = oracle::pigou_analytic(0.5, 100.0);
    CHECK(r.ue_split == 0.5);
    CHECK(r.so_split == 0.5);
    CHECK(r.ue_total == doctest::Approx(std::pow(0.5, 5)));
    CHECK(r.toll_a == 0.0);
    CHECK(r.toll_b == 0.0);
}

TEST_CASE("grid_search_best brackets the P1 system optimum") {
    ProblemInstance inst = testfix::make_p1();
    oracle::GridSpec grid;
    auto gb = oracle::grid_search_best(inst, oracle::GridObjective::so, grid);
    REQUIRE(gb.feasible);
    CHECK(gb.value >= 1.4650077560188624 - 1e-12);  // grid value never beats the optimum
    CHECK(gb.value <= 1.4650077560188624 + 5e-3);
}

TEST_CASE("grid includes simplex vertices exactly") {
    Network net = parse_network("nodes 2\nlink A 1 2 1 0.5 2 0\n");
    ProblemInstance inst = load_instance(
        "[classes]\nvot 50\n[od_pairs]\nod 1 2\n[routes]\nk 1\n"
        "[scenarios]\nscenario 1\ndemand 2\n[weights]\nlambda 1\nmu 1\npce 3\n",
        net);
    auto gb = oracle::grid_search_best(inst, oracle::GridObjective::so, oracle::GridSpec{});
    RoutingPolicy forced = RoutingPolicy::uniform(inst, PolicyMode::scenario_dependent);
    CHECK(gb.value == doctest::Approx(flow_metrics(inst, forced).objective).epsilon(1e-12));
    CHECK(gb.point.alpha[0][0][0][0] == 1.0);
}

TEST_CASE("grid search enforces the cell cap") {
    ProblemInstance inst = testfix::make_p1();
    oracle::GridSpec tiny;
    tiny.max_cells = 1;
    CHECK_THROWS_WITH_AS(oracle::grid_search_best(inst, oracle::GridObjective::so, tiny),
                         doctest::Contains("cell cap"), InputError);
}

TEST_CASE("constrained grid reports when no cell is feasible") {
    ProblemInstance inst = testfix::make_p1();
    UeReference ref =
        ue_reference(inst, RoutingPolicy::uniform(inst, PolicyMode::scenario_independent));
    ref.e_t_mon_ue = -1.0;  // monetary filter rejects every cell
    oracle::GridSpec grid;
    grid.step = 0.1;
    auto gb = oracle::grid_search_best(inst, oracle::GridObjective::aops, grid, &ref);
    CHECK(!gb.feasible);
}

TEST_CASE("best_response_ue finds the P1 equilibrium") {
    ProblemInstance inst = testfix::make_p1();
    auto br = oracle::best_response_ue(inst, 2000, 1.0);
    CHECK(br.converged);
    CHECK(br.regret <= 1e-5);
    CHECK(br.policy.alpha[0][0][0][testfix::p1_route_b(inst)] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(marginal_regret(inst, br.policy) <= 1e-5);
}

TEST_CASE("best_response_ue keeps any start on constant-cost links") {
    Network net = parse_network("nodes 2\nlink A 1 2 1 0 1 0\nlink B 1 2 1 0 3 0\n");
    ProblemInstance inst = load_instance(
        "[classes]\nvot 100\n[od_pairs]\nod 1 2\n[routes]\nk 2\n"
        "[scenarios]\nscenario 1\ndemand 2\n[weights]\nlambda 1\nmu 1\npce 3\n",
        net);
    RoutingPolicy start = RoutingPolicy::uniform(inst, PolicyMode::scenario_independent);
    start.alpha[0][0][0] = {0.3, 0.7};
    auto br = oracle::best_response_ue(inst, 100, 1.0, &start);
    CHECK(br.converged);
    CHECK(br.regret == 0.0);
    CHECK(br.policy.alpha[0][0][0][0] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("so_lipschitz_bound dominates sampled objective differences") {
    ProblemInstance inst = testfix::small_random_instance(6);
    double bound = oracle::so_lipschitz_bound(inst);
    CHECK(bound > 0);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        RoutingPolicy a = testfix::random_policy(inst, rng);
        RoutingPolicy b = testfix::random_policy(inst, rng);
        double df = std::abs(flow_metrics(inst, a).objective - flow_metrics(inst, b).objective);
        double dx = 0;
        for (int c = 0; c < inst.n_scenarios(); ++c)
            for (int j = 0; j < inst.n_od(); ++j)
                for (int w = 0; w < inst.n_classes(); ++w)
                    for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                        dx = std::max(dx, std::abs(a.alpha[c][j][w][r] - b.alpha[c][j][w][r]));
        CHECK(df <= bound * dx + 1e-12);
    }
}
