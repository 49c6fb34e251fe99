#include "doctest.h"
#include "fixtures.hpp"

#include <cmath>

using namespace freight;

namespace {

const double kSoSplit = std::pow(5.0, -0.25);
const double kSoTotal = 1.4650077560188624;
const double kTollA = -26.74961219905688;
const double kTollB = 53.25038780094312;

nlp::SolveOptions quick_opts(int restarts = 2) {
    nlp::SolveOptions o;
    o.multistart = restarts;
    return o;
}

// exact P1 system-optimal routing, scenario-dependent
RoutingPolicy p1_so_policy(const ProblemInstance& inst) {
    RoutingPolicy pol = RoutingPolicy::uniform(inst, PolicyMode::scenario_dependent);
    int rb = testfix::p1_route_b(inst);
    pol.alpha[0][0][0][rb] = kSoSplit / 2.0;
    pol.alpha[0][0][0][1 - rb] = 1.0 - kSoSplit / 2.0;
    return pol;
}

}  // namespace

TEST_CASE("solve_ue recovers the P1 equilibrium") {
    ProblemInstance inst = testfix::make_p1();
    SchemeResult r = solve_ue(inst, quick_opts());
    REQUIRE(r.solver.status == nlp::SolveStatus::converged);
    CHECK(r.policy.at(0, 0, 0, testfix::p1_route_b(inst)) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(r.metrics.e_t_tr == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(r.verification.has_ue_comp);
    CHECK(r.verification.ue_comp_resid <= 1e-6);
    CHECK(marginal_regret(inst, r.policy) <= 1e-5);
    CHECK(!r.payments);
}

TEST_CASE("solve_ue forces the single available route") {
    Network net = parse_network("nodes 2\nlink A 1 2 1 0.5 2 0\n");
    ProblemInstance inst = load_instance(
        "[classes]\nvot 50\n[od_pairs]\nod 1 2\n[routes]\nk 1\n"
        "[scenarios]\nscenario 1\ndemand 2\n[weights]\nlambda 0.3\nmu 1\npce 3\n",
        net);
    SchemeResult r = solve_ue(inst, quick_opts());
    REQUIRE(r.solver.status == nlp::SolveStatus::converged);
    CHECK(r.policy.at(0, 0, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("solve_so recovers the P1 system optimum") {
    ProblemInstance inst = testfix::make_p1();
    SchemeResult r = solve_so(inst, quick_opts());
    REQUIRE(r.solver.status == nlp::SolveStatus::converged);
    double xb = 2.0 * r.policy.at(0, 0, 0, testfix::p1_route_b(inst));
    CHECK(xb == doctest::Approx(kSoSplit).epsilon(1e-4));
    CHECK(r.metrics.e_t_tr == doctest::Approx(kSoTotal).epsilon(1e-4));
}

TEST_CASE("scheme metrics equal an independent recomputation bit-for-bit") {
    ProblemInstance inst = testfix::make_p1();
    for (const SchemeResult& r : {solve_ue(inst, quick_opts()), solve_so(inst, quick_opts())}) {
        FlowMetrics m = flow_metrics(inst, r.policy);
        CHECK(r.metrics.e_t_tr == m.e_t_tr);
        CHECK(r.metrics.e_t_mon == m.e_t_mon);
        CHECK(r.metrics.e_t_p == m.e_t_p);
        CHECK(r.metrics.objective == m.objective);
    }
}

TEST_CASE("aops_payments matches the P1 closed form") {
    ProblemInstance inst = testfix::make_p1();
    UeReference ref = ue_reference(inst, testfix::p1_policy(inst, 0.5));
    int rb = testfix::p1_route_b(inst);

    bool degenerate = true;
    PaymentSchedule pi = aops_payments(inst, p1_so_policy(inst), ref, &degenerate);
    CHECK(!degenerate);
    CHECK(pi.at(0, 0, 0, 1 - rb) == doctest::Approx(kTollA).epsilon(1e-9));
    CHECK(pi.at(0, 0, 0, rb) == doctest::Approx(kTollB).epsilon(1e-9));
}

TEST_CASE("aops_payments vanishes on used routes at the UE itself") {
    ProblemInstance inst = testfix::make_p1();
    RoutingPolicy ue = testfix::p1_policy(inst, 0.5);
    UeReference ref = ue_reference(inst, ue);
    RoutingPolicy asdep = ue;
    asdep.mode = PolicyMode::scenario_dependent;
    PaymentSchedule pi = aops_payments(inst, asdep, ref);
    for (int r = 0; r < 2; ++r) CHECK(std::abs(pi.at(0, 0, 0, r)) <= 1e-12);
}

TEST_CASE("budget identity holds for random policies") {
    std::mt19937_64 rng(21);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        ProblemInstance inst = testfix::small_random_instance(seed);
        auto br = oracle::best_response_ue(inst, 5000, 1.0);
        REQUIRE(br.converged);
        UeReference ref = ue_reference(inst, br.policy);
        for (int trial = 0; trial < 5; ++trial) {
            RoutingPolicy pol = testfix::random_policy(inst, rng);
            PaymentSchedule pi = aops_payments(inst, pol, ref);
            double net = 0;
            for (int c = 0; c < inst.n_scenarios(); ++c)
                for (int j = 0; j < inst.n_od(); ++j)
                    for (int w = 0; w < inst.n_classes(); ++w)
                        for (std::size_t r = 0; r < inst.routes[j].size(); ++r)
                            net += inst.scenarios[c].probability *
                                   inst.scenarios[c].demand[j][w] * pol.alpha[c][j][w][r] *
                                   pi.pi[c][j][w][r];
            CHECK(std::abs(net) <= 1e-8 * std::max(1.0, ref.e_t_mon_ue));
        }
    }
}

TEST_CASE("Pareto and truthfulness residuals match their aggregate reformulations") {
    std::mt19937_64 rng(31);
    ProblemInstance inst = testfix::small_random_instance(1);
    auto br = oracle::best_response_ue(inst, 5000, 1.0);
    REQUIRE(br.converged);
    UeReference ref = ue_reference(inst, br.policy);
    for (int trial = 0; trial < 20; ++trial) {
        RoutingPolicy pol = testfix::random_policy(inst, rng);
        SchemeResult probe;
        probe.scheme = SchemeId::aops;
        probe.policy = pol;
        probe.payments = aops_payments(inst, pol, ref);
        VerificationReport v = verify(inst, probe, ref);

        double scale = std::max(1.0, ref.e_t_mon_ue);
        double mgap = monetary_gap(inst, pol, ref);
        // Pareto under AOPS payments <=> no monetary regression
        bool pareto_ok = v.pareto_exante_resid <= 1e-9;
        bool money_ok = mgap <= 1e-9 * scale;
        CHECK(pareto_ok == money_ok);

        double hgap = std::max(0.0, exante_truthful_gap(inst, pol, ref));
        CHECK(v.truthful_exante_resid == doctest::Approx(hgap).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("solve_aops and solve_ops reach the P1 system optimum") {
    ProblemInstance inst = testfix::make_p1();
    SchemeResult ue = solve_ue(inst, quick_opts());
    UeReference ref = ue_reference(inst, ue.policy);

    SchemeResult aops = solve_aops(inst, ref, quick_opts());
    REQUIRE(aops.solver.status == nlp::SolveStatus::converged);
    CHECK(aops.metrics.objective == doctest::Approx(kSoTotal).epsilon(1e-3));
    REQUIRE(aops.payments);
    int rb = testfix::p1_route_b(inst);
    CHECK(aops.payments->at(0, 0, 0, rb) == doctest::Approx(kTollB).epsilon(1e-2));
    CHECK(aops.verification.pareto_exante_resid <= 1e-6);
    CHECK(aops.verification.truthful_exante_resid <= 1e-6);
    CHECK(aops.verification.budget_resid <= 1e-6 * std::max(1.0, ref.e_t_mon_ue));

    SchemeResult ops = solve_ops(inst, ref, quick_opts(), &aops.policy, &*aops.payments);
    REQUIRE(ops.solver.status == nlp::SolveStatus::converged);
    CHECK(ops.metrics.objective == doctest::Approx(kSoTotal).epsilon(1e-3));
    CHECK(ops.verification.pareto_exante_resid <= 1e-6);

    // single class, single scenario: the ex-post program coincides with AOPS
    SchemeResult ept = solve_aops_ept(inst, ref, quick_opts());
    REQUIRE(ept.solver.status == nlp::SolveStatus::converged);
    CHECK(ept.metrics.objective == doctest::Approx(aops.metrics.objective).epsilon(1e-6));
    CHECK(ept.verification.robust_pareto_resid <= 1e-6);
    CHECK(ept.verification.truthful_expost_resid <= 1e-6);

    // warm-start dominance and containment
    double ueobj = ue.metrics.objective;
    CHECK(aops.metrics.objective <= ueobj + 1e-6);
    CHECK(ops.metrics.objective <= aops.metrics.objective + 1e-6);
    SchemeResult so = solve_so(inst, quick_opts(), &ue.policy);
    CHECK(so.metrics.objective <= ops.metrics.objective + 1e-6);
}

TEST_CASE("solve_cpurr supports the P1 system optimum with balanced tolls") {
    ProblemInstance inst = testfix::make_p1();
    nlp::SolveOptions o = quick_opts();
    o.constraint_tol = 5e-5;
    SchemeResult r = solve_cpurr(inst, o);
    REQUIRE(r.solver.status == nlp::SolveStatus::converged);
    int rb = testfix::p1_route_b(inst);
    CHECK(2.0 * r.policy.at(0, 0, 0, rb) == doctest::Approx(kSoSplit).epsilon(1e-3));
    REQUIRE(r.payments);
    CHECK(r.payments->at(0, 0, 0, rb) == doctest::Approx(kTollB).epsilon(2e-2 / 50.0));
    CHECK(r.payments->at(0, 0, 0, 1 - rb) == doctest::Approx(kTollA).epsilon(2e-2 / 25.0));
    // equalized generalized cost F^CP
    REQUIRE(!r.aux.zeta.empty());
    CHECK(r.aux.zeta[0][0] == doctest::Approx(0.7325038780094312).epsilon(1e-3));
    CHECK(r.verification.budget_resid <= 5e-5 * std::max(1.0, 200.0));
    CHECK(r.verification.ue_comp_resid <= 5e-5);
}

TEST_CASE("verify treats unpriced schemes as zero payments") {
    ProblemInstance inst = testfix::make_p1();
    SchemeResult ue = solve_ue(inst, quick_opts());
    UeReference ref = ue_reference(inst, ue.policy);
    VerificationReport v = verify(inst, ue, ref);
    CHECK(v.pareto_exante_resid <= 1e-9);  // cost equals the UE cost by definition
    CHECK(v.budget_resid == 0.0);

    SchemeResult so = solve_so(inst, quick_opts(), &ue.policy);
    VerificationReport vso = verify(inst, so, ref);
    CHECK(vso.budget_resid == 0.0);
    // without payments the lightly-loaded route undercuts A^UE; route A stays equal
    CHECK(vso.pareto_exante_resid <= 1e-9);
}
