#include "doctest.h"
#include "fixtures.hpp"

#include <algorithm>
#include <set>

using namespace freight;

TEST_CASE("parse_network reads the P1 fixture") {
    Network net = parse_network(testfix::p1_network);
    CHECK(net.n_nodes == 2);
    CHECK(net.num_links() == 2);
    CHECK(net.links[0].id == "A");
    CHECK(net.links[0].eps_a == 1.0);
    CHECK(net.links[1].eps_b == 1.0);
    CHECK(net.links[1].eps_c == 3.0);
}

TEST_CASE("parse -> serialize -> parse round-trips") {
    Network a = parse_network(testfix::p1_network);
    Network b = parse_network(serialize_network(a));
    REQUIRE(b.num_links() == a.num_links());
    CHECK(b.n_nodes == a.n_nodes);
    for (int l = 0; l < a.num_links(); ++l) {
        CHECK(b.links[l].id == a.links[l].id);
        CHECK(b.links[l].tail == a.links[l].tail);
        CHECK(b.links[l].head == a.links[l].head);
        CHECK(b.links[l].eps_a == a.links[l].eps_a);
        CHECK(b.links[l].eps_b == a.links[l].eps_b);
        CHECK(b.links[l].eps_c == a.links[l].eps_c);
        CHECK(b.links[l].x_lp == a.links[l].x_lp);
    }
}

TEST_CASE("parse_network errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_network("nodes 2\nlink A 1 2 1 0 0 0\n"),
                         doctest::Contains("line 2: capacity must be positive on link A"),
                         InputError);
    CHECK_THROWS_WITH_AS(parse_network("nodes 2\nlink A 1 2 1 0 1 0\nlink A 2 1 1 0 1 0\n"),
                         doctest::Contains("line 3: duplicate link id A"), InputError);
    CHECK_THROWS_WITH_AS(parse_network("nodes 2\nlink A 1 3 1 0 1 0\n"),
                         doctest::Contains("line 2: unknown node reference"), InputError);
    CHECK_THROWS_AS(parse_network("nodes 2\nlink A 1 2 1 0\n"), InputError);
}

TEST_CASE("load_instance validates scenario probabilities") {
    Network net = parse_network(testfix::p1_network);
    std::string bad =
        "[classes]\nvot 100\n[od_pairs]\nod 1 2\n[routes]\nk 2\n"
        "[scenarios]\nscenario 0.6\ndemand 2\nscenario 0.6\ndemand 2\n"
        "[weights]\nlambda 1\nmu 1\n";
    CHECK_THROWS_WITH_AS(load_instance(bad, net),
                         doctest::Contains("probabilities sum to 1.200000"), InputError);
}

TEST_CASE("load_instance rejects duplicate class VOTs") {
    Network net = parse_network(testfix::p1_network);
    std::string bad =
        "[classes]\nvot 100\nvot 100\n[od_pairs]\nod 1 2\n[routes]\nk 2\n"
        "[scenarios]\nscenario 1\ndemand 2\ndemand 2\n[weights]\nlambda 1\nmu 1\n";
    CHECK_THROWS_WITH_AS(load_instance(bad, net), doctest::Contains("duplicate class VOT"),
                         InputError);
}

TEST_CASE("load_instance is pure") {
    Network net = parse_network(testfix::p1_network);
    ProblemInstance a = load_instance(testfix::p1_instance, net);
    ProblemInstance b = load_instance(testfix::p1_instance, net);
    CHECK(serialize_instance(a) == serialize_instance(b));
}

TEST_CASE("enumerate_k_least_congested on P1") {
    Network net = parse_network(testfix::p1_network);
    auto routes = enumerate_k_least_congested(net, 0, {1, 2}, 2);
    REQUIRE(routes.size() == 2);
    // B is free at zero truck load, A costs 1
    CHECK(net.links[routes[0].links[0]].id == "B");
    CHECK(net.links[routes[1].links[0]].id == "A");

    auto exhausted = enumerate_k_least_congested(net, 0, {1, 2}, 5);
    CHECK(exhausted.size() == 2);
}

TEST_CASE("enumerate_k_least_congested rejects disconnected pairs") {
    Network net = parse_network(testfix::p1_network);
    CHECK_THROWS_WITH_AS(enumerate_k_least_congested(net, 0, {2, 1}, 2),
                         doctest::Contains("disconnected"), InputError);
}

TEST_CASE("route enumeration is loopless with nondecreasing static times") {
    Network net = sioux_falls_network();
    auto routes = enumerate_k_least_congested(net, 0, {1, 20}, 10);
    REQUIRE(routes.size() == 10);
    for (const Route& r : routes) {
        std::set<int> nodes{net.links[r.links[0]].tail};
        int at = net.links[r.links[0]].tail;
        for (int li : r.links) {
            REQUIRE(net.links[li].tail == at);
            at = net.links[li].head;
            CHECK(nodes.insert(at).second);  // loopless
        }
        CHECK(at == 20);
    }
    double prev = 0;
    for (const Route& r : routes) {
        double t = 0;
        for (int li : r.links) t += free_flow_link_time(net.links[li]);
        CHECK(t >= prev - 1e-12);
        prev = t;
    }
}

TEST_CASE("sioux_falls_network has the benchmark shape") {
    Network net = sioux_falls_network();
    CHECK(net.n_nodes == 24);
    CHECK(net.num_links() == 76);
    CHECK(sioux_falls_arcs().size() == 76);
}

TEST_CASE("import_tntp maps the community columns") {
    std::string tntp =
        "<NUMBER OF ZONES> 2\n"
        "<NUMBER OF NODES> 2\n"
        "<NUMBER OF LINKS> 2\n"
        "<END OF METADATA>\n"
        "~ \tInit node \tTerm node \tCapacity \tLength \tFree Flow Time \tB\tPower\tSpeed "
        "limit \tToll \tType\t;\n"
        "\t1\t2\t25900.2\t6\t6\t0.15\t4\t0\t0\t1\t;\n"
        "\t2\t1\t4958.2\t3\t4\t0.15\t4\t0\t0\t1\t;\n";
    Network net = import_tntp(tntp);
    REQUIRE(net.num_links() == 2);
    CHECK(net.n_nodes == 2);
    CHECK(net.links[0].id == "e1");
    CHECK(net.links[0].tail == 1);
    CHECK(net.links[0].head == 2);
    CHECK(net.links[0].eps_a == doctest::Approx(6.0));
    CHECK(net.links[0].eps_b == doctest::Approx(0.15 * 6.0));
    CHECK(net.links[0].eps_c == doctest::Approx(25900.2));
    CHECK(net.links[0].x_lp == 0.0);
    CHECK(net.links[1].eps_b == doctest::Approx(0.15 * 4.0));
}

TEST_CASE("gen_synthetic is a deterministic function of the seed") {
    Network net = sioux_falls_network();
    SyntheticSpec spec;
    ProblemInstance a = gen_synthetic(net, 7, spec);
    ProblemInstance b = gen_synthetic(net, 7, spec);
    ProblemInstance c = gen_synthetic(net, 8, spec);
    CHECK(serialize_instance(a) == serialize_instance(b));
    CHECK(serialize_network(a.network) == serialize_network(b.network));
    CHECK(serialize_network(a.network) != serialize_network(c.network));

    CHECK(a.n_od() == 6);
    CHECK(a.n_classes() == 2);
    CHECK(a.n_scenarios() == 2);
    for (int j = 0; j < a.n_od(); ++j) CHECK(a.routes[j].size() == 10);
    CHECK_NOTHROW(a.validate());
}
