#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "dvrpsr/graph.hpp"
#include "dvrpsr/rng.hpp"
#include "oracles.hpp"

using namespace dvrpsr;

namespace {

std::string write_temp(const std::string& content) {
    static int counter = 0;
    std::string path = "test_graph_" + std::to_string(counter++) + ".json";
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("two-node cycle loads") {
    auto path = write_temp(R"({"depot":0,
        "nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1000,"y":0}],
        "arcs":[{"from":0,"to":1,"len_m":1000},{"from":1,"to":0,"len_m":1000}]})");
    StreetGraph g = load_graph(path);
    CHECK(g.node_count() == 2);
    CHECK(g.arc_count() == 2);
    CHECK(g.depot() == 0);
    std::remove(path.c_str());
}

TEST_CASE("isolated node rejected with its id") {
    auto path = write_temp(R"({"depot":0,
        "nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0},{"id":2,"x":2,"y":0}],
        "arcs":[{"from":0,"to":1,"len_m":10},{"from":1,"to":0,"len_m":10}]})");
    CHECK_THROWS_WITH_AS(load_graph(path), doctest::Contains("node 2"), Error);
    std::remove(path.c_str());
}

TEST_CASE("non-positive arc length rejected") {
    auto path = write_temp(R"({"depot":0,
        "nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0}],
        "arcs":[{"from":0,"to":1,"len_m":0},{"from":1,"to":0,"len_m":10}]})");
    CHECK_THROWS_AS(load_graph(path), Error);
    std::remove(path.c_str());
}

TEST_CASE("20x20 grid has 400 nodes and 1520 directed arcs") {
    StreetGraph g = generate_grid({.rows = 20, .cols = 20, .spacing_m = 500.0});
    CHECK(g.node_count() == 400);
    CHECK(g.arc_count() == 1520);
    CHECK_NOTHROW(g.check_strongly_connected());
}

TEST_CASE("2x2 grid minimal") {
    StreetGraph g = generate_grid({.rows = 2, .cols = 2, .spacing_m = 100.0});
    CHECK(g.node_count() == 4);
    CHECK(g.arc_count() == 8);
}

TEST_CASE("grid generation is deterministic per seed") {
    GridSpec spec{.rows = 6, .cols = 5, .spacing_m = 300.0, .jitter_frac = 0.1, .seed = 99};
    StreetGraph a = generate_grid(spec);
    StreetGraph b = generate_grid(spec);
    REQUIRE(a.arc_count() == b.arc_count());
    for (NodeId v = 0; v < a.node_count(); ++v) {
        REQUIRE(a.out_arcs(v).size() == b.out_arcs(v).size());
        for (std::size_t i = 0; i < a.out_arcs(v).size(); ++i) {
            CHECK(a.out_arcs(v)[i].head == b.out_arcs(v)[i].head);
            CHECK(a.out_arcs(v)[i].length_m == b.out_arcs(v)[i].length_m);
        }
    }
}

TEST_CASE("single arc travel time at 20 km/h") {
    StreetGraph g(2, 0);
    g.add_arc(0, 1, 1000.0);
    g.add_arc(1, 0, 1000.0);
    TravelTimeOracle oracle(g, kmh_to_m_per_min(20.0));
    CHECK(oracle.travel_time(0, 1) == doctest::Approx(3.0));
    CHECK(oracle.travel_time(1, 1) == 0.0);
}

TEST_CASE("travel times match reference Dijkstra on a jittered grid") {
    StreetGraph g = generate_grid({.rows = 12, .cols = 9, .spacing_m = 400.0,
                                   .jitter_frac = 0.1, .seed = 5});
    double speed = kmh_to_m_per_min(20.0);
    TravelTimeOracle oracle(g, speed);
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        NodeId a = rng.uniform_int(g.node_count());
        NodeId b = rng.uniform_int(g.node_count());
        auto ref = oracle::dijkstra_ref(g, a, speed);
        CHECK(oracle.travel_time(a, b) == doctest::Approx(ref[b]).epsilon(1e-9));
    }
}

TEST_CASE("reverse trees agree with forward queries") {
    StreetGraph g = generate_grid({.rows = 7, .cols = 7, .spacing_m = 350.0,
                                   .jitter_frac = 0.1, .seed = 2});
    TravelTimeOracle oracle(g, 300.0);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        NodeId a = rng.uniform_int(g.node_count());
        NodeId b = rng.uniform_int(g.node_count());
        CHECK(oracle.tree_to(b)->dist_min[a] == doctest::Approx(oracle.travel_time(a, b)));
    }
}

TEST_CASE("cache on and off produce identical travel times") {
    StreetGraph g = generate_grid({.rows = 8, .cols = 8, .spacing_m = 200.0,
                                   .jitter_frac = 0.1, .seed = 8});
    TravelTimeOracle cached(g, 250.0, 1024);
    TravelTimeOracle uncached(g, 250.0, 0);
    TravelTimeOracle tiny(g, 250.0, 2);  // constant eviction
    Rng rng(4);
    for (int i = 0; i < 300; ++i) {
        NodeId a = rng.uniform_int(g.node_count());
        NodeId b = rng.uniform_int(g.node_count());
        double t = cached.travel_time(a, b);
        CHECK(t == uncached.travel_time(a, b));
        CHECK(t == tiny.travel_time(a, b));
    }
}

TEST_CASE("fastest path realizes the travel time") {
    StreetGraph g = generate_grid({.rows = 10, .cols = 6, .spacing_m = 500.0,
                                   .jitter_frac = 0.1, .seed = 11});
    TravelTimeOracle oracle(g, 333.0);
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        NodeId a = rng.uniform_int(g.node_count());
        NodeId b = rng.uniform_int(g.node_count());
        auto path = oracle.fastest_path(a, b);
        REQUIRE(path.front() == a);
        REQUIRE(path.back() == b);
        double total = 0.0;
        for (std::size_t j = 0; j + 1 < path.size(); ++j)
            total += oracle.arc_time(path[j], path[j + 1]);
        CHECK(total == doctest::Approx(oracle.travel_time(a, b)).epsilon(1e-12));
    }
    CHECK(oracle.fastest_path(5, 5) == std::vector<NodeId>{5});
}

TEST_CASE("triangle inequality holds for sampled triples") {
    StreetGraph g = generate_grid({.rows = 9, .cols = 9, .spacing_m = 300.0,
                                   .jitter_frac = 0.1, .seed = 21});
    TravelTimeOracle oracle(g, 400.0);
    Rng rng(33);
    for (int i = 0; i < 300; ++i) {
        NodeId a = rng.uniform_int(g.node_count());
        NodeId b = rng.uniform_int(g.node_count());
        NodeId c = rng.uniform_int(g.node_count());
        CHECK(oracle.travel_time(a, c) <=
              oracle.travel_time(a, b) + oracle.travel_time(b, c) + 1e-9);
    }
}

TEST_CASE("identity travel time is zero everywhere") {
    StreetGraph g = generate_grid({.rows = 4, .cols = 4, .spacing_m = 100.0});
    TravelTimeOracle oracle(g, 100.0);
    for (NodeId v = 0; v < g.node_count(); ++v) CHECK(oracle.travel_time(v, v) == 0.0);
}
