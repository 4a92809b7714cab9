#include "fixtures.hpp"
#include "oracles.hpp"

#include "rwde/error.hpp"
#include "rwde/integrability.hpp"

#include <doctest.h>

#include <cmath>

using namespace rwde;

namespace {

WeightedDigraph small_random(RngStream& rng, std::size_t n, std::size_t m, bool loops) {
    for (;;) {
        auto g = oracle::random_graph(rng, n, m, loops);
        if (g.edge_count() <= 12) return g;
    }
}

// Strongly connected interior: a directed ring plus random extras and exits.
WeightedDigraph random_ring(RngStream& rng, std::size_t n, std::size_t extra) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
    names.push_back("cemetery");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        edges.push_back({static_cast<VertexId>(i), static_cast<VertexId>((i + 1) % n), 0.2 + 2.0 * rng.uniform()});
    for (std::size_t k = 0; k < extra; ++k)
        edges.push_back({static_cast<VertexId>(rng.next_u64() % n), static_cast<VertexId>(rng.next_u64() % (n + 1)),
                         0.2 + 2.0 * rng.uniform()});
    edges.push_back({0, static_cast<VertexId>(n), 0.5});
    return WeightedDigraph(names, static_cast<VertexId>(n), edges);
}

WeightedDigraph random_symmetric(RngStream& rng, std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
    names.push_back("cemetery");
    std::vector<Edge> edges;
    for (VertexId a = 0; a < n; ++a)
        for (VertexId b = a + 1; b < n; ++b)
            if (rng.uniform() < 0.4) {
                edges.push_back({a, b, 0.2 + 2.0 * rng.uniform()});
                edges.push_back({b, a, 0.2 + 2.0 * rng.uniform()});
            }
    for (VertexId a = 0; a < n; ++a) edges.push_back({a, static_cast<VertexId>(n), 0.1 + rng.uniform()});
    return WeightedDigraph(names, static_cast<VertexId>(n), edges);
}

}  // namespace

TEST_CASE("min_beta_at examples") {
    const auto single = fixture::single_exit();
    const auto r0 = min_beta_at(single, 0);
    CHECK(std::isinf(r0.min_beta));
    CHECK_FALSE(r0.argmin.has_value());
    CHECK(r0.integrable(1e6));

    const auto g = fixture::two_cycle();
    const auto r1 = min_beta_at(g, g.vertex("o"));
    CHECK(r1.min_beta == 1.0);
    REQUIRE(r1.argmin.has_value());
    CHECK(r1.argmin->ids() == std::vector<EdgeId>{0, 1});
    CHECK(oracle::brute_min_beta(g, g.vertex("o")).min_beta == 1.0);

    const auto l = fixture::loop_graph();
    const auto r2 = min_beta_at(l, 0);
    CHECK(r2.min_beta == 0.4);
    CHECK(r2.argmin->ids() == std::vector<EdgeId>{0});
    CHECK(to_string(r2.mode) == "directed-vertex-o");
}

TEST_CASE("second tail fixture has min beta 1.5") {
    const auto g = fixture::two_cycle_heavy();
    CHECK(min_beta_at(g, 0).min_beta == 1.5);
    CHECK(oracle::brute_min_beta(g, 0).min_beta == 1.5);
}

TEST_CASE("verdicts are strict at min_beta") {
    const auto g = fixture::two_cycle();
    IntegrabilityReport r = min_beta_at(g, 0);
    r.with_verdict(0.5).with_verdict(1.0).with_verdict(std::nextafter(1.0, 0.0));
    CHECK(r.verdicts.at(0.5));
    CHECK_FALSE(r.verdicts.at(1.0));
    CHECK(r.verdicts.at(std::nextafter(1.0, 0.0)));
}

TEST_CASE("vertex-subset search equals edge-subset brute force") {
    RngStream rng(101);
    for (int trial = 0; trial < 60; ++trial) {
        const auto g = small_random(rng, 2 + trial % 4, 6 + trial % 5, true);
        for (VertexId o : g.interior_vertices()) {
            const auto fast = min_beta_at(g, o);
            const auto slow = oracle::brute_min_beta(g, o);
            REQUIRE(fast.min_beta == slow.min_beta);
            if (fast.argmin) {
                CHECK(is_strongly_connected(g, *fast.argmin));
                CHECK(beta_edges(g, *fast.argmin) == fast.min_beta);
                const auto t = tails(g, *fast.argmin);
                CHECK(std::find(t.begin(), t.end(), o) != t.end());
            }
        }
        const auto all = min_beta_all(g);
        CHECK(all.min_beta == oracle::brute_min_beta(g, std::nullopt).min_beta);
    }
}

TEST_CASE("results do not depend on the worker count") {
    RngStream rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = oracle::random_graph(rng, 9, 30, true);
        EnumerationOptions one, many;
        many.workers = 3;
        const auto a = min_beta_at(g, 0, one);
        const auto b = min_beta_at(g, 0, many);
        CHECK(a.min_beta == b.min_beta);
        CHECK(a.argmin == b.argmin);
    }
}

TEST_CASE("connected subsets are enumerated once each") {
    RngStream rng(3);
    const auto g = oracle::random_graph(rng, 7, 16, false);
    std::set<VertexMask> seen;
    const auto count = for_each_connected_subset(g, 0, 0, [&](VertexMask s) {
        CHECK(seen.insert(s).second);
        CHECK((s & 1U));
    });
    CHECK(count == seen.size());
    // brute force: every weakly connected subset of interior vertices containing 0
    std::vector<VertexMask> nbr(g.vertex_count(), 0);
    for (const Edge& e : g.edges()) {
        if (e.tail == g.cemetery() || e.head == g.cemetery()) continue;
        nbr[e.tail] |= VertexMask{1} << e.head;
        nbr[e.head] |= VertexMask{1} << e.tail;
    }
    std::size_t expected = 0;
    const std::size_t n = g.vertex_count() - 1;
    for (VertexMask s = 1; s < (VertexMask{1} << n); ++s) {
        if (!(s & 1U)) continue;
        VertexMask seen_set = 1, frontier = 1;
        while (frontier) {
            VertexMask next = 0;
            for (std::size_t v = 0; v < n; ++v)
                if (frontier >> v & 1U) next |= nbr[v];
            next &= s & ~seen_set;
            seen_set |= next;
            frontier = next;
        }
        expected += seen_set == s;
    }
    CHECK(seen.size() == expected);
}

TEST_CASE("GraphTooLarge") {
    std::vector<std::string> names;
    std::vector<Edge> edges;
    for (VertexId v = 0; v < 70; ++v) {
        names.push_back("v" + std::to_string(v));
        edges.push_back({v, 70, 1.0});
    }
    names.push_back("cemetery");
    const WeightedDigraph big(names, 70, edges);
    CHECK_THROWS_AS(min_beta_at(big, 0), Error);

    RngStream rng(5);
    const auto g = oracle::random_graph(rng, 10, 40, true);
    EnumerationOptions tight;
    tight.max_candidates = 3;
    try {
        min_beta_at(g, 0, tight);
        FAIL("expected GraphTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GraphTooLarge);
    }
}

TEST_CASE("exit_time_report") {
    const auto g = fixture::two_cycle();
    auto r = exit_time_report(g);
    CHECK(r.min_beta == 1.0);
    r.with_verdict(1.0);
    CHECK_FALSE(r.verdicts.at(1.0));
    CHECK(to_string(r.mode) == "all-vertices");

    const auto heavy = fixture::graph({{"o", "x", 1.0}, {"x", "o", 1.0}, {"o", "cemetery", 2.5}, {"x", "cemetery", 2.1}});
    const auto h = exit_time_report(heavy);
    for (double s : {0.5, 1.0, 2.0}) CHECK(h.integrable(s));

    try {
        exit_time_report(fixture::four_vertex());
        FAIL("expected NotStronglyConnectedGraph");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotStronglyConnectedGraph);
    }
}

TEST_CASE("exit-time verdicts equal the per-vertex verdicts") {
    RngStream rng(19);
    for (int trial = 0; trial < 25; ++trial) {
        const auto g = random_ring(rng, 3 + trial % 4, 4);
        const auto r = exit_time_report(g);
        double per_vertex = std::numeric_limits<double>::infinity();
        for (VertexId v : g.interior_vertices()) per_vertex = std::min(per_vertex, min_beta_at(g, v).min_beta);
        CHECK(r.min_beta == per_vertex);
        for (double s : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) CHECK(r.integrable(s) == (s < per_vertex));
    }
}

TEST_CASE("undirected_report") {
    const auto path = fixture::graph({{"o", "x", 1.0}, {"x", "o", 0.5}, {"o", "cemetery", 0.3}, {"x", "cemetery", 0.2}});
    const auto r = undirected_report(path, 0);
    CHECK(r.min_beta == 0.5);
    CHECK(to_string(r.mode) == "undirected");

    // star with centre c, leaves a, b: {a, b} is not connected and must not count
    const auto star = fixture::graph({{"a", "c", 5.0}, {"c", "a", 1.0}, {"b", "c", 5.0}, {"c", "b", 1.0},
                                      {"a", "cemetery", 0.1}, {"b", "cemetery", 0.1}, {"c", "cemetery", 3.0}});
    const auto s = undirected_report(star, star.vertex("a"));
    // candidates: {a,c}: 0.1 + 1 + 3 ; {a,b,c}: 0.1 + 0.1 + 3
    CHECK(s.min_beta == doctest::Approx(3.2).epsilon(1e-15));
    CHECK(s.argmin->size() == 4);

    try {
        undirected_report(fixture::loop_graph(), 0);
        FAIL("expected HasLoop");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::HasLoop);
    }
    try {
        undirected_report(fixture::four_vertex(), 0);
        FAIL("expected NotSymmetric");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotSymmetric);
    }

    RngStream rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = random_symmetric(rng, 3 + trial % 6);
        for (VertexId o : g.interior_vertices()) CHECK(undirected_report(g, o).min_beta == min_beta_at(g, o).min_beta);
    }
}

TEST_CASE("min_beta never decreases when a weight grows") {
    RngStream rng(61);
    for (int trial = 0; trial < 40; ++trial) {
        const auto g = small_random(rng, 4, 9, true);
        const double before = min_beta_at(g, 0).min_beta;
        const auto slow = oracle::brute_min_beta(g, 0);
        for (EdgeId e = 0; e < g.edge_count(); ++e) {
            auto edges = g.edges();
            edges[e].alpha += 0.25;
            std::vector<std::string> names;
            for (VertexId v = 0; v < g.vertex_count(); ++v) names.push_back(g.name(v));
            const WeightedDigraph h(names, g.cemetery(), edges);
            const double after = min_beta_at(h, 0).min_beta;
            CHECK(after >= before);
            // strict growth when e leaves every minimiser
            if (std::isinf(before)) continue;
            bool leaves_all = true;
            const std::size_t m = g.edge_count();
            for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m) && leaves_all; ++mask) {
                std::vector<EdgeId> a;
                bool has_o = false;
                for (EdgeId f = 0; f < m; ++f)
                    if (mask >> f & 1U) {
                        a.push_back(f);
                        has_o |= g.edge(f).tail == 0;
                    }
                if (!has_o || !oracle::strongly_connected(g, a) || oracle::beta(g, a) != slow.min_beta) continue;
                const bool in_a = std::find(a.begin(), a.end(), e) != a.end();
                bool tail_in = false;
                for (EdgeId f : a) tail_in |= g.edge(f).tail == g.edge(e).tail;
                leaves_all = !in_a && tail_in;
            }
            if (leaves_all) CHECK(after > before);
        }
    }
}

TEST_CASE("lattice_report") {
    auto spec = fixture::box(2, fixture::kDriftAlpha, 0, 0);
    spec.box = {{0, 0}, {1, 0}};
    const auto v1 = lattice_report(spec, 1.0);
    CHECK(v1.integrable);
    CHECK(2.0 * spec.total_weight() > 0.5 + 0.2 + 1.0);
    const auto v2 = lattice_report(spec, 1.1);
    CHECK_FALSE(v2.integrable);
    CHECK(v1.internal_directions == std::vector<std::size_t>{0, 1});

    auto single = spec;
    single.box = {{0, 0}};
    const auto v3 = lattice_report(single, 100.0);
    CHECK(v3.integrable);
    CHECK(std::isinf(v3.critical_value));
    CHECK(std::isinf(min_beta_all(build_lattice_box(single)).min_beta));
}

TEST_CASE("lattice_report agrees with min beta on the box graph") {
    RngStream rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        LatticeSpec spec;
        spec.dim = 2;
        for (int k = 0; k < 4; ++k) spec.alpha.push_back(0.05 + 1.5 * rng.uniform());
        const int w = 1 + static_cast<int>(rng.next_u64() % 3), h = 1 + static_cast<int>(rng.next_u64() % 3);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) spec.box.push_back({x, y});
        const auto g = build_lattice_box(spec);
        const auto r = min_beta_all(g);
        const auto v = lattice_report(spec, 1.0);
        if (std::isinf(v.critical_value)) {
            CHECK(std::isinf(r.min_beta));
        } else {
            CHECK(r.min_beta == doctest::Approx(v.critical_value).epsilon(1e-14));
            CHECK(r.argmin->size() == 2);
        }
        for (int k = 0; k < 5; ++k) {
            const double s = 3.0 * rng.uniform();
            CHECK(lattice_report(spec, s).integrable == (r.min_beta > s));
        }
    }
}

TEST_CASE("zero_speed_check") {
    CHECK_FALSE(zero_speed_check(fixture::kDriftAlpha));
    CHECK_FALSE(zero_speed_check(std::vector<double>{1.0, 1.0}));
    CHECK_FALSE(zero_speed_check(std::vector<double>{5.0, 5.0, 0.1, 0.1}));
    CHECK(zero_speed_check(std::vector<double>{0.1, 0.1, 0.1, 0.1}));
    CHECK_THROWS_AS(zero_speed_check(std::vector<double>{0.1, 0.1, 0.1}), Error);
}
