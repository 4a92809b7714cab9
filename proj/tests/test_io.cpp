#include "fixtures.hpp"

#include "rwde/error.hpp"
#include "rwde/integrability.hpp"
#include "rwde/io.hpp"
#include "rwde/kalikow.hpp"

#include <doctest.h>

#include <cmath>

using namespace rwde;

namespace {

ErrorCode code_of(const Json& j) {
    try {
        graph_from_json(j);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::InvalidInput;
}

Json two_cycle_json() {
    return Json::parse(R"({"cemetery": "c", "vertices": ["o", "x"], "edges": [
        {"tail": "o", "head": "x", "alpha": 1.0}, {"tail": "x", "head": "o", "alpha": 1.0},
        {"tail": "o", "head": "c", "alpha": 0.3}, {"tail": "x", "head": "c", "alpha": 0.7}]})");
}

}  // namespace

TEST_CASE("graph JSON round trip") {
    const auto g = graph_from_json(two_cycle_json());
    CHECK(g.vertex_count() == 3);
    CHECK(g.name(g.cemetery()) == "c");
    CHECK(g.edge(2).alpha == 0.3);
    const auto back = graph_from_json(graph_to_json(g));
    REQUIRE(back.edge_count() == g.edge_count());
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        CHECK(back.edge(e).tail == g.edge(e).tail);
        CHECK(back.edge(e).head == g.edge(e).head);
        CHECK(back.edge(e).alpha == g.edge(e).alpha);
    }
    const auto f = fixture::four_vertex();
    CHECK(graph_to_json(graph_from_json(graph_to_json(f))) == graph_to_json(f));
}

TEST_CASE("graph JSON errors") {
    auto j = two_cycle_json();
    j["edges"][0]["head"] = "nowhere";
    CHECK(code_of(j) == ErrorCode::UnknownVertex);

    j = two_cycle_json();
    j["vertices"].push_back("o");
    CHECK(code_of(j) == ErrorCode::InvalidInput);

    j = two_cycle_json();
    j["edges"][1].erase("alpha");
    CHECK(code_of(j) == ErrorCode::InvalidInput);

    j = two_cycle_json();
    j["edges"][1]["alpha"] = "big";
    CHECK(code_of(j) == ErrorCode::InvalidInput);

    j = two_cycle_json();
    j.erase("cemetery");
    CHECK(code_of(j) == ErrorCode::InvalidInput);

    j = two_cycle_json();
    j["edges"][1]["alpha"] = -1.0;
    CHECK_THROWS_AS(graph_from_json(j), Error);
}

TEST_CASE("lattice JSON") {
    const auto spec = lattice_from_json(Json::parse(R"({"d": 2, "alpha": [0.5, 0.2, 0.1, 0.1], "box": [[0, 0], [1, 0]]})"));
    CHECK(spec.dim == 2);
    CHECK(spec.box.size() == 2);
    CHECK(lattice_from_json(lattice_to_json(spec)).alpha == spec.alpha);
    CHECK_THROWS_AS(lattice_from_json(Json::parse(R"({"d": 2, "alpha": [0.5, 0.2], "box": [[0, 0]]})")), Error);
    CHECK_THROWS_AS(lattice_from_json(Json::parse(R"({"d": 2, "alpha": [0.5, 0.2, 0.1, 0.1]})")), Error);
}

TEST_CASE("environment JSON round trip") {
    const auto g = fixture::four_vertex();
    RngStream rng(3);
    const Environment env = sample_environment(g, rng);
    const auto j = environment_to_json(g, env);
    const Environment back = environment_from_json(g, j);
    for (EdgeId e = 0; e < g.edge_count(); ++e) CHECK(back[e] == env[e]);

    auto missing = j;
    missing.erase(missing.begin());
    CHECK_THROWS_AS(environment_from_json(g, missing), Error);
    auto wrong = j;
    wrong["o"][0]["p"] = 0.9;
    CHECK_THROWS_AS(environment_from_json(g, wrong), Error);
    CHECK_THROWS_AS(environment_from_json(g, Json::array()), Error);
}

TEST_CASE("reports serialise infinities as null") {
    const auto single = fixture::single_exit();
    const auto r = min_beta_at(single, 0).with_verdict(1.0);
    const auto j = to_json(single, r);
    CHECK(j["min_beta"].is_null());
    CHECK(j["argmin_edges"].empty());
    CHECK(j["verdicts"]["1"] == true);

    const auto g = fixture::two_cycle();
    const auto t = to_json(g, min_beta_at(g, 0).with_verdict(1.0).with_verdict(0.5));
    CHECK(t["min_beta"] == 1.0);
    CHECK(t["argmin_edges"].size() == 2);
    CHECK(t["verdicts"]["1"] == false);
    CHECK(t["verdicts"]["0.5"] == true);
    CHECK(t["mode"].is_string());

    const auto d = to_json(ballisticity_report(fixture::kDriftAlpha));
    CHECK(d["center"].is_null());
    CHECK(d["ballistic"] == false);
    CHECK(std::abs(d["criterion_value"].get<double>() - 0.3) < 1e-15);
}
