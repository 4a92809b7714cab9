#pragma once

#include "rwde/digraph.hpp"

#include <string>
#include <utility>
#include <vector>

namespace fixture {

using rwde::Edge;
using rwde::WeightedDigraph;

struct NamedEdge {
    std::string tail, head;
    double alpha;
};

// Vertices in order of first appearance; "cemetery" is the cemetery.
inline WeightedDigraph graph(const std::vector<NamedEdge>& list, std::vector<std::string> names = {}) {
    auto id = [&](const std::string& s) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == s) return static_cast<rwde::VertexId>(i);
        names.push_back(s);
        return static_cast<rwde::VertexId>(names.size() - 1);
    };
    std::vector<Edge> edges;
    for (const auto& e : list) {
        const auto t = id(e.tail);
        const auto h = id(e.head);
        edges.push_back({t, h, e.alpha});
    }
    const auto cem = id("cemetery");
    return WeightedDigraph(names, cem, edges);
}

// o <-> x with unit weights, o -> cemetery 0.3, x -> cemetery 0.7. min beta at o is 1.
inline WeightedDigraph two_cycle() {
    return graph({{"o", "x", 1.0}, {"x", "o", 1.0}, {"o", "cemetery", 0.3}, {"x", "cemetery", 0.7}});
}

// Same shape with exits 0.6 and 0.9: min beta 1.5.
inline WeightedDigraph two_cycle_heavy() {
    return graph({{"o", "x", 1.0}, {"x", "o", 1.0}, {"o", "cemetery", 0.6}, {"x", "cemetery", 0.9}});
}

// Contraction fixture: 2-cycle o <-> x, extra edges o->y, x->y, y->cemetery, o->cemetery.
inline WeightedDigraph four_vertex() {
    return graph({{"o", "x", 1.0}, {"x", "o", 0.8}, {"o", "y", 0.5}, {"x", "y", 0.4}, {"y", "cemetery", 1.2},
                  {"o", "cemetery", 0.3}});
}

inline WeightedDigraph single_exit() { return graph({{"o", "cemetery", 1.0}}); }

// Loop at o (weight 1) and o -> cemetery (0.4).
inline WeightedDigraph loop_graph() { return graph({{"o", "o", 1.0}, {"o", "cemetery", 0.4}}); }

// A 3-vertex chain with back edges, used for Monte Carlo comparisons.
inline WeightedDigraph three_vertex() {
    return graph({{"a", "b", 1.0}, {"b", "a", 0.5}, {"b", "c", 1.0}, {"c", "b", 0.7}, {"c", "cemetery", 0.9},
                  {"a", "cemetery", 0.4}, {"a", "a", 0.3}});
}

inline rwde::LatticeSpec box(int dim, std::vector<double> alpha, int lo, int hi) {
    rwde::LatticeSpec s;
    s.dim = dim;
    s.alpha = std::move(alpha);
    if (dim == 1) {
        for (int x = lo; x <= hi; ++x) s.box.push_back({x});
    } else {
        for (int y = lo; y <= hi; ++y)
            for (int x = lo; x <= hi; ++x) s.box.push_back({x, y});
    }
    return s;
}

inline const std::vector<double> kDriftAlpha{0.5, 0.2, 0.1, 0.1};

}  // namespace fixture
