#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rwde {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Edge {
    VertexId tail;
    VertexId head;
    double alpha;
};

/// Finite directed multigraph with a distinguished cemetery vertex and a
/// positive weight on every edge. Vertex names are opaque strings at the
/// interface; internally vertices and edges are dense indices. Edge ids are
/// positions in the edge list and never change once the graph is built.
class WeightedDigraph {
public:
    WeightedDigraph() = default;
    WeightedDigraph(std::vector<std::string> names, VertexId cemetery, std::vector<Edge> edges);

    std::size_t vertex_count() const noexcept { return names_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    VertexId cemetery() const noexcept { return cemetery_; }

    const std::string& name(VertexId v) const { return names_.at(v); }
    std::optional<VertexId> find(const std::string& name) const;
    VertexId vertex(const std::string& name) const;  // throws UnknownVertex

    const Edge& edge(EdgeId e) const { return edges_.at(e); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    std::span<const EdgeId> out_edges(VertexId v) const { return out_[v]; }
    std::span<const EdgeId> in_edges(VertexId v) const { return in_[v]; }

    /// Non-cemetery vertices in id order.
    std::vector<VertexId> interior_vertices() const;

private:
    std::vector<std::string> names_;
    VertexId cemetery_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeId>> out_;
    std::vector<std::vector<EdgeId>> in_;
};

/// Sorted, duplicate-free subset of the edges of one graph.
class EdgeSet {
public:
    EdgeSet() = default;
    EdgeSet(const WeightedDigraph& g, std::vector<EdgeId> ids);

    static EdgeSet all(const WeightedDigraph& g);

    const std::vector<EdgeId>& ids() const noexcept { return ids_; }
    bool empty() const noexcept { return ids_.empty(); }
    std::size_t size() const noexcept { return ids_.size(); }
    bool contains(EdgeId e) const;

    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }

    friend bool operator==(const EdgeSet&, const EdgeSet&) = default;

private:
    std::vector<EdgeId> ids_;
};

/// Sorted, duplicate-free subset of the non-cemetery vertices of one graph.
class VertexSet {
public:
    VertexSet() = default;
    VertexSet(const WeightedDigraph& g, std::vector<VertexId> ids);

    static VertexSet interior(const WeightedDigraph& g);

    const std::vector<VertexId>& ids() const noexcept { return ids_; }
    bool empty() const noexcept { return ids_.empty(); }
    std::size_t size() const noexcept { return ids_.size(); }
    bool contains(VertexId v) const;

    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }

    friend bool operator==(const VertexSet&, const VertexSet&) = default;

private:
    std::vector<VertexId> ids_;
};

/// Throws CemeteryHasExit or NotConnectedToCemetery naming the offender.
void validate(const WeightedDigraph& g);

struct SimplifiedGraph {
    WeightedDigraph graph;
    /// merged_from[new edge] lists the original edges it replaces.
    std::vector<std::vector<EdgeId>> merged_from;
    /// edge_map[original edge] is the new edge carrying its weight.
    std::vector<EdgeId> edge_map;
};

/// One edge per ordered vertex pair, weighted by the sum of the parallel
/// edges it replaces. New edges appear in order of first occurrence.
SimplifiedGraph simplify_multi_edges(const WeightedDigraph& g);

/// Tarjan's algorithm on an adjacency list; components in reverse
/// topological order.
std::vector<std::vector<VertexId>> strongly_connected_components(
    const std::vector<std::vector<VertexId>>& adjacency);

/// True iff every vertex touched by `a` reaches every other through `a`.
bool is_strongly_connected(const WeightedDigraph& g, const EdgeSet& a);

/// Tails and heads of the edges of `a`.
std::vector<VertexId> tails(const WeightedDigraph& g, const EdgeSet& a);
std::vector<VertexId> heads(const WeightedDigraph& g, const EdgeSet& a);

/// Edges outside `a` whose tail is a tail of `a`.
EdgeSet boundary_edges(const WeightedDigraph& g, const EdgeSet& a);

/// Total weight of boundary_edges(g, a).
double beta_edges(const WeightedDigraph& g, const EdgeSet& a);

struct QuotientResult {
    WeightedDigraph graph;
    VertexId contracted;
    /// original_edge[quotient edge] is the edge of E \ A it stands for.
    std::vector<EdgeId> original_edge;
    /// projection[original vertex] is its image in the quotient.
    std::vector<VertexId> projection;

    /// Quotient edge standing for an original edge, if it survived.
    std::optional<EdgeId> quotient_edge(EdgeId original) const;
};

/// Contracts the tails of a strongly connected `a` into one new vertex and
/// deletes the edges of `a`. Surviving edges keep their weights and relative
/// order; parallel edges created by the contraction are kept.
QuotientResult quotient(const WeightedDigraph& g, const EdgeSet& a,
                        const std::string& contracted_name = "~a");

/// Translation-invariant weights on Z^d restricted to a finite box.
/// Weights are ordered (e1, -e1, e2, -e2, ...).
struct LatticeSpec {
    int dim = 0;
    std::vector<double> alpha;
    std::vector<std::vector<int>> box;

    void validate() const;
    double total_weight() const;
    std::size_t direction_count() const { return static_cast<std::size_t>(2 * dim); }
};

/// Unit vector for direction index k in (e1, -e1, e2, -e2, ...) order.
std::vector<int> direction_vector(int dim, std::size_t k);

/// Index of the direction opposite to k.
inline std::size_t opposite_direction(std::size_t k) { return k ^ 1U; }

/// Box sites become vertices 0..n-1 in box order, the cemetery is vertex n.
/// Edge site * 2d + k leaves site in direction k and ends at the neighbouring
/// site when it is in the box, at the cemetery otherwise.
WeightedDigraph build_lattice_box(const LatticeSpec& spec);

}  // namespace rwde
