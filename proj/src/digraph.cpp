#include "rwde/digraph.hpp"

#include "rwde/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

namespace rwde {

WeightedDigraph::WeightedDigraph(std::vector<std::string> names, VertexId cemetery,
                                 std::vector<Edge> edges)
    : names_(std::move(names)), cemetery_(cemetery), edges_(std::move(edges)) {
    if (cemetery_ >= names_.size()) {
        throw Error(ErrorCode::UnknownVertex, "cemetery index out of range");
    }
    out_.resize(names_.size());
    in_.resize(names_.size());
    for (EdgeId e = 0; e < edges_.size(); ++e) {
        const Edge& ed = edges_[e];
        if (ed.tail >= names_.size() || ed.head >= names_.size()) {
            throw Error(ErrorCode::UnknownVertex, "edge " + std::to_string(e) + " has an unknown endpoint",
                        std::to_string(e));
        }
        if (!(ed.alpha > 0.0) || !std::isfinite(ed.alpha)) {
            throw Error(ErrorCode::InvalidWeight, "edge " + std::to_string(e) + " has a non-positive weight",
                        std::to_string(e));
        }
        out_[ed.tail].push_back(e);
        in_[ed.head].push_back(e);
    }
}

std::optional<VertexId> WeightedDigraph::find(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<VertexId>(it - names_.begin());
}

VertexId WeightedDigraph::vertex(const std::string& name) const {
    if (auto v = find(name)) return *v;
    throw Error(ErrorCode::UnknownVertex, "no vertex named '" + name + "'", name);
}

std::vector<VertexId> WeightedDigraph::interior_vertices() const {
    std::vector<VertexId> out;
    out.reserve(names_.size());
    for (VertexId v = 0; v < names_.size(); ++v) {
        if (v != cemetery_) out.push_back(v);
    }
    return out;
}

EdgeSet::EdgeSet(const WeightedDigraph& g, std::vector<EdgeId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    if (!ids_.empty() && ids_.back() >= g.edge_count()) {
        throw Error(ErrorCode::InvalidInput, "edge id out of range", std::to_string(ids_.back()));
    }
}

EdgeSet EdgeSet::all(const WeightedDigraph& g) {
    std::vector<EdgeId> ids(g.edge_count());
    std::iota(ids.begin(), ids.end(), EdgeId{0});
    return EdgeSet(g, std::move(ids));
}

bool EdgeSet::contains(EdgeId e) const { return std::binary_search(ids_.begin(), ids_.end(), e); }

VertexSet::VertexSet(const WeightedDigraph& g, std::vector<VertexId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    for (VertexId v : ids_) {
        if (v >= g.vertex_count()) {
            throw Error(ErrorCode::UnknownVertex, "vertex id out of range", std::to_string(v));
        }
        if (v == g.cemetery()) {
            throw Error(ErrorCode::InvalidInput, "vertex sets exclude the cemetery", g.name(v));
        }
    }
}

VertexSet VertexSet::interior(const WeightedDigraph& g) { return VertexSet(g, g.interior_vertices()); }

bool VertexSet::contains(VertexId v) const { return std::binary_search(ids_.begin(), ids_.end(), v); }

void validate(const WeightedDigraph& g) {
    if (!g.out_edges(g.cemetery()).empty()) {
        const EdgeId e = g.out_edges(g.cemetery()).front();
        throw Error(ErrorCode::CemeteryHasExit, "edge " + std::to_string(e) + " leaves the cemetery",
                    std::to_string(e));
    }
    // Backward search from the cemetery.
    std::vector<char> reaches(g.vertex_count(), 0);
    std::vector<VertexId> stack{g.cemetery()};
    reaches[g.cemetery()] = 1;
    while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        for (EdgeId e : g.in_edges(v)) {
            const VertexId t = g.edge(e).tail;
            if (!reaches[t]) {
                reaches[t] = 1;
                stack.push_back(t);
            }
        }
    }
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        if (!reaches[v]) {
            throw Error(ErrorCode::NotConnectedToCemetery,
                        "vertex '" + g.name(v) + "' has no path to the cemetery", g.name(v));
        }
    }
}

SimplifiedGraph simplify_multi_edges(const WeightedDigraph& g) {
    SimplifiedGraph out;
    std::map<std::pair<VertexId, VertexId>, EdgeId> slot;
    std::vector<Edge> edges;
    out.edge_map.resize(g.edge_count());
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        auto [it, inserted] = slot.try_emplace({ed.tail, ed.head}, static_cast<EdgeId>(edges.size()));
        if (inserted) {
            edges.push_back(ed);
            out.merged_from.push_back({e});
        } else {
            edges[it->second].alpha += ed.alpha;
            out.merged_from[it->second].push_back(e);
        }
        out.edge_map[e] = it->second;
    }
    std::vector<std::string> names;
    names.reserve(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) names.push_back(g.name(v));
    out.graph = WeightedDigraph(std::move(names), g.cemetery(), std::move(edges));
    return out;
}

namespace {

struct TarjanState {
    const std::vector<std::vector<VertexId>>& adj;
    std::vector<int> index;
    std::vector<int> lowlink;
    std::vector<char> on_stack;
    std::vector<VertexId> stack;
    std::vector<std::vector<VertexId>> components;
    int counter = 0;
};

// Iterative to stay safe on long paths.
void tarjan_from(TarjanState& st, VertexId root) {
    std::vector<std::pair<VertexId, std::size_t>> call{{root, 0}};
    st.index[root] = st.lowlink[root] = st.counter++;
    st.stack.push_back(root);
    st.on_stack[root] = 1;
    while (!call.empty()) {
        auto& [v, next] = call.back();
        if (next < st.adj[v].size()) {
            const VertexId w = st.adj[v][next++];
            if (st.index[w] < 0) {
                st.index[w] = st.lowlink[w] = st.counter++;
                st.stack.push_back(w);
                st.on_stack[w] = 1;
                call.emplace_back(w, 0);
            } else if (st.on_stack[w]) {
                st.lowlink[v] = std::min(st.lowlink[v], st.index[w]);
            }
            continue;
        }
        const VertexId done = v;
        call.pop_back();
        if (!call.empty()) {
            const VertexId parent = call.back().first;
            st.lowlink[parent] = std::min(st.lowlink[parent], st.lowlink[done]);
        }
        if (st.lowlink[done] == st.index[done]) {
            std::vector<VertexId> comp;
            VertexId w;
            do {
                w = st.stack.back();
                st.stack.pop_back();
                st.on_stack[w] = 0;
                comp.push_back(w);
            } while (w != done);
            st.components.push_back(std::move(comp));
        }
    }
}

}  // namespace

std::vector<std::vector<VertexId>> strongly_connected_components(
    const std::vector<std::vector<VertexId>>& adjacency) {
    const std::size_t n = adjacency.size();
    TarjanState st{adjacency, std::vector<int>(n, -1), std::vector<int>(n, -1),
                   std::vector<char>(n, 0), {}, {}, 0};
    for (VertexId v = 0; v < n; ++v) {
        if (st.index[v] < 0) tarjan_from(st, v);
    }
    return std::move(st.components);
}

std::vector<VertexId> tails(const WeightedDigraph& g, const EdgeSet& a) {
    std::vector<VertexId> out;
    for (EdgeId e : a) out.push_back(g.edge(e).tail);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<VertexId> heads(const WeightedDigraph& g, const EdgeSet& a) {
    std::vector<VertexId> out;
    for (EdgeId e : a) out.push_back(g.edge(e).head);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool is_strongly_connected(const WeightedDigraph& g, const EdgeSet& a) {
    if (a.empty()) throw Error(ErrorCode::EmptySet, "strong connectivity of an empty edge set");
    // Relabel the touched vertices densely, then ask for a single component.
    std::vector<VertexId> touched;
    for (EdgeId e : a) {
        touched.push_back(g.edge(e).tail);
        touched.push_back(g.edge(e).head);
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    auto local = [&](VertexId v) {
        return static_cast<VertexId>(std::lower_bound(touched.begin(), touched.end(), v) - touched.begin());
    };
    std::vector<std::vector<VertexId>> adj(touched.size());
    for (EdgeId e : a) adj[local(g.edge(e).tail)].push_back(local(g.edge(e).head));
    return strongly_connected_components(adj).size() == 1;
}

EdgeSet boundary_edges(const WeightedDigraph& g, const EdgeSet& a) {
    if (a.empty()) throw Error(ErrorCode::EmptySet, "boundary of an empty edge set");
    std::vector<EdgeId> out;
    for (VertexId t : tails(g, a)) {
        for (EdgeId e : g.out_edges(t)) {
            if (!a.contains(e)) out.push_back(e);
        }
    }
    return EdgeSet(g, std::move(out));
}

double beta_edges(const WeightedDigraph& g, const EdgeSet& a) {
    double beta = 0.0;
    for (EdgeId e : boundary_edges(g, a)) beta += g.edge(e).alpha;
    return beta;
}

std::optional<EdgeId> QuotientResult::quotient_edge(EdgeId original) const {
    auto it = std::lower_bound(original_edge.begin(), original_edge.end(), original);
    if (it == original_edge.end() || *it != original) return std::nullopt;
    return static_cast<EdgeId>(it - original_edge.begin());
}

QuotientResult quotient(const WeightedDigraph& g, const EdgeSet& a, const std::string& contracted_name) {
    if (!is_strongly_connected(g, a)) {
        throw Error(ErrorCode::NotStronglyConnected, "only strongly connected edge sets can be contracted");
    }
    const std::vector<VertexId> contracted = tails(g, a);
    auto in_a = [&](VertexId v) { return std::binary_search(contracted.begin(), contracted.end(), v); };

    QuotientResult out;
    out.projection.assign(g.vertex_count(), 0);
    std::vector<std::string> names;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        if (in_a(v)) continue;
        out.projection[v] = static_cast<VertexId>(names.size());
        names.push_back(g.name(v));
    }
    out.contracted = static_cast<VertexId>(names.size());
    names.push_back(contracted_name);
    for (VertexId v : contracted) out.projection[v] = out.contracted;

    std::vector<Edge> edges;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        if (a.contains(e)) continue;
        const Edge& ed = g.edge(e);
        edges.push_back({out.projection[ed.tail], out.projection[ed.head], ed.alpha});
        out.original_edge.push_back(e);
    }
    out.graph = WeightedDigraph(std::move(names), out.projection[g.cemetery()], std::move(edges));
    return out;
}

void LatticeSpec::validate() const {
    if (dim < 1) throw Error(ErrorCode::InvalidInput, "lattice dimension must be at least 1");
    if (alpha.size() != direction_count()) {
        throw Error(ErrorCode::InvalidInput, "expected " + std::to_string(direction_count()) + " weights");
    }
    for (double a : alpha) {
        if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidWeight, "lattice weights must be positive");
    }
    if (box.empty()) throw Error(ErrorCode::EmptySet, "lattice box is empty");
    for (const auto& site : box) {
        if (site.size() != static_cast<std::size_t>(dim)) {
            throw Error(ErrorCode::InvalidInput, "box site has the wrong dimension");
        }
    }
    auto sorted = box;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw Error(ErrorCode::InvalidInput, "box lists a site twice");
    }
}

double LatticeSpec::total_weight() const { return std::accumulate(alpha.begin(), alpha.end(), 0.0); }

std::vector<int> direction_vector(int dim, std::size_t k) {
    std::vector<int> v(static_cast<std::size_t>(dim), 0);
    v.at(k / 2) = (k % 2 == 0) ? 1 : -1;
    return v;
}

namespace {

std::string site_name(const std::vector<int>& site) {
    std::string s = "(";
    for (std::size_t i = 0; i < site.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(site[i]);
    }
    return s + ")";
}

}  // namespace

WeightedDigraph build_lattice_box(const LatticeSpec& spec) {
    spec.validate();
    const auto n = static_cast<VertexId>(spec.box.size());
    std::map<std::vector<int>, VertexId> index;
    std::vector<std::string> names;
    for (VertexId i = 0; i < n; ++i) {
        index.emplace(spec.box[i], i);
        names.push_back(site_name(spec.box[i]));
    }
    names.push_back("cemetery");
    std::vector<Edge> edges;
    edges.reserve(n * spec.direction_count());
    for (VertexId i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < spec.direction_count(); ++k) {
            auto next = spec.box[i];
            next[k / 2] += (k % 2 == 0) ? 1 : -1;
            auto it = index.find(next);
            edges.push_back({i, it == index.end() ? n : it->second, spec.alpha[k]});
        }
    }
    return WeightedDigraph(std::move(names), n, std::move(edges));
}

}  // namespace rwde
