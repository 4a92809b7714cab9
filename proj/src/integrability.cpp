#include "rwde/integrability.hpp"

#include "rwde/error.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

namespace rwde {

std::string_view to_string(ReportMode mode) {
    switch (mode) {
        case ReportMode::DirectedVertex: return "directed-vertex-o";
        case ReportMode::AllVertices: return "all-vertices";
        case ReportMode::Undirected: return "undirected";
        case ReportMode::Lattice: return "lattice";
    }
    return "unknown";
}

namespace {

constexpr VertexMask bit(VertexId v) { return VertexMask{1} << v; }

struct MaskGraph {
    std::vector<VertexMask> succ;
    std::vector<VertexMask> pred;
    std::vector<VertexMask> nbr;
    VertexMask loops = 0;
    VertexMask interior = 0;
};

MaskGraph mask_graph(const WeightedDigraph& g) {
    if (g.vertex_count() > 64) {
        throw Error(ErrorCode::GraphTooLarge, "subset enumeration supports at most 64 vertices");
    }
    MaskGraph m;
    m.succ.assign(g.vertex_count(), 0);
    m.pred.assign(g.vertex_count(), 0);
    m.nbr.assign(g.vertex_count(), 0);
    const VertexMask cem = bit(g.cemetery());
    m.interior = (g.vertex_count() == 64 ? ~VertexMask{0} : bit(static_cast<VertexId>(g.vertex_count())) - 1) & ~cem;
    for (const Edge& e : g.edges()) {
        if (e.tail == e.head) {
            m.loops |= bit(e.tail);
            continue;
        }
        m.succ[e.tail] |= bit(e.head) & ~cem;
        m.pred[e.head] |= bit(e.tail) & ~cem;
    }
    for (std::size_t v = 0; v < g.vertex_count(); ++v) m.nbr[v] = m.succ[v] | m.pred[v];
    return m;
}

VertexMask reach(const std::vector<VertexMask>& step, VertexMask within, VertexMask from) {
    VertexMask seen = from, frontier = from;
    while (frontier) {
        VertexMask next = 0;
        for (VertexMask f = frontier; f; f &= f - 1) next |= step[std::countr_zero(f)];
        next &= within & ~seen;
        seen |= next;
        frontier = next;
    }
    return seen;
}

bool induced_strongly_connected(const MaskGraph& m, VertexMask s) {
    if (std::popcount(s) == 1) return (m.loops & s) != 0;
    const VertexMask root = s & (~s + 1);
    return reach(m.succ, s, root) == s && reach(m.pred, s, root) == s;
}

// Weight of edges with tail in s and head outside s. Search only; final values
// are recomputed through beta_edges so every caller sums in edge-id order.
double exit_weight(const WeightedDigraph& g, VertexMask s) {
    double w = 0.0;
    for (VertexMask f = s; f; f &= f - 1) {
        for (EdgeId e : g.out_edges(static_cast<VertexId>(std::countr_zero(f)))) {
            if (!(s & bit(g.edge(e).head))) w += g.edge(e).alpha;
        }
    }
    return w;
}

struct Best {
    double score = std::numeric_limits<double>::infinity();
    VertexMask set = 0;

    void offer(double s, VertexMask m) {
        if (s < score || (s == score && m < set)) {
            score = s;
            set = m;
        }
    }
};

class Enumerator {
public:
    Enumerator(const MaskGraph& m, const std::function<void(VertexMask)>& visit, std::atomic<std::uint64_t>& count,
               std::uint64_t cap)
        : m_(m), visit_(visit), count_(count), cap_(cap) {}

    void run(VertexMask s, VertexMask frontier, VertexMask forbidden) {
        if (count_.fetch_add(1, std::memory_order_relaxed) >= cap_) {
            throw Error(ErrorCode::GraphTooLarge, "connected subset enumeration exceeded its candidate cap");
        }
        visit_(s);
        VertexMask done = 0;
        for (VertexMask rest = frontier; rest; rest &= rest - 1) {
            const VertexMask w = rest & (~rest + 1);
            const VertexMask blocked = forbidden | done;
            const VertexMask grown =
                ((rest & ~w) | (m_.nbr[std::countr_zero(w)] & m_.interior & ~s & ~w & ~blocked)) & ~blocked;
            run(s | w, grown, blocked);
            done |= w;
        }
    }

private:
    const MaskGraph& m_;
    const std::function<void(VertexMask)>& visit_;
    std::atomic<std::uint64_t>& count_;
    std::uint64_t cap_;
};

// Scores every connected set containing root (avoiding `excluded`), fanning
// the first augmentation choices out over workers.
Best search(const WeightedDigraph& g, const MaskGraph& m, VertexId root, VertexMask excluded,
            const std::function<bool(VertexMask)>& admissible, const EnumerationOptions& options,
            std::atomic<std::uint64_t>& count) {
    const VertexMask start = bit(root);
    const VertexMask frontier = m.nbr[root] & m.interior & ~excluded & ~start;

    // Root alone, then one task per first augmentation choice.
    Best best;
    if (count.fetch_add(1, std::memory_order_relaxed) >= options.max_candidates) {
        throw Error(ErrorCode::GraphTooLarge, "connected subset enumeration exceeded its candidate cap");
    }
    if (admissible(start)) best.offer(exit_weight(g, start), start);

    struct Task {
        VertexMask set, frontier, forbidden;
    };
    std::vector<Task> tasks;
    VertexMask done = 0;
    for (VertexMask rest = frontier; rest; rest &= rest - 1) {
        const VertexMask w = rest & (~rest + 1);
        const VertexMask blocked = excluded | done;
        tasks.push_back({start | w,
                         ((rest & ~w) | (m.nbr[std::countr_zero(w)] & m.interior & ~start & ~w & ~blocked)) & ~blocked,
                         blocked});
        done |= w;
    }

    const unsigned workers = std::max(1U, std::min<unsigned>(options.workers, static_cast<unsigned>(tasks.size())));
    std::vector<Best> partial(workers);
    std::vector<std::exception_ptr> failure(workers);
    auto work = [&](unsigned id) {
        try {
            std::function<void(VertexMask)> visit = [&](VertexMask s) {
                if (admissible(s)) partial[id].offer(exit_weight(g, s), s);
            };
            Enumerator en(m, visit, count, options.max_candidates);
            for (std::size_t t = id; t < tasks.size(); t += workers) {
                en.run(tasks[t].set, tasks[t].frontier, tasks[t].forbidden);
            }
        } catch (...) {
            failure[id] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
        for (auto& t : pool) t.join();
    }
    for (auto& f : failure) {
        if (f) std::rethrow_exception(f);
    }
    for (const Best& p : partial) best.offer(p.score, p.set);
    return best;
}

IntegrabilityReport make_report(const WeightedDigraph& g, const Best& best, ReportMode mode) {
    IntegrabilityReport report;
    report.mode = mode;
    if (best.set != 0) {
        EdgeSet a = induced_edges(g, best.set);
        report.min_beta = beta_edges(g, a);
        report.argmin = std::move(a);
    }
    return report;
}

void check_interior(const WeightedDigraph& g, VertexId o) {
    if (o >= g.vertex_count() || o == g.cemetery()) {
        throw Error(ErrorCode::InvalidInput, "reference vertex must be an interior vertex");
    }
}

}  // namespace

std::uint64_t for_each_connected_subset(const WeightedDigraph& g, VertexId root, VertexMask excluded,
                                        const std::function<void(VertexMask)>& visit, std::uint64_t max_candidates) {
    check_interior(g, root);
    const MaskGraph m = mask_graph(g);
    std::atomic<std::uint64_t> count{0};
    Enumerator en(m, visit, count, max_candidates);
    en.run(bit(root), m.nbr[root] & m.interior & ~excluded & ~bit(root), excluded);
    return count.load();
}

EdgeSet induced_edges(const WeightedDigraph& g, VertexMask s) {
    std::vector<EdgeId> ids;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        if ((s & bit(ed.tail)) && (s & bit(ed.head))) ids.push_back(e);
    }
    return EdgeSet(g, std::move(ids));
}

IntegrabilityReport min_beta_at(const WeightedDigraph& g, VertexId o, const EnumerationOptions& options) {
    check_interior(g, o);
    const MaskGraph m = mask_graph(g);
    std::atomic<std::uint64_t> count{0};
    const Best best = search(
        g, m, o, 0, [&](VertexMask s) { return induced_strongly_connected(m, s); }, options, count);
    return make_report(g, best, ReportMode::DirectedVertex);
}

IntegrabilityReport min_beta_all(const WeightedDigraph& g, const EnumerationOptions& options) {
    const MaskGraph m = mask_graph(g);
    std::atomic<std::uint64_t> count{0};
    Best best;
    // Each set is enumerated once, from its smallest vertex.
    for (VertexId o : g.interior_vertices()) {
        const VertexMask below = bit(o) - 1;
        const Best b = search(
            g, m, o, below, [&](VertexMask s) { return induced_strongly_connected(m, s); }, options, count);
        best.offer(b.score, b.set);
    }
    return make_report(g, best, ReportMode::AllVertices);
}

IntegrabilityReport exit_time_report(const WeightedDigraph& g, const EnumerationOptions& options) {
    const std::vector<VertexId> interior = g.interior_vertices();
    std::vector<int> local(g.vertex_count(), -1);
    for (std::size_t i = 0; i < interior.size(); ++i) local[interior[i]] = static_cast<int>(i);
    std::vector<std::vector<VertexId>> adj(interior.size());
    for (const Edge& e : g.edges()) {
        if (local[e.tail] >= 0 && local[e.head] >= 0) adj[local[e.tail]].push_back(local[e.head]);
    }
    if (interior.empty() || strongly_connected_components(adj).size() != 1) {
        throw Error(ErrorCode::NotStronglyConnectedGraph, "exit-time criterion needs a strongly connected graph");
    }
    return min_beta_all(g, options);
}

IntegrabilityReport undirected_report(const WeightedDigraph& g, VertexId o, const EnumerationOptions& options) {
    check_interior(g, o);
    std::map<std::pair<VertexId, VertexId>, int> arcs;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        if (ed.tail == ed.head) throw Error(ErrorCode::HasLoop, "undirected criterion needs a loop-free graph", std::to_string(e));
        if (ed.head != g.cemetery()) arcs[{ed.tail, ed.head}]++;
    }
    for (const auto& [arc, n] : arcs) {
        if (!arcs.contains({arc.second, arc.first})) {
            throw Error(ErrorCode::NotSymmetric, "edge '" + g.name(arc.first) + "' -> '" + g.name(arc.second) +
                                                     "' has no reverse", g.name(arc.first));
        }
    }
    const MaskGraph m = mask_graph(g);
    std::atomic<std::uint64_t> count{0};
    const Best best = search(
        g, m, o, 0, [](VertexMask s) { return std::popcount(s) >= 2; }, options, count);
    return make_report(g, best, ReportMode::Undirected);
}

LatticeVerdict lattice_report(const LatticeSpec& spec, double s) {
    spec.validate();
    LatticeVerdict v;
    v.moment = s;
    const double sigma = spec.total_weight();
    std::map<std::vector<int>, int> sites;
    for (const auto& x : spec.box) sites.emplace(x, 0);
    for (std::size_t k = 0; k < spec.direction_count(); ++k) {
        const bool realised = std::any_of(spec.box.begin(), spec.box.end(), [&](const std::vector<int>& x) {
            auto y = x;
            y[k / 2] += (k % 2 == 0) ? 1 : -1;
            return sites.contains(y);
        });
        if (!realised) continue;
        v.internal_directions.push_back(k);
        const double value = 2.0 * sigma - spec.alpha[k] - spec.alpha[opposite_direction(k)];
        v.critical_value = std::min(v.critical_value, value);
        if (!(value > s)) v.integrable = false;
    }
    return v;
}

bool zero_speed_check(std::span<const double> alpha) {
    if (alpha.empty() || alpha.size() % 2 != 0) throw Error(ErrorCode::InvalidInput, "expected 2d weights");
    const double sigma = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    for (std::size_t i = 0; i < alpha.size(); i += 2) {
        if (alpha[i] + alpha[i + 1] >= 2.0 * sigma - 1.0) return true;
    }
    return false;
}

}  // namespace rwde
