#include "rwde/environment.hpp"

#include "rwde/dirichlet.hpp"
#include "rwde/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace rwde {

namespace {

constexpr double kEscapeTolerance = 1e-10;
constexpr double kQuotientTolerance = 1e-9;

bool member(std::span<const VertexId> set, VertexId v) {
    return std::find(set.begin(), set.end(), v) != set.end();
}

double relative_gap(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// LU with partial pivoting; a zero pivot or a non-finite solution means the
// chain can stay in the solved region forever.
Eigen::MatrixXd solve_checked(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    if ((lu.matrixLU().diagonal().array() == 0.0).any()) {
        throw Error(ErrorCode::SingularSystem, "absorbing-chain matrix is singular");
    }
    Eigen::MatrixXd x = lu.solve(rhs);
    if (!x.allFinite()) throw Error(ErrorCode::SingularSystem, "absorbing-chain solve produced non-finite values");
    return x;
}

}  // namespace

Environment::Environment(const WeightedDigraph& g, std::vector<double> omega) : omega_(std::move(omega)) {
    if (omega_.size() != g.edge_count()) {
        throw Error(ErrorCode::InvalidInput, "environment does not match the graph's edge count");
    }
    for (VertexId v : g.interior_vertices()) {
        const auto out = g.out_edges(v);
        if (out.empty()) continue;
        double sum = 0.0;
        for (EdgeId e : out) {
            if (!(omega_[e] >= 0.0) || !std::isfinite(omega_[e])) {
                throw Error(ErrorCode::NotOnSimplex, "negative transition probability", std::to_string(e));
            }
            sum += omega_[e];
        }
        if (std::abs(sum - 1.0) > kSimplexTolerance) {
            throw Error(ErrorCode::NotOnSimplex, "transition probabilities at '" + g.name(v) + "' do not sum to one",
                        g.name(v));
        }
    }
}

Environment sample_environment(const WeightedDigraph& g, RngStream& rng) {
    std::vector<double> omega(g.edge_count(), 0.0);
    std::vector<double> alpha, draw;
    for (VertexId v : g.interior_vertices()) {
        const auto out = g.out_edges(v);
        if (out.empty()) continue;
        alpha.resize(out.size());
        draw.resize(out.size());
        for (std::size_t i = 0; i < out.size(); ++i) alpha[i] = g.edge(out[i]).alpha;
        sample_into(alpha, rng, draw);
        for (std::size_t i = 0; i < out.size(); ++i) omega[out[i]] = draw[i];
    }
    return Environment(g, std::move(omega));
}

GreenTable::GreenTable(std::vector<VertexId> domain, std::vector<VertexId> sources, std::size_t vertex_count,
                       std::vector<double> values, double delta)
    : domain_(std::move(domain)), sources_(std::move(sources)), column_of_(vertex_count, -1),
      row_of_(vertex_count, -1), values_(std::move(values)), delta_(delta) {
    for (std::size_t i = 0; i < domain_.size(); ++i) column_of_[domain_[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < sources_.size(); ++i) row_of_[sources_[i]] = static_cast<int>(i);
}

double GreenTable::operator()(VertexId x, VertexId y) const {
    const int col = column_of_.at(y);
    if (column_of_.at(x) < 0 || col < 0) return 0.0;
    const int row = row_of_[x];
    if (row < 0) throw Error(ErrorCode::InvalidInput, "Green row was not computed", std::to_string(x));
    return values_[static_cast<std::size_t>(row) * domain_.size() + static_cast<std::size_t>(col)];
}

double GreenTable::row_sum(VertexId x) const {
    double s = 0.0;
    for (VertexId y : domain_) s += (*this)(x, y);
    return s;
}

GreenTable green(const WeightedDigraph& g, const Environment& omega, const GreenOptions& options) {
    const double delta = options.delta;
    if (!(delta >= 0.0 && delta <= 1.0)) throw Error(ErrorCode::InvalidInput, "killing factor must lie in [0, 1]");
    const VertexSet domain = options.domain ? *options.domain : VertexSet::interior(g);
    const auto& dom = domain.ids();
    const std::size_t n = dom.size();
    std::vector<int> local(g.vertex_count(), -1);
    for (std::size_t i = 0; i < n; ++i) local[dom[i]] = static_cast<int>(i);

    std::vector<VertexId> sources = options.sources ? *options.sources : dom;
    for (VertexId s : sources) {
        if (s >= g.vertex_count() || local[s] < 0) {
            throw Error(ErrorCode::InvalidInput, "Green source outside the domain", std::to_string(s));
        }
    }

    // Transposed system: row x of (I - delta Q)^{-1} solves (I - delta Q)^T g = e_x.
    // Diagonal entries are assembled without cancellation:
    // 1 - delta q_loop = (1 - delta) + delta * (mass not on loops).
    Eigen::MatrixXd at = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double off_loop = 0.0;
        bool loop = false;
        for (EdgeId e : g.out_edges(dom[i])) {
            const Edge& ed = g.edge(e);
            if (ed.head == dom[i]) {
                loop = true;
                continue;
            }
            off_loop += omega[e];
            const int j = local[ed.head];
            if (j >= 0) at(j, static_cast<Eigen::Index>(i)) -= delta * omega[e];
        }
        at(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = loop ? (1.0 - delta) + delta * off_loop : 1.0;
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(sources.size()));
    for (std::size_t k = 0; k < sources.size(); ++k) rhs(local[sources[k]], static_cast<Eigen::Index>(k)) = 1.0;
    const Eigen::MatrixXd sol = solve_checked(at, rhs);

    // One sweep of the last-step decomposition
    //   G(x, y) (1 - delta q_loop(y)) = 1{x = y} + delta sum_{z -> y, z != y} G(x, z) omega(z -> y),
    // a sum of nonnegative terms, so entries close to 1 or 0 keep their
    // relative accuracy and stay monotone in delta.
    std::vector<double> values(sources.size() * n);
    for (std::size_t k = 0; k < sources.size(); ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        std::vector<double> acc(n, 0.0);
        acc[static_cast<std::size_t>(local[sources[k]])] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double from = std::max(0.0, sol(static_cast<Eigen::Index>(i), col));
            for (EdgeId e : g.out_edges(dom[i])) {
                const Edge& ed = g.edge(e);
                const int j = local[ed.head];
                if (j >= 0 && ed.head != dom[i]) acc[static_cast<std::size_t>(j)] += delta * from * omega[e];
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double diag = at(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
            values[k * n + j] = acc[j] / diag;
        }
    }
    return GreenTable(dom, std::move(sources), g.vertex_count(), std::move(values), delta);
}

std::vector<double> hitting_probabilities(const WeightedDigraph& g, const Environment& omega,
                                          std::span<const VertexId> targets, std::span<const VertexId> blocked,
                                          const EdgeSet* allowed) {
    const std::size_t nv = g.vertex_count();
    std::vector<double> h(nv, 0.0);
    std::vector<int> local(nv, -1);
    std::vector<VertexId> free;
    for (VertexId v = 0; v < nv; ++v) {
        if (member(targets, v)) {
            h[v] = 1.0;
        } else if (!member(blocked, v)) {
            local[v] = static_cast<int>(free.size());
            free.push_back(v);
        }
    }
    const auto n = static_cast<Eigen::Index>(free.size());
    if (n == 0) return h;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const VertexId z = free[static_cast<std::size_t>(i)];
        const auto out = g.out_edges(z);
        double diag = out.empty() ? 1.0 : 0.0;
        for (EdgeId e : out) {
            const Edge& ed = g.edge(e);
            const bool usable = !allowed || allowed->contains(e);
            if (ed.head == z && usable) continue;
            diag += omega[e];
            if (!usable) continue;
            if (member(targets, ed.head)) {
                b(i) += omega[e];
            } else if (local[ed.head] >= 0) {
                a(i, local[ed.head]) -= omega[e];
            }
        }
        a(i, i) = diag;
    }
    const Eigen::MatrixXd x = solve_checked(a, b);
    for (Eigen::Index i = 0; i < n; ++i) {
        h[free[static_cast<std::size_t>(i)]] = std::clamp(x(i, 0), 0.0, 1.0);
    }
    return h;
}

double strict_hitting_probability(const WeightedDigraph& g, const Environment& omega, VertexId start,
                                  std::span<const VertexId> targets, std::span<const VertexId> blocked,
                                  const EdgeSet* allowed) {
    const std::vector<double> h = hitting_probabilities(g, omega, targets, blocked, allowed);
    double p = 0.0;
    for (EdgeId e : g.out_edges(start)) {
        if (allowed && !allowed->contains(e)) continue;
        p += omega[e] * h[g.edge(e).head];
    }
    return p;
}

double escape_probability(const WeightedDigraph& g, const Environment& omega, VertexId o) {
    if (o == g.cemetery()) throw Error(ErrorCode::InvalidInput, "escape probability from the cemetery");
    GreenOptions opts;
    opts.sources = std::vector<VertexId>{o};
    const double by_green = 1.0 / green(g, omega, opts)(o, o);
    const VertexId cem = g.cemetery();
    const double by_hitting = strict_hitting_probability(g, omega, o, std::span(&cem, 1), std::span(&o, 1));
    if (relative_gap(by_green, by_hitting) > kEscapeTolerance) {
        throw Error(ErrorCode::InconsistentSolvers,
                    "1/G(o,o) and the hitting-probability solve disagree at '" + g.name(o) + "'", g.name(o));
    }
    return by_hitting;
}

double expected_exit_time(const WeightedDigraph& g, const Environment& omega, VertexId x, const VertexSet& domain) {
    if (!domain.contains(x)) throw Error(ErrorCode::InvalidInput, "start vertex outside the domain", g.name(x));
    GreenOptions opts;
    opts.domain = domain;
    opts.sources = std::vector<VertexId>{x};
    return green(g, omega, opts).row_sum(x);
}

CConstruction construct_C(const WeightedDigraph& g, const Environment& omega, VertexId o) {
    if (o == g.cemetery()) throw Error(ErrorCode::InvalidInput, "construction must start off the cemetery");
    CConstruction out;
    std::vector<char> in_c(g.edge_count(), 0);
    VertexId y = o;
    for (;;) {
        // Vertices the walk can occupy while moving inside C: the tails of C
        // and the current start point (heads of C are among these).
        std::vector<VertexId> region{y};
        for (EdgeId e : out.edges) region.push_back(g.edge(e).tail);
        std::sort(region.begin(), region.end());
        region.erase(std::unique(region.begin(), region.end()), region.end());
        std::vector<int> local(g.vertex_count(), -1);
        for (std::size_t i = 0; i < region.size(); ++i) local[region[i]] = static_cast<int>(i);

        // Visits w(z) to the region before the first step outside C, from y.
        const auto n = static_cast<Eigen::Index>(region.size());
        Eigen::MatrixXd at = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const VertexId z = region[static_cast<std::size_t>(i)];
            double diag = 0.0;
            for (EdgeId e : g.out_edges(z)) {
                const Edge& ed = g.edge(e);
                if (in_c[e] && ed.head == z) continue;
                diag += omega[e];
                if (in_c[e]) at(local[ed.head], i) -= omega[e];
            }
            at(i, i) = diag;
        }
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 1);
        rhs(local[y], 0) = 1.0;
        const Eigen::MatrixXd visits = solve_checked(at, rhs);

        EdgeId best = 0;
        double best_p = -1.0;
        for (EdgeId e = 0; e < g.edge_count(); ++e) {
            if (in_c[e]) continue;
            const int t = local[g.edge(e).tail];
            if (t < 0) continue;
            const double p = visits(t, 0) * omega[e];
            if (p > best_p) {
                best_p = p;
                best = e;
            }
        }
        if (best_p < 0.0) throw Error(ErrorCode::SingularSystem, "no exit edge out of the current set");
        in_c[best] = 1;
        out.edges.push_back(best);
        out.exit_probability.push_back(best_p);
        y = g.edge(best).head;
        if (y == o || y == g.cemetery()) {
            out.ends_at_origin = (y == o);
            return out;
        }
    }
}

std::optional<double> construction_certificate(const WeightedDigraph& g, const Environment& omega, VertexId o,
                                               const EdgeSet& c) {
    std::optional<double> worst;
    for (VertexId x : heads(g, c)) {
        if (x == o) continue;
        const double p = strict_hitting_probability(g, omega, o, std::span(&x, 1), std::span(&o, 1), &c);
        worst = worst ? std::min(*worst, p) : p;
    }
    return worst;
}

QuotientEnvironment quotient_environment(const WeightedDigraph& g, const Environment& omega, const EdgeSet& c) {
    QuotientEnvironment out;
    out.quotient = quotient(g, c);
    const auto& q = out.quotient;
    const EdgeSet boundary = boundary_edges(g, c);
    for (EdgeId e : boundary) out.sigma += omega[e];
    if (!(out.sigma > 0.0)) throw Error(ErrorCode::ZeroMass, "no mass leaves the contracted set");

    std::vector<double> tilde(q.graph.edge_count());
    double contracted_sum = 0.0;
    for (EdgeId qe = 0; qe < q.graph.edge_count(); ++qe) {
        const EdgeId e = q.original_edge[qe];
        if (q.graph.edge(qe).tail == q.contracted) {
            tilde[qe] = omega[e] / out.sigma;
            contracted_sum += tilde[qe];
        } else {
            tilde[qe] = omega[e];
        }
    }
    for (EdgeId qe : q.graph.out_edges(q.contracted)) tilde[qe] /= contracted_sum;
    out.omega = Environment(q.graph, std::move(tilde));

    const std::vector<VertexId> c_tails = tails(g, c);
    const VertexId cem = g.cemetery();
    for (VertexId x : c_tails) {
        out.escape_mass += strict_hitting_probability(g, omega, x, std::span(&cem, 1), c_tails);
    }
    const VertexId qcem = q.graph.cemetery();
    const VertexId qa = q.contracted;
    out.quotient_escape_mass =
        out.sigma * strict_hitting_probability(q.graph, out.omega, qa, std::span(&qcem, 1), std::span(&qa, 1));
    if (relative_gap(out.escape_mass, out.quotient_escape_mass) > kQuotientTolerance) {
        throw Error(ErrorCode::IdentityViolation, "escape mass differs between the graph and its quotient");
    }
    return out;
}

}  // namespace rwde
