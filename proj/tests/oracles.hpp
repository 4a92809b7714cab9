#pragma once

// Slow, independent reference computations for the tests. Nothing here calls
// into the library's algorithms beyond reading graph structure.

#include "rwde/digraph.hpp"
#include "rwde/environment.hpp"
#include "rwde/rng.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using rwde::EdgeId;
using rwde::VertexId;
using rwde::WeightedDigraph;

// reach[x][y]: y reachable from x by a path of length >= 0 inside `edges`.
inline std::vector<std::vector<bool>> closure(const WeightedDigraph& g, const std::vector<EdgeId>& edges) {
    const std::size_t n = g.vertex_count();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t v = 0; v < n; ++v) reach[v][v] = true;
    for (EdgeId e : edges) reach[g.edge(e).tail][g.edge(e).head] = true;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (reach[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = true;
    return reach;
}

inline bool strongly_connected(const WeightedDigraph& g, const std::vector<EdgeId>& edges) {
    if (edges.empty()) return false;
    std::set<VertexId> touched;
    for (EdgeId e : edges) {
        touched.insert(g.edge(e).tail);
        touched.insert(g.edge(e).head);
    }
    const auto reach = closure(g, edges);
    for (VertexId x : touched)
        for (VertexId y : touched)
            if (!reach[x][y]) return false;
    // a lone vertex needs its loop
    if (touched.size() == 1) return g.edge(edges[0]).tail == g.edge(edges[0]).head;
    return true;
}

// Sum of alpha over edges outside `edges` whose tail is a tail of `edges`.
inline double beta(const WeightedDigraph& g, const std::vector<EdgeId>& edges) {
    std::set<VertexId> tails;
    std::set<EdgeId> in(edges.begin(), edges.end());
    for (EdgeId e : edges) tails.insert(g.edge(e).tail);
    double b = 0.0;
    for (EdgeId e = 0; e < g.edge_count(); ++e)
        if (!in.count(e) && tails.count(g.edge(e).tail)) b += g.edge(e).alpha;
    return b;
}

struct BruteMin {
    double min_beta = std::numeric_limits<double>::infinity();
    std::vector<EdgeId> argmin;
};

// Every subset of E; `at` restricts to sets with that vertex among the tails.
inline BruteMin brute_min_beta(const WeightedDigraph& g, std::optional<VertexId> at) {
    const std::size_t m = g.edge_count();
    BruteMin best;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
        std::vector<EdgeId> edges;
        bool has_at = !at.has_value();
        for (EdgeId e = 0; e < m; ++e) {
            if (mask >> e & 1U) {
                edges.push_back(e);
                if (at && g.edge(e).tail == *at) has_at = true;
            }
        }
        if (!has_at || !strongly_connected(g, edges)) continue;
        const double b = beta(g, edges);
        if (b < best.min_beta) {
            best.min_beta = b;
            best.argmin = edges;
        }
    }
    return best;
}

// Neumann series sum_n (delta Q)^n over the domain by repeated squaring:
// S <- S + P S, P <- P P, which reaches 2^k terms after k rounds.
inline std::vector<std::vector<double>> green_series(const WeightedDigraph& g, const rwde::Environment& omega,
                                                     const std::vector<bool>& in_domain, double delta) {
    using Mat = std::vector<std::vector<double>>;
    const std::size_t n = g.vertex_count();
    auto mul = [n](const Mat& a, const Mat& b) {
        Mat c(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                if (a[i][k] != 0.0)
                    for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
        return c;
    };
    Mat power(n, std::vector<double>(n, 0.0)), total(n, std::vector<double>(n, 0.0));
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const auto& ed = g.edge(e);
        if (in_domain[ed.tail] && in_domain[ed.head]) power[ed.tail][ed.head] += delta * omega[e];
    }
    for (std::size_t i = 0; i < n; ++i)
        if (in_domain[i]) total[i][i] = 1.0;
    for (int round = 0; round < 80; ++round) {
        const Mat step = mul(power, total);
        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                total[i][j] += step[i][j];
                mass += power[i][j];
            }
        if (mass < 1e-300) break;
        power = mul(power, power);
    }
    return total;
}

// Adaptive Simpson on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int depth) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
            if (depth > 40 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
            return rec(lo, mid, flo, flm, fmid, left, depth + 1) + rec(mid, hi, fmid, frm, fhi, right, depth + 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 0);
}

// P(Beta(b, a) <= eps) by quadrature after the substitution u = m^b, which
// removes the singularity at zero.
inline double beta_cdf(double b, double a, double eps) {
    const double log_norm = std::lgamma(b) + std::lgamma(a) - std::lgamma(a + b);
    auto f = [&](double u) {
        const double m = std::pow(u, 1.0 / b);
        return std::exp((a - 1.0) * std::log1p(-m) - log_norm) / b;
    };
    return integrate(f, 0.0, std::pow(eps, b), 1e-15);
}

// Average visits to each vertex over `walks` simulated walks from x.
struct VisitStats {
    std::vector<double> mean;
    std::vector<double> std_error;
};

inline VisitStats simulate_visits(const WeightedDigraph& g, const rwde::Environment& omega, VertexId x,
                                  std::size_t walks, rwde::RngStream& rng) {
    const std::size_t n = g.vertex_count();
    std::vector<double> sum(n, 0.0), sum2(n, 0.0), count(n, 0.0);
    for (std::size_t w = 0; w < walks; ++w) {
        std::fill(count.begin(), count.end(), 0.0);
        VertexId at = x;
        while (at != g.cemetery()) {
            count[at] += 1.0;
            double u = rng.uniform(), acc = 0.0;
            EdgeId chosen = g.out_edges(at).back();
            for (EdgeId e : g.out_edges(at)) {
                acc += omega[e];
                if (u < acc) {
                    chosen = e;
                    break;
                }
            }
            at = g.edge(chosen).head;
        }
        for (std::size_t v = 0; v < n; ++v) {
            sum[v] += count[v];
            sum2[v] += count[v] * count[v];
        }
    }
    VisitStats s;
    const double m = static_cast<double>(walks);
    for (std::size_t v = 0; v < n; ++v) {
        const double mean = sum[v] / m;
        s.mean.push_back(mean);
        s.std_error.push_back(std::sqrt(std::max(0.0, sum2[v] / m - mean * mean) / (m - 1.0)));
    }
    return s;
}

// Random valid digraph: `n` interior vertices plus a cemetery, `m` edges with
// weights in [0.2, 2.2); loops allowed when `loops`. Vertices that cannot
// reach the cemetery get an extra exit edge.
inline WeightedDigraph random_graph(rwde::RngStream& rng, std::size_t n, std::size_t m, bool loops) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
    names.push_back("cemetery");
    const auto cem = static_cast<VertexId>(n);
    std::vector<rwde::Edge> edges;
    while (edges.size() < m) {
        const auto t = static_cast<VertexId>(rng.next_u64() % n);
        const auto h = static_cast<VertexId>(rng.next_u64() % (n + 1));
        if (!loops && t == h) continue;
        edges.push_back({t, h, 0.2 + 2.0 * rng.uniform()});
    }
    for (;;) {
        WeightedDigraph g(names, cem, edges);
        std::vector<EdgeId> all(g.edge_count());
        for (EdgeId e = 0; e < all.size(); ++e) all[e] = e;
        const auto reach = closure(g, all);
        std::optional<VertexId> stuck;
        for (VertexId v = 0; v < n && !stuck; ++v)
            if (!reach[v][cem]) stuck = v;
        if (!stuck) return g;
        edges.push_back({*stuck, cem, 0.2 + 2.0 * rng.uniform()});
    }
}

}  // namespace oracle
