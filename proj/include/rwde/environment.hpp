#pragma once

#include "rwde/digraph.hpp"
#include "rwde/rng.hpp"

#include <optional>
#include <span>
#include <vector>

namespace rwde {

/// Transition probabilities indexed by edge id. The out-edges of every
/// vertex carry a probability vector.
class Environment {
public:
    Environment() = default;
    Environment(const WeightedDigraph& g, std::vector<double> omega);

    double operator[](EdgeId e) const { return omega_[e]; }
    const std::vector<double>& values() const noexcept { return omega_; }
    std::size_t size() const noexcept { return omega_.size(); }

private:
    std::vector<double> omega_;
};

/// Independent Dirichlet draw at each non-cemetery vertex, vertices in id
/// order, coordinates in out-edge order.
Environment sample_environment(const WeightedDigraph& g, RngStream& rng);

struct GreenOptions {
    /// Per-step survival factor; 1 is the plain absorbing chain.
    double delta = 1.0;
    /// Walk is killed on leaving this set; all interior vertices by default.
    std::optional<VertexSet> domain;
    /// Rows to compute; every vertex of the domain by default.
    std::optional<std::vector<VertexId>> sources;
};

/// Expected (discounted) visit counts G(x, y) for x among the requested
/// sources.
class GreenTable {
public:
    GreenTable(std::vector<VertexId> domain, std::vector<VertexId> sources, std::size_t vertex_count,
               std::vector<double> values, double delta);

    /// Zero when y is outside the domain; x must be a source or outside the
    /// domain.
    double operator()(VertexId x, VertexId y) const;

    const std::vector<VertexId>& domain() const noexcept { return domain_; }
    const std::vector<VertexId>& sources() const noexcept { return sources_; }
    double delta() const noexcept { return delta_; }

    /// Sum of a row over the domain: the expected (discounted) exit time.
    double row_sum(VertexId x) const;

private:
    std::vector<VertexId> domain_;
    std::vector<VertexId> sources_;
    std::vector<int> column_of_;
    std::vector<int> row_of_;
    std::vector<double> values_;  // row-major, sources x domain
    double delta_;
};

/// Solves the absorbing-chain system (I - delta Q) over the domain.
GreenTable green(const WeightedDigraph& g, const Environment& omega, const GreenOptions& options = {});

/// h(x) = P_x(reach `targets` before `blocked`), time zero included, moving
/// only through `allowed` edges when given (any other step kills the walk).
/// Indexed by vertex id.
std::vector<double> hitting_probabilities(const WeightedDigraph& g, const Environment& omega,
                                          std::span<const VertexId> targets,
                                          std::span<const VertexId> blocked,
                                          const EdgeSet* allowed = nullptr);

/// Same event counted from time one: the first step is always taken.
double strict_hitting_probability(const WeightedDigraph& g, const Environment& omega, VertexId start,
                                  std::span<const VertexId> targets, std::span<const VertexId> blocked,
                                  const EdgeSet* allowed = nullptr);

/// P_o(reach the cemetery before returning to o), computed both as
/// 1 / G(o, o) and from hitting probabilities; InconsistentSolvers when the
/// two differ by more than 1e-10 relative.
double escape_probability(const WeightedDigraph& g, const Environment& omega, VertexId o);

/// E_x[T_U]: sum over U of the Green function killed outside U.
double expected_exit_time(const WeightedDigraph& g, const Environment& omega, VertexId x, const VertexSet& domain);

/// Greedy chain of most likely exit edges started at o.
struct CConstruction {
    std::vector<EdgeId> edges;            // e_1 .. e_n in order of selection
    std::vector<double> exit_probability; // probability that e_k was the exit edge
    bool ends_at_origin = false;          // head of e_n is o (otherwise the cemetery)

    EdgeSet edge_set(const WeightedDigraph& g) const { return EdgeSet(g, edges); }
};

/// Ties are broken by smallest edge id; edges that cannot be the exit edge
/// have probability zero and never win.
CConstruction construct_C(const WeightedDigraph& g, const Environment& omega, VertexId o);

/// Smallest P_o(hit x before returning to o, moving only along C) over the
/// heads x != o of C; empty when C has no such head.
std::optional<double> construction_certificate(const WeightedDigraph& g, const Environment& omega,
                                               VertexId o, const EdgeSet& c);

struct QuotientEnvironment {
    QuotientResult quotient;
    Environment omega;
    double sigma = 0.0;              // total mass on the boundary edges of C
    double escape_mass = 0.0;        // sum over tails x of C of P_x(cemetery before returning to the tails)
    double quotient_escape_mass = 0.0;  // sigma * escape probability from the contracted vertex
};

/// Restricts omega to the surviving edges and renormalises the boundary edges
/// of C by sigma. Computes both sides of the path-counting identity and throws
/// IdentityViolation when they differ by more than 1e-9 relative.
QuotientEnvironment quotient_environment(const WeightedDigraph& g, const Environment& omega, const EdgeSet& c);

}  // namespace rwde
