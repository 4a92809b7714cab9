#pragma once

#include "rwde/digraph.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string_view>

namespace rwde {

enum class ReportMode { DirectedVertex, AllVertices, Undirected, Lattice };

std::string_view to_string(ReportMode mode);

/// Minimum trap strength over the admissible edge sets and the resulting
/// moment verdicts. A moment s is integrable iff s < min_beta.
struct IntegrabilityReport {
    double min_beta = std::numeric_limits<double>::infinity();
    std::optional<EdgeSet> argmin;
    ReportMode mode = ReportMode::DirectedVertex;
    std::map<double, bool> verdicts;

    bool integrable(double s) const { return s < min_beta; }
    IntegrabilityReport& with_verdict(double s) {
        verdicts[s] = integrable(s);
        return *this;
    }
};

struct EnumerationOptions {
    /// Stop with GraphTooLarge after this many candidate vertex sets.
    std::uint64_t max_candidates = std::uint64_t{1} << 24;
    /// Threads sharing the first augmentation choices.
    unsigned workers = 1;
};

/// Bit v set iff vertex id v is in the set; graphs have at most 64 vertices.
using VertexMask = std::uint64_t;

/// Calls `visit` once for every weakly connected set of interior vertices
/// that contains `root` and avoids `excluded`, growing sets by canonical
/// augmentation. Returns the number of sets visited.
std::uint64_t for_each_connected_subset(const WeightedDigraph& g, VertexId root, VertexMask excluded,
                                        const std::function<void(VertexMask)>& visit,
                                        std::uint64_t max_candidates = std::uint64_t{1} << 24);

/// All edges with both endpoints in `s`.
EdgeSet induced_edges(const WeightedDigraph& g, VertexMask s);

/// Minimum of beta_A over strongly connected A with o among the tails of A.
/// Searches vertex sets S containing o whose induced edges are strongly
/// connected; enlarging A to all edges inside its tails never raises beta_A.
IntegrabilityReport min_beta_at(const WeightedDigraph& g, VertexId o, const EnumerationOptions& options = {});

/// Minimum over every non-empty strongly connected edge set. Requires the
/// graph restricted to its interior vertices to be strongly connected.
IntegrabilityReport exit_time_report(const WeightedDigraph& g, const EnumerationOptions& options = {});

/// Same minimum without the strong connectivity requirement on g.
IntegrabilityReport min_beta_all(const WeightedDigraph& g, const EnumerationOptions& options = {});

/// Vertex-set form for symmetric loop-free graphs: connected S strictly
/// containing {o}, scored by the weight of edges leaving S.
IntegrabilityReport undirected_report(const WeightedDigraph& g, VertexId o, const EnumerationOptions& options = {});

struct LatticeVerdict {
    double moment = 0.0;
    bool integrable = true;
    /// Smallest 2*Sigma - alpha_e - alpha_{-e} over directions realised
    /// inside the box; +inf when no two box sites are neighbours.
    double critical_value = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> internal_directions;
};

LatticeVerdict lattice_report(const LatticeSpec& spec, double s);

/// Some direction i has alpha_i + alpha_{-i} >= 2 Sigma - 1.
bool zero_speed_check(std::span<const double> alpha);

}  // namespace rwde
