#pragma once

#include "rwde/digraph.hpp"
#include "rwde/environment.hpp"
#include "rwde/experiments.hpp"
#include "rwde/integrability.hpp"
#include "rwde/kalikow.hpp"

#include <json.hpp>

#include <filesystem>

namespace rwde {

using Json = nlohmann::json;

Json read_json_file(const std::filesystem::path& path);

// {"cemetery": id, "vertices": [id, ...], "edges": [{"tail", "head", "alpha"}]}
// The cemetery may be omitted from "vertices". The graph is validated.
WeightedDigraph graph_from_json(const Json& j);
Json graph_to_json(const WeightedDigraph& g);

// {"d": int, "alpha": [a1, a-1, a2, a-2, ...], "box": [[x, y, ...], ...]}
LatticeSpec lattice_from_json(const Json& j);
Json lattice_to_json(const LatticeSpec& spec);

// {vertex: [{"edge": id, "head": vertex, "p": prob}, ...]}
Environment environment_from_json(const WeightedDigraph& g, const Json& j);
Json environment_to_json(const WeightedDigraph& g, const Environment& omega);

Json to_json(const WeightedDigraph& g, const IntegrabilityReport& report);
Json to_json(const DriftReport& report);
Json to_json(const LatticeVerdict& verdict);
Json to_json(const TailEstimate& tail);
Json to_json(const FitResult& fit);
Json to_json(const TrapEstimate& trap);

}  // namespace rwde
