#include "rwde/io.hpp"

#include "rwde/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace rwde {

namespace {

std::string moment_key(double s) {
    std::ostringstream out;
    out << s;
    return out.str();
}

// JSON has no infinity; unbounded values are written as null.
Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

template <class T>
T field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::InvalidInput, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidInput, std::string("bad field '") + key + "': " + e.what());
    }
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidInput, path.string() + ": " + e.what());
    }
}

WeightedDigraph graph_from_json(const Json& j) {
    const auto cemetery = field<std::string>(j, "cemetery");
    auto names = field<std::vector<std::string>>(j, "vertices");
    if (std::find(names.begin(), names.end(), cemetery) == names.end()) names.push_back(cemetery);
    std::map<std::string, VertexId> index;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!index.emplace(names[i], static_cast<VertexId>(i)).second) {
            throw Error(ErrorCode::InvalidInput, "duplicate vertex '" + names[i] + "'", names[i]);
        }
    }
    auto lookup = [&](const std::string& name) {
        auto it = index.find(name);
        if (it == index.end()) throw Error(ErrorCode::UnknownVertex, "unknown vertex '" + name + "'", name);
        return it->second;
    };
    std::vector<Edge> edges;
    for (const Json& e : field<Json>(j, "edges")) {
        edges.push_back({lookup(field<std::string>(e, "tail")), lookup(field<std::string>(e, "head")),
                         field<double>(e, "alpha")});
    }
    WeightedDigraph g(std::move(names), index.at(cemetery), std::move(edges));
    validate(g);
    return g;
}

Json graph_to_json(const WeightedDigraph& g) {
    Json j;
    j["cemetery"] = g.name(g.cemetery());
    j["vertices"] = Json::array();
    for (VertexId v = 0; v < g.vertex_count(); ++v) j["vertices"].push_back(g.name(v));
    j["edges"] = Json::array();
    for (const Edge& e : g.edges()) {
        j["edges"].push_back({{"tail", g.name(e.tail)}, {"head", g.name(e.head)}, {"alpha", e.alpha}});
    }
    return j;
}

LatticeSpec lattice_from_json(const Json& j) {
    LatticeSpec spec;
    spec.dim = field<int>(j, "d");
    spec.alpha = field<std::vector<double>>(j, "alpha");
    spec.box = field<std::vector<std::vector<int>>>(j, "box");
    spec.validate();
    return spec;
}

Json lattice_to_json(const LatticeSpec& spec) {
    return {{"d", spec.dim}, {"alpha", spec.alpha}, {"box", spec.box}};
}

Environment environment_from_json(const WeightedDigraph& g, const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "environment must be an object keyed by vertex");
    std::vector<double> omega(g.edge_count(), -1.0);
    for (const auto& [name, row] : j.items()) {
        const VertexId v = g.vertex(name);
        for (const Json& entry : row) {
            const auto e = field<EdgeId>(entry, "edge");
            if (e >= g.edge_count() || g.edge(e).tail != v) {
                throw Error(ErrorCode::InvalidInput, "edge " + std::to_string(e) + " does not leave '" + name + "'", name);
            }
            if (entry.contains("head") && entry["head"].get<std::string>() != g.name(g.edge(e).head)) {
                throw Error(ErrorCode::InvalidInput, "edge " + std::to_string(e) + " has a different head", name);
            }
            omega[e] = field<double>(entry, "p");
        }
    }
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        if (omega[e] < 0.0) {
            throw Error(ErrorCode::InvalidInput, "no probability for edge " + std::to_string(e), g.name(g.edge(e).tail));
        }
    }
    return Environment(g, std::move(omega));
}

Json environment_to_json(const WeightedDigraph& g, const Environment& omega) {
    Json j = Json::object();
    for (VertexId v : g.interior_vertices()) {
        Json row = Json::array();
        for (EdgeId e : g.out_edges(v)) row.push_back({{"edge", e}, {"head", g.name(g.edge(e).head)}, {"p", omega[e]}});
        j[g.name(v)] = std::move(row);
    }
    return j;
}

Json to_json(const WeightedDigraph& g, const IntegrabilityReport& report) {
    Json j;
    j["min_beta"] = finite_or_null(report.min_beta);
    j["argmin_edges"] = Json::array();
    if (report.argmin) {
        for (EdgeId e : *report.argmin) {
            j["argmin_edges"].push_back(
                {{"edge", e}, {"tail", g.name(g.edge(e).tail)}, {"head", g.name(g.edge(e).head)}, {"alpha", g.edge(e).alpha}});
        }
    }
    j["verdicts"] = Json::object();
    for (const auto& [s, ok] : report.verdicts) j["verdicts"][moment_key(s)] = ok;
    j["mode"] = std::string(to_string(report.mode));
    return j;
}

Json to_json(const DriftReport& r) {
    Json j;
    j["criterion_value"] = r.criterion_value;
    j["ballistic"] = r.ballistic;
    j["sigma"] = r.sigma;
    j["averaged_drift"] = r.averaged_drift;
    j["center"] = r.center ? Json(*r.center) : Json(nullptr);
    j["radius"] = r.radius ? Json(*r.radius) : Json(nullptr);
    j["separating_direction"] = r.separating_direction;
    j["zero_speed"] = r.zero_speed;
    j["per_site_drifts"] = r.per_site_drifts;
    return j;
}

Json to_json(const LatticeVerdict& v) {
    return {{"moment", v.moment},
            {"integrable", v.integrable},
            {"critical_value", finite_or_null(v.critical_value)},
            {"internal_directions", v.internal_directions}};
}

Json to_json(const TailEstimate& t) {
    return {{"samples", t.samples},
            {"hill", {{"k", t.hill_k}, {"threshold", t.hill_threshold}, {"exponent", t.hill_exponent},
                      {"ci", {t.hill_ci.lower, t.hill_ci.upper}}}},
            {"regression", {{"points", t.regression_points}, {"exponent", t.regression_exponent},
                            {"ci", {t.regression_ci.lower, t.regression_ci.upper}}}}};
}

Json to_json(const FitResult& f) {
    Json grid = Json::array();
    for (std::size_t i = 0; i < f.exponents.size(); ++i) {
        grid.push_back({{"alpha", f.exponents[i]}, {"amplitude", f.amplitudes[i]}, {"objective", f.objective[i]}});
    }
    return {{"best_exponent", f.best_exponent},
            {"best_objective", f.best_objective},
            {"boundary", f.boundary},
            {"window_points", f.window_points},
            {"grid", std::move(grid)}};
}

Json to_json(const TrapEstimate& t) {
    Json points = Json::array();
    for (const TrapPoint& p : t.points) {
        points.push_back({{"epsilon", p.epsilon}, {"estimate", p.estimate}, {"std_error", p.std_error}, {"exact", p.exact}});
    }
    return {{"beta", t.beta}, {"slope", finite_or_null(t.slope)}, {"points", std::move(points)}};
}

}  // namespace rwde
