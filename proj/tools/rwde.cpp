#include "rwde/dirichlet.hpp"
#include "rwde/environment.hpp"
#include "rwde/error.hpp"
#include "rwde/experiments.hpp"
#include "rwde/integrability.hpp"
#include "rwde/io.hpp"
#include "rwde/kalikow.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace rwde;

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random walks in Dirichlet environments"};
    app.require_subcommand(1);

    std::string graph_path, spec_path, env_path, csv_path, out_path, vertex;
    std::vector<double> moments;
    std::uint64_t seed = 0;
    std::size_t samples = 100000;
    unsigned workers = 1;
    bool undirected = false;

    auto* analyze = app.add_subcommand("analyze", "min beta over strongly connected edge sets");
    analyze->add_option("graph", graph_path, "graph JSON")->required()->check(CLI::ExistingFile);
    analyze->add_option("--vertex", vertex, "reference vertex; all vertices when omitted");
    analyze->add_option("--moment", moments, "moments s to classify");
    analyze->add_flag("--undirected", undirected, "connected vertex sets of a symmetric graph (needs --vertex)");

    auto* tail = app.add_subcommand("tail", "tail exponent of G(o,o) from sampled environments");
    tail->add_option("graph", graph_path)->required()->check(CLI::ExistingFile);
    tail->add_option("--vertex", vertex)->required();
    tail->add_option("--samples", samples);
    tail->add_option("--seed", seed)->required();
    tail->add_option("--workers", workers);
    tail->add_option("--csv", csv_path, "write the empirical survival function here");

    auto* trap = app.add_subcommand("trap", "trap probability on the minimising edge set at a vertex");
    std::vector<double> epsilons{0.3, 0.2, 0.1, 0.05};
    trap->add_option("graph", graph_path)->required()->check(CLI::ExistingFile);
    trap->add_option("--vertex", vertex)->required();
    trap->add_option("--epsilon", epsilons);
    trap->add_option("--samples", samples);
    trap->add_option("--seed", seed)->required();

    auto* green_cmd = app.add_subcommand("green", "Green function of a given environment as CSV");
    double delta = 1.0;
    green_cmd->add_option("graph", graph_path)->required()->check(CLI::ExistingFile);
    green_cmd->add_option("--env", env_path)->required()->check(CLI::ExistingFile);
    green_cmd->add_option("--delta", delta, "per-step survival factor")->check(CLI::Range(0.0, 1.0));

    auto* sample_env = app.add_subcommand("sample-env", "draw one environment as JSON");
    sample_env->add_option("graph", graph_path)->required()->check(CLI::ExistingFile);
    sample_env->add_option("--seed", seed)->required();

    auto* kalikow = app.add_subcommand("kalikow", "Kalikow drifts on a lattice box");
    KalikowOptions kopt;
    kalikow->add_option("spec", spec_path)->required()->check(CLI::ExistingFile);
    kalikow->add_option("--delta", kopt.delta)->check(CLI::Range(0.0, 1.0));
    kalikow->add_option("--samples", kopt.samples);
    kalikow->add_option("--seed", kopt.seed)->required();
    kalikow->add_option("--origin", kopt.origin, "index of the start site in the box");
    kalikow->add_option("--workers", kopt.workers);

    auto* zd = app.add_subcommand("zd-sim", "mean displacement of walks on Z^d");
    TrajectoryOptions topt;
    std::size_t checkpoint_count = 1000;
    zd->add_option("spec", spec_path)->required()->check(CLI::ExistingFile);
    zd->add_option("--traj", topt.trajectories);
    zd->add_option("--steps", topt.steps);
    zd->add_option("--seed", topt.seed)->required();
    zd->add_option("--workers", topt.workers);
    zd->add_option("--checkpoints", checkpoint_count, "number of log-spaced checkpoints");
    zd->add_option("--out", out_path)->required();

    auto* fit = app.add_subcommand("fit", "fit C n^alpha to a run CSV");
    FitOptions fopt;
    std::uint64_t window_lo = 0, window_hi = 0;
    fit->add_option("run", csv_path)->required()->check(CLI::ExistingFile);
    fit->add_option("--grid-lo", fopt.grid_lo);
    fit->add_option("--grid-hi", fopt.grid_hi);
    fit->add_option("--grid-step", fopt.grid_step);
    auto* wlo = fit->add_option("--window-lo", window_lo, "exclusive lower end of the fit window");
    auto* whi = fit->add_option("--window-hi", window_hi);

    auto* criteria = app.add_subcommand("criteria", "ballisticity, zero speed and lattice integrability");
    double moment = 1.0;
    criteria->add_option("spec", spec_path)->required()->check(CLI::ExistingFile);
    criteria->add_option("--moment", moment);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            const WeightedDigraph g = graph_from_json(read_json_file(graph_path));
            IntegrabilityReport report;
            if (undirected) {
                if (vertex.empty()) throw Error(ErrorCode::InvalidInput, "--undirected needs --vertex");
                report = undirected_report(g, g.vertex(vertex));
            } else if (!vertex.empty()) {
                report = min_beta_at(g, g.vertex(vertex));
            } else {
                try {
                    report = exit_time_report(g);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::NotStronglyConnectedGraph) throw;
                    report = min_beta_all(g);
                }
            }
            for (double s : moments) report.with_verdict(s);
            print(to_json(g, report));
        } else if (*tail) {
            const WeightedDigraph g = graph_from_json(read_json_file(graph_path));
            const TailEstimate t = green_tail(g, g.vertex(vertex), {samples, seed, workers});
            Json j = to_json(t);
            j["min_beta"] = min_beta_at(g, g.vertex(vertex)).min_beta;
            print(j);
            if (!csv_path.empty()) {
                auto out = open_out(csv_path);
                write_survival_csv(out, t);
            }
        } else if (*trap) {
            const WeightedDigraph g = graph_from_json(read_json_file(graph_path));
            const IntegrabilityReport r = min_beta_at(g, g.vertex(vertex));
            if (!r.argmin) throw Error(ErrorCode::EmptySet, "no strongly connected edge set contains the vertex", vertex);
            print(to_json(trap_probability(g, *r.argmin, epsilons, {samples, seed, 1})));
        } else if (*green_cmd) {
            const WeightedDigraph g = graph_from_json(read_json_file(graph_path));
            const Environment env = environment_from_json(g, read_json_file(env_path));
            GreenOptions gopt;
            gopt.delta = delta;
            const GreenTable table = green(g, env, gopt);
            std::cout.precision(17);
            std::cout << "source,target,value\n";
            for (VertexId x : table.domain()) {
                for (VertexId y : table.domain()) std::cout << g.name(x) << ',' << g.name(y) << ',' << table(x, y) << '\n';
            }
        } else if (*sample_env) {
            const WeightedDigraph g = graph_from_json(read_json_file(graph_path));
            RngStream rng(seed);
            print(environment_to_json(g, sample_environment(g, rng)));
        } else if (*kalikow) {
            const LatticeSpec spec = lattice_from_json(read_json_file(spec_path));
            const KalikowWalk walk = kalikow_transitions(spec, kopt);
            DriftReport report = ballisticity_report(spec.alpha);
            Json sites = Json::array();
            for (std::size_t z = 0; z < spec.box.size(); ++z) {
                std::vector<double> d, se;
                for (const RatioEstimate& r : walk.drift[z]) {
                    d.push_back(r.value);
                    se.push_back(r.std_error);
                }
                report.per_site_drifts.push_back(d);
                Json site = {{"site", spec.box[z]}, {"mean_green", walk.mean_green[z]}, {"drift", d}, {"drift_std_error", se}};
                if (!walk.residual.empty()) {
                    std::vector<double> res;
                    for (const RatioEstimate& r : walk.residual[z]) res.push_back(r.value);
                    site["identity_residual"] = res;
                }
                sites.push_back(std::move(site));
            }
            Json j = to_json(report);
            j["delta"] = kopt.delta;
            j["samples"] = kopt.samples;
            j["sites"] = std::move(sites);
            print(j);
        } else if (*zd) {
            const LatticeSpec spec = lattice_from_json(read_json_file(spec_path));
            topt.checkpoints = log_spaced_checkpoints(topt.steps, checkpoint_count);
            const TrajectoryRun run = simulate_zd(spec.alpha, topt);
            auto out = open_out(out_path);
            write_run_csv(out, run);
        } else if (*fit) {
            std::ifstream in(csv_path);
            const TrajectoryRun run = read_run_csv(in);
            if (*wlo) fopt.window_lo = window_lo;
            if (*whi) fopt.window_hi = window_hi;
            print(to_json(fit_power_law(run, fopt)));
        } else if (*criteria) {
            const LatticeSpec spec = lattice_from_json(read_json_file(spec_path));
            Json j;
            j["ballisticity"] = to_json(ballisticity_report(spec.alpha));
            j["zero_speed"] = zero_speed_check(spec.alpha);
            j["lattice"] = to_json(lattice_report(spec, moment));
            print(j);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
