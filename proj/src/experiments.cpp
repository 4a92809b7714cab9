#include "rwde/experiments.hpp"

#include "rwde/dirichlet.hpp"
#include "rwde/environment.hpp"
#include "rwde/error.hpp"
#include "rwde/rng.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace rwde {

namespace {

constexpr std::size_t kTailBlock = 1024;
constexpr double kZ95 = 1.959963984540054;

// Runs work(unit) for unit in [0, units) over `workers` threads, rethrowing
// the first failure.
template <class Work>
void parallel_units(std::size_t units, unsigned workers, Work&& work) {
    workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(units, 1))));
    if (workers == 1) {
        for (std::size_t u = 0; u < units; ++u) work(u);
        return;
    }
    std::vector<std::exception_ptr> failure(workers);
    std::vector<std::thread> pool;
    for (unsigned id = 0; id < workers; ++id) {
        pool.emplace_back([&, id] {
            try {
                for (std::size_t u = id; u < units; u += workers) work(u);
            } catch (...) {
                failure[id] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& f : failure) {
        if (f) std::rethrow_exception(f);
    }
}

bool on_cycle(const WeightedDigraph& g, VertexId o) {
    for (EdgeId e : g.out_edges(o)) {
        if (g.edge(e).head == o) return true;
    }
    std::vector<std::vector<VertexId>> adj(g.vertex_count());
    for (const Edge& e : g.edges()) adj[e.tail].push_back(e.head);
    for (const auto& comp : strongly_connected_components(adj)) {
        if (comp.size() > 1 && std::find(comp.begin(), comp.end(), o) != comp.end()) return true;
    }
    return false;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

TailEstimate estimate_tail(std::vector<double> draws) {
    const std::size_t n = draws.size();
    if (n < 20) throw Error(ErrorCode::InvalidInput, "tail estimation needs at least 20 draws");
    std::sort(draws.begin(), draws.end(), std::greater<>());
    TailEstimate t;
    t.samples = n;
    t.hill_k = std::min(n - 1, static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.6))));
    t.hill_threshold = draws[t.hill_k];
    if (!(t.hill_threshold > 0.0) || draws.front() == t.hill_threshold) {
        throw Error(ErrorCode::DegenerateTail, "top order statistics are constant");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < t.hill_k; ++i) sum += std::log(draws[i] / t.hill_threshold);
    const double k = static_cast<double>(t.hill_k);
    t.hill_exponent = k / sum;
    const double hill_half = kZ95 * t.hill_exponent / std::sqrt(k);
    t.hill_ci = {t.hill_exponent - hill_half, t.hill_exponent + hill_half};

    // Top decade of the empirical survival among the same order statistics:
    // ranks ceil(k/10) .. k.
    const std::size_t first = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(k / 10.0)));
    std::vector<double> lx, ly;
    for (std::size_t i = first; i <= t.hill_k; ++i) {
        lx.push_back(std::log(draws[i - 1]));
        ly.push_back(std::log(static_cast<double>(i) / static_cast<double>(n)));
    }
    t.regression_points = lx.size();
    t.regression_exponent = -least_squares_slope(lx, ly);
    const double reg_half = kZ95 * t.regression_exponent / std::sqrt(static_cast<double>(t.regression_points));
    t.regression_ci = {t.regression_exponent - reg_half, t.regression_exponent + reg_half};
    t.sorted_draws = std::move(draws);
    return t;
}

TailEstimate green_tail(const WeightedDigraph& g, VertexId o, const SamplingOptions& options) {
    validate(g);
    if (o >= g.vertex_count() || o == g.cemetery()) throw Error(ErrorCode::InvalidInput, "reference vertex must be interior");
    if (!on_cycle(g, o)) {
        throw Error(ErrorCode::DegenerateTail, "no strongly connected edge set contains '" + g.name(o) +
                                                   "'; G(o,o) is identically one", g.name(o));
    }
    std::vector<double> draws(options.samples);
    const std::size_t blocks = (options.samples + kTailBlock - 1) / kTailBlock;
    GreenOptions gopt;
    gopt.sources = std::vector<VertexId>{o};
    parallel_units(blocks, options.workers, [&](std::size_t b) {
        RngStream rng(options.seed, b);
        const std::size_t last = std::min(options.samples, (b + 1) * kTailBlock);
        for (std::size_t s = b * kTailBlock; s < last; ++s) {
            const Environment env = sample_environment(g, rng);
            draws[s] = green(g, env, gopt)(o, o);
        }
    });
    return estimate_tail(std::move(draws));
}

void write_survival_csv(std::ostream& out, const TailEstimate& tail, std::size_t max_rows) {
    out << "t,survival\n";
    const std::size_t n = tail.sorted_draws.size();
    if (n == 0) return;
    std::size_t last = 0;
    out.precision(17);
    for (std::size_t r = 0; r < max_rows; ++r) {
        const double frac = max_rows == 1 ? 1.0 : static_cast<double>(r) / static_cast<double>(max_rows - 1);
        const auto rank = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), frac)));
        if (rank <= last || rank > n) continue;
        last = rank;
        out << tail.sorted_draws[rank - 1] << ',' << static_cast<double>(rank) / static_cast<double>(n) << '\n';
    }
}

namespace {

struct VertexTrap {
    double boundary = 0.0;  // weight on boundary edges
    double inside = 0.0;    // weight on the other out-edges
};

std::vector<VertexTrap> trap_factors(const WeightedDigraph& g, const EdgeSet& a) {
    if (!is_strongly_connected(g, a)) throw Error(ErrorCode::NotStronglyConnected, "trap set must be strongly connected");
    const EdgeSet boundary = boundary_edges(g, a);
    std::vector<VertexTrap> out;
    for (VertexId x : tails(g, a)) {
        VertexTrap f;
        for (EdgeId e : g.out_edges(x)) (boundary.contains(e) ? f.boundary : f.inside) += g.edge(e).alpha;
        if (f.boundary > 0.0) out.push_back(f);
    }
    return out;
}

}  // namespace

double trap_probability_exact(const WeightedDigraph& g, const EdgeSet& a, double epsilon) {
    if (epsilon >= 1.0) return 1.0;
    if (epsilon <= 0.0) return 0.0;
    double p = 1.0;
    for (const VertexTrap& f : trap_factors(g, a)) p *= boost::math::ibeta(f.boundary, f.inside, epsilon);
    return p;
}

TrapEstimate trap_probability(const WeightedDigraph& g, const EdgeSet& a, std::span<const double> epsilons,
                              const SamplingOptions& options) {
    if (options.samples < 2) throw Error(ErrorCode::InvalidInput, "need at least two samples");
    const std::vector<VertexTrap> factors = trap_factors(g, a);
    TrapEstimate out;
    out.beta = beta_edges(g, a);
    const double n = static_cast<double>(options.samples);

    std::vector<double> log_mean(epsilons.size(), 0.0), rel_var(epsilons.size(), 0.0);
    for (std::size_t v = 0; v < factors.size(); ++v) {
        const double b = factors[v].boundary, rest = factors[v].inside;
        const double log_norm = std::log(b) + std::lgamma(b) + std::lgamma(rest) - std::lgamma(b + rest);
        std::vector<double> sum(epsilons.size(), 0.0), sum2(epsilons.size(), 0.0);
        RngStream rng(options.seed, v);
        for (std::size_t s = 0; s < options.samples; ++s) {
            const double root = std::pow(rng.uniform_open(), 1.0 / b);
            for (std::size_t j = 0; j < epsilons.size(); ++j) {
                const double eps = epsilons[j];
                if (eps >= 1.0) continue;
                // Proposal density b m^{b-1} / eps^b on (0, eps).
                const double m = eps * root;
                const double w = std::exp(b * std::log(eps) + (rest - 1.0) * std::log1p(-m) - log_norm);
                sum[j] += w;
                sum2[j] += w * w;
            }
        }
        for (std::size_t j = 0; j < epsilons.size(); ++j) {
            if (epsilons[j] >= 1.0) continue;
            const double mean = sum[j] / n;
            const double var = std::max(0.0, (sum2[j] - n * mean * mean) / (n - 1.0)) / n;
            log_mean[j] += std::log(mean);
            rel_var[j] += var / (mean * mean);
        }
    }

    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < epsilons.size(); ++j) {
        TrapPoint p;
        p.epsilon = epsilons[j];
        p.exact = trap_probability_exact(g, a, epsilons[j]);
        if (epsilons[j] >= 1.0) {
            p.estimate = 1.0;
        } else if (epsilons[j] <= 0.0) {
            p.estimate = 0.0;
        } else {
            p.estimate = std::exp(log_mean[j]);
            p.std_error = p.estimate * std::sqrt(rel_var[j]);
            lx.push_back(std::log(epsilons[j]));
            ly.push_back(log_mean[j]);
        }
        out.points.push_back(p);
    }
    out.slope = lx.size() >= 2 ? least_squares_slope(lx, ly) : std::numeric_limits<double>::quiet_NaN();
    return out;
}

std::vector<std::uint64_t> log_spaced_checkpoints(std::uint64_t n_max, std::size_t count) {
    if (n_max == 0) throw Error(ErrorCode::InvalidInput, "horizon must be positive");
    std::vector<std::uint64_t> out;
    const double top = std::log(static_cast<double>(n_max));
    for (std::size_t i = 0; i < count; ++i) {
        const double frac = count == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        const auto n = static_cast<std::uint64_t>(std::llround(std::exp(frac * top)));
        out.push_back(std::clamp<std::uint64_t>(n, 1, n_max));
    }
    out.push_back(n_max);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

// Open-addressing table from lattice sites to the cumulative transition
// thresholds drawn on first visit. Cleared between trajectories.
template <int D>
class SiteTable {
public:
    static constexpr int K = 2 * D;
    using Key = std::array<std::int32_t, D>;
    struct Slot {
        Key key;
        std::array<double, K - 1> cumulative;
        bool used;
    };

    SiteTable() { slots_.resize(1U << 12); }

    void clear() {
        for (Slot& s : slots_) s.used = false;
        size_ = 0;
    }

    // Returns the slot for `key`, inserting an unused one when absent.
    Slot& find_or_insert(const Key& key, bool& inserted) {
        if (2 * (size_ + 1) > slots_.size()) grow();
        std::size_t i = hash(key) & (slots_.size() - 1);
        for (;;) {
            Slot& s = slots_[i];
            if (!s.used) {
                s.used = true;
                s.key = key;
                ++size_;
                inserted = true;
                return s;
            }
            if (s.key == key) {
                inserted = false;
                return s;
            }
            i = (i + 1) & (slots_.size() - 1);
        }
    }

private:
    static std::size_t hash(const Key& key) {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (int i = 0; i < D; ++i) {
            h ^= static_cast<std::uint32_t>(key[i]);
            h *= 0xff51afd7ed558ccdULL;
            h ^= h >> 32;
        }
        return static_cast<std::size_t>(h);
    }

    void grow() {
        std::vector<Slot> old(slots_.size() * 2);
        old.swap(slots_);
        size_ = 0;
        for (const Slot& s : old) {
            if (!s.used) continue;
            bool inserted = false;
            find_or_insert(s.key, inserted).cumulative = s.cumulative;
        }
    }

    std::vector<Slot> slots_;
    std::size_t size_ = 0;
};

template <int D>
void run_walks(std::span<const double> alpha, const TrajectoryOptions& opt,
               const std::vector<std::uint64_t>& checkpoints,
               const std::function<void(std::size_t, std::size_t, std::span<const int>)>& record) {
    constexpr int K = 2 * D;
    const unsigned workers =
        std::max(1U, std::min<unsigned>(opt.workers, static_cast<unsigned>(std::max<std::size_t>(opt.trajectories, 1))));
    std::vector<SiteTable<D>> tables(workers);
    std::vector<std::exception_ptr> failure(workers);
    auto work = [&](unsigned id) {
        try {
            SiteTable<D>& table = tables[id];
            std::array<double, K> probs{};
            for (std::size_t t = id; t < opt.trajectories; t += workers) {
                RngStream rng(opt.seed, t);
                table.clear();
                typename SiteTable<D>::Key pos{};
                std::array<int, D> view{};
                std::size_t next_cp = 0;
                std::uint64_t n = 0;
                auto flush = [&] {
                    while (next_cp < checkpoints.size() && checkpoints[next_cp] == n) {
                        for (int i = 0; i < D; ++i) view[i] = pos[i];
                        record(t, next_cp, view);
                        ++next_cp;
                    }
                };
                flush();
                for (; n < opt.steps;) {
                    bool inserted = false;
                    auto& slot = table.find_or_insert(pos, inserted);
                    if (inserted) {
                        sample_into(alpha, rng, probs);
                        double acc = 0.0;
                        for (int k = 0; k < K - 1; ++k) slot.cumulative[k] = (acc += probs[k]);
                    }
                    const double u = rng.uniform();
                    int k = 0;
                    while (k < K - 1 && u >= slot.cumulative[k]) ++k;
                    pos[k / 2] += (k % 2 == 0) ? 1 : -1;
                    ++n;
                    flush();
                }
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
}

void dispatch(std::span<const double> alpha, const TrajectoryOptions& opt, const std::vector<std::uint64_t>& cps,
              const std::function<void(std::size_t, std::size_t, std::span<const int>)>& record) {
    for (double a : alpha) {
        if (!(a > 0.0)) throw Error(ErrorCode::InvalidWeight, "weights must be positive");
    }
    switch (alpha.size()) {
        case 2: return run_walks<1>(alpha, opt, cps, record);
        case 4: return run_walks<2>(alpha, opt, cps, record);
        case 6: return run_walks<3>(alpha, opt, cps, record);
        case 8: return run_walks<4>(alpha, opt, cps, record);
        default: throw Error(ErrorCode::InvalidInput, "lattice walks support dimensions 1 to 4");
    }
}

std::vector<std::uint64_t> resolve_checkpoints(const TrajectoryOptions& opt) {
    if (opt.steps == 0) throw Error(ErrorCode::InvalidInput, "horizon must be positive");
    if (opt.checkpoints.empty()) return log_spaced_checkpoints(opt.steps, 1000);
    auto cps = opt.checkpoints;
    if (!std::is_sorted(cps.begin(), cps.end()) || std::adjacent_find(cps.begin(), cps.end()) != cps.end()) {
        throw Error(ErrorCode::InvalidInput, "checkpoints must be strictly increasing");
    }
    if (cps.back() > opt.steps) throw Error(ErrorCode::InvalidInput, "checkpoint beyond the horizon");
    return cps;
}

}  // namespace

TrajectoryRun simulate_zd(std::span<const double> alpha, const TrajectoryOptions& options) {
    const std::vector<std::uint64_t> cps = resolve_checkpoints(options);
    const std::size_t c = cps.size();
    std::vector<double> y(options.trajectories * c);
    dispatch(alpha, options, cps, [&](std::size_t t, std::size_t j, std::span<const int> pos) {
        y[t * c + j] = pos[0];
    });

    TrajectoryRun run;
    run.alpha.assign(alpha.begin(), alpha.end());
    run.trajectories = options.trajectories;
    run.n_max = options.steps;
    run.seed = options.seed;
    run.checkpoints = cps;
    run.mean_y.assign(c, 0.0);
    run.std_error.assign(c, 0.0);
    const double n = static_cast<double>(options.trajectories);
    for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < options.trajectories; ++t) s += y[t * c + j];
        const double mean = s / n;
        double ss = 0.0;
        for (std::size_t t = 0; t < options.trajectories; ++t) ss += (y[t * c + j] - mean) * (y[t * c + j] - mean);
        run.mean_y[j] = mean;
        run.std_error[j] = options.trajectories > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    }
    return run;
}

void simulate_zd(std::span<const double> alpha, const TrajectoryOptions& options, TrajectoryObserver& observer) {
    const std::vector<std::uint64_t> cps = resolve_checkpoints(options);
    std::mutex lock;
    dispatch(alpha, options, cps, [&](std::size_t t, std::size_t j, std::span<const int> pos) {
        std::lock_guard guard(lock);
        observer.at_checkpoint(t, cps[j], pos);
    });
}

void write_run_csv(std::ostream& out, const TrajectoryRun& run) {
    out << "# alpha=";
    for (std::size_t i = 0; i < run.alpha.size(); ++i) out << (i ? ";" : "") << run.alpha[i];
    out << " trajectories=" << run.trajectories << " n_max=" << run.n_max << " seed=" << run.seed << '\n';
    out << "n,mean_y,stderr\n";
    out.precision(17);
    for (std::size_t j = 0; j < run.checkpoints.size(); ++j) {
        out << run.checkpoints[j] << ',' << run.mean_y[j] << ',' << run.std_error[j] << '\n';
    }
}

TrajectoryRun read_run_csv(std::istream& in) {
    TrajectoryRun run;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string field;
            while (meta >> field) {
                const auto eq = field.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
                if (key == "alpha") {
                    std::istringstream vs(value);
                    std::string a;
                    while (std::getline(vs, a, ';')) run.alpha.push_back(std::stod(a));
                } else if (key == "trajectories") {
                    run.trajectories = std::stoull(value);
                } else if (key == "seed") {
                    run.seed = std::stoull(value);
                }
            }
            continue;
        }
        if (!header) {
            if (line.rfind("n,mean_y", 0) != 0) throw Error(ErrorCode::InvalidInput, "run CSV must start with n,mean_y,stderr");
            header = true;
            continue;
        }
        std::istringstream row(line);
        std::string n, y, se;
        if (!std::getline(row, n, ',') || !std::getline(row, y, ',') || !std::getline(row, se, ',')) {
            throw Error(ErrorCode::InvalidInput, "malformed run CSV row: " + line);
        }
        run.checkpoints.push_back(std::stoull(n));
        run.mean_y.push_back(std::stod(y));
        run.std_error.push_back(std::stod(se));
    }
    if (run.checkpoints.empty()) throw Error(ErrorCode::EmptyWindow, "run CSV has no rows");
    run.n_max = run.checkpoints.back();
    return run;
}

FitResult fit_power_law(const TrajectoryRun& run, const FitOptions& options) {
    if (run.checkpoints.empty()) throw Error(ErrorCode::EmptyWindow, "run has no checkpoints");
    if (!(options.grid_step > 0.0) || options.grid_hi < options.grid_lo) {
        throw Error(ErrorCode::InvalidInput, "invalid exponent grid");
    }
    const std::uint64_t n_max = run.checkpoints.back();
    const double y_max = run.mean_y.back();
    const std::uint64_t lo = options.window_lo.value_or(n_max / 10);
    const std::uint64_t hi = options.window_hi.value_or(n_max);
    std::vector<std::size_t> window;
    for (std::size_t j = 0; j < run.checkpoints.size(); ++j) {
        if (run.checkpoints[j] > lo && run.checkpoints[j] <= hi) window.push_back(j);
    }
    if (window.empty()) throw Error(ErrorCode::EmptyWindow, "no checkpoint falls in the fit window");

    FitResult fit;
    fit.window_points = window.size();
    const auto steps = static_cast<std::size_t>(std::floor((options.grid_hi - options.grid_lo) / options.grid_step + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) {
        // Rounded so grid points coincide with their decimal literals.
        const double a = std::round((options.grid_lo + static_cast<double>(i) * options.grid_step) * 1e12) / 1e12;
        const double amp = y_max / std::pow(static_cast<double>(n_max), a);
        double worst = 0.0;
        for (std::size_t j : window) {
            const double model = amp * std::pow(static_cast<double>(run.checkpoints[j]), a);
            worst = std::max(worst, std::abs(1.0 - run.mean_y[j] / model));
        }
        fit.exponents.push_back(a);
        fit.amplitudes.push_back(amp);
        fit.objective.push_back(worst);
    }
    const auto best = static_cast<std::size_t>(
        std::min_element(fit.objective.begin(), fit.objective.end()) - fit.objective.begin());
    fit.best_exponent = fit.exponents[best];
    fit.best_objective = fit.objective[best];
    fit.boundary = fit.exponents.size() > 1 && (best == 0 || best + 1 == fit.exponents.size());
    return fit;
}

}  // namespace rwde
