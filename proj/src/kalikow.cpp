#include "rwde/kalikow.hpp"

#include "rwde/error.hpp"
#include "rwde/integrability.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

namespace rwde {

namespace {

constexpr std::size_t kBlockSize = 256;
constexpr double kFormTolerance = 1e-9;

// Running sums for ratio estimators sharing one denominator per site.
struct ChannelSums {
    double n = 0.0, nn = 0.0, nd = 0.0;
    void add(double num, double den) {
        n += num;
        nn += num * num;
        nd += num * den;
    }
    void merge(const ChannelSums& o) {
        n += o.n;
        nn += o.nn;
        nd += o.nd;
    }
};

struct SiteSums {
    double d = 0.0, dd = 0.0;
    std::vector<ChannelSums> channels;
    void merge(const SiteSums& o) {
        d += o.d;
        dd += o.dd;
        for (std::size_t c = 0; c < channels.size(); ++c) channels[c].merge(o.channels[c]);
    }
};

RatioEstimate ratio(const ChannelSums& c, const SiteSums& s, double count) {
    RatioEstimate r;
    if (!(s.d > 0.0)) {
        r.value = std::numeric_limits<double>::quiet_NaN();
        r.std_error = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    r.value = c.n / s.d;
    const double spread = std::max(0.0, c.nn - 2.0 * r.value * c.nd + r.value * r.value * s.dd);
    r.std_error = count > 1.0 ? std::sqrt(count / (count - 1.0) * spread) / s.d : 0.0;
    return r;
}

struct Layout {
    std::size_t k = 0;    // directions
    std::size_t dim = 0;  // coordinates
    bool escape = false;
    bool residual = false;
    // channel offsets
    std::size_t omega() const { return 0; }
    std::size_t drift() const { return k; }
    std::size_t escape_p() const { return k + dim; }
    std::size_t escape_drift() const { return 2 * k + dim; }
    std::size_t resid() const { return 2 * k + 2 * dim; }
    std::size_t count() const { return escape ? 2 * k + 3 * dim : k + dim; }
};

void accumulate_block(const LatticeSpec& spec, const WeightedDigraph& g, const KalikowOptions& opt,
                      const Layout& lay, std::size_t block, std::size_t first, std::size_t last,
                      std::vector<SiteSums>& sums) {
    const std::size_t sites = spec.box.size();
    const double sigma = spec.total_weight();
    RngStream rng(opt.seed, block);
    GreenOptions gopt;
    gopt.delta = opt.delta;
    if (!lay.escape) gopt.sources = std::vector<VertexId>{static_cast<VertexId>(opt.origin)};
    const auto z0 = static_cast<VertexId>(opt.origin);
    std::vector<double> p(lay.k);

    for (std::size_t s = first; s < last; ++s) {
        const Environment env = sample_environment(g, rng);
        const GreenTable table = green(g, env, gopt);
        for (std::size_t z = 0; z < sites; ++z) {
            const auto vz = static_cast<VertexId>(z);
            const double den = table(z0, vz);
            SiteSums& site = sums[z];
            site.d += den;
            site.dd += den * den;
            if (!lay.escape) {
                for (std::size_t k = 0; k < lay.k; ++k) {
                    site.channels[lay.omega() + k].add(den * env[static_cast<EdgeId>(z * lay.k + k)], den);
                }
            } else {
                const double gzz = table(vz, vz);
                for (std::size_t k = 0; k < lay.k; ++k) {
                    const auto e = static_cast<EdgeId>(z * lay.k + k);
                    p[k] = env[e] * (gzz - opt.delta * table(g.edge(e).head, vz));
                    site.channels[lay.omega() + k].add(den * env[e], den);
                    site.channels[lay.escape_p() + k].add(den * p[k], den);
                }
                for (std::size_t j = 0; j < lay.dim; ++j) {
                    const double dh = env[static_cast<EdgeId>(z * lay.k + 2 * j)] -
                                      env[static_cast<EdgeId>(z * lay.k + 2 * j + 1)];
                    const double dt = p[2 * j] - p[2 * j + 1];
                    site.channels[lay.drift() + j].add(den * dh, den);
                    site.channels[lay.escape_drift() + j].add(den * dt, den);
                    if (lay.residual) site.channels[lay.resid() + j].add(den * (dh + dt / (sigma - 1.0)), den);
                }
                continue;
            }
            for (std::size_t j = 0; j < lay.dim; ++j) {
                const double dh = env[static_cast<EdgeId>(z * lay.k + 2 * j)] -
                                  env[static_cast<EdgeId>(z * lay.k + 2 * j + 1)];
                site.channels[lay.drift() + j].add(den * dh, den);
            }
        }
    }
}

}  // namespace

KalikowWalk kalikow_transitions(const LatticeSpec& spec, const KalikowOptions& opt) {
    spec.validate();
    if (!(opt.delta >= 0.0 && opt.delta <= 1.0)) throw Error(ErrorCode::InvalidInput, "killing factor must lie in [0, 1]");
    if (opt.origin >= spec.box.size()) throw Error(ErrorCode::InvalidInput, "start point outside the box");
    if (opt.samples == 0) throw Error(ErrorCode::InvalidInput, "need at least one sample");
    if (opt.delta == 1.0 && !lattice_report(spec, 1.0).integrable) {
        throw Error(ErrorCode::IntegrabilityGuardFailed,
                    "E[G(z0,z0)] is infinite for these weights; use a killing factor below one");
    }
    const WeightedDigraph g = build_lattice_box(spec);
    const double sigma = spec.total_weight();
    Layout lay;
    lay.k = spec.direction_count();
    lay.dim = static_cast<std::size_t>(spec.dim);
    lay.escape = opt.escape_measure;
    lay.residual = opt.escape_measure && sigma != 1.0;
    const std::size_t sites = spec.box.size();

    const std::size_t blocks = (opt.samples + kBlockSize - 1) / kBlockSize;
    SiteSums blank;
    blank.channels.resize(lay.count());
    std::vector<std::vector<SiteSums>> per_block(blocks, std::vector<SiteSums>(sites, blank));

    const unsigned workers = std::max(1U, std::min<unsigned>(opt.workers, static_cast<unsigned>(blocks)));
    std::vector<std::exception_ptr> failure(workers);
    auto work = [&](unsigned id) {
        try {
            for (std::size_t b = id; b < blocks; b += workers) {
                const std::size_t first = b * kBlockSize;
                accumulate_block(spec, g, opt, lay, b, first, std::min(opt.samples, first + kBlockSize), per_block[b]);
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
    // Blocks merge in index order, so the result does not depend on workers.
    std::vector<SiteSums> total(sites, blank);
    for (const auto& block : per_block) {
        for (std::size_t z = 0; z < sites; ++z) total[z].merge(block[z]);
    }

    KalikowWalk walk;
    walk.spec = spec;
    walk.origin = opt.origin;
    walk.delta = opt.delta;
    walk.samples = opt.samples;
    const double count = static_cast<double>(opt.samples);
    for (std::size_t z = 0; z < sites; ++z) {
        const SiteSums& s = total[z];
        walk.mean_green.push_back(s.d / count);
        auto take = [&](std::size_t offset, std::size_t n) {
            std::vector<RatioEstimate> out;
            for (std::size_t c = 0; c < n; ++c) out.push_back(ratio(s.channels[offset + c], s, count));
            return out;
        };
        walk.transition.push_back(take(lay.omega(), lay.k));
        walk.drift.push_back(take(lay.drift(), lay.dim));
        if (lay.escape) {
            walk.escape_measure.push_back(take(lay.escape_p(), lay.k));
            walk.escape_drift.push_back(take(lay.escape_drift(), lay.dim));
        }
        if (lay.residual) {
            auto res = take(lay.resid(), lay.dim);
            for (std::size_t j = 0; j < lay.dim; ++j) {
                res[j].value -= (spec.alpha[2 * j] - spec.alpha[2 * j + 1]) / (sigma - 1.0);
            }
            walk.residual.push_back(std::move(res));
        }
    }
    return walk;
}

double p_omega_delta(const WeightedDigraph& g, const Environment& omega, const VertexSet& domain, double delta,
                     VertexId z, EdgeId e) {
    if (g.edge(e).tail != z) throw Error(ErrorCode::InvalidInput, "edge does not leave the given vertex");
    if (!domain.contains(z)) throw Error(ErrorCode::InvalidInput, "vertex outside the domain", g.name(z));
    const VertexId h = g.edge(e).head;
    GreenOptions opts;
    opts.delta = delta;
    opts.domain = domain;
    std::vector<VertexId> sources{z};
    if (h != z && domain.contains(h)) sources.push_back(h);
    opts.sources = sources;
    const GreenTable table = green(g, omega, opts);
    const double p = omega[e] * (table(z, z) - delta * table(h, z));

    if (delta == 1.0) {
        // First step given escape (to the cemetery or off the domain) before returning to z.
        std::vector<VertexId> exits{g.cemetery()};
        for (VertexId v : g.interior_vertices()) {
            if (!domain.contains(v)) exits.push_back(v);
        }
        const std::vector<double> h_vec = hitting_probabilities(g, omega, exits, std::span(&z, 1));
        double escape = 0.0;
        for (EdgeId f : g.out_edges(z)) escape += omega[f] * h_vec[g.edge(f).head];
        const double conditional = omega[e] * h_vec[h] / escape;
        if (std::abs(conditional - p) > kFormTolerance) {
            throw Error(ErrorCode::FormMismatch, "Green and conditional forms of the escape measure disagree",
                        std::to_string(e));
        }
    }
    return p;
}

bool SiteResidual::within(double sigmas) const {
    for (std::size_t j = 0; j < residual.size(); ++j) {
        if (std::abs(residual[j]) > sigmas * std_error[j]) return false;
    }
    return true;
}

std::vector<SiteResidual> drift_identity_check(const LatticeSpec& spec, const KalikowOptions& options) {
    if (spec.total_weight() == 1.0) throw Error(ErrorCode::InvalidInput, "drift identity needs total weight != 1");
    KalikowOptions opt = options;
    opt.escape_measure = true;
    const KalikowWalk walk = kalikow_transitions(spec, opt);
    std::vector<SiteResidual> out;
    for (std::size_t z = 0; z < spec.box.size(); ++z) {
        if (!walk.estimated(z)) continue;
        SiteResidual r;
        r.site = z;
        for (const RatioEstimate& c : walk.residual[z]) {
            r.residual.push_back(c.value);
            r.std_error.push_back(c.std_error);
            r.l1 += std::abs(c.value);
            r.l1_std_error += c.std_error;
        }
        out.push_back(std::move(r));
    }
    return out;
}

DriftReport ballisticity_report(std::span<const double> alpha) {
    if (alpha.empty() || alpha.size() % 2 != 0) throw Error(ErrorCode::InvalidInput, "expected 2d weights");
    for (double a : alpha) {
        if (!(a > 0.0)) throw Error(ErrorCode::InvalidWeight, "weights must be positive");
    }
    DriftReport r;
    r.sigma = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    for (std::size_t i = 0; i < alpha.size(); i += 2) {
        const double diff = alpha[i] - alpha[i + 1];
        r.criterion_value += std::abs(diff);
        r.averaged_drift.push_back(diff / r.sigma);
        r.separating_direction.push_back(diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0));
    }
    r.ballistic = r.criterion_value > 1.0;
    if (r.ballistic) {
        std::vector<double> center;
        for (double dm : r.averaged_drift) center.push_back(r.sigma / (r.sigma - 1.0) * dm);
        r.center = std::move(center);
        r.radius = 1.0 / (r.sigma - 1.0);
    }
    r.zero_speed = zero_speed_check(alpha);
    return r;
}

}  // namespace rwde
