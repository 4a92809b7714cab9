#include "rwde/dirichlet.hpp"

#include "rwde/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rwde {

DirichletParams::DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    if (alpha_.empty()) throw Error(ErrorCode::InvalidParams, "Dirichlet law needs at least one weight");
    for (double a : alpha_) {
        if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidParams, "Dirichlet weights must be positive");
    }
    total_ = std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
}

double DirichletParams::variance(std::size_t i) const {
    const double a = alpha_[i];
    return a * (total_ - a) / (total_ * total_ * (total_ + 1.0));
}

ProbVector::ProbVector(std::vector<double> p) : p_(std::move(p)) {
    if (p_.empty()) throw Error(ErrorCode::NotOnSimplex, "empty probability vector");
    double sum = 0.0;
    for (double v : p_) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::NotOnSimplex, "negative or non-finite coordinate");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
        throw Error(ErrorCode::NotOnSimplex, "coordinates do not sum to one");
    }
}

void sample_into(std::span<const double> alpha, RngStream& rng, std::span<double> out) {
    const std::size_t n = alpha.size();
    if (n == 1) {
        out[0] = 1.0;
        return;
    }
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = rng.log_gamma_variate(alpha[i]);
        top = std::max(top, out[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(out[i] - top);
        sum += out[i];
    }
    // sum >= 1 since the largest term is exp(0).
    for (std::size_t i = 0; i < n; ++i) out[i] /= sum;
}

ProbVector sample(const DirichletParams& params, RngStream& rng) {
    std::vector<double> p(params.size());
    sample_into(params.weights(), rng, p);
    return ProbVector(std::move(p));
}

double log_density(const DirichletParams& params, const ProbVector& x) {
    if (x.size() != params.size()) throw Error(ErrorCode::InvalidInput, "dimension mismatch");
    double out = std::lgamma(params.total());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double a = params[i];
        out -= std::lgamma(a);
        if (a == 1.0) continue;
        if (x[i] == 0.0) {
            if (a < 1.0) {
                throw Error(ErrorCode::BoundaryPoint, "density is infinite at a zero coordinate",
                            std::to_string(i));
            }
            return -std::numeric_limits<double>::infinity();
        }
        out += (a - 1.0) * std::log(x[i]);
    }
    return out;
}

namespace {

void check_partition(std::size_t n, const Partition& blocks) {
    std::vector<int> seen(n, 0);
    for (const auto& block : blocks) {
        if (block.empty()) throw Error(ErrorCode::InvalidPartition, "empty block");
        for (std::size_t i : block) {
            if (i >= n) throw Error(ErrorCode::InvalidPartition, "index out of range", std::to_string(i));
            if (seen[i]++) throw Error(ErrorCode::InvalidPartition, "index in two blocks", std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i]) throw Error(ErrorCode::InvalidPartition, "index not covered", std::to_string(i));
    }
}

}  // namespace

DirichletParams aggregate(const DirichletParams& params, const Partition& blocks) {
    check_partition(params.size(), blocks);
    std::vector<double> out;
    for (const auto& block : blocks) {
        double s = 0.0;
        for (std::size_t i : block) s += params[i];
        out.push_back(s);
    }
    return DirichletParams(std::move(out));
}

ProbVector aggregate(const ProbVector& x, const Partition& blocks) {
    check_partition(x.size(), blocks);
    std::vector<double> out;
    for (const auto& block : blocks) {
        double s = 0.0;
        for (std::size_t i : block) s += x[i];
        out.push_back(s);
    }
    return ProbVector(std::move(out));
}

ProbVector restrict_to(const ProbVector& x, std::span<const std::size_t> subset) {
    if (subset.empty()) throw Error(ErrorCode::EmptySet, "restriction to an empty index set");
    double mass = 0.0;
    for (std::size_t i : subset) {
        if (i >= x.size()) throw Error(ErrorCode::InvalidInput, "index out of range", std::to_string(i));
        mass += x[i];
    }
    if (!(mass > 0.0)) throw Error(ErrorCode::ZeroMass, "restricted coordinates carry no mass");
    std::vector<double> out;
    out.reserve(subset.size());
    for (std::size_t i : subset) out.push_back(x[i] / mass);
    // Re-sum so the result sits on the simplex to rounding.
    const double s = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& v : out) v /= s;
    return ProbVector(std::move(out));
}

}  // namespace rwde
