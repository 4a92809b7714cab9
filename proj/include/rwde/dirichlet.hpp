#pragma once

#include "rwde/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace rwde {

inline constexpr double kSimplexTolerance = 1e-12;

/// Positive weights of a Dirichlet law, indexed 0..n-1.
class DirichletParams {
public:
    explicit DirichletParams(std::vector<double> alpha);

    std::size_t size() const noexcept { return alpha_.size(); }
    double operator[](std::size_t i) const { return alpha_[i]; }
    const std::vector<double>& weights() const noexcept { return alpha_; }
    double total() const noexcept { return total_; }

    double mean(std::size_t i) const { return alpha_[i] / total_; }
    double variance(std::size_t i) const;

private:
    std::vector<double> alpha_;
    double total_ = 0.0;
};

/// Point of the probability simplex.
class ProbVector {
public:
    /// Checks non-negativity and that the sum is within kSimplexTolerance of one.
    explicit ProbVector(std::vector<double> p);

    std::size_t size() const noexcept { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    const std::vector<double>& values() const noexcept { return p_; }

    friend bool operator==(const ProbVector&, const ProbVector&) = default;

private:
    std::vector<double> p_;
};

/// One draw: normalised independent gammas. The normalisation is done in log
/// space so the largest coordinate is never lost to underflow.
ProbVector sample(const DirichletParams& params, RngStream& rng);

/// Writes a draw into `out` without allocating; out.size() == params.size().
void sample_into(std::span<const double> alpha, RngStream& rng, std::span<double> out);

/// Log of the density against Lebesgue measure on the simplex. Throws
/// BoundaryPoint where a zero coordinate meets a weight below one.
double log_density(const DirichletParams& params, const ProbVector& x);

using Partition = std::vector<std::vector<std::size_t>>;

/// Block sums of the weights; blocks must cover every index exactly once.
DirichletParams aggregate(const DirichletParams& params, const Partition& blocks);

/// The matching map on points: block sums of the coordinates.
ProbVector aggregate(const ProbVector& x, const Partition& blocks);

/// Renormalised coordinates on the sub-index set `subset`.
ProbVector restrict_to(const ProbVector& x, std::span<const std::size_t> subset);

}  // namespace rwde
