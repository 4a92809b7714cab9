#pragma once

#include "rwde/digraph.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rwde {

struct SamplingOptions {
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    bool contains(double x) const { return lower <= x && x <= upper; }
};

/// Power-law tail P(G > t) ~ t^{-exponent} fitted to exact G(o, o) draws.
struct TailEstimate {
    std::size_t samples = 0;
    std::size_t hill_k = 0;          // ceil(samples^0.6) top order statistics
    double hill_threshold = 0.0;     // order statistic k+1
    double hill_exponent = 0.0;
    ConfidenceInterval hill_ci;
    double regression_exponent = 0.0;
    ConfidenceInterval regression_ci;
    std::size_t regression_points = 0;
    /// Draws in decreasing order.
    std::vector<double> sorted_draws;
};

/// Hill estimator and log-log regression on the top order statistics of
/// positive draws (any order). Exposed for synthetic checks.
TailEstimate estimate_tail(std::vector<double> draws);

/// Samples environments and computes G(o, o) exactly for each; DegenerateTail
/// when o lies on no cycle (G(o, o) == 1 surely).
TailEstimate green_tail(const WeightedDigraph& g, VertexId o, const SamplingOptions& options);

/// Empirical survival (t, fraction of draws >= t) at up to `max_rows`
/// log-spaced ranks.
void write_survival_csv(std::ostream& out, const TailEstimate& tail, std::size_t max_rows = 2000);

struct TrapPoint {
    double epsilon = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double exact = 0.0;  // product of Beta distribution functions
};

struct TrapEstimate {
    double beta = 0.0;   // beta_A
    double slope = 0.0;  // least squares slope of log estimate against log epsilon
    std::vector<TrapPoint> points;
};

/// Probability that every tail of A sends at most epsilon of its mass through
/// the boundary edges of A. Exit masses at distinct vertices are independent
/// Beta variables; each factor is estimated by importance sampling from the
/// m^{b-1} part of its density, with common random numbers across epsilons.
TrapEstimate trap_probability(const WeightedDigraph& g, const EdgeSet& a, std::span<const double> epsilons,
                              const SamplingOptions& options);

/// The same probability from regularised incomplete Beta functions.
double trap_probability_exact(const WeightedDigraph& g, const EdgeSet& a, double epsilon);

struct TrajectoryOptions {
    std::size_t trajectories = 1000;
    std::uint64_t steps = 1000000;
    /// Sorted step counts at which the displacement is recorded; the default
    /// is 1000 log-spaced values ending at `steps`.
    std::vector<std::uint64_t> checkpoints;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

/// Averaged first coordinate of the walk at each checkpoint.
struct TrajectoryRun {
    std::vector<double> alpha;
    std::size_t trajectories = 0;
    std::uint64_t n_max = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> checkpoints;
    std::vector<double> mean_y;
    std::vector<double> std_error;
};

/// Distinct integers from 1 to n_max, roughly log-spaced, n_max included.
std::vector<std::uint64_t> log_spaced_checkpoints(std::uint64_t n_max, std::size_t count);

/// Walks on Z^d (weights in (e1, -e1, e2, -e2, ...) order). Each trajectory
/// draws its own environment lazily: a site's transition vector is sampled on
/// first visit and kept for the rest of that trajectory. Trajectory i uses
/// the random stream (seed, i), so output does not depend on `workers`.
TrajectoryRun simulate_zd(std::span<const double> alpha, const TrajectoryOptions& options);

/// Observer form for tests: calls back with the trajectory index, the step
/// count and the current position at every checkpoint.
struct TrajectoryObserver {
    virtual ~TrajectoryObserver() = default;
    virtual void at_checkpoint(std::size_t trajectory, std::uint64_t n, std::span<const int> position) = 0;
};
void simulate_zd(std::span<const double> alpha, const TrajectoryOptions& options, TrajectoryObserver& observer);

void write_run_csv(std::ostream& out, const TrajectoryRun& run);
TrajectoryRun read_run_csv(std::istream& in);

struct FitOptions {
    double grid_lo = 0.5;
    double grid_hi = 1.0;
    double grid_step = 0.01;
    /// Checkpoints n with window_lo < n <= window_hi enter the objective;
    /// defaults to (n_max / 10, n_max].
    std::optional<std::uint64_t> window_lo;
    std::optional<std::uint64_t> window_hi;
};

struct FitResult {
    std::vector<double> exponents;
    std::vector<double> amplitudes;  // C_alpha, matched at n_max
    std::vector<double> objective;   // max |1 - y_n / (C_alpha n^alpha)| over the window
    double best_exponent = 0.0;
    double best_objective = 0.0;
    bool boundary = false;           // minimiser at an end of the grid
    std::size_t window_points = 0;
};

FitResult fit_power_law(const TrajectoryRun& run, const FitOptions& options = {});

}  // namespace rwde
