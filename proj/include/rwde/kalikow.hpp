#pragma once

#include "rwde/digraph.hpp"
#include "rwde/environment.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rwde {

struct KalikowOptions {
    double delta = 0.9;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    /// Index into spec.box of the start point z0.
    std::size_t origin = 0;
    /// Also estimate the escape measure E[G p] / E[G]; needs every row of G.
    bool escape_measure = true;
};

/// Ratio estimate E[G(z0,z) X] / E[G(z0,z)] with a delta-method standard
/// error (numerator and denominator share the same environments).
struct RatioEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimate of the Kalikow auxiliary walk on a lattice box. Sites
/// are indexed as in spec.box; directions as in LatticeSpec. Neighbours
/// outside the box form the absorbing boundary: the walk stays there.
struct KalikowWalk {
    LatticeSpec spec;
    std::size_t origin = 0;
    double delta = 0.0;
    std::size_t samples = 0;

    /// E[G(z0, z)]; zero for sites the killed walk from z0 cannot reach.
    std::vector<double> mean_green;
    /// transition[z][k]: step from site z in direction k.
    std::vector<std::vector<RatioEstimate>> transition;
    /// Escape measure E[G p(z, z+e_k)] / E[G] when requested.
    std::vector<std::vector<RatioEstimate>> escape_measure;
    /// Kalikow drift, escape-measure drift, and the residual of the drift
    /// identity, per site and coordinate.
    std::vector<std::vector<RatioEstimate>> drift;
    std::vector<std::vector<RatioEstimate>> escape_drift;
    std::vector<std::vector<RatioEstimate>> residual;

    bool estimated(std::size_t site) const { return mean_green[site] > 0.0; }
};

/// Throws IntegrabilityGuardFailed when delta == 1 and the lattice criterion
/// fails at moment one (E[G(z0, z0)] would be infinite).
KalikowWalk kalikow_transitions(const LatticeSpec& spec, const KalikowOptions& options);

/// p(z, e) = omega_e (G(z,z) - delta G(head e, z)) for the walk killed off
/// `domain`. At delta == 1 it is also computed as the law of the first step
/// given escape before returning to z; FormMismatch if the two differ by more
/// than 1e-9.
double p_omega_delta(const WeightedDigraph& g, const Environment& omega, const VertexSet& domain, double delta,
                     VertexId z, EdgeId e);

struct SiteResidual {
    std::size_t site = 0;
    std::vector<double> residual;   // per coordinate
    std::vector<double> std_error;  // per coordinate
    double l1 = 0.0;
    double l1_std_error = 0.0;      // sum of coordinate errors

    /// Every coordinate within `sigmas` standard errors of zero.
    bool within(double sigmas) const;
};

/// Residual of the drift identity  d_hat = (Sigma d_m - d_tilde) / (Sigma - 1)
/// at every site the walk reaches, both sides estimated from one sample
/// stream.
std::vector<SiteResidual> drift_identity_check(const LatticeSpec& spec, const KalikowOptions& options);

struct DriftReport {
    double criterion_value = 0.0;  // sum_i |alpha_i - alpha_{-i}|
    bool ballistic = false;        // criterion_value > 1
    double sigma = 0.0;
    std::vector<double> averaged_drift;  // d_m
    /// Velocity ball Sigma/(Sigma-1) d_m, radius 1/(Sigma-1), when ballistic.
    std::optional<std::vector<double>> center;
    std::optional<double> radius;
    /// Sign pattern of alpha_i - alpha_{-i}.
    std::vector<double> separating_direction;
    bool zero_speed = false;
    /// Kalikow drift per box site, filled when an estimate is attached.
    std::vector<std::vector<double>> per_site_drifts;
};

DriftReport ballisticity_report(std::span<const double> alpha);

}  // namespace rwde
