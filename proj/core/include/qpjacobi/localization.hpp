#pragma once

#include <map>
#include <vector>

#include "qpjacobi/jacobi.hpp"
#include "qpjacobi/trig.hpp"

namespace qpj {

struct LocalizationProfile {
    long j = 0;           // eigenvalue index
    double energy = 0.0;
    long center = 0;      // argmax of |psi|
    std::map<long, double> tail_mass;  // Q -> mass outside [center-Q, center+Q]
    double fitted_rate = 0.0;  // least-squares slope of log|psi| vs distance from the center
    long fit_points = 0;
    double restriction_distance = 0.0;
};

/// argmax of |psi| (ties resolved to the smallest index).
long localization_center(const std::vector<cplx>& psi);

/// sum_{k outside [center-Q, center+Q]} |psi(k)|^2.
double tail_mass(const std::vector<cplx>& psi, long center, long q);

/// Least-squares slope of log|psi(k)| against |k - center|, restricted to
/// entries with |psi| > 1e-14 and distance >= 5. Returns the number of points
/// used through `points_out`.
double decay_rate_fit(const std::vector<cplx>& psi, long center, long* points_out = nullptr);

/// dist(E, spec(H_Lambda(x, omega))) by a sub-window eigensolve.
double restriction_distance(const SamplingPair& pair, double x, double omega, double energy,
                            Interval lambda);

struct CenterProximity {
    bool holds = true;      // the implication, vacuous-true when energies are far
    bool vacuous = false;   // |E_j1 - E_j2| > sigma/2
    long center_gap = 0;    // |nu_j1 - nu_j2|
    double energy_gap = 0.0;
};

/// Tests |E_j1 - E_j2| <= sigma/2  ==>  |nu_j1 - nu_j2| < 2Q on a solved
/// window; counterexamples are resonance candidates, not failures.
CenterProximity center_proximity(const SpectralData& spectral, long j1, long j2, double sigma,
                                 long q);

/// Full profile for eigenpair j of the window, with tail masses at the given
/// Q values and the restriction distance for [center - Q_max, center + Q_max].
LocalizationProfile localization_profile(const SamplingPair& pair, double x, double omega,
                                         const JacobiWindow& window, const SpectralData& spectral,
                                         long j, const std::vector<long>& qs);

}  // namespace qpj
