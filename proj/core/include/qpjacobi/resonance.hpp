#pragma once

#include <map>
#include <optional>
#include <vector>

#include "qpjacobi/interval_union.hpp"
#include "qpjacobi/jacobi.hpp"
#include "qpjacobi/trig.hpp"

namespace qpj {

struct SlopeBadSet {
    double tau = 0.0;
    long l = 0;
    IntervalUnion z_y;                      // bad energies
    std::vector<long> intervals_per_branch;  // source interval counts
    int grid = 0;                            // construction grid
    long ambiguous_points = 0;               // near-degenerate x excluded per branch
    long refinement_cells = 0;               // adaptive subdivisions performed
};

struct ResonanceEvent {
    double x = 0.0;
    long m = 0;
    long j = 0;
    long k = 0;
    double gap = 0.0;
    double energy = 0.0;   // E_j^{(l)}(x)
    bool excluded = false;  // E_j inside the supplied bad set
};

struct GapReport {
    long n = 0;
    double p = 0.0;
    double threshold = 0.0;  // 1 / (N (ln N)^p)
    std::vector<double> eigenvalues;
    std::vector<double> min_gaps;       // per eigenvalue, distance to the rest of the spectrum
    double min_gap = 0.0;
    double below_threshold_fraction = 0.0;  // among eigenvalues outside `excluded`
    long considered = 0;                    // eigenvalues outside the excluded set
    std::vector<long> histogram;            // counts of log10(min_gap) in [-18, 0), 18 unit bins
};

struct SlopeResult {
    double slope = 0.0;
    double gap = 0.0;
    bool degraded = false;  // gap below the floor; first-order value unreliable
};

/// min over spec(H^{(l1)}(x)) inside `energy_window` x spec(H^{(l2)}(x + m omega))
/// of the eigenvalue distance; +inf with `empty` set when the window misses.
struct SpectraDistance {
    double value = 0.0;
    bool empty = false;
};
SpectraDistance spectra_distance(const SamplingPair& pair, double x, double omega, long l1, long l2,
                                 long m, std::optional<std::pair<double, double>> energy_window = {});

/// First-order perturbation slope d/dx E_j = psi_j^* (dH/dx) psi_j, with dH
/// from the coefficient-wise differentiated Fourier data.
SlopeResult eigenvalue_slope(const SamplingPair& pair, double x, double omega, Interval lambda,
                             long j, double gap_floor = 1e-8);

/// All branch slopes at once from a solved window.
std::vector<SlopeResult> all_slopes(const SamplingPair& pair, double x, double omega,
                                    const JacobiWindow& window, const SpectralData& spectral,
                                    double gap_floor = 1e-8);

/// Sard-type bad energy set: per branch, bracket the x-regions where
/// |slope| <= 2 tau (adaptive grid refinement + bisection to 1e-10), take the
/// image intervals of E_j over them, union a prior set, fatten by tau.
/// Post, verified on the construction grid: E_j(x) outside z_y implies
/// |slope_j(x)| > tau.
SlopeBadSet slope_bad_set(const SamplingPair& pair, double omega, long l, double tau,
                          int grid_size, const IntervalUnion* prior = nullptr);

/// Shift-resonance scan: emits every (x, m, j, k) on the grid with
/// Q <= |m| <= M and gap < sigma; events inside the bad set carry the
/// excluded flag. Deterministic (x, m, j, k) output order.
std::vector<ResonanceEvent> elimination_scan(const SamplingPair& pair, double omega, long l,
                                             double sigma, long q, long m_max,
                                             const IntervalUnion& bad_set, int grid_size,
                                             std::optional<std::pair<double, double>> energy_window = {},
                                             int threads = 1);

GapReport gap_report(const SamplingPair& pair, double x, double omega, long n, double p,
                     const IntervalUnion& excluded);

/// Fractions of the phase grid where |log|f_N^a| - N L_N^a| > H (ln N)^c0_proxy,
/// one entry per requested H (nonincreasing by construction).
std::map<double, double> ldt_empirical(const SamplingPair& pair, double omega, double E, long n,
                                       const std::vector<double>& h_values, int grid_size,
                                       double c0_proxy = 1.0);

struct DerivativeStability {
    std::vector<double> ratios;  // per eigenvalue; slope drift / (l sigma^{-1} |w - w'|)
    std::vector<long> skipped;   // indices failing the gap precondition
    double max_ratio = 0.0;
};

DerivativeStability derivative_stability(const SamplingPair& pair, double x, double omega,
                                         double omega_prime, long l, double sigma_gap);

/// sup over grid phases and indices of |E_j^{(l)} - E_{K,j}^{(l)}| between the
/// model and its degree-K truncation.
double truncation_drift(const SamplingPair& pair, double omega, int K, long l, int grid_size);

/// The paper-scaling preset: sigma_N = 2/(N (ln N)^p), Q_N = (ln N)^{6A},
/// l = 2 floor((ln N)^A). A is configurable; the default A = 2 is a desk-scale
/// stand-in, not a value the source analysis fixes.
struct PaperParameters {
    double p = 16.0;
    double A = 2.0;
    double sigma(long n) const;
    long q(long n) const;
    long l(long n) const;
    double tau(long n) const;  // (ln N)^{-5A}
};

}  // namespace qpj
