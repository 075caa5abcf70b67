#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qpjacobi/jacobi.hpp"
#include "qpjacobi/scaled.hpp"
#include "qpjacobi/trig.hpp"

namespace qpj {

enum class Variant { plain, a, u };

struct BirkhoffSums {
    double s = 0.0;        // S_N = sum log|b(z + k omega)|, k = 0..N-1
    double s_tilde = 0.0;  // same with b~
    std::vector<long> flagged_sites;  // orbit sites where b (or b~) vanishes
    bool finite() const { return flagged_sites.empty(); }
};

BirkhoffSums birkhoff_sums(const SamplingPair& pair, cplx z, double omega, long n);

struct TransferOptions {
    int renorm_cadence = 1;      // steps between renormalizations
    double plain_b_floor = 0.0;  // declared lower bound for |b| on the orbit (plain variant)
};

/// Renormalized left product of the step matrices
///   [[a(z+j w) - E, -b~(z+j w)], [b(z+(j+1) w), 0]],  j = 0..N-1  (variant a);
/// plain divides by b(z+(j+1) w) each step, u rescales by sqrt|det| at the end.
ScaledMatrix2 transfer_product(const SamplingPair& pair, cplx z, double omega, long n, cplx E,
                               Variant variant, const TransferOptions& opts = {});

struct LyapunovEstimate {
    long n = 0;
    double y = 0.0;
    double value = 0.0;  // L_N
    Variant variant = Variant::a;
    int grid_size = 0;
    double quadrature_error_estimate = 0.0;  // |full grid - half grid|
    double relation_residual = 0.0;          // |L_N - (-D_N + L_N^a)| on matching samples
    double value_a = 0.0;                    // L_N^a on the same grid
    double matched_d = 0.0;                  // D_N from the matching Birkhoff quadrature
    long excluded_points = 0;                // plain variant: grid points skipped at b zeros
};

/// Phase-grid average of log||M_N(x + iy)|| / N with a fixed pairwise-tree
/// reduction (deterministic under any parallel split). Prefer a convergent
/// denominator q_s for grid_size.
LyapunovEstimate lyapunov(const SamplingPair& pair, double y, double omega, cplx E, long n,
                          int grid_size, Variant variant);

struct ZeroCount {
    long count = 0;
    int samples = 0;       // contour samples actually used
    double radius = 0.0;   // possibly nudged outward
    double winding_defect = 0.0;  // |accumulated phase / 2 pi - count|
};

/// Argument-principle count of zeros of an analytic function handle inside a
/// disk. Sampling starts at `samples` and doubles until the winding number
/// stabilizes twice; near-contour zeros nudge the radius outward by <= 1%.
ZeroCount count_zeros_disk(const std::function<ScaledValue(cplx)>& f, cplx center, double radius,
                           int samples = 512);

}  // namespace qpj
