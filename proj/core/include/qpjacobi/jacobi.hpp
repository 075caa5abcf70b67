#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "qpjacobi/scaled.hpp"
#include "qpjacobi/trig.hpp"

namespace qpj {

/// Closed integer interval [lo, hi].
struct Interval {
    long lo = 0;
    long hi = 0;
    long length() const { return hi - lo + 1; }
    static Interval first(long n) { return {0, n - 1}; }
};

/// Finite Jacobi window H_Lambda(z, omega): diagonal a(z + k omega), first
/// superdiagonal -b(z + (k+1) omega), first subdiagonal -b~(z + (k+1) omega).
struct JacobiWindow {
    Interval lambda;
    cplx z;
    double omega = 0.0;
    std::vector<cplx> diag;   // length n
    std::vector<cplx> upper;  // length n-1, entry (k, k+1)
    std::vector<cplx> lower;  // length n-1, entry (k+1, k)

    long size() const { return lambda.length(); }
    bool real_phase(double tol = 1e-14) const { return std::abs(z.imag()) <= tol; }
    /// max(|diag|) + 2 max(|upper|); upper bound on the spectral norm.
    double scale() const;
};

JacobiWindow build_window(const SamplingPair& pair, cplx z, double omega, Interval lambda);

struct SpectralData {
    std::vector<double> eigenvalues;       // ascending
    std::vector<std::vector<cplx>> eigenvectors;  // unit norm, eigenvectors[j][site]
    std::vector<double> residuals;         // ||(H - E_j) psi_j||
    int blocks = 1;                        // independent blocks after off-diagonal splits
    double max_residual() const;
};

/// Hermitian eigensystem by diagonal-phase reduction to a real symmetric
/// tridiagonal problem; near-zero off-diagonals split the window into blocks
/// whose spectra are merged ascending (ties broken by block index).
SpectralData eigensystem(const JacobiWindow& window);
/// Eigenvalues only (same reduction, no vectors).
std::vector<double> eigenvalues_only(const JacobiWindow& window);
/// Single unit eigenvector by inverse iteration at a known simple eigenvalue;
/// much cheaper than the full eigensystem when one branch is needed.
std::vector<cplx> inverse_iteration_eigenvector(const JacobiWindow& window, double eigenvalue);

/// f_Lambda^a(z, omega, E) = det[H_Lambda(z, omega) - E] by the scaled
/// three-term recursion; degree-n polynomial in E with leading term (-E)^n.
ScaledValue determinant(const SamplingPair& pair, cplx z, double omega, Interval lambda, cplx E);

/// All leading-principal determinants f_{[lo, lo+k-1]}^a for k = 0..n
/// (index 0 holds the empty determinant 1).
std::vector<ScaledValue> determinant_prefixes(const SamplingPair& pair, cplx z, double omega,
                                              Interval lambda, cplx E);

struct DirichletVector {
    std::vector<cplx> values;  // unit norm
    double residual = 0.0;     // ||(H - E) v||
    bool degraded = false;     // clustered eigenvalue, accuracy not guaranteed
};

/// Eigenvector from Dirichlet determinant data: v(n) proportional to
/// f_{[0,n-1]}^a(x, omega, E) / prod_{j=1..n} b(x + j omega), built in
/// log-scaled arithmetic and normalized once.
DirichletVector dirichlet_eigenvector(const SamplingPair& pair, double x, double omega, long n,
                                      double eigenvalue, double gap_floor = 1e-8);

/// Count of eigenvalues strictly below t (Sturm bisection count); used for
/// fast dist-to-spectrum tests without a full eigensolve.
long sturm_count_below(const JacobiWindow& window, double t);
/// True iff some eigenvalue lies within `radius` of E.
bool spectrum_within(const JacobiWindow& window, double E, double radius);
/// j-th ascending eigenvalue alone, by Sturm bisection (O(n) per step).
double sturm_eigenvalue(const JacobiWindow& window, long j);

}  // namespace qpj
