#pragma once

#include <optional>
#include <vector>

#include "qpjacobi/jacobi.hpp"
#include "qpjacobi/scaled.hpp"
#include "qpjacobi/trig.hpp"

namespace qpj {

enum class GreenCase { below, above, diagonal };  // j < k, j > k, j = k

struct GreenEntry {
    long j = 0;
    long k = 0;
    ScaledValue value;
    GreenCase formula_case = GreenCase::diagonal;
    bool singular = false;  // E within the declared floor of spec(H_Lambda)
    /// Plain complex value; only meaningful when value.materializable().
    cplx materialized() const { return value.value(); }
};

/// Cramer-formula resolvent entry of (H^{(n)}(x, omega) - E)^{-1}:
///   G(j,k) = f^a_{[0,j-1]} * prod_{i=j+1..k} b(x+i omega) * f^a_{[k+1,n-1]} / f^a_n
/// (b~ products for j > k). `floor` declares the singularity cutoff relative
/// to the window scale.
GreenEntry green_entry(const SamplingPair& pair, double x, double omega, long n, double E, long j,
                       long k, double floor = 1e-10);

/// All entries, as a dense row-major n x n complex matrix (test/diagnostic
/// helper; entries materialized, so the window must be far from resonance).
std::vector<cplx> green_matrix(const SamplingPair& pair, double x, double omega, long n, double E);

struct PoissonResidual {
    double residual = 0.0;
    bool singular = false;   // E within the declared floor of spec(H_sub); residual not meaningful
    bool degenerate = false; // both boundary values vanish (full-window Dirichlet case)
    double dist_to_sub_spectrum = 0.0;
};

/// Defect of the Poisson identity
///   psi(m) = G_sub(m,a) b~(x+a w) psi(a-1) + G_sub(m,b) b(x+(b+1) w) psi(b+1)
/// for a solution of H psi = E psi on the enclosing window; out-of-range
/// boundary values count as zero. The declared floor (relative to the window
/// scale) flags near-resonant sub-windows where the two boundary terms cancel
/// beyond double precision.
PoissonResidual poisson_residual(const JacobiWindow& window, const std::vector<cplx>& psi, double E,
                                 Interval sub, long m, double floor = 3e-5);

/// Max of the Poisson defect over every m in the sub-window, sharing one pass
/// of the determinant prefix/suffix arrays.
PoissonResidual poisson_max_residual(const JacobiWindow& window, const std::vector<cplx>& psi,
                                     double E, Interval sub, double floor = 3e-5);

struct DecayCertificate {
    bool applicable = false;  // precondition log|f_N^a| >= N L_N^a - K/2 held
    bool holds = false;       // |G(j,k)| <= exp(-gamma |k-j| + K) everywhere
    double max_violation = 0.0;  // max over j,k of log|G| + gamma |k-j| - K
    double precondition_margin = 0.0;
};

/// Off-diagonal decay check with measured inputs: gamma from the measured
/// L_N - D_N margin and L_N^a from the same run.
DecayCertificate decay_certificate(const SamplingPair& pair, double x, double omega, long n,
                                   double E, double K, double gamma, double l_n_a);

}  // namespace qpj
