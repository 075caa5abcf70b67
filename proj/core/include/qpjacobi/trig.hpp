#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "qpjacobi/scaled.hpp"

namespace qpj {

/// Finite Fourier data sum_{|n| <= K} c_n e(n z), e(z) = exp(2 pi i z),
/// evaluated anywhere on a horizontal strip.
class TrigPolynomial {
  public:
    TrigPolynomial() = default;
    explicit TrigPolynomial(std::map<int, cplx> coefficients);

    static TrigPolynomial constant(cplx c);
    /// 2 lambda cos(2 pi x): c_{+-1} = lambda.
    static TrigPolynomial cosine(double lambda);

    int degree() const { return degree_; }
    cplx coefficient(int n) const;
    const std::map<int, cplx>& coefficients() const { return coeffs_; }

    bool real_valued(double tol = 1e-12) const;
    bool identically_zero() const;
    double coefficient_l1() const;

    cplx operator()(cplx z) const;
    cplx operator()(double x) const { return (*this)(cplx(x, 0.0)); }

    TrigPolynomial derivative() const;  // coefficient-wise, c_n -> 2 pi i n c_n
    /// conj-transposed coefficients: n -> conj(c_{-n}); agrees with conj(p(x)) on reals.
    TrigPolynomial conjugate_reflection() const;
    TrigPolynomial truncated(int K) const;

  private:
    std::map<int, cplx> coeffs_;
    int degree_ = 0;
};

/// The model (a, b) with its analytic-extension strip and the extension
/// b~ of the conjugate of b.
struct SamplingPair {
    TrigPolynomial a;        // real-valued
    TrigPolynomial b;        // not identically zero
    TrigPolynomial tilde_b;  // derived: coeff(n) = conj(b.coeff(-n))
    double rho0 = 0.5;
    std::string name;

    static SamplingPair make(TrigPolynomial a, TrigPolynomial b, double rho0 = 0.5,
                             std::string name = {});

    /// a = 2 lambda cos(2 pi x), b = 1 (almost Mathieu).
    static SamplingPair almost_mathieu(double lambda);
    /// a = 0, b = 1 (free Laplacian).
    static SamplingPair free_laplacian();

    SamplingPair truncated(int K) const;
    /// Crude upper estimate of ||H|| from coefficient sums: sum|a_n| + 2 sum|b_n|.
    double operator_scale() const;
};

struct StripBounds {
    double sup_a = 0.0;   // grid sup of |a| on the strip boundary
    double sup_b = 0.0;   // grid sup of |b| on the strip boundary
    double b_star = 0.0;  // ||b||_inf + max_y |D(y)|, both on declared grids
    int x_grid = 0;
    int y_grid = 0;
};

/// Grid lower bounds for the strip sups; y sampled on `y_grid` points of
/// [-rho0, rho0] (default 65), x on `x_grid` equispaced points.
StripBounds strip_bounds(const SamplingPair& pair, int x_grid = 1024, int y_grid = 65);

struct MeanLogModulus {
    double value = 0.0;
    int grid = 0;                   // finest grid used
    double tolerance_estimate = 0.0;  // |result(G) - result(G/2)|
    int excluded_points = 0;        // grid points with |b| below the singular floor
    bool unstable = false;          // refinement not contracting near a zero of b
};

/// D(y) = integral over T of log|b(x+iy)| dx by equispaced quadrature with one
/// refinement for the tolerance estimate; zeros of b on the sampled circle are
/// excluded pointwise and flagged when the refinement fails to contract.
MeanLogModulus mean_log_modulus(const TrigPolynomial& b, double y, int grid = 4096);

struct TruncationResult {
    TrigPolynomial value;
    double certificate = 0.0;  // certified sup error on |Im z| < rho0/3
    double decay_constant = 0.0;  // fitted C0 with |c_n| <= C0 exp(-pi rho0 |n|)
    bool certified = false;    // false when the stream does not decay
};

/// Degree-K truncation with the exponential-tail certificate
///   sup_{|Im z|<rho0/3} |p - p_K| <= 2 C0 exp(-pi rho0 (K+1)/3) / (1 - exp(-pi rho0/3)).
TruncationResult truncate(const TrigPolynomial& stream, int K, double rho0);

/// Smallest K whose certificate is <= 1/N^2 (K0 = C log N up to constants).
int truncation_order_for(const TrigPolynomial& stream, double rho0, double target);

/// Model file I/O (JSON: rho0, a/b coefficient lists). Throws on validation
/// failure: non-real a, identically zero b, bad rho0, duplicate indices.
SamplingPair load_model(const std::string& path);
SamplingPair parse_model(const std::string& json_text);
std::string model_to_json(const SamplingPair& pair);

}  // namespace qpj
