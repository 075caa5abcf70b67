#pragma once

// Brute-force reference computations for the unit and acceptance suites.
// These stay independent of the scaled-arithmetic code paths they check:
// dense LU with partial pivoting, dense solves, characteristic-polynomial
// roots by Durand-Kerner iteration.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qpjacobi/jacobi.hpp"
#include "qpjacobi/trig.hpp"

namespace qpj::testing {

using cplx = std::complex<double>;

struct DenseMatrix {
    long n = 0;
    std::vector<cplx> a;  // row major
    cplx& at(long r, long c) { return a[r * n + c]; }
    cplx at(long r, long c) const { return a[r * n + c]; }
};

inline DenseMatrix dense_from_window(const JacobiWindow& w, cplx shift = {0.0, 0.0}) {
    DenseMatrix m;
    m.n = w.size();
    m.a.assign(m.n * m.n, cplx(0.0, 0.0));
    for (long k = 0; k < m.n; ++k) {
        m.at(k, k) = w.diag[k] - shift;
        if (k + 1 < m.n) {
            m.at(k, k + 1) = w.upper[k];
            m.at(k + 1, k) = w.lower[k];
        }
    }
    return m;
}

/// log|det| and the phase of det via LU with partial pivoting.
struct LogDet {
    double log_mag = 0.0;
    cplx unit{1.0, 0.0};
    bool zero = false;
};

inline LogDet dense_log_det(DenseMatrix m) {
    LogDet r;
    long n = m.n;
    int sign_flips = 0;
    for (long k = 0; k < n; ++k) {
        long p = k;
        double best = std::abs(m.at(k, k));
        for (long r2 = k + 1; r2 < n; ++r2) {
            if (std::abs(m.at(r2, k)) > best) {
                best = std::abs(m.at(r2, k));
                p = r2;
            }
        }
        if (best == 0.0) {
            r.zero = true;
            return r;
        }
        if (p != k) {
            for (long c = 0; c < n; ++c) std::swap(m.a[k * n + c], m.a[p * n + c]);
            ++sign_flips;
        }
        cplx piv = m.at(k, k);
        r.log_mag += std::log(std::abs(piv));
        r.unit *= piv / std::abs(piv);
        for (long r2 = k + 1; r2 < n; ++r2) {
            cplx f = m.at(r2, k) / piv;
            for (long c = k; c < n; ++c) m.at(r2, c) -= f * m.at(k, c);
        }
    }
    if (sign_flips % 2) r.unit = -r.unit;
    return r;
}

/// Solve (dense) A x = b by LU with partial pivoting.
inline std::vector<cplx> dense_solve(DenseMatrix m, std::vector<cplx> rhs) {
    long n = m.n;
    for (long k = 0; k < n; ++k) {
        long p = k;
        double best = std::abs(m.at(k, k));
        for (long r2 = k + 1; r2 < n; ++r2) {
            if (std::abs(m.at(r2, k)) > best) {
                best = std::abs(m.at(r2, k));
                p = r2;
            }
        }
        if (best == 0.0) throw std::runtime_error("dense_solve: singular matrix");
        if (p != k) {
            for (long c = 0; c < n; ++c) std::swap(m.a[k * n + c], m.a[p * n + c]);
            std::swap(rhs[k], rhs[p]);
        }
        cplx piv = m.at(k, k);
        for (long r2 = k + 1; r2 < n; ++r2) {
            cplx f = m.at(r2, k) / piv;
            for (long c = k; c < n; ++c) m.at(r2, c) -= f * m.at(k, c);
            rhs[r2] -= f * rhs[k];
        }
    }
    std::vector<cplx> x(n);
    for (long k = n - 1; k >= 0; --k) {
        cplx s = rhs[k];
        for (long c = k + 1; c < n; ++c) s -= m.at(k, c) * x[c];
        x[k] = s / m.at(k, k);
    }
    return x;
}

inline std::vector<cplx> dense_inverse(const DenseMatrix& m) {
    long n = m.n;
    std::vector<cplx> inv(n * n);
    for (long c = 0; c < n; ++c) {
        std::vector<cplx> e(n, cplx(0.0, 0.0));
        e[c] = 1.0;
        auto col = dense_solve(m, e);
        for (long r = 0; r < n; ++r) inv[r * n + c] = col[r];
    }
    return inv;
}

/// Characteristic polynomial coefficients of the window (monic up to the
/// (-1)^n convention of det[H - E]), by the tridiagonal recursion carried out
/// on coefficient vectors in E.
inline std::vector<cplx> char_poly_coefficients(const JacobiWindow& w) {
    long n = w.size();
    // f_k(E): vector of coefficients, degree k
    std::vector<std::vector<cplx>> f(n + 1);
    f[0] = {cplx(1.0, 0.0)};
    for (long k = 1; k <= n; ++k) {
        const cplx d = w.diag[k - 1];
        std::vector<cplx> cur(k + 1, cplx(0.0, 0.0));
        // (d - E) * f_{k-1}
        for (long i = 0; i < k; ++i) {
            cur[i] += d * f[k - 1][i];
            cur[i + 1] -= f[k - 1][i];
        }
        if (k >= 2) {
            cplx off = w.upper[k - 2] * w.lower[k - 2];
            for (long i = 0; i < k - 1; ++i) cur[i] -= off * f[k - 2][i];
        }
        f[k] = std::move(cur);
    }
    return f[n];
}

/// Durand-Kerner simultaneous root iteration; adequate for the small degrees
/// the oracles use.
inline std::vector<cplx> polynomial_roots(std::vector<cplx> coeffs) {
    while (!coeffs.empty() && std::abs(coeffs.back()) == 0.0) coeffs.pop_back();
    long deg = static_cast<long>(coeffs.size()) - 1;
    if (deg < 1) return {};
    cplx lead = coeffs.back();
    for (auto& c : coeffs) c /= lead;

    double radius = 1.0;
    for (long i = 0; i < deg; ++i) radius = std::max(radius, 2.0 * std::pow(std::abs(coeffs[i]), 1.0 / (deg - i)));

    std::vector<cplx> roots(deg);
    for (long i = 0; i < deg; ++i) {
        double th = 2.0 * M_PI * i / deg + 0.35;
        roots[i] = radius * cplx(std::cos(th), std::sin(th));
    }
    auto eval = [&](cplx z) {
        cplx v(0.0, 0.0);
        for (long i = deg; i >= 0; --i) v = v * z + coeffs[i];
        return v;
    };
    for (int it = 0; it < 500; ++it) {
        double moved = 0.0;
        for (long i = 0; i < deg; ++i) {
            cplx denom(1.0, 0.0);
            for (long j = 0; j < deg; ++j) {
                if (j != i) denom *= roots[i] - roots[j];
            }
            cplx delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-14 * radius) break;
    }
    return roots;
}

inline double two_norm(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

}  // namespace qpj::testing
