#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

namespace qpj {

using cplx = std::complex<double>;

/// A nonzero complex number stored as unit * exp(log_mag), or an explicit zero.
/// Keeps determinants and cocycle entries representable far beyond the range
/// of double (|f_N^a| grows like exp(N L^a)).
struct ScaledValue {
    double log_mag = 0.0;
    cplx unit{1.0, 0.0};
    bool is_zero = false;

    static ScaledValue zero() { return {0.0, {1.0, 0.0}, true}; }
    static ScaledValue one() { return {0.0, {1.0, 0.0}, false}; }

    static ScaledValue from(cplx v) {
        double m = std::abs(v);
        if (m == 0.0) return zero();
        return {std::log(m), v / m, false};
    }
    static ScaledValue from_log(double log_mag, cplx unit) {
        return {log_mag, unit, false};
    }

    /// Materialize to a plain complex; overflows/underflows outside |log| ~ 709.
    cplx value() const {
        if (is_zero) return {0.0, 0.0};
        return unit * std::exp(log_mag);
    }
    bool materializable(double log_cap = 300.0) const {
        return is_zero || std::abs(log_mag) <= log_cap;
    }

    ScaledValue operator*(const ScaledValue& o) const {
        if (is_zero || o.is_zero) return zero();
        cplx u = unit * o.unit;
        double m = std::abs(u);  // drift off the unit circle is ~eps per op
        return {log_mag + o.log_mag + std::log(m), u / m, false};
    }
    ScaledValue operator/(const ScaledValue& o) const {
        if (is_zero) return zero();
        cplx u = unit / o.unit;
        double m = std::abs(u);
        return {log_mag - o.log_mag + std::log(m), u / m, false};
    }
    ScaledValue operator*(cplx c) const { return *this * from(c); }
    ScaledValue operator-() const { return {log_mag, -unit, is_zero}; }

    ScaledValue operator+(const ScaledValue& o) const {
        if (is_zero) return o;
        if (o.is_zero) return *this;
        double m = std::max(log_mag, o.log_mag);
        cplx s = unit * std::exp(log_mag - m) + o.unit * std::exp(o.log_mag - m);
        double sm = std::abs(s);
        if (sm == 0.0) return zero();
        return {m + std::log(sm), s / sm, false};
    }
    ScaledValue operator-(const ScaledValue& o) const { return *this + (-o); }

    /// |*this / o - 1|, computed without materializing either side.
    double relative_error_to(const ScaledValue& o) const {
        if (is_zero && o.is_zero) return 0.0;
        if (is_zero || o.is_zero) return std::numeric_limits<double>::infinity();
        double d = log_mag - o.log_mag;
        if (std::abs(d) > 1.0) return std::numeric_limits<double>::infinity();
        return std::abs(unit * std::exp(d) - o.unit);
    }
};

/// 2x2 complex matrix with a power-of-two scale factor split off:
/// value = entries * 2^twos_exponent. Renormalization multiplies entries by an
/// exact power of two, so reconstructed log-norms do not depend on cadence.
struct ScaledMatrix2 {
    std::array<cplx, 4> m{cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(1, 0)};  // row major
    std::int64_t twos_exponent = 0;
    bool is_zero = false;

    static ScaledMatrix2 identity() { return {}; }
    static ScaledMatrix2 from(cplx a, cplx b, cplx c, cplx d) {
        ScaledMatrix2 r;
        r.m = {a, b, c, d};
        r.renormalize();
        return r;
    }

    double max_abs() const {
        double v = 0.0;
        for (const auto& e : m) v = std::max(v, std::abs(e));
        return v;
    }

    void renormalize() {
        double v = max_abs();
        if (v == 0.0) {
            is_zero = true;
            twos_exponent = 0;
            return;
        }
        int e = 0;
        std::frexp(v, &e);  // v = f * 2^e, f in [1/2, 1)
        if (e != 0) {
            double s = std::ldexp(1.0, -e);
            for (auto& x : m) x *= s;
            twos_exponent += e;
        }
    }

    friend ScaledMatrix2 operator*(const ScaledMatrix2& A, const ScaledMatrix2& B) {
        if (A.is_zero || B.is_zero) {
            ScaledMatrix2 r;
            r.m = {cplx(0, 0), cplx(0, 0), cplx(0, 0), cplx(0, 0)};
            r.is_zero = true;
            return r;
        }
        ScaledMatrix2 r;
        r.m = {A.m[0] * B.m[0] + A.m[1] * B.m[2], A.m[0] * B.m[1] + A.m[1] * B.m[3],
               A.m[2] * B.m[0] + A.m[3] * B.m[2], A.m[2] * B.m[1] + A.m[3] * B.m[3]};
        r.twos_exponent = A.twos_exponent + B.twos_exponent;
        r.is_zero = (r.max_abs() == 0.0);
        return r;
    }

    /// log of the spectral norm (largest singular value), via the closed form
    /// for 2x2: sigma_max^2 = (t + sqrt(t^2 - 4 |det|^2)) / 2, t = sum |m_ij|^2.
    double log_norm() const {
        if (is_zero) return -std::numeric_limits<double>::infinity();
        double t = 0.0;
        for (const auto& e : m) t += std::norm(e);
        cplx dt = m[0] * m[3] - m[1] * m[2];
        double d = std::norm(dt);
        double disc = t * t - 4.0 * d;
        if (disc < 0.0) disc = 0.0;
        double smax2 = 0.5 * (t + std::sqrt(disc));
        return 0.5 * std::log(smax2) + static_cast<double>(twos_exponent) * M_LN2;
    }

    ScaledValue det() const {
        if (is_zero) return ScaledValue::zero();
        cplx d = m[0] * m[3] - m[1] * m[2];
        if (d == cplx(0, 0)) return ScaledValue::zero();
        ScaledValue v = ScaledValue::from(d);
        v.log_mag += 2.0 * static_cast<double>(twos_exponent) * M_LN2;
        return v;
    }

    ScaledValue entry(int r, int c) const {
        cplx e = m[static_cast<std::size_t>(2 * r + c)];
        if (is_zero || e == cplx(0, 0)) return ScaledValue::zero();
        ScaledValue v = ScaledValue::from(e);
        v.log_mag += static_cast<double>(twos_exponent) * M_LN2;
        return v;
    }

    /// Add log-scale (used to pass from the a-variant to plain/unimodular).
    void shift_log_scale(double dlog) {
        // fold the non-power-of-two remainder into the entries
        double k = std::floor(dlog / M_LN2);
        twos_exponent += static_cast<std::int64_t>(k);
        double rem = dlog - k * M_LN2;
        double s = std::exp(rem);
        for (auto& x : m) x *= s;
        renormalize();
    }

    void rotate(cplx phase) {
        for (auto& x : m) x *= phase;
    }
};

/// log of spectral norm of a pair product without materializing the product.
inline double log_norm_product(const ScaledMatrix2& A, const ScaledMatrix2& B) {
    return (A * B).log_norm();
}

}  // namespace qpj
