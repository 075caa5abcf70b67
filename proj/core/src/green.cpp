#include "qpjacobi/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qpj {

namespace {

/// Suffix determinants f^a_{[t, hi]}(x) for t = lo..hi+1 (index t-lo; the last
/// entry is the empty determinant 1). Backward three-term recursion.
std::vector<ScaledValue> determinant_suffixes(const SamplingPair& pair, cplx z, double omega,
                                              Interval lambda, cplx E) {
    long n = lambda.length();
    std::vector<ScaledValue> g(n + 1);
    g[n] = ScaledValue::one();
    ScaledValue gp1 = ScaledValue::zero();  // suffix beyond the right edge
    for (long t = n - 1; t >= 0; --t) {
        cplx site = z + static_cast<double>(lambda.lo + t) * omega;
        cplx site1 = z + static_cast<double>(lambda.lo + t + 1) * omega;
        ScaledValue t1 = g[t + 1] * (pair.a(site) - E);
        ScaledValue t2 = gp1 * (pair.b(site1) * pair.tilde_b(site1));
        g[t] = t1 - t2;
        gp1 = g[t + 1];
    }
    return g;
}

}  // namespace

GreenEntry green_entry(const SamplingPair& pair, double x, double omega, long n, double E, long j,
                       long k, double floor) {
    if (j < 0 || j >= n || k < 0 || k >= n) throw std::invalid_argument("green_entry: index out of range");
    JacobiWindow w = build_window(pair, cplx(x, 0.0), omega, Interval::first(n));

    GreenEntry ge;
    ge.j = j;
    ge.k = k;
    ge.formula_case = j < k ? GreenCase::below : (j > k ? GreenCase::above : GreenCase::diagonal);
    ge.singular = spectrum_within(w, E, floor * std::max(1.0, w.scale()));

    cplx z(x, 0.0);
    Interval lam = Interval::first(n);
    auto pref = determinant_prefixes(pair, z, omega, lam, E);
    auto suff = determinant_suffixes(pair, z, omega, lam, E);

    long lo = std::min(j, k), hi = std::max(j, k);
    ScaledValue mid = ScaledValue::one();
    for (long i = lo + 1; i <= hi; ++i) {
        cplx site = z + static_cast<double>(i) * omega;
        mid = mid * (j < k ? pair.b(site) : pair.tilde_b(site));
    }
    ge.value = pref[lo] * mid * suff[hi + 1] / pref[n];
    return ge;
}

std::vector<cplx> green_matrix(const SamplingPair& pair, double x, double omega, long n, double E) {
    cplx z(x, 0.0);
    Interval lam = Interval::first(n);
    auto pref = determinant_prefixes(pair, z, omega, lam, E);
    auto suff = determinant_suffixes(pair, z, omega, lam, E);
    std::vector<cplx> G(n * n);
    for (long j = 0; j < n; ++j) {
        for (long k = 0; k < n; ++k) {
            long lo = std::min(j, k), hi = std::max(j, k);
            ScaledValue mid = ScaledValue::one();
            for (long i = lo + 1; i <= hi; ++i) {
                cplx site = z + static_cast<double>(i) * omega;
                mid = mid * (j < k ? pair.b(site) : pair.tilde_b(site));
            }
            G[j * n + k] = (pref[lo] * mid * suff[hi + 1] / pref[n]).value();
        }
    }
    return G;
}

namespace {

// shared core: m < 0 means "max over every m in the sub-window"
PoissonResidual poisson_core(const JacobiWindow& window, const std::vector<cplx>& psi, double E,
                             Interval sub, long m_select, double floor) {
    long n = window.size();
    if (sub.lo < window.lambda.lo || sub.hi > window.lambda.hi || sub.lo > sub.hi)
        throw std::invalid_argument("poisson_residual: sub-window not contained in the window");
    if (m_select >= 0 && (m_select < sub.lo || m_select > sub.hi))
        throw std::invalid_argument("poisson_residual: m outside sub-window");
    if (static_cast<long>(psi.size()) != n)
        throw std::invalid_argument("poisson_residual: psi length mismatch");

    long a = sub.lo, b = sub.hi;
    long a_off = a - window.lambda.lo, b_off = b - window.lambda.lo;
    cplx psi_left = (a_off - 1 >= 0) ? psi[a_off - 1] : cplx(0.0, 0.0);
    cplx psi_right = (b_off + 1 < n) ? psi[b_off + 1] : cplx(0.0, 0.0);

    // sub-window slice of the stored entries
    long len = b - a + 1;
    JacobiWindow ws;
    ws.lambda = sub;
    ws.z = window.z;  // same base phase; entries sliced from the enclosing window
    ws.omega = window.omega;
    ws.diag.assign(window.diag.begin() + a_off, window.diag.begin() + a_off + len);
    if (len > 1) {
        ws.upper.assign(window.upper.begin() + a_off, window.upper.begin() + a_off + len - 1);
        ws.lower.assign(window.lower.begin() + a_off, window.lower.begin() + a_off + len - 1);
    }

    PoissonResidual pr;
    double scale = std::max(1.0, window.scale());
    // distance to the sub spectrum by Sturm bisection on the flag radius
    double lo_r = 0.0, hi_r = scale;
    if (spectrum_within(ws, E, floor * scale)) {
        pr.dist_to_sub_spectrum = 0.0;  // refined below
        hi_r = floor * scale;
    } else {
        lo_r = floor * scale;
    }
    for (int it = 0; it < 48 && hi_r - lo_r > 1e-15 * scale; ++it) {
        double mid = 0.5 * (lo_r + hi_r);
        if (spectrum_within(ws, E, mid)) {
            hi_r = mid;
        } else {
            lo_r = mid;
        }
    }
    pr.dist_to_sub_spectrum = 0.5 * (lo_r + hi_r);
    pr.singular = pr.dist_to_sub_spectrum < floor * scale;

    if (psi_left == cplx(0.0, 0.0) && psi_right == cplx(0.0, 0.0)) {
        pr.degenerate = true;
        if (pr.singular) {
            // full-window Dirichlet eigenpair: the identity degenerates to the
            // eigen-equation itself
            pr.residual = 0.0;
            return pr;
        }
        if (m_select >= 0) {
            pr.residual = std::abs(psi[m_select - window.lambda.lo]);
        } else {
            for (long m = a; m <= b; ++m)
                pr.residual = std::max(pr.residual, std::abs(psi[m - window.lambda.lo]));
        }
        return pr;
    }
    if (pr.singular) return pr;

    // Cramer entries of the sub-window resolvent from the window's own entries:
    // G(m,a) needs the b~ product, G(m,b) the b product; upper = -b, lower = -b~.
    auto pref = [&] {
        std::vector<ScaledValue> f(len + 1);
        f[0] = ScaledValue::one();
        ScaledValue fm1 = ScaledValue::zero();
        for (long t = 1; t <= len; ++t) {
            ScaledValue t1 = f[t - 1] * (ws.diag[t - 1] - E);
            ScaledValue t2 = (t >= 2) ? fm1 * (ws.upper[t - 2] * ws.lower[t - 2]) : ScaledValue::zero();
            f[t] = t1 - t2;
            fm1 = f[t - 1];
        }
        return f;
    }();
    auto suff = [&] {
        std::vector<ScaledValue> g(len + 1);
        g[len] = ScaledValue::one();
        ScaledValue gp1 = ScaledValue::zero();
        for (long t = len - 1; t >= 0; --t) {
            ScaledValue t1 = g[t + 1] * (ws.diag[t] - E);
            ScaledValue t2 = (t + 1 < len) ? gp1 * (ws.upper[t] * ws.lower[t]) : ScaledValue::zero();
            g[t] = t1 - t2;
            gp1 = g[t + 1];
        }
        return g;
    }();

    // mid products for G(mu, 0) (b~ factors) and G(mu, len-1) (b factors)
    std::vector<ScaledValue> leftprod(len), rightprod(len);
    leftprod[0] = ScaledValue::one();
    for (long i = 1; i < len; ++i) leftprod[i] = leftprod[i - 1] * (-ws.lower[i - 1]);
    rightprod[len - 1] = ScaledValue::one();
    for (long i = len - 2; i >= 0; --i) rightprod[i] = rightprod[i + 1] * (-ws.upper[i]);

    // boundary couplings: -lower[a-1] = b~(x + a omega), -upper[b] = b(x + (b+1) omega)
    cplx couple_left = (a_off - 1 >= 0) ? -window.lower[a_off - 1] : cplx(0.0, 0.0);
    cplx couple_right = (b_off + 1 < n) ? -window.upper[b_off] : cplx(0.0, 0.0);

    auto defect_at = [&](long mu) {
        ScaledValue g_ma = pref[0] * leftprod[mu] * suff[mu + 1] / pref[len];
        ScaledValue g_mb = pref[mu] * rightprod[mu] * suff[len] / pref[len];
        ScaledValue lhs = ScaledValue::from(psi[a_off + mu]);
        ScaledValue term_a = g_ma * (couple_left * psi_left);
        ScaledValue term_b = g_mb * (couple_right * psi_right);
        ScaledValue defect = lhs - term_a - term_b;
        return defect.is_zero ? 0.0 : std::exp(defect.log_mag);
    };

    if (m_select >= 0) {
        pr.residual = defect_at(m_select - a);
    } else {
        for (long mu = 0; mu < len; ++mu) pr.residual = std::max(pr.residual, defect_at(mu));
    }
    return pr;
}

}  // namespace

PoissonResidual poisson_residual(const JacobiWindow& window, const std::vector<cplx>& psi, double E,
                                 Interval sub, long m, double floor) {
    if (m < sub.lo) throw std::invalid_argument("poisson_residual: m outside sub-window");
    return poisson_core(window, psi, E, sub, m, floor);
}

PoissonResidual poisson_max_residual(const JacobiWindow& window, const std::vector<cplx>& psi,
                                     double E, Interval sub, double floor) {
    return poisson_core(window, psi, E, sub, -1, floor);
}

DecayCertificate decay_certificate(const SamplingPair& pair, double x, double omega, long n,
                                   double E, double K, double gamma, double l_n_a) {
    DecayCertificate dc;
    ScaledValue fN = determinant(pair, cplx(x, 0.0), omega, Interval::first(n), E);
    double log_f = fN.is_zero ? -std::numeric_limits<double>::infinity() : fN.log_mag;
    dc.precondition_margin = log_f - (static_cast<double>(n) * l_n_a - K / 2.0);
    dc.applicable = dc.precondition_margin >= 0.0;
    if (!dc.applicable) return dc;

    cplx z(x, 0.0);
    Interval lam = Interval::first(n);
    auto pref = determinant_prefixes(pair, z, omega, lam, E);
    auto suff = determinant_suffixes(pair, z, omega, lam, E);

    dc.max_violation = -std::numeric_limits<double>::infinity();
    for (long j = 0; j < n; ++j) {
        ScaledValue row_mid = ScaledValue::one();
        for (long k = j; k < n; ++k) {
            if (k > j) {
                cplx site = z + static_cast<double>(k) * omega;
                row_mid = row_mid * pair.b(site);
            }
            ScaledValue g = pref[j] * row_mid * suff[k + 1] / pref[n];
            double log_g = g.is_zero ? -std::numeric_limits<double>::infinity() : g.log_mag;
            // Hermitian symmetry for real (x, E): |G(k,j)| = |G(j,k)|
            double v = log_g + gamma * std::abs(k - j) - K;
            dc.max_violation = std::max(dc.max_violation, v);
        }
    }
    dc.holds = dc.max_violation <= 0.0;
    return dc;
}

}  // namespace qpj
