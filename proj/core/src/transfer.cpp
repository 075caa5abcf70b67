#include "qpjacobi/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qpj {

BirkhoffSums birkhoff_sums(const SamplingPair& pair, cplx z, double omega, long n) {
    BirkhoffSums bs;
    double comp_s = 0.0, comp_t = 0.0;
    for (long k = 0; k < n; ++k) {
        cplx site = z + static_cast<double>(k) * omega;
        double mb = std::abs(pair.b(site));
        double mt = std::abs(pair.tilde_b(site));
        if (mb == 0.0 || mt == 0.0) {
            bs.flagged_sites.push_back(k);
            continue;
        }
        double t = std::log(mb) - comp_s;
        double s = bs.s + t;
        comp_s = (s - bs.s) - t;
        bs.s = s;
        double tt = std::log(mt) - comp_t;
        double st = bs.s_tilde + tt;
        comp_t = (st - bs.s_tilde) - tt;
        bs.s_tilde = st;
    }
    return bs;
}

ScaledMatrix2 transfer_product(const SamplingPair& pair, cplx z, double omega, long n, cplx E,
                               Variant variant, const TransferOptions& opts) {
    if (n < 1) throw std::invalid_argument("transfer_product: n must be >= 1");
    int cadence = std::max(1, opts.renorm_cadence);
    double floor = variant == Variant::plain ? opts.plain_b_floor : 0.0;

    ScaledMatrix2 acc = ScaledMatrix2::identity();
    for (long j = 0; j < n; ++j) {
        cplx site = z + static_cast<double>(j) * omega;
        cplx site1 = z + static_cast<double>(j + 1) * omega;
        cplx bv = pair.b(site1);
        ScaledMatrix2 step;
        if (variant == Variant::a) {
            step.m = {pair.a(site) - E, -pair.tilde_b(site), bv, cplx(0.0, 0.0)};
        } else {
            double mb = std::abs(bv);
            if (mb <= floor || mb == 0.0) {
                throw std::runtime_error(
                    "transfer_product: |b| below declared floor at orbit site " +
                    std::to_string(j + 1));
            }
            step.m = {(pair.a(site) - E) / bv, -pair.tilde_b(site) / bv, cplx(1.0, 0.0),
                      cplx(0.0, 0.0)};
        }
        step.twos_exponent = 0;
        acc = step * acc;
        if ((j + 1) % cadence == 0 || j + 1 == n) acc.renormalize();
    }

    if (variant != Variant::u) return acc;

    // unimodular: M / sqrt|det M|; the step-determinant factorization gives
    // log|det M_N| = S~_N(z) - S_N(z + omega) (the product determinant itself
    // cancels catastrophically for hyperbolic cocycles)
    BirkhoffSums b0 = birkhoff_sums(pair, z, omega, n);
    BirkhoffSums b1 = birkhoff_sums(pair, z + omega, omega, n);
    if (!b0.finite() || !b1.finite()) {
        long site = !b0.finite() ? b0.flagged_sites.front() : b1.flagged_sites.front() + 1;
        throw std::runtime_error(
            "transfer_product: unimodular variant undefined, b vanishes at orbit site " +
            std::to_string(site));
    }
    acc.shift_log_scale(-0.5 * (b0.s_tilde - b1.s));
    acc.renormalize();
    return acc;
}

namespace {

/// Index-ascending pairwise tree sum: deterministic reduction independent of
/// how the values were produced.
double pairwise_sum(std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

}  // namespace

LyapunovEstimate lyapunov(const SamplingPair& pair, double y, double omega, cplx E, long n,
                          int grid_size, Variant variant) {
    if (grid_size < 8) throw std::invalid_argument("lyapunov: grid_size must be >= 8");
    LyapunovEstimate est;
    est.n = n;
    est.y = y;
    est.variant = variant;
    est.grid_size = grid_size;

    std::vector<double> logs(grid_size, 0.0);
    std::vector<double> logs_a(grid_size, 0.0);
    std::vector<double> d_match(grid_size, 0.0);
    std::vector<char> ok(grid_size, 1);

    for (int i = 0; i < grid_size; ++i) {
        cplx z(static_cast<double>(i) / grid_size, y);
        ScaledMatrix2 ma = transfer_product(pair, z, omega, n, E, Variant::a);
        logs_a[i] = ma.log_norm();
        BirkhoffSums shifted = birkhoff_sums(pair, z + omega, omega, n);
        d_match[i] = shifted.s;
        switch (variant) {
            case Variant::a:
                logs[i] = logs_a[i];
                break;
            case Variant::u: {
                BirkhoffSums base = birkhoff_sums(pair, z, omega, n);
                if (!base.finite() || !shifted.finite()) {
                    ok[i] = 0;
                    break;
                }
                logs[i] = -0.5 * (base.s_tilde + shifted.s) + logs_a[i];
                break;
            }
            case Variant::plain: {
                try {
                    ScaledMatrix2 mp = transfer_product(pair, z, omega, n, E, Variant::plain);
                    logs[i] = mp.log_norm();
                } catch (const std::runtime_error&) {
                    ok[i] = 0;
                }
                break;
            }
        }
        if (!ok[i]) ++est.excluded_points;
    }

    std::vector<double> used, used_a, used_d, half;
    used.reserve(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        if (!ok[i]) continue;
        used.push_back(logs[i]);
        used_a.push_back(logs_a[i]);
        used_d.push_back(d_match[i]);
        if (i % 2 == 0) half.push_back(logs[i]);
    }
    if (used.empty()) throw std::runtime_error("lyapunov: all grid points excluded");

    double dn = static_cast<double>(n);
    est.value = pairwise_sum(used, 0, used.size()) / (dn * used.size());
    est.value_a = pairwise_sum(used_a, 0, used_a.size()) / (dn * used_a.size());
    est.matched_d = pairwise_sum(used_d, 0, used_d.size()) / (dn * used_d.size());
    double half_avg = half.empty() ? est.value : pairwise_sum(half, 0, half.size()) / (dn * half.size());
    est.quadrature_error_estimate = std::abs(est.value - half_avg);

    if (variant == Variant::a) {
        est.relation_residual = 0.0;  // relation compares plain/u against a
    } else {
        est.relation_residual = std::abs(est.value - (-est.matched_d + est.value_a));
    }
    return est;
}

ZeroCount count_zeros_disk(const std::function<ScaledValue(cplx)>& f, cplx center, double radius,
                           int samples) {
    if (samples < 8) samples = 8;
    ZeroCount zc;
    zc.radius = radius;
    int nudges = 0;

    // nudge the radius when a contour sample sits almost on a zero; the scan
    // also yields the distance scale of the nearest zero, which sets the
    // sampling density the winding needs
    double min_dist = radius;
    while (nudges < 8) {
        bool near_zero = false;
        min_dist = zc.radius;
        int probe = std::max(samples, 256);
        ScaledValue prev = f(center + zc.radius);
        for (int i = 1; i <= probe && !near_zero; ++i) {
            double th = 2.0 * M_PI * i / probe;
            cplx p = center + zc.radius * cplx(std::cos(th), std::sin(th));
            ScaledValue v = f(p);
            if (v.is_zero) {
                near_zero = true;
                break;
            }
            // |f| / |f'| distance estimate from the neighbor difference
            double dp = 2.0 * M_PI * zc.radius / probe;
            cplx den = v.unit - prev.unit * std::exp(prev.log_mag - v.log_mag);
            double deriv = std::abs(den) / dp;
            if (deriv > 0.0) {
                double dist = 1.0 / deriv;
                min_dist = std::min(min_dist, dist);
                if (dist < 1e-9 * zc.radius) near_zero = true;
            }
            prev = v;
        }
        if (!near_zero) break;
        zc.radius *= 1.00125;  // stays within the 1% budget over all attempts
        ++nudges;
    }

    // resolve the phase wrap of the closest zero before trusting the winding
    while (samples < (1 << 20) &&
           static_cast<double>(samples) * min_dist < 16.0 * zc.radius) {
        samples *= 2;
    }

    long prev_count = -1;
    int stable = 0;
    for (int s = samples; s <= (1 << 22); s *= 2) {
        double acc = 0.0;
        ScaledValue first = f(center + zc.radius);
        ScaledValue prev = first;
        bool degenerate = first.is_zero;
        for (int i = 1; i <= s && !degenerate; ++i) {
            double th = 2.0 * M_PI * i / s;
            cplx p = center + zc.radius * cplx(std::cos(th), std::sin(th));
            ScaledValue v = (i == s) ? first : f(p);
            if (v.is_zero) {
                degenerate = true;
                break;
            }
            acc += std::arg(v.unit / prev.unit);
            prev = v;
        }
        if (degenerate) {
            if (++nudges > 8) throw std::runtime_error("count_zeros_disk: zero pinned to the contour");
            zc.radius *= 1.00125;
            continue;
        }
        double w = acc / (2.0 * M_PI);
        double rounded = std::round(w);
        zc.samples = s;
        zc.winding_defect = std::abs(w - rounded);
        if (zc.winding_defect <= 0.25) {
            long c = static_cast<long>(rounded);
            if (c == prev_count) {
                ++stable;
                if (stable >= 2) {
                    zc.count = c;
                    return zc;
                }
            } else {
                stable = 1;
                prev_count = c;
            }
        } else {
            stable = 0;
            prev_count = -1;
        }
    }
    throw std::runtime_error("count_zeros_disk: winding number failed to stabilize");
}

}  // namespace qpj
