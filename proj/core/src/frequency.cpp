#include "qpjacobi/frequency.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qpj {

double torus_norm(double t) {
    double f = t - std::floor(t);
    return std::min(f, 1.0 - f);
}

ContinuedFraction continued_fraction(double omega, int depth) {
    if (!(omega > 0.0 && omega < 1.0)) throw std::invalid_argument("continued_fraction: omega must lie in (0,1)");
    if (depth < 1) throw std::invalid_argument("continued_fraction: depth must be positive");

    ContinuedFraction cf;
    // seeds for [0; a1, a2, ...]: p_0 = 0, q_0 = 1, p_{-1} = 1, q_{-1} = 0
    std::int64_t pm1 = 0, pm2 = 1;
    std::int64_t qm1 = 1, qm2 = 0;
    double x = omega;
    const double cutoff = 1e-12;
    for (int s = 0; s < depth; ++s) {
        double inv = 1.0 / x;
        auto a = static_cast<std::int64_t>(std::floor(inv));
        double rem = inv - static_cast<double>(a);
        // a remainder this close to 1 is accumulated rounding, not a genuine
        // quotient ~1e9; fold it into a+1
        if (1.0 - rem < 1e-9) {
            ++a;
            rem = 0.0;
        }
        if (a < 1) a = 1;
        cf.quotients.push_back(a);
        std::int64_t ps = a * pm1 + pm2;
        std::int64_t qs = a * qm1 + qm2;
        cf.p.push_back(ps);
        cf.q.push_back(qs);
        pm2 = pm1;
        pm1 = ps;
        qm2 = qm1;
        qm1 = qs;
        if (rem < cutoff) {
            cf.terminating = true;
            break;
        }
        x = rem;
    }
    return cf;
}

std::int64_t ContinuedFraction::denominator_near(std::int64_t target) const {
    if (q.empty()) return target;
    std::int64_t best = q.front();
    for (std::int64_t qs : q) {
        if (std::llabs(qs - target) <= std::llabs(best - target)) best = qs;
    }
    return best;
}

DiophantineReport diophantine_check(double omega, double c, double alpha, std::int64_t n_max) {
    if (n_max < 2) throw std::invalid_argument("diophantine_check: n_max must be >= 2");
    DiophantineReport rep;
    rep.c = c;
    rep.alpha = alpha;
    rep.n_max = n_max;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::int64_t n = 2; n <= n_max; ++n) {
        double dn = static_cast<double>(n);
        double margin = torus_norm(dn * omega) * dn * std::pow(std::log(dn), alpha) / c;
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_n = n;
        }
    }
    rep.passes = rep.worst_margin >= 1.0;
    return rep;
}

double golden_mean() { return (std::sqrt(5.0) - 1.0) / 2.0; }

double silver_mean() { return std::sqrt(2.0) - 1.0; }

double value_from_quotients(const std::vector<std::int64_t>& quotients) {
    if (quotients.empty()) throw std::invalid_argument("value_from_quotients: empty expansion");
    double v = 0.0;
    for (auto it = quotients.rbegin(); it != quotients.rend(); ++it) {
        v = 1.0 / (static_cast<double>(*it) + v);
    }
    return v;
}

}  // namespace qpj
