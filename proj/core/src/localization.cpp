#include "qpjacobi/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qpj {

long localization_center(const std::vector<cplx>& psi) {
    long best = 0;
    double bm = -1.0;
    for (long k = 0; k < static_cast<long>(psi.size()); ++k) {
        double m = std::abs(psi[k]);
        if (m > bm) {
            bm = m;
            best = k;
        }
    }
    return best;
}

double tail_mass(const std::vector<cplx>& psi, long center, long q) {
    if (q < 0) throw std::invalid_argument("tail_mass: Q must be nonnegative");
    double mass = 0.0;
    for (long k = 0; k < static_cast<long>(psi.size()); ++k) {
        if (std::llabs(k - center) > q) mass += std::norm(psi[k]);
    }
    return mass;
}

double decay_rate_fit(const std::vector<cplx>& psi, long center, long* points_out) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    long npts = 0;
    for (long k = 0; k < static_cast<long>(psi.size()); ++k) {
        double m = std::abs(psi[k]);
        long d = std::llabs(k - center);
        if (m <= 1e-14 || d < 5) continue;
        double x = static_cast<double>(d);
        double y = std::log(m);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++npts;
    }
    if (points_out) *points_out = npts;
    if (npts < 5) return std::numeric_limits<double>::quiet_NaN();
    double denom = npts * sxx - sx * sx;
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (npts * sxy - sx * sy) / denom;
}

double restriction_distance(const SamplingPair& pair, double x, double omega, double energy,
                            Interval lambda) {
    JacobiWindow sub = build_window(pair, cplx(x, 0.0), omega, lambda);
    auto spec = eigenvalues_only(sub);
    double d = std::numeric_limits<double>::infinity();
    for (double mu : spec) d = std::min(d, std::abs(mu - energy));
    return d;
}

CenterProximity center_proximity(const SpectralData& spectral, long j1, long j2, double sigma,
                                 long q) {
    CenterProximity cp;
    cp.energy_gap = std::abs(spectral.eigenvalues.at(j1) - spectral.eigenvalues.at(j2));
    long n1 = localization_center(spectral.eigenvectors.at(j1));
    long n2 = localization_center(spectral.eigenvectors.at(j2));
    cp.center_gap = std::llabs(n1 - n2);
    if (cp.energy_gap > sigma / 2.0) {
        cp.vacuous = true;
        cp.holds = true;
        return cp;
    }
    cp.holds = cp.center_gap < 2 * q;
    return cp;
}

LocalizationProfile localization_profile(const SamplingPair& pair, double x, double omega,
                                         const JacobiWindow& window, const SpectralData& spectral,
                                         long j, const std::vector<long>& qs) {
    LocalizationProfile lp;
    lp.j = j;
    lp.energy = spectral.eigenvalues.at(j);
    const auto& psi = spectral.eigenvectors.at(j);
    lp.center = localization_center(psi);
    for (long q : qs) lp.tail_mass[q] = tail_mass(psi, lp.center, q);
    lp.fitted_rate = decay_rate_fit(psi, lp.center, &lp.fit_points);
    long qmax = qs.empty() ? window.size() / 4 : *std::max_element(qs.begin(), qs.end());
    Interval lam{std::max(window.lambda.lo, lp.center - qmax),
                 std::min(window.lambda.hi, lp.center + qmax)};
    lp.restriction_distance = restriction_distance(pair, x, omega, lp.energy, lam);
    return lp;
}

}  // namespace qpj
