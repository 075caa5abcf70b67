#include "qpjacobi/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "qpjacobi/transfer.hpp"

namespace qpj {

SpectraDistance spectra_distance(const SamplingPair& pair, double x, double omega, long l1, long l2,
                                 long m, std::optional<std::pair<double, double>> energy_window) {
    if (l1 < 1 || l2 < 1) throw std::invalid_argument("spectra_distance: window lengths must be >= 1");
    auto s1 = eigenvalues_only(build_window(pair, cplx(x, 0.0), omega, Interval::first(l1)));
    auto s2 = eigenvalues_only(
        build_window(pair, cplx(x + m * omega, 0.0), omega, Interval::first(l2)));

    if (energy_window) {
        auto [lo, hi] = *energy_window;
        std::erase_if(s1, [&](double e) { return e < lo || e > hi; });
    }
    SpectraDistance sd;
    if (s1.empty()) {
        sd.value = std::numeric_limits<double>::infinity();
        sd.empty = true;
        return sd;
    }
    // both sorted: two-pointer merge
    sd.value = std::numeric_limits<double>::infinity();
    std::size_t i = 0, j = 0;
    while (i < s1.size() && j < s2.size()) {
        sd.value = std::min(sd.value, std::abs(s1[i] - s2[j]));
        if (s1[i] < s2[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    while (i < s1.size()) sd.value = std::min(sd.value, std::abs(s1[i++] - s2.back()));
    while (j < s2.size()) sd.value = std::min(sd.value, std::abs(s1.back() - s2[j++]));
    return sd;
}

namespace {

struct DerivativeData {
    TrigPolynomial da, db, dtb;
    explicit DerivativeData(const SamplingPair& pair)
        : da(pair.a.derivative()), db(pair.b.derivative()), dtb(pair.tilde_b.derivative()) {}
};

/// Hermitian tridiagonal quadratic form psi^* (dH) psi.
double slope_quadratic_form(const DerivativeData& d, double x, double omega, Interval lambda,
                            const std::vector<cplx>& psi) {
    long n = lambda.length();
    cplx acc(0.0, 0.0);
    for (long k = 0; k < n; ++k) {
        double site = x + static_cast<double>(lambda.lo + k) * omega;
        acc += std::conj(psi[k]) * d.da(site) * psi[k];
        if (k + 1 < n) {
            double siteb = x + static_cast<double>(lambda.lo + k + 1) * omega;
            acc += std::conj(psi[k]) * (-d.db(siteb)) * psi[k + 1];
            acc += std::conj(psi[k + 1]) * (-d.dtb(siteb)) * psi[k];
        }
    }
    return acc.real();
}

std::vector<SlopeResult> all_slopes_with(const DerivativeData& d, double x, double omega,
                                         const JacobiWindow& window, const SpectralData& spectral,
                                         double gap_floor) {
    long n = window.size();
    double scale = std::max(1.0, window.scale());
    std::vector<SlopeResult> out(n);
    for (long j = 0; j < n; ++j) {
        double gap = std::numeric_limits<double>::infinity();
        if (j > 0) gap = std::min(gap, spectral.eigenvalues[j] - spectral.eigenvalues[j - 1]);
        if (j + 1 < n) gap = std::min(gap, spectral.eigenvalues[j + 1] - spectral.eigenvalues[j]);
        out[j].gap = gap;
        out[j].degraded = gap < gap_floor * scale;
        out[j].slope = slope_quadratic_form(d, x, omega, window.lambda, spectral.eigenvectors[j]);
    }
    return out;
}

}  // namespace

std::vector<SlopeResult> all_slopes(const SamplingPair& pair, double x, double omega,
                                    const JacobiWindow& window, const SpectralData& spectral,
                                    double gap_floor) {
    DerivativeData d(pair);
    return all_slopes_with(d, x, omega, window, spectral, gap_floor);
}

SlopeResult eigenvalue_slope(const SamplingPair& pair, double x, double omega, Interval lambda,
                             long j, double gap_floor) {
    JacobiWindow w = build_window(pair, cplx(x, 0.0), omega, lambda);
    SpectralData sd = eigensystem(w);
    if (j < 0 || j >= w.size()) throw std::invalid_argument("eigenvalue_slope: index out of range");
    return all_slopes(pair, x, omega, w, sd, gap_floor)[j];
}

namespace {

struct BranchSample {
    double x;
    std::vector<double> energy;
    std::vector<double> slope;
    std::vector<char> degraded;
};

BranchSample sample_branches(const SamplingPair& pair, const DerivativeData& deriv, double omega,
                             long l, double x, double gap_floor) {
    BranchSample s;
    s.x = x;
    JacobiWindow w = build_window(pair, cplx(x, 0.0), omega, Interval::first(l));
    SpectralData sd = eigensystem(w);
    auto slopes = all_slopes_with(deriv, x, omega, w, sd, gap_floor);
    s.energy = sd.eigenvalues;
    s.slope.resize(l);
    s.degraded.resize(l);
    for (long j = 0; j < l; ++j) {
        s.slope[j] = slopes[j].slope;
        s.degraded[j] = slopes[j].degraded ? 1 : 0;
    }
    return s;
}

}  // namespace

SlopeBadSet slope_bad_set(const SamplingPair& pair, double omega, long l, double tau,
                          int grid_size, const IntervalUnion* prior) {
    if (grid_size < 256) throw std::invalid_argument("slope_bad_set: grid_size must be >= 256");
    if (tau < 0.0) throw std::invalid_argument("slope_bad_set: tau must be nonnegative");

    SlopeBadSet result;
    result.tau = tau;
    result.l = l;
    result.grid = grid_size;
    result.intervals_per_branch.assign(l, 0);

    const double gap_floor = 1e-10;
    const double threshold = 2.0 * tau;
    DerivativeData deriv(pair);

    // adaptive sample set over [0, 1]; cells are refined while some branch
    // slope could dip to the threshold inside them (the secant spread bounds
    // the possible excursion), which homes in on slope zeros
    std::vector<BranchSample> samples;
    samples.reserve(grid_size + 1);
    for (int i = 0; i <= grid_size; ++i) {
        samples.push_back(
            sample_branches(pair, deriv, omega, l, static_cast<double>(i) / grid_size, gap_floor));
    }

    const double width_floor = 1.0 / grid_size / 4096.0;
    auto needs_refine = [&](const BranchSample& a, const BranchSample& b) {
        if (b.x - a.x <= width_floor) return false;
        for (long j = 0; j < l; ++j) {
            if (a.slope[j] * b.slope[j] < 0.0) continue;  // the crossing detector owns these
            double sa = std::abs(a.slope[j]), sb = std::abs(b.slope[j]);
            if (std::min(sa, sb) < 2.0 * threshold + 2.0 * std::abs(sa - sb)) return true;
        }
        return false;
    };

    for (std::size_t i = 0; i + 1 < samples.size();) {
        if (needs_refine(samples[i], samples[i + 1])) {
            double mid = 0.5 * (samples[i].x + samples[i + 1].x);
            samples.insert(samples.begin() + i + 1,
                           sample_branches(pair, deriv, omega, l, mid, gap_floor));
            ++result.refinement_cells;
        } else {
            ++i;
        }
    }

    for (const auto& s : samples) {
        for (long j = 0; j < l; ++j) {
            if (s.degraded[j]) ++result.ambiguous_points;
        }
    }

    // single-branch evaluator: eigenvalues-only QL plus one inverse-iteration
    // vector; falls back to the full solve at clustered eigenvalues
    struct BranchPoint {
        double energy;
        double slope;
    };
    auto fast_branch = [&](double x, long j) -> BranchPoint {
        JacobiWindow w = build_window(pair, cplx(x, 0.0), omega, Interval::first(l));
        double ej = sturm_eigenvalue(w, j);
        double r = 1e-9 * std::max(1.0, w.scale());
        bool isolated = sturm_count_below(w, ej + r) - sturm_count_below(w, ej - r) == 1;
        if (isolated) {
            try {
                auto psi = inverse_iteration_eigenvector(w, ej);
                return {ej, slope_quadratic_form(deriv, x, omega, w.lambda, psi)};
            } catch (const std::runtime_error&) {
                // fall through to the full solve
            }
        }
        BranchSample s = sample_branches(pair, deriv, omega, l, x, gap_floor);
        return {s.energy[j], s.slope[j]};
    };
    // bisect a sign change of value_fn to width 1e-10
    auto bisect = [&](long j, double xa, double xb, double ga,
                      const std::function<double(double, long)>& value_fn) {
        for (int it = 0; it < 60 && xb - xa > 1e-10; ++it) {
            double xm = 0.5 * (xa + xb);
            double gm = value_fn(xm, j);
            if ((ga <= 0.0) == (gm <= 0.0)) {
                xa = xm;
                ga = gm;
            } else {
                xb = xm;
            }
        }
        return 0.5 * (xa + xb);
    };
    auto g_val = [&](double x, long j) { return std::abs(fast_branch(x, j).slope) - threshold; };
    auto s_val = [&](double x, long j) { return fast_branch(x, j).slope; };

    std::vector<std::pair<double, double>> images;
    for (long j = 0; j < l; ++j) {
        bool in_bad = std::abs(samples[0].slope[j]) <= threshold;
        double emin = samples[0].energy[j], emax = samples[0].energy[j];
        auto flush = [&] {
            images.emplace_back(emin, emax);
            ++result.intervals_per_branch[j];
        };
        for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
            double ga = std::abs(samples[i].slope[j]) - threshold;
            double gb = std::abs(samples[i + 1].slope[j]) - threshold;
            bool cross = (ga <= 0.0) != (gb <= 0.0);
            if (in_bad) {
                double e_next =
                    cross ? fast_branch(bisect(j, samples[i].x, samples[i + 1].x, ga, g_val), j)
                                .energy
                          : samples[i + 1].energy[j];
                emin = std::min(emin, e_next);
                emax = std::max(emax, e_next);
            }
            if (cross) {
                if (in_bad) {
                    flush();
                    in_bad = false;
                } else {
                    in_bad = true;
                    double xc = bisect(j, samples[i].x, samples[i + 1].x, ga, g_val);
                    double ec = fast_branch(xc, j).energy;
                    emin = std::min(ec, samples[i + 1].energy[j]);
                    emax = std::max(ec, samples[i + 1].energy[j]);
                }
            } else if (!in_bad && samples[i].slope[j] * samples[i + 1].slope[j] < 0.0) {
                // slope crosses zero between samples that both clear the
                // threshold: the |s| <= 2 tau stretch is narrower than the
                // sampling; pin its image at the zero
                double xz = bisect(j, samples[i].x, samples[i + 1].x, samples[i].slope[j], s_val);
                double el = fast_branch(std::max(0.0, xz - width_floor), j).energy;
                double er = fast_branch(std::min(1.0, xz + width_floor), j).energy;
                images.emplace_back(std::min(el, er), std::max(el, er));
                ++result.intervals_per_branch[j];
            }
        }
        if (in_bad) flush();
    }

    IntervalUnion z(std::move(images));
    if (prior) z = z.united(*prior);
    result.z_y = z.fattened(tau);

    // construction-grid guarantee: any sample with |slope| <= tau must have its
    // energy inside z_y (holds by construction; assert defensively)
    for (const auto& s : samples) {
        for (long j = 0; j < l; ++j) {
            if (std::abs(s.slope[j]) <= tau && !result.z_y.contains(s.energy[j])) {
                throw std::runtime_error("slope_bad_set: construction-grid guarantee violated");
            }
        }
    }
    return result;
}

std::vector<ResonanceEvent> elimination_scan(const SamplingPair& pair, double omega, long l,
                                             double sigma, long q, long m_max,
                                             const IntervalUnion& bad_set, int grid_size,
                                             std::optional<std::pair<double, double>> energy_window,
                                             int threads) {
    std::vector<ResonanceEvent> events;
    if (m_max < q) return events;  // empty scan by contract
    if (grid_size < 1) throw std::invalid_argument("elimination_scan: grid_size must be positive");

    std::vector<long> shifts;
    for (long m = -m_max; m <= m_max; ++m) {
        if (std::llabs(m) >= q) shifts.push_back(m);
    }

    std::vector<std::vector<ResonanceEvent>> shards(grid_size);
    auto work = [&](int i) {
        double x = static_cast<double>(i) / grid_size;
        auto s1 = eigenvalues_only(build_window(pair, cplx(x, 0.0), omega, Interval::first(l)));
        auto& out = shards[i];
        for (long m : shifts) {
            auto s2 = eigenvalues_only(
                build_window(pair, cplx(x + m * omega, 0.0), omega, Interval::first(l)));
            // sorted sweep: for each j, candidates k with |E_j - E'_k| < sigma
            std::size_t k0 = 0;
            for (std::size_t j = 0; j < s1.size(); ++j) {
                double e = s1[j];
                if (energy_window && (e < energy_window->first || e > energy_window->second))
                    continue;
                while (k0 < s2.size() && s2[k0] < e - sigma) ++k0;
                for (std::size_t k = k0; k < s2.size() && s2[k] < e + sigma; ++k) {
                    double gap = std::abs(e - s2[k]);
                    if (gap < sigma) {
                        out.push_back({x, m, static_cast<long>(j), static_cast<long>(k), gap, e,
                                       bad_set.contains(e)});
                    }
                }
            }
        }
    };

    if (threads <= 1) {
        for (int i = 0; i < grid_size; ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < grid_size; i = next.fetch_add(1)) work(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (auto& shard : shards) {
        events.insert(events.end(), shard.begin(), shard.end());
    }
    return events;  // shards concatenated in x order; (m, j, k) ordered inside
}

GapReport gap_report(const SamplingPair& pair, double x, double omega, long n, double p,
                     const IntervalUnion& excluded) {
    if (n < 2) throw std::invalid_argument("gap_report: N must be >= 2");
    GapReport rep;
    rep.n = n;
    rep.p = p;
    rep.threshold = 1.0 / (static_cast<double>(n) * std::pow(std::log(static_cast<double>(n)), p));
    rep.eigenvalues = eigenvalues_only(build_window(pair, cplx(x, 0.0), omega, Interval::first(n)));
    rep.min_gaps.resize(n);
    rep.min_gap = std::numeric_limits<double>::infinity();
    long below = 0;
    rep.histogram.assign(18, 0);
    for (long j = 0; j < n; ++j) {
        double g = std::numeric_limits<double>::infinity();
        if (j > 0) g = std::min(g, rep.eigenvalues[j] - rep.eigenvalues[j - 1]);
        if (j + 1 < n) g = std::min(g, rep.eigenvalues[j + 1] - rep.eigenvalues[j]);
        rep.min_gaps[j] = g;
        rep.min_gap = std::min(rep.min_gap, g);
        if (!excluded.contains(rep.eigenvalues[j])) {
            ++rep.considered;
            if (g < rep.threshold) ++below;
        }
        if (g > 0.0 && std::isfinite(g)) {
            int bin = static_cast<int>(std::floor(std::log10(g))) + 18;
            if (bin >= 0 && bin < 18) ++rep.histogram[bin];
        }
    }
    rep.below_threshold_fraction = rep.considered > 0 ? static_cast<double>(below) / rep.considered : 0.0;
    return rep;
}

std::map<double, double> ldt_empirical(const SamplingPair& pair, double omega, double E, long n,
                                       const std::vector<double>& h_values, int grid_size,
                                       double c0_proxy) {
    if (grid_size < 1024) throw std::invalid_argument("ldt_empirical: grid_size must be >= 1024");
    LyapunovEstimate la = lyapunov(pair, 0.0, omega, cplx(E, 0.0), n, grid_size, Variant::a);
    double center = static_cast<double>(n) * la.value_a;
    double unit = std::pow(std::log(static_cast<double>(n)), c0_proxy);

    std::vector<double> deviations(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        double x = static_cast<double>(i) / grid_size;
        ScaledValue f = determinant(pair, cplx(x, 0.0), omega, Interval::first(n), cplx(E, 0.0));
        double log_f = f.is_zero ? -std::numeric_limits<double>::infinity() : f.log_mag;
        deviations[i] = std::abs(log_f - center);
    }
    std::map<double, double> fractions;
    for (double h : h_values) {
        long count = 0;
        for (double d : deviations) {
            if (d > h * unit) ++count;
        }
        fractions[h] = static_cast<double>(count) / grid_size;
    }
    return fractions;
}

DerivativeStability derivative_stability(const SamplingPair& pair, double x, double omega,
                                         double omega_prime, long l, double sigma_gap) {
    DerivativeStability ds;
    if (omega == omega_prime) {
        // 0/0 guarded by convention
        ds.ratios.assign(l, 0.0);
        return ds;
    }
    JacobiWindow w1 = build_window(pair, cplx(x, 0.0), omega, Interval::first(l));
    SpectralData s1 = eigensystem(w1);
    auto sl1 = all_slopes(pair, x, omega, w1, s1);
    JacobiWindow w2 = build_window(pair, cplx(x, 0.0), omega_prime, Interval::first(l));
    SpectralData s2 = eigensystem(w2);
    auto sl2 = all_slopes(pair, x, omega_prime, w2, s2);

    double denom = static_cast<double>(l) / sigma_gap * std::abs(omega - omega_prime);
    ds.ratios.assign(l, 0.0);
    for (long j = 0; j < l; ++j) {
        if (sl1[j].gap < sigma_gap) {
            ds.skipped.push_back(j);
            continue;
        }
        if (l == 1) {
            ds.ratios[j] = 0.0;  // a single site has no omega dependence
            continue;
        }
        double drift = std::abs(sl1[j].slope - sl2[j].slope);
        ds.ratios[j] = drift / denom;
        ds.max_ratio = std::max(ds.max_ratio, ds.ratios[j]);
    }
    return ds;
}

double truncation_drift(const SamplingPair& pair, double omega, int K, long l, int grid_size) {
    if (K < 1) throw std::invalid_argument("truncation_drift: K must be >= 1");
    SamplingPair trunc = pair.truncated(K);
    double drift = 0.0;
    for (int i = 0; i < grid_size; ++i) {
        double x = static_cast<double>(i) / grid_size;
        auto e1 = eigenvalues_only(build_window(pair, cplx(x, 0.0), omega, Interval::first(l)));
        auto e2 = eigenvalues_only(build_window(trunc, cplx(x, 0.0), omega, Interval::first(l)));
        for (long j = 0; j < l; ++j) drift = std::max(drift, std::abs(e1[j] - e2[j]));
    }
    return drift;
}

double PaperParameters::sigma(long n) const {
    return 2.0 / (static_cast<double>(n) * std::pow(std::log(static_cast<double>(n)), p));
}
long PaperParameters::q(long n) const {
    double v = std::pow(std::log(static_cast<double>(n)), 6.0 * A);
    if (v > 1e18) return static_cast<long>(1e18);
    return static_cast<long>(std::ceil(v));
}
long PaperParameters::l(long n) const {
    return 2 * static_cast<long>(std::floor(std::pow(std::log(static_cast<double>(n)), A)));
}
double PaperParameters::tau(long n) const {
    return std::pow(std::log(static_cast<double>(n)), -5.0 * A);
}

}  // namespace qpj
