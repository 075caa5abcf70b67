#include <doctest.h>

#include <random>

#include "qpjacobi/frequency.hpp"
#include "qpjacobi/green.hpp"
#include "qpjacobi/transfer.hpp"
#include "support/dense_oracle.hpp"
#include "support/test_models.hpp"

using namespace qpj;
using namespace qpj::testing;

TEST_CASE("one-site resolvent") {
    auto pair = SamplingPair::almost_mathieu(2.0);
    double omega = golden_mean();
    double e = pair.a(0.3).real() + 0.7;
    auto ge = green_entry(pair, 0.3, omega, 1, e, 0, 0);
    CHECK(std::abs(ge.materialized() - 1.0 / (pair.a(0.3) - e)) < 1e-12);
    CHECK(ge.formula_case == GreenCase::diagonal);
}

TEST_CASE("boundary convention at j = k = 0") {
    std::mt19937_64 rng(1);
    auto rm = random_model(rng);
    double omega = golden_mean();
    long n = 6;
    double x = 0.21;
    auto spec = eigenvalues_only(build_window(rm, cplx(x, 0.0), omega, Interval::first(n)));
    double e = spec.front() - 0.5;
    auto ge = green_entry(rm, x, omega, n, e, 0, 0);
    // f_{[0,-1]} = 1 convention: G(0,0) = f^a_{[1,N-1]} / f^a_N
    ScaledValue top = determinant(rm, cplx(x + omega, 0.0), omega, Interval::first(n - 1), e);
    ScaledValue bottom = determinant(rm, cplx(x, 0.0), omega, Interval::first(n), e);
    CHECK(ge.value.relative_error_to(top / bottom) < 1e-10);
}

TEST_CASE("cramer entries match the dense inverse") {
    std::mt19937_64 rng(2);
    double omega = golden_mean();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int done = 0;
    while (done < 30) {
        auto rm = random_model(rng);
        long n = 3 + static_cast<long>(unif(rng) * 13);
        double x = unif(rng);
        auto w = build_window(rm, cplx(x, 0.0), omega, Interval::first(n));
        auto spec = eigenvalues_only(w);
        double e = spec.front() + (spec.back() - spec.front()) * unif(rng);
        double dist = 1e300;
        for (double mu : spec) dist = std::min(dist, std::abs(mu - e));
        if (dist < 1e-3) continue;
        ++done;
        auto G = green_matrix(rm, x, omega, n, e);
        auto inv = dense_inverse(dense_from_window(w, cplx(e, 0.0)));
        double worst = 0.0;
        for (long i = 0; i < n * n; ++i) worst = std::max(worst, std::abs(G[i] - inv[i]));
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("hermitian symmetry of the resolvent for real phase and energy") {
    std::mt19937_64 rng(3);
    double omega = golden_mean();
    auto rm = random_model(rng);
    long n = 9;
    auto spec = eigenvalues_only(build_window(rm, cplx(0.4, 0.0), omega, Interval::first(n)));
    double e = 0.5 * (spec[3] + spec[4]);
    auto G = green_matrix(rm, 0.4, omega, n, e);
    for (long j = 0; j < n; ++j) {
        for (long k = 0; k < n; ++k) {
            CHECK(std::abs(G[j * n + k] - std::conj(G[k * n + j])) < 1e-9);
        }
    }
}

TEST_CASE("singular flag near the spectrum") {
    auto pair = SamplingPair::almost_mathieu(2.0);
    double omega = golden_mean();
    long n = 8;
    auto spec = eigenvalues_only(build_window(pair, cplx(0.1, 0.0), omega, Interval::first(n)));
    auto ge = green_entry(pair, 0.1, omega, n, spec[2] + 1e-13, 0, 3);
    CHECK(ge.singular);
}

TEST_CASE("poisson formula") {
    std::mt19937_64 rng(4);
    double omega = golden_mean();

    SUBCASE("full window with Dirichlet boundary is degenerate-zero") {
        auto rm = random_model(rng);
        long n = 12;
        auto w = build_window(rm, cplx(0.3, 0.0), omega, Interval::first(n));
        auto sd = eigensystem(w);
        auto pr = poisson_residual(w, sd.eigenvectors[4], sd.eigenvalues[4], {0, n - 1}, 5);
        CHECK(pr.degenerate);
        CHECK(pr.residual == 0.0);
    }

    SUBCASE("interior sub-windows of a solved eigenpair") {
        for (int t = 0; t < 6; ++t) {
            auto rm = random_model(rng);
            long n = 32;
            double x = 0.05 + 0.13 * t;
            auto w = build_window(rm, cplx(x, 0.0), omega, Interval::first(n));
            auto sd = eigensystem(w);
            for (long j = 0; j < n; j += 5) {
                for (long a = 1; a + 8 <= n - 1; a += 4) {
                    Interval sub{a, a + 7};
                    for (long m = sub.lo; m <= sub.hi; ++m) {
                        auto pr = poisson_residual(w, sd.eigenvectors[j], sd.eigenvalues[j], sub, m);
                        if (pr.singular) continue;
                        CHECK(pr.residual <= 1e-8);
                    }
                }
            }
        }
    }

    SUBCASE("defect grows linearly under perturbation of psi") {
        auto rm = random_model(rng);
        long n = 16;
        auto w = build_window(rm, cplx(0.3, 0.0), omega, Interval::first(n));
        auto sd = eigensystem(w);
        Interval sub{4, 11};
        long m = 7;
        auto base = poisson_residual(w, sd.eigenvectors[5], sd.eigenvalues[5], sub, m);
        if (!base.singular) {
            double r1 = 0.0, r2 = 0.0;
            for (double eps : {1e-4, 2e-4}) {
                auto psi = sd.eigenvectors[5];
                psi[sub.lo - 1] += eps;  // perturb a boundary value
                auto pr = poisson_residual(w, psi, sd.eigenvalues[5], sub, m);
                (eps == 1e-4 ? r1 : r2) = pr.residual;
            }
            CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(0.05));
        }
    }
}

TEST_CASE("decay certificate on localized almost Mathieu windows") {
    auto pair = SamplingPair::almost_mathieu(3.0);
    double omega = golden_mean();
    long n = 64;
    double x = 0.13;
    auto spec = eigenvalues_only(build_window(pair, cplx(x, 0.0), omega, Interval::first(n)));
    // measured Lyapunov data at matching scale
    cplx E(spec[n / 2], 0.0);
    auto le = lyapunov(pair, 0.0, omega, E, n, 233, Variant::plain);
    double gamma = le.value;  // = L - D with b = 1
    double K = 2.0 * std::pow(std::log(static_cast<double>(n)), 2.0);

    SUBCASE("mid-gap energies satisfy the bound when applicable") {
        int applicable = 0;
        for (long j = 8; j + 1 < n - 8; j += 5) {
            double e = 0.5 * (spec[j] + spec[j + 1]);
            auto dc = decay_certificate(pair, x, omega, n, e, K, gamma, le.value_a);
            if (!dc.applicable) continue;
            ++applicable;
            CHECK(dc.holds);
            // diagonal reduces to |G| <= e^K: included in max_violation <= 0
        }
        CHECK(applicable >= 3);
    }

    SUBCASE("oracle comparison: certified bound dominates the dense inverse") {
        double e = 0.5 * (spec[20] + spec[21]);
        auto dc = decay_certificate(pair, x, omega, n, e, K, gamma, le.value_a);
        if (dc.applicable) {
            auto w = build_window(pair, cplx(x, 0.0), omega, Interval::first(n));
            auto inv = dense_inverse(dense_from_window(w, cplx(e, 0.0)));
            for (long j = 0; j < n; ++j) {
                for (long k = 0; k < n; ++k) {
                    double bound = std::exp(-gamma * std::llabs(k - j) + K);
                    CHECK(std::abs(inv[j * n + k]) <= bound * (1.0 + 1e-6));
                }
            }
        }
    }

    SUBCASE("precondition failure reports inapplicable") {
        // an energy pinned to the spectrum fails log|f| >= N L^a - K/2
        auto dc = decay_certificate(pair, x, omega, n, spec[10], 1.0, gamma, le.value_a);
        CHECK_FALSE(dc.applicable);
    }
}
