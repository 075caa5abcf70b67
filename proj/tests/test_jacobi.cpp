#include <doctest.h>

#include <random>

#include "qpjacobi/frequency.hpp"
#include "qpjacobi/jacobi.hpp"
#include "support/dense_oracle.hpp"
#include "support/test_models.hpp"

using namespace qpj;
using namespace qpj::testing;

TEST_CASE("window construction") {
    auto pair = SamplingPair::almost_mathieu(3.0);
    double omega = golden_mean();

    SUBCASE("one-site window") {
        auto w = build_window(pair, cplx(0.2, 0.0), omega, Interval::first(1));
        CHECK(w.size() == 1);
        CHECK(std::abs(w.diag[0] - pair.a(0.2)) < 1e-15);
    }
    SUBCASE("hermitian for real phase") {
        std::mt19937_64 rng(1);
        auto rm = random_model(rng);
        auto w = build_window(rm, cplx(0.37, 0.0), omega, Interval::first(3));
        for (std::size_t k = 0; k < w.upper.size(); ++k) {
            CHECK(std::abs(w.lower[k] - std::conj(w.upper[k])) < 1e-12);
        }
    }
    SUBCASE("shifted window equals shifted phase") {
        std::mt19937_64 rng(2);
        auto rm = random_model(rng);
        long m = 7, l = 5;
        auto w1 = build_window(rm, cplx(0.11, 0.0), omega, {m, m + l - 1});
        auto w2 = build_window(rm, cplx(0.11 + m * omega, 0.0), omega, Interval::first(l));
        for (long k = 0; k < l; ++k) {
            CHECK(std::abs(w1.diag[k] - w2.diag[k]) < 1e-9);
            if (k + 1 < l) CHECK(std::abs(w1.upper[k] - w2.upper[k]) < 1e-9);
        }
    }
    SUBCASE("empty interval rejected") {
        CHECK_THROWS(build_window(pair, cplx(0.0, 0.0), omega, {3, 1}));
    }
    SUBCASE("strip violation rejected") {
        CHECK_THROWS(build_window(pair, cplx(0.0, 0.9), omega, Interval::first(2)));
    }
}

TEST_CASE("eigensystem closed forms") {
    double omega = golden_mean();
    SUBCASE("N=1") {
        auto pair = SamplingPair::almost_mathieu(1.5);
        auto w = build_window(pair, cplx(0.3, 0.0), omega, Interval::first(1));
        auto sd = eigensystem(w);
        CHECK(sd.eigenvalues[0] == doctest::Approx(pair.a(0.3).real()));
    }
    SUBCASE("N=2 quadratic roots") {
        std::mt19937_64 rng(3);
        auto rm = random_model(rng);
        auto w = build_window(rm, cplx(0.41, 0.0), omega, Interval::first(2));
        auto sd = eigensystem(w);
        double a0 = w.diag[0].real(), a1 = w.diag[1].real();
        double b2 = std::norm(w.upper[0]);
        double disc = std::sqrt((a0 - a1) * (a0 - a1) / 4.0 + b2);
        double mid = (a0 + a1) / 2.0;
        CHECK(sd.eigenvalues[0] == doctest::Approx(mid - disc).epsilon(1e-12));
        CHECK(sd.eigenvalues[1] == doctest::Approx(mid + disc).epsilon(1e-12));
    }
    SUBCASE("free Laplacian spectrum and eigenvectors") {
        auto pair = SamplingPair::free_laplacian();
        long n = 5;
        auto w = build_window(pair, cplx(0.0, 0.0), omega, Interval::first(n));
        auto sd = eigensystem(w);
        std::vector<double> expect;
        for (long k = 1; k <= n; ++k) expect.push_back(-2.0 * std::cos(k * M_PI / (n + 1)));
        std::sort(expect.begin(), expect.end());
        for (long k = 0; k < n; ++k) CHECK(sd.eigenvalues[k] == doctest::Approx(expect[k]));
        for (long j = 0; j < n; ++j) {
            double theta = std::acos(-sd.eigenvalues[j] / 2.0);
            double scale = 0.0, cross = 0.0;
            for (long k = 0; k < n; ++k) {
                double s = std::sin((k + 1) * theta);
                scale += s * s;
                cross += (sd.eigenvectors[j][k] * s).real();
            }
            CHECK(std::abs(std::abs(cross) / std::sqrt(scale) - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("eigensystem vs characteristic polynomial root oracle") {
    std::mt19937_64 rng(4);
    double omega = golden_mean();
    for (int t = 0; t < 10; ++t) {
        auto rm = random_model(rng);
        long n = 8;
        auto w = build_window(rm, cplx(0.21 + 0.03 * t, 0.0), omega, Interval::first(n));
        auto sd = eigensystem(w);
        auto coeffs = char_poly_coefficients(w);
        auto roots = polynomial_roots(coeffs);
        REQUIRE(static_cast<long>(roots.size()) == n);
        std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
        for (long j = 0; j < n; ++j) {
            CHECK(std::abs(roots[j].imag()) < 1e-8);
            CHECK(std::abs(roots[j].real() - sd.eigenvalues[j]) < 1e-9);
        }
    }
}

TEST_CASE("spectral data invariants") {
    std::mt19937_64 rng(5);
    double omega = golden_mean();
    for (int t = 0; t < 6; ++t) {
        auto rm = random_model(rng);
        long n = 24;
        auto w = build_window(rm, cplx(0.37 * (t + 1) / 7.0, 0.0), omega, Interval::first(n));
        auto sd = eigensystem(w);
        double scale = std::max(1.0, w.scale());

        for (long j = 0; j + 1 < n; ++j) CHECK(sd.eigenvalues[j] <= sd.eigenvalues[j + 1]);
        CHECK(sd.max_residual() <= 1e-10 * scale);

        for (long j = 0; j < n; ++j) {
            for (long k = j; k < n; ++k) {
                cplx g(0.0, 0.0);
                for (long i = 0; i < n; ++i)
                    g += std::conj(sd.eigenvectors[j][i]) * sd.eigenvectors[k][i];
                CHECK(std::abs(g - (j == k ? cplx(1.0, 0.0) : cplx(0.0, 0.0))) < 1e-10);
            }
        }

        double trace = 0.0, esum = 0.0;
        for (long k = 0; k < n; ++k) {
            trace += w.diag[k].real();
            esum += sd.eigenvalues[k];
        }
        CHECK(std::abs(trace - esum) <= 1e-9 * n * scale);
    }
}

TEST_CASE("near-zero off-diagonal splits into blocks") {
    TrigPolynomial a = TrigPolynomial::constant(0.0);
    TrigPolynomial b = TrigPolynomial::cosine(0.5);  // zero at x = 1/4
    auto pair = SamplingPair::make(a, b, 0.5);
    double omega = 0.125;
    double x = 0.25 - omega;  // bond k=0 uses b(x + omega) = b(1/4) = 0
    auto w = build_window(pair, cplx(x, 0.0), omega, Interval::first(4));
    CHECK(std::abs(w.upper[0]) < 1e-12);
    auto sd = eigensystem(w);
    CHECK(sd.blocks >= 2);
    CHECK(sd.max_residual() < 1e-10);
    for (long j = 0; j + 1 < 4; ++j) CHECK(sd.eigenvalues[j] <= sd.eigenvalues[j + 1]);
}

TEST_CASE("determinant closed forms and dense LU oracle") {
    std::mt19937_64 rng(6);
    double omega = golden_mean();
    SUBCASE("N=1 and N=2") {
        auto rm = random_model(rng);
        cplx z(0.3, 0.05), E(0.7, -0.1);
        ScaledValue f1 = determinant(rm, z, omega, Interval::first(1), E);
        CHECK(std::abs(f1.value() - (rm.a(z) - E)) < 1e-12);
        ScaledValue f2 = determinant(rm, z, omega, Interval::first(2), E);
        cplx expect =
            (rm.a(z) - E) * (rm.a(z + omega) - E) - rm.b(z + omega) * rm.tilde_b(z + omega);
        CHECK(std::abs(f2.value() - expect) < 1e-11 * std::max(1.0, std::abs(expect)));
    }
    SUBCASE("N=10 matches dense LU") {
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (int t = 0; t < 20; ++t) {
            auto rm = random_model(rng);
            cplx z(unif(rng), 0.2 * unif(rng));
            cplx E(2.0 * unif(rng), unif(rng));
            long n = 10;
            ScaledValue f = determinant(rm, z, omega, Interval::first(n), E);
            auto w = build_window(rm, z, omega, Interval::first(n));
            auto ld = dense_log_det(dense_from_window(w, E));
            if (ld.zero) {
                CHECK(f.is_zero);
                continue;
            }
            CHECK(std::abs(f.log_mag - ld.log_mag) <= 1e-9 * std::max(1.0, std::abs(ld.log_mag)));
            CHECK(std::abs(f.unit - ld.unit) < 1e-9);
        }
    }
    SUBCASE("normalization approaches (-E)^N far from the spectrum") {
        // probe energy scales with N so the trace term stays below tolerance
        auto rm = random_model(rng);
        double omega2 = silver_mean();
        for (long n : {1L, 2L, 5L, 8L}) {
            auto w = build_window(rm, cplx(0.3, 0.0), omega2, Interval::first(n));
            double scale = std::max(1.0, w.scale());
            cplx E(1e6 * n * scale, 0.3 * scale);
            ScaledValue f = determinant(rm, cplx(0.3, 0.0), omega2, Interval::first(n), E);
            ScaledValue lead = ScaledValue::one();
            for (long k = 0; k < n; ++k) lead = lead * (-E);
            CHECK(f.relative_error_to(lead) < 1e-6);
        }
    }
}

TEST_CASE("determinant is small exactly on the eigensolver spectrum") {
    std::mt19937_64 rng(7);
    double omega = golden_mean();
    auto rm = random_model(rng);
    long n = 16;
    double x = 0.191;
    auto w = build_window(rm, cplx(x, 0.0), omega, Interval::first(n));
    auto sd = eigensystem(w);
    double ref = determinant(rm, cplx(x, 0.0), omega, Interval::first(n),
                             cplx(sd.eigenvalues[n - 1] + 2.0, 0.0))
                     .log_mag;
    for (long j = 0; j < n; ++j) {
        ScaledValue f = determinant(rm, cplx(x, 0.0), omega, Interval::first(n),
                                    cplx(sd.eigenvalues[j], 0.0));
        if (!f.is_zero) CHECK(f.log_mag < ref + std::log(1e-9));
    }
}

TEST_CASE("dirichlet determinant eigenvector") {
    double omega = golden_mean();
    SUBCASE("N=1 gives the unit vector") {
        auto pair = SamplingPair::almost_mathieu(2.0);
        auto w = build_window(pair, cplx(0.2, 0.0), omega, Interval::first(1));
        auto sd = eigensystem(w);
        auto dv = dirichlet_eigenvector(pair, 0.2, omega, 1, sd.eigenvalues[0]);
        CHECK(std::abs(std::abs(dv.values[0]) - 1.0) < 1e-14);
    }
    SUBCASE("overlap with the eigensolver at N=4") {
        std::mt19937_64 rng(8);
        for (int t = 0; t < 12; ++t) {
            auto rm = random_model(rng, {.b_bounded_below = true});
            long n = 4;
            double x = 0.05 + 0.07 * t;
            auto w = build_window(rm, cplx(x, 0.0), omega, Interval::first(n));
            auto sd = eigensystem(w);
            for (long j = 0; j < n; ++j) {
                auto dv = dirichlet_eigenvector(rm, x, omega, n, sd.eigenvalues[j]);
                if (dv.degraded) continue;
                cplx overlap(0.0, 0.0);
                for (long k = 0; k < n; ++k)
                    overlap += std::conj(dv.values[k]) * sd.eigenvectors[j][k];
                CHECK(std::abs(overlap) >= 1.0 - 1e-8);
                CHECK(dv.residual <= 1e-8 * std::max(1.0, w.scale()));
            }
        }
    }
    SUBCASE("free Laplacian gives the sine profile") {
        auto pair = SamplingPair::free_laplacian();
        long n = 5;
        auto w = build_window(pair, cplx(0.0, 0.0), omega, Interval::first(n));
        auto sd = eigensystem(w);
        for (long j = 0; j < n; ++j) {
            auto dv = dirichlet_eigenvector(pair, 0.0, omega, n, sd.eigenvalues[j]);
            double theta = std::acos(-sd.eigenvalues[j] / 2.0);
            double nrm = 0.0;
            for (long k = 0; k < n; ++k) nrm += std::pow(std::sin((k + 1) * theta), 2);
            cplx overlap(0.0, 0.0);
            for (long k = 0; k < n; ++k)
                overlap += std::conj(dv.values[k]) * (std::sin((k + 1) * theta) / std::sqrt(nrm));
            CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-9);
        }
    }
    SUBCASE("rejects energies away from the spectrum") {
        auto pair = SamplingPair::almost_mathieu(2.0);
        CHECK_THROWS(dirichlet_eigenvector(pair, 0.2, omega, 6, 1e6));
    }
}

TEST_CASE("sturm count agrees with the eigensolver") {
    std::mt19937_64 rng(10);
    double omega = golden_mean();
    auto rm = random_model(rng);
    long n = 20;
    auto w = build_window(rm, cplx(0.3, 0.0), omega, Interval::first(n));
    auto spec = eigenvalues_only(w);
    for (int i = 0; i < 40; ++i) {
        double t = -4.0 + 8.0 * i / 39.0;
        long expect = std::lower_bound(spec.begin(), spec.end(), t) - spec.begin();
        CHECK(sturm_count_below(w, t) == expect);
    }
    CHECK(spectrum_within(w, spec[3], 1e-12));
    double gap_mid = 0.5 * (spec[3] + spec[4]);
    CHECK_FALSE(spectrum_within(w, gap_mid, 0.4 * (spec[4] - spec[3])));
}
