#include <doctest.h>

#include <random>

#include "qpjacobi/trig.hpp"
#include "support/test_models.hpp"

using namespace qpj;

TEST_CASE("evaluation basics") {
    TrigPolynomial a = TrigPolynomial::cosine(1.0);  // 2 cos(2 pi x)
    CHECK(std::abs(a(0.0) - cplx(2.0, 0.0)) < 1e-14);
    CHECK(std::abs(a(0.5) - cplx(-2.0, 0.0)) < 1e-14);

    TrigPolynomial b({{1, cplx(1.0, 0.0)}});  // e(x)
    CHECK(std::abs(b(0.25) - cplx(0.0, 1.0)) < 1e-14);
}

TEST_CASE("one-periodicity on the strip") {
    std::mt19937_64 rng(2);
    auto pair = testing::random_model(rng);
    std::uniform_real_distribution<double> unif(-0.3, 0.3);
    double scale = pair.b.coefficient_l1();
    for (int t = 0; t < 100; ++t) {
        cplx z(unif(rng) * 3.0, unif(rng));
        CHECK(std::abs(pair.b(z + 1.0) - pair.b(z)) <= 1e-12 * std::max(1.0, scale));
    }
}

TEST_CASE("real-valued a stays real on the torus") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
        auto pair = testing::random_model(rng);
        REQUIRE(pair.a.real_valued());
        double scale = pair.a.coefficient_l1();
        for (int i = 0; i < 100; ++i) {
            double x = static_cast<double>(i) / 100.0;
            CHECK(std::abs(pair.a(x).imag()) <= 1e-12 * std::max(1.0, scale));
        }
    }
}

TEST_CASE("tilde_b equals the conjugate of b on a 1000-point grid") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 5; ++t) {
        auto pair = testing::random_model(rng);
        for (int i = 0; i < 1000; ++i) {
            double x = static_cast<double>(i) / 1000.0;
            CHECK(std::abs(pair.tilde_b(x) - std::conj(pair.b(x))) < 1e-12);
        }
    }
}

TEST_CASE("derivative matches central differences") {
    std::mt19937_64 rng(5);
    auto pair = testing::random_model(rng);
    TrigPolynomial da = pair.a.derivative();
    const double h = 1e-6;
    for (int i = 0; i < 20; ++i) {
        double x = static_cast<double>(i) / 20.0;
        cplx fd = (pair.a(x + h) - pair.a(x - h)) / (2.0 * h);
        CHECK(std::abs(da(x) - fd) < 1e-6 * std::max(1.0, std::abs(da(x))));
    }
}

TEST_CASE("mean log modulus closed forms") {
    SUBCASE("constant one") {
        auto r = mean_log_modulus(TrigPolynomial::constant(1.0), 0.37);
        CHECK(r.value == doctest::Approx(0.0));
        CHECK(r.excluded_points == 0);
    }
    SUBCASE("single mode lambda e(x): D(y) = log lambda - 2 pi y") {
        TrigPolynomial b({{1, cplx(2.5, 0.0)}});
        for (double y : {-0.2, 0.0, 0.31}) {
            auto r = mean_log_modulus(b, y);
            CHECK(r.value == doctest::Approx(std::log(2.5) - 2.0 * M_PI * y).epsilon(1e-10));
        }
    }
    SUBCASE("2 cos(2 pi x) has zero mean log modulus at y = 0") {
        // high-resolution quadrature oracle: the equispaced exclusion sum
        // approaches 0 like log(G)/G
        auto r = mean_log_modulus(TrigPolynomial::cosine(1.0), 0.0, 1 << 15);
        CHECK(std::abs(r.value) < 1e-3);
    }
}

TEST_CASE("D(y) is convex in y for polynomial b") {
    std::mt19937_64 rng(6);
    auto pair = testing::random_model(rng);
    const double h = 0.05;
    for (int i = -3; i <= 3; ++i) {
        double y = 0.1 * i;
        double d0 = mean_log_modulus(pair.b, y - h, 2048).value;
        double d1 = mean_log_modulus(pair.b, y, 2048).value;
        double d2 = mean_log_modulus(pair.b, y + h, 2048).value;
        CHECK(d0 + d2 - 2.0 * d1 >= -1e-6);
    }
}

TEST_CASE("truncation certificate") {
    SUBCASE("truncating at the full degree is exact") {
        std::mt19937_64 rng(7);
        auto pair = testing::random_model(rng);
        auto r = truncate(pair.b, pair.b.degree(), pair.rho0);
        CHECK(r.certified);
        CHECK(r.certificate == 0.0);
    }
    SUBCASE("geometric coefficients: certificate bounds the measured tail") {
        std::map<int, cplx> coeffs;
        for (int n = -40; n <= 40; ++n) coeffs[n] = cplx(std::pow(2.0, -std::abs(n)), 0.0);
        TrigPolynomial stream(std::move(coeffs));
        double rho0 = std::log(2.0) / M_PI;  // decay exactly exp(-pi rho0 |n|)
        auto r = truncate(stream, 20, rho0);
        REQUIRE(r.certified);
        // direct tail summation on the strip boundary |Im z| = rho0 / 3
        double tail = 0.0;
        for (int n = 21; n <= 40; ++n)
            tail += 2.0 * std::pow(2.0, -n) * std::exp(2.0 * M_PI * n * rho0 / 3.0);
        CHECK(r.certificate >= tail * 0.999);
        CHECK(r.certificate <= tail * 20.0);  // within a recorded factor
        // measured sup error on the strip |Im z| < rho0/3
        TrigPolynomial truncated = stream.truncated(20);
        double measured = 0.0;
        for (int i = 0; i < 256; ++i) {
            cplx z(static_cast<double>(i) / 256.0, rho0 / 3.0 * 0.999);
            measured = std::max(measured, std::abs(stream(z) - truncated(z)));
        }
        CHECK(measured <= r.certificate);
    }
    SUBCASE("certificate reaches 1/N^2 at K of order log N") {
        std::map<int, cplx> coeffs;
        for (int n = -200; n <= 200; ++n) coeffs[n] = cplx(std::exp(-0.8 * std::abs(n)), 0.0);
        TrigPolynomial stream(std::move(coeffs));
        int k_256 = truncation_order_for(stream, 0.25, 1.0 / (256.0 * 256.0));
        int k_4096 = truncation_order_for(stream, 0.25, 1.0 / (4096.0 * 4096.0));
        CHECK(k_256 >= 1);
        CHECK(k_4096 > k_256);
        CHECK(k_4096 <= 4 * k_256);  // logarithmic growth
    }
    SUBCASE("non-decaying stream is refused") {
        std::map<int, cplx> coeffs;
        for (int n = -30; n <= 30; ++n) coeffs[n] = cplx(1.0, 0.0);  // flat, no decay
        TrigPolynomial stream(std::move(coeffs));
        auto r = truncate(stream, 10, 0.5);
        CHECK_FALSE(r.certified);
    }
}

TEST_CASE("model JSON round trip and validation") {
    std::mt19937_64 rng(8);
    auto pair = testing::random_model(rng);
    auto text = model_to_json(pair);
    auto back = parse_model(text);
    CHECK(back.rho0 == pair.rho0);
    for (int n = -8; n <= 8; ++n) {
        CHECK(std::abs(back.a.coefficient(n) - pair.a.coefficient(n)) < 1e-15);
        CHECK(std::abs(back.b.coefficient(n) - pair.b.coefficient(n)) < 1e-15);
    }

    CHECK_THROWS(parse_model(R"({"rho0":0.5,"a":[{"n":1,"re":1.0,"im":0.0}],"b":[{"n":0,"re":1.0}]})"));
    CHECK_THROWS(parse_model(R"({"rho0":0.5,"a":[],"b":[]})"));
    CHECK_THROWS(parse_model(
        R"({"rho0":0.5,"a":[{"n":0,"re":1.0},{"n":0,"re":2.0}],"b":[{"n":0,"re":1.0}]})"));
}

TEST_CASE("strip bounds are finite and ordered") {
    auto pair = SamplingPair::almost_mathieu(3.0);
    auto sb = strip_bounds(pair, 256, 9);
    CHECK(sb.sup_a >= 6.0);  // reaches 2 lambda on the real line
    CHECK(sb.sup_b == doctest::Approx(1.0));
    CHECK(sb.b_star >= sb.sup_b);
    CHECK(std::isfinite(sb.b_star));
}
