#include "qpjacobi/trig.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qpj {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
}

TrigPolynomial::TrigPolynomial(std::map<int, cplx> coefficients) : coeffs_(std::move(coefficients)) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
        if (it->second == cplx(0.0, 0.0)) {
            it = coeffs_.erase(it);
        } else {
            degree_ = std::max(degree_, std::abs(it->first));
            ++it;
        }
    }
}

TrigPolynomial TrigPolynomial::constant(cplx c) { return TrigPolynomial({{0, c}}); }

TrigPolynomial TrigPolynomial::cosine(double lambda) {
    return TrigPolynomial({{-1, cplx(lambda, 0.0)}, {1, cplx(lambda, 0.0)}});
}

cplx TrigPolynomial::coefficient(int n) const {
    auto it = coeffs_.find(n);
    return it == coeffs_.end() ? cplx(0.0, 0.0) : it->second;
}

bool TrigPolynomial::real_valued(double tol) const {
    double scale = coefficient_l1();
    for (const auto& [n, c] : coeffs_) {
        if (std::abs(c - std::conj(coefficient(-n))) > tol * std::max(1.0, scale)) return false;
    }
    return true;
}

bool TrigPolynomial::identically_zero() const { return coeffs_.empty(); }

double TrigPolynomial::coefficient_l1() const {
    double s = 0.0;
    for (const auto& [n, c] : coeffs_) s += std::abs(c);
    return s;
}

cplx TrigPolynomial::operator()(cplx z) const {
    // e(nz) = w^n with w = exp(2 pi i z); powers walked incrementally in both
    // directions since degrees stay small.
    if (coeffs_.empty()) return {0.0, 0.0};
    cplx w = std::exp(cplx(0.0, kTwoPi) * z);
    cplx winv = 1.0 / w;
    cplx acc(0.0, 0.0);
    cplx wp(1.0, 0.0);
    for (int n = 0; n <= degree_; ++n) {
        if (auto it = coeffs_.find(n); it != coeffs_.end()) acc += it->second * wp;
        wp *= w;
    }
    cplx wn(1.0, 0.0);
    for (int n = -1; n >= -degree_; --n) {
        wn *= winv;
        if (auto it = coeffs_.find(n); it != coeffs_.end()) acc += it->second * wn;
    }
    return acc;
}

TrigPolynomial TrigPolynomial::derivative() const {
    std::map<int, cplx> d;
    for (const auto& [n, c] : coeffs_) {
        if (n != 0) d[n] = cplx(0.0, kTwoPi * n) * c;
    }
    return TrigPolynomial(std::move(d));
}

TrigPolynomial TrigPolynomial::conjugate_reflection() const {
    std::map<int, cplx> r;
    for (const auto& [n, c] : coeffs_) r[-n] = std::conj(c);
    return TrigPolynomial(std::move(r));
}

TrigPolynomial TrigPolynomial::truncated(int K) const {
    std::map<int, cplx> t;
    for (const auto& [n, c] : coeffs_) {
        if (std::abs(n) <= K) t[n] = c;
    }
    return TrigPolynomial(std::move(t));
}

SamplingPair SamplingPair::make(TrigPolynomial a, TrigPolynomial b, double rho0, std::string name) {
    if (!a.real_valued()) throw std::invalid_argument("SamplingPair: a must be real-valued");
    if (b.identically_zero()) throw std::invalid_argument("SamplingPair: b must not vanish identically");
    if (!(rho0 > 0.0)) throw std::invalid_argument("SamplingPair: rho0 must be positive");
    SamplingPair p;
    p.a = std::move(a);
    p.b = std::move(b);
    p.tilde_b = p.b.conjugate_reflection();
    p.rho0 = rho0;
    p.name = std::move(name);
    return p;
}

SamplingPair SamplingPair::almost_mathieu(double lambda) {
    return make(TrigPolynomial::cosine(lambda), TrigPolynomial::constant(1.0), 0.5,
                "almost-mathieu");
}

SamplingPair SamplingPair::free_laplacian() {
    return make(TrigPolynomial(), TrigPolynomial::constant(1.0), 0.5, "free");
}

SamplingPair SamplingPair::truncated(int K) const {
    return make(a.truncated(K), b.truncated(K), rho0, name + "-K" + std::to_string(K));
}

double SamplingPair::operator_scale() const {
    return a.coefficient_l1() + 2.0 * b.coefficient_l1();
}

StripBounds strip_bounds(const SamplingPair& pair, int x_grid, int y_grid) {
    StripBounds sb;
    sb.x_grid = x_grid;
    sb.y_grid = y_grid;
    double max_absD = 0.0;
    for (int iy = 0; iy < y_grid; ++iy) {
        double y = -pair.rho0 + 2.0 * pair.rho0 * iy / (y_grid - 1);
        for (int ix = 0; ix < x_grid; ++ix) {
            cplx z(static_cast<double>(ix) / x_grid, y);
            sb.sup_a = std::max(sb.sup_a, std::abs(pair.a(z)));
            sb.sup_b = std::max(sb.sup_b, std::abs(pair.b(z)));
        }
        max_absD = std::max(max_absD, std::abs(mean_log_modulus(pair.b, y, 1024).value));
    }
    sb.b_star = sb.sup_b + max_absD;
    return sb;
}

MeanLogModulus mean_log_modulus(const TrigPolynomial& b, double y, int grid) {
    if (b.identically_zero()) throw std::invalid_argument("mean_log_modulus: b vanishes identically");
    if (grid < 8) grid = 8;

    double scale = b.coefficient_l1();
    const double floor = 1e-13 * std::max(1.0, scale);

    auto average = [&](int g, int& excluded) {
        // compensated summation; near-zeros of b excluded pointwise
        double sum = 0.0, comp = 0.0;
        int used = 0;
        excluded = 0;
        for (int i = 0; i < g; ++i) {
            double m = std::abs(b(cplx(static_cast<double>(i) / g, y)));
            if (m < floor) {
                ++excluded;
                continue;
            }
            double t = std::log(m) - comp;
            double s = sum + t;
            comp = (s - sum) - t;
            sum = s;
            ++used;
        }
        return used > 0 ? sum / used : 0.0;
    };

    MeanLogModulus r;
    int e0 = 0, e1 = 0, e2 = 0;
    double v0 = average(grid, e0);
    double v1 = average(2 * grid, e1);
    double v2 = average(4 * grid, e2);
    r.value = v2;
    r.grid = 4 * grid;
    r.excluded_points = e2;
    r.tolerance_estimate = std::abs(v2 - v1);
    double prev = std::abs(v1 - v0);
    r.unstable = (e2 > 0) && (prev > 0.0) && (std::abs(v2 - v1) > 0.75 * prev);
    return r;
}

TruncationResult truncate(const TrigPolynomial& stream, int K, double rho0) {
    TruncationResult r;
    r.value = stream.truncated(K);

    // fit C0 in |c_n| <= C0 exp(-pi rho0 |n|)
    double c0 = 0.0;
    int argmax = 0;
    for (const auto& [n, c] : stream.coefficients()) {
        double w = std::abs(c) * std::exp(M_PI * rho0 * std::abs(n));
        if (w > c0) {
            c0 = w;
            argmax = std::abs(n);
        }
    }
    r.decay_constant = c0;

    // non-decaying input: the fitted constant is attained way out in the tail
    // and dwarfs the bulk -> no certificate
    int deg = stream.degree();
    if (deg > 0 && argmax > deg / 2) {
        double bulk = 0.0;
        for (const auto& [n, c] : stream.coefficients()) {
            if (std::abs(n) <= deg / 2)
                bulk = std::max(bulk, std::abs(c) * std::exp(M_PI * rho0 * std::abs(n)));
        }
        if (bulk > 0.0 && c0 > 10.0 * bulk) {
            r.certified = false;
            r.certificate = 0.0;
            return r;
        }
    }

    double rate = M_PI * rho0 / 3.0;
    if (K >= deg) {
        r.certificate = 0.0;  // nothing truncated
    } else {
        r.certificate = 2.0 * c0 * std::exp(-rate * (K + 1)) / (1.0 - std::exp(-rate));
    }
    r.certified = true;
    return r;
}

int truncation_order_for(const TrigPolynomial& stream, double rho0, double target) {
    for (int K = 1; K <= 100000; ++K) {
        TruncationResult t = truncate(stream, K, rho0);
        if (t.certified && t.certificate <= target) return K;
    }
    throw std::runtime_error("truncation_order_for: target not reachable");
}

namespace {

TrigPolynomial coefficients_from_json(const nlohmann::json& arr, const char* which) {
    std::map<int, cplx> coeffs;
    for (const auto& e : arr) {
        int n = e.at("n").get<int>();
        double re = e.at("re").get<double>();
        double im = e.value("im", 0.0);
        if (coeffs.count(n)) {
            throw std::invalid_argument(std::string("model: duplicate index in ") + which +
                                        " coefficients: n=" + std::to_string(n));
        }
        coeffs[n] = cplx(re, im);
    }
    return TrigPolynomial(std::move(coeffs));
}

}  // namespace

SamplingPair parse_model(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    double rho0 = j.value("rho0", 0.5);
    TrigPolynomial a = coefficients_from_json(j.at("a"), "a");
    TrigPolynomial b = coefficients_from_json(j.at("b"), "b");
    if (!a.real_valued()) throw std::invalid_argument("model: a is not real-valued");
    return SamplingPair::make(std::move(a), std::move(b), rho0, j.value("name", std::string{}));
}

SamplingPair load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("model file not readable: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string model_to_json(const SamplingPair& pair) {
    nlohmann::ordered_json j;
    if (!pair.name.empty()) j["name"] = pair.name;
    j["rho0"] = pair.rho0;
    auto dump = [](const TrigPolynomial& p) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& [n, c] : p.coefficients()) {
            arr.push_back({{"n", n}, {"re", c.real()}, {"im", c.imag()}});
        }
        return arr;
    };
    j["a"] = dump(pair.a);
    j["b"] = dump(pair.b);
    return j.dump(2);
}

}  // namespace qpj
