#include "qpjacobi/jacobi.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qpj {

namespace {
constexpr double kSplitRel = 1e-13;

cplx phase_sign(cplx v) {
    double m = std::abs(v);
    if (m == 0.0) return {1.0, 0.0};
    return v / m;
}
}  // namespace

double JacobiWindow::scale() const {
    double d = 0.0, o = 0.0;
    for (const auto& v : diag) d = std::max(d, std::abs(v));
    for (const auto& v : upper) o = std::max(o, std::abs(v));
    return d + 2.0 * o;
}

JacobiWindow build_window(const SamplingPair& pair, cplx z, double omega, Interval lambda) {
    if (lambda.length() < 1) throw std::invalid_argument("build_window: empty interval");
    if (std::abs(z.imag()) >= pair.rho0)
        throw std::invalid_argument("build_window: phase outside the analyticity strip");
    JacobiWindow w;
    w.lambda = lambda;
    w.z = z;
    w.omega = omega;
    long n = lambda.length();
    w.diag.resize(n);
    w.upper.resize(n - 1);
    w.lower.resize(n - 1);
    for (long k = 0; k < n; ++k) {
        double site = static_cast<double>(lambda.lo + k);
        w.diag[k] = pair.a(z + site * omega);
        if (k + 1 < n) {
            cplx zb = z + (site + 1.0) * omega;
            w.upper[k] = -pair.b(zb);
            w.lower[k] = -pair.tilde_b(zb);
        }
    }
    return w;
}

namespace {

struct Block {
    long begin;  // within-window offsets
    long end;    // exclusive
};

std::vector<Block> split_blocks(const JacobiWindow& w) {
    double floor = kSplitRel * std::max(1.0, w.scale());
    std::vector<Block> blocks;
    long n = w.size();
    long start = 0;
    for (long k = 0; k + 1 < n; ++k) {
        if (std::abs(w.upper[k]) < floor) {
            blocks.push_back({start, k + 1});
            start = k + 1;
        }
    }
    blocks.push_back({start, n});
    return blocks;
}

}  // namespace

SpectralData eigensystem(const JacobiWindow& w) {
    if (!w.real_phase(1e-12))
        throw std::invalid_argument("eigensystem: Hermitian solve needs a real phase");
    long n = w.size();
    auto blocks = split_blocks(w);

    struct Item {
        double e;
        int block;
        long idx;  // column in the block solve
    };
    std::vector<Item> items;
    items.reserve(n);
    std::vector<Eigen::MatrixXd> vecs(blocks.size());
    std::vector<std::vector<cplx>> phases(blocks.size());

    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        auto [b0, b1] = blocks[bi];
        long m = b1 - b0;
        Eigen::VectorXd d(m), e(std::max<long>(m - 1, 0));
        // diagonal-phase similarity: u_0 = 1, u_{k+1} = u_k sign(upper_k),
        // D H D* is real symmetric with off-diagonal |upper_k|
        std::vector<cplx> u(m);
        u[0] = {1.0, 0.0};
        for (long k = 0; k < m; ++k) {
            d[k] = w.diag[b0 + k].real();
            if (k + 1 < m) {
                e[k] = std::abs(w.upper[b0 + k]);
                u[k + 1] = u[k] * phase_sign(w.upper[b0 + k]);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("eigensystem: tridiagonal QL failed on block [" +
                                     std::to_string(w.lambda.lo + b0) + "," +
                                     std::to_string(w.lambda.lo + b1 - 1) + "]");
        }
        vecs[bi] = solver.eigenvectors();
        phases[bi] = std::move(u);
        for (long j = 0; j < m; ++j) items.push_back({solver.eigenvalues()[j], static_cast<int>(bi), j});
    }

    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.e != b.e) return a.e < b.e;
        return a.block < b.block;
    });

    SpectralData sd;
    sd.blocks = static_cast<int>(blocks.size());
    sd.eigenvalues.reserve(n);
    sd.eigenvectors.reserve(n);
    for (const auto& it : items) {
        sd.eigenvalues.push_back(it.e);
        std::vector<cplx> psi(n, cplx(0.0, 0.0));
        auto [b0, b1] = blocks[it.block];
        for (long k = 0; k < b1 - b0; ++k) {
            // H = D* G D with G real, so psi = D* v
            psi[b0 + k] = std::conj(phases[it.block][k]) * vecs[it.block](k, it.idx);
        }
        sd.eigenvectors.push_back(std::move(psi));
    }

    sd.residuals.resize(n);
    for (long j = 0; j < n; ++j) {
        const auto& psi = sd.eigenvectors[j];
        double E = sd.eigenvalues[j];
        double acc = 0.0;
        for (long k = 0; k < n; ++k) {
            cplx r = (w.diag[k] - E) * psi[k];
            if (k > 0) r += w.lower[k - 1] * psi[k - 1];
            if (k + 1 < n) r += w.upper[k] * psi[k + 1];
            acc += std::norm(r);
        }
        sd.residuals[j] = std::sqrt(acc);
    }
    return sd;
}

std::vector<double> eigenvalues_only(const JacobiWindow& w) {
    if (!w.real_phase(1e-12))
        throw std::invalid_argument("eigenvalues_only: Hermitian solve needs a real phase");
    std::vector<double> all;
    all.reserve(w.size());
    for (const auto& [b0, b1] : split_blocks(w)) {
        long m = b1 - b0;
        Eigen::VectorXd d(m), e(std::max<long>(m - 1, 0));
        for (long k = 0; k < m; ++k) {
            d[k] = w.diag[b0 + k].real();
            if (k + 1 < m) e[k] = std::abs(w.upper[b0 + k]);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("eigenvalues_only: tridiagonal QL failed");
        for (long j = 0; j < m; ++j) all.push_back(solver.eigenvalues()[j]);
    }
    std::sort(all.begin(), all.end());
    return all;
}

double SpectralData::max_residual() const {
    return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
}

std::vector<cplx> inverse_iteration_eigenvector(const JacobiWindow& w, double eigenvalue) {
    if (!w.real_phase(1e-12))
        throw std::invalid_argument("inverse_iteration_eigenvector: needs a real phase");
    long n = w.size();
    // phase reduction as in eigensystem: T = D H D* real symmetric
    std::vector<double> d(n), e(std::max<long>(n - 1, 0));
    std::vector<cplx> u(n);
    u[0] = {1.0, 0.0};
    for (long k = 0; k < n; ++k) {
        d[k] = w.diag[k].real() - eigenvalue;
        if (k + 1 < n) {
            e[k] = std::abs(w.upper[k]);
            u[k + 1] = u[k] * phase_sign(w.upper[k]);
        }
    }
    double scale = std::max(1.0, w.scale());
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    for (int pass = 0; pass < 3; ++pass) {
        // elimination with partial pivoting; pivoting fills a second
        // superdiagonal (du2)
        std::vector<double> a(d), b1(n, 0.0), du2(n, 0.0), rhs(v);
        for (long k = 0; k + 1 < n; ++k) b1[k] = e[k];
        for (long k = 0; k + 1 < n; ++k) {
            double sub = e[k];  // row k+1 is untouched until this step
            if (std::abs(sub) > std::abs(a[k])) {
                std::swap(a[k], sub);
                std::swap(b1[k], a[k + 1]);
                std::swap(du2[k], b1[k + 1]);
                std::swap(rhs[k], rhs[k + 1]);
            }
            if (std::abs(a[k]) < 1e-300) a[k] = 1e-300;
            double m = sub / a[k];
            a[k + 1] -= m * b1[k];
            b1[k + 1] -= m * du2[k];
            rhs[k + 1] -= m * rhs[k];
        }
        if (std::abs(a[n - 1]) < 1e-300) a[n - 1] = 1e-300;
        std::vector<double> x(n);
        for (long k = n - 1; k >= 0; --k) {
            double s = rhs[k];
            if (k + 1 < n) s -= b1[k] * x[k + 1];
            if (k + 2 < n) s -= du2[k] * x[k + 2];
            x[k] = s / a[k];
        }
        double nrm = 0.0;
        for (double xv : x) nrm += xv * xv;
        nrm = std::sqrt(nrm);
        for (long k = 0; k < n; ++k) v[k] = x[k] / nrm;
    }
    std::vector<cplx> psi(n);
    for (long k = 0; k < n; ++k) psi[k] = std::conj(u[k]) * v[k];
    // residual check guards against clustered eigenvalues
    double acc = 0.0;
    for (long k = 0; k < n; ++k) {
        cplx r = (w.diag[k] - eigenvalue) * psi[k];
        if (k > 0) r += w.lower[k - 1] * psi[k - 1];
        if (k + 1 < n) r += w.upper[k] * psi[k + 1];
        acc += std::norm(r);
    }
    if (std::sqrt(acc) > 1e-8 * scale)
        throw std::runtime_error("inverse_iteration_eigenvector: iteration did not converge");
    return psi;
}

ScaledValue determinant(const SamplingPair& pair, cplx z, double omega, Interval lambda, cplx E) {
    auto pref = determinant_prefixes(pair, z, omega, lambda, E);
    return pref.back();
}

std::vector<ScaledValue> determinant_prefixes(const SamplingPair& pair, cplx z, double omega,
                                              Interval lambda, cplx E) {
    long n = lambda.length();
    if (n < 0) throw std::invalid_argument("determinant: empty interval");
    cplx w = z + static_cast<double>(lambda.lo) * omega;
    std::vector<ScaledValue> f(n + 1);
    f[0] = ScaledValue::one();
    ScaledValue fm1 = ScaledValue::zero();  // f_{-1}
    for (long k = 1; k <= n; ++k) {
        cplx site = w + static_cast<double>(k - 1) * omega;
        ScaledValue t1 = f[k - 1] * (pair.a(site) - E);
        ScaledValue t2 = fm1 * (pair.b(site) * pair.tilde_b(site));
        f[k] = t1 - t2;
        fm1 = f[k - 1];
    }
    return f;
}

DirichletVector dirichlet_eigenvector(const SamplingPair& pair, double x, double omega, long n,
                                      double eigenvalue, double gap_floor) {
    JacobiWindow w = build_window(pair, cplx(x, 0.0), omega, Interval::first(n));
    auto spec = eigenvalues_only(w);
    double dist = std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    for (double mu : spec) {
        double d = std::abs(mu - eigenvalue);
        if (d < dist) {
            gap = dist;
            dist = d;
        } else {
            gap = std::min(gap, d);
        }
    }
    double scale = std::max(1.0, w.scale());
    if (dist > 1e-6 * scale)
        throw std::invalid_argument("dirichlet_eigenvector: E is not an eigenvalue of the window");

    DirichletVector dv;
    dv.degraded = (gap < gap_floor * scale);

    // v(k) = f_{[0,k-1]}^a(E) / prod_{j=1..k} b(x + j omega), in log scale
    auto pref = determinant_prefixes(pair, cplx(x, 0.0), omega, Interval::first(n), eigenvalue);
    std::vector<ScaledValue> v(n);
    ScaledValue bprod = ScaledValue::one();
    for (long k = 0; k < n; ++k) {
        if (k > 0) {
            cplx bk = pair.b(cplx(x, 0.0) + static_cast<double>(k) * omega);
            if (bk == cplx(0.0, 0.0))
                throw std::runtime_error("dirichlet_eigenvector: b vanishes at orbit site " +
                                         std::to_string(k));
            bprod = bprod * bk;
        }
        v[k] = pref[k] / bprod;
    }

    double max_log = -std::numeric_limits<double>::infinity();
    for (const auto& s : v) {
        if (!s.is_zero) max_log = std::max(max_log, s.log_mag);
    }
    dv.values.resize(n);
    double norm2 = 0.0;
    for (long k = 0; k < n; ++k) {
        cplx val = v[k].is_zero ? cplx(0.0, 0.0) : v[k].unit * std::exp(v[k].log_mag - max_log);
        dv.values[k] = val;
        norm2 += std::norm(val);
    }
    double nrm = std::sqrt(norm2);
    for (auto& val : dv.values) val /= nrm;

    double acc = 0.0;
    for (long k = 0; k < n; ++k) {
        cplx r = (w.diag[k] - eigenvalue) * dv.values[k];
        if (k > 0) r += w.lower[k - 1] * dv.values[k - 1];
        if (k + 1 < n) r += w.upper[k] * dv.values[k + 1];
        acc += std::norm(r);
    }
    dv.residual = std::sqrt(acc);
    return dv;
}

long sturm_count_below(const JacobiWindow& w, double t) {
    // LDL^T sign count for the Hermitian tridiagonal shifted by t
    long n = w.size();
    long count = 0;
    double d = w.diag[0].real() - t;
    if (d < 0) ++count;
    const double tiny = 1e-300;
    for (long k = 1; k < n; ++k) {
        double off2 = std::norm(w.upper[k - 1]);
        double denom = (d == 0.0) ? tiny : d;
        d = (w.diag[k].real() - t) - off2 / denom;
        if (d < 0) ++count;
    }
    return count;
}

bool spectrum_within(const JacobiWindow& w, double E, double radius) {
    return sturm_count_below(w, E + radius) > sturm_count_below(w, E - radius);
}

double sturm_eigenvalue(const JacobiWindow& w, long j) {
    long n = w.size();
    if (j < 0 || j >= n) throw std::invalid_argument("sturm_eigenvalue: index out of range");
    double off = 0.0;
    for (const auto& v : w.upper) off = std::max(off, std::abs(v));
    double lo = w.diag[0].real(), hi = lo;
    for (const auto& v : w.diag) {
        lo = std::min(lo, v.real());
        hi = std::max(hi, v.real());
    }
    lo -= 2.0 * off + 1e-12;
    hi += 2.0 * off + 1e-12;
    for (int it = 0; it < 120 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi));
         ++it) {
        double mid = 0.5 * (lo + hi);
        if (sturm_count_below(w, mid) <= j) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace qpj
