#include "qpjacobi/avalanche.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qpjacobi/jacobi.hpp"
#include "qpjacobi/transfer.hpp"

namespace qpj {

APReport ap_check(const std::vector<ScaledMatrix2>& matrices) {
    auto n = static_cast<int>(matrices.size());
    if (n < 2) throw std::invalid_argument("ap_check: need at least two matrices");
    for (const auto& A : matrices) {
        if (A.is_zero) throw std::invalid_argument("ap_check: zero matrix in the sequence");
    }

    APReport rep;
    rep.n = n;

    double log_mu = std::numeric_limits<double>::infinity();
    double max_log_det = -std::numeric_limits<double>::infinity();
    std::vector<double> log_norms(n);
    for (int j = 0; j < n; ++j) {
        log_norms[j] = matrices[j].log_norm();
        log_mu = std::min(log_mu, log_norms[j]);
        ScaledValue d = matrices[j].det();
        if (!d.is_zero) max_log_det = std::max(max_log_det, d.log_mag);
    }
    rep.mu = std::exp(log_mu);
    rep.cond1 = max_log_det <= 0.0;
    rep.cond2 = log_mu > std::log(static_cast<double>(n));

    double interior = 0.0;
    for (int j = 1; j + 1 < n; ++j) interior += log_norms[j];

    double pairs = 0.0;
    rep.pair_defect = -std::numeric_limits<double>::infinity();
    ScaledMatrix2 whole = matrices[0];
    for (int j = 0; j + 1 < n; ++j) {
        double lp = (matrices[j + 1] * matrices[j]).log_norm();
        pairs += lp;
        rep.pair_defect = std::max(rep.pair_defect, log_norms[j + 1] + log_norms[j] - lp);
        whole = matrices[j + 1] * whole;
        whole.renormalize();
    }
    rep.cond3 = rep.pair_defect < 0.5 * log_mu;
    rep.discrepancy = std::abs(whole.log_norm() + interior - pairs);
    rep.bound_ratio = rep.discrepancy * rep.mu / n;
    return rep;
}

APReport ap_check(const std::vector<std::array<cplx, 4>>& matrices) {
    std::vector<ScaledMatrix2> scaled;
    scaled.reserve(matrices.size());
    for (const auto& m : matrices) scaled.push_back(ScaledMatrix2::from(m[0], m[1], m[2], m[3]));
    return ap_check(scaled);
}

namespace {

double ap_functional(const std::vector<ScaledMatrix2>& blocks) {
    int m = static_cast<int>(blocks.size());
    double interior = 0.0;
    for (int j = 1; j + 1 < m; ++j) interior += blocks[j].log_norm();
    double pairs = 0.0;
    ScaledMatrix2 whole = blocks[0];
    for (int j = 0; j + 1 < m; ++j) {
        pairs += (blocks[j + 1] * blocks[j]).log_norm();
        whole = blocks[j + 1] * whole;
        whole.renormalize();
    }
    return whole.log_norm() + interior - pairs;
}

const ScaledMatrix2 kCornerProjector = [] {
    ScaledMatrix2 p;
    p.m = {cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(0, 0)};
    return p;
}();

}  // namespace

ChainReport chain_blocks(const SamplingPair& pair, cplx z, double omega, cplx E,
                         const std::vector<long>& block_lengths) {
    int m = static_cast<int>(block_lengths.size());
    if (m < 2) throw std::invalid_argument("chain_blocks: need at least two blocks");
    long min_l = *std::min_element(block_lengths.begin(), block_lengths.end());
    long max_l = *std::max_element(block_lengths.begin(), block_lengths.end());
    if (min_l < 1 || max_l > 3 * min_l)
        throw std::invalid_argument("chain_blocks: block lengths must satisfy l <= l_j <= 3l");

    ChainReport rep;
    rep.m = m;
    rep.block_lengths = block_lengths;

    std::vector<long> starts(m);
    long s = 0;
    for (int j = 0; j < m; ++j) {
        starts[j] = s;
        s += block_lengths[j];
    }
    long total = s;

    auto build = [&](Variant variant) {
        std::vector<ScaledMatrix2> blocks(m);
        for (int j = 0; j < m; ++j) {
            cplx base = z + static_cast<double>(starts[j]) * omega;
            ScaledMatrix2 M = transfer_product(pair, base, omega, block_lengths[j], E, variant);
            if (j == 0) {
                blocks[j] = M * kCornerProjector;
            } else if (j == m - 1) {
                blocks[j] = kCornerProjector * M;
            } else {
                blocks[j] = M;
            }
            blocks[j].renormalize();
        }
        return blocks;
    };

    auto blocks_a = build(Variant::a);
    rep.log_norms.resize(m);
    rep.pair_log_norms.resize(m - 1);
    for (int j = 0; j < m; ++j) rep.log_norms[j] = blocks_a[j].log_norm();
    for (int j = 0; j + 1 < m; ++j)
        rep.pair_log_norms[j] = (blocks_a[j + 1] * blocks_a[j]).log_norm();

    rep.log_det_whole = determinant(pair, z, omega, {0, total - 1}, E).log_mag;

    double interior = 0.0;
    for (int j = 1; j + 1 < m; ++j) interior += rep.log_norms[j];
    double pairs = 0.0;
    for (double lp : rep.pair_log_norms) pairs += lp;
    rep.residual = std::abs(rep.log_det_whole + interior - pairs);

    double sum_a = ap_functional(blocks_a);
    auto blocks_u = build(Variant::u);
    double sum_u = ap_functional(blocks_u);
    rep.u_equality_gap = std::abs(sum_a - sum_u);
    return rep;
}

}  // namespace qpj
