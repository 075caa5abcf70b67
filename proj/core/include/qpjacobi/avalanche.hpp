#pragma once

#include <vector>

#include "qpjacobi/scaled.hpp"
#include "qpjacobi/trig.hpp"

namespace qpj {

struct APReport {
    int n = 0;
    double mu = 0.0;  // min_j ||A_j||
    bool cond1 = false;  // max |det A_j| <= 1
    bool cond2 = false;  // mu > n
    bool cond3 = false;  // max pair defect < (1/2) log mu
    double pair_defect = 0.0;  // max_j log||A_{j+1}|| + log||A_j|| - log||A_{j+1} A_j||
    double discrepancy = 0.0;  // |log||A_n...A_1|| + sum_{2..n-1} log||A_j|| - sum pairs|
    double bound_ratio = 0.0;  // discrepancy * mu / n
    bool conditions() const { return cond1 && cond2 && cond3; }
};

APReport ap_check(const std::vector<ScaledMatrix2>& matrices);
APReport ap_check(const std::vector<std::array<cplx, 4>>& matrices);

struct ChainReport {
    int m = 0;
    std::vector<long> block_lengths;
    std::vector<double> log_norms;       // log||A_j^a||
    std::vector<double> pair_log_norms;  // log||A_{j+1}^a A_j^a||
    double log_det_whole = 0.0;          // log|f^a_{s_{m+1}}(z)|
    double residual = 0.0;  // |log|f^a| + sum interior - sum pairs| (the AP functional)
    double u_equality_gap = 0.0;  // |a-variant AP sum - u-variant AP sum|
};

/// Corner-projected determinant block chain: A_1^a = M_{l_1}^a(z) P,
/// A_m^a = P M_{l_m}^a(z + s_m omega), P = [[1,0],[0,0]], interior blocks the
/// plain a-cocycle factors; reports the AP functional against log|f^a(whole)|
/// and the u-variant equality check.
ChainReport chain_blocks(const SamplingPair& pair, cplx z, double omega, cplx E,
                         const std::vector<long>& block_lengths);

}  // namespace qpj
