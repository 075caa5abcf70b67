#pragma once

#include <cstdint>
#include <vector>

namespace qpj {

/// Continued fraction expansion of a frequency with its convergents p_s/q_s.
struct ContinuedFraction {
    std::vector<std::int64_t> quotients;  // a_1, a_2, ...
    std::vector<std::int64_t> p;          // convergent numerators
    std::vector<std::int64_t> q;          // convergent denominators, strictly increasing
    bool terminating = false;             // input was rational to working precision

    /// Denominator q_s closest to `target` (ties towards the larger one).
    std::int64_t denominator_near(std::int64_t target) const;
};

struct DiophantineReport {
    double c = 0.0;
    double alpha = 0.0;
    std::int64_t n_max = 0;
    std::int64_t worst_n = 0;
    double worst_margin = 0.0;  // min over n of ||n omega|| n (log n)^alpha / c
    bool passes = false;        // worst_margin >= 1
};

/// Distance from t to the nearest integer, in [0, 1/2].
double torus_norm(double t);

/// Gauss-map expansion, truncated at `depth` quotients or when the remainder
/// drops below 1e-12 (rational input -> terminating flag).
ContinuedFraction continued_fraction(double omega, int depth);

/// Exhaustive scan of ||n omega|| >= c / (n (log n)^alpha) over 2 <= n <= n_max.
DiophantineReport diophantine_check(double omega, double c, double alpha, std::int64_t n_max);

/// (sqrt(5)-1)/2, quotients all 1.
double golden_mean();
/// sqrt(2)-1, quotients all 2.
double silver_mean();
/// Value of the continued fraction [0; a_1, a_2, ...].
double value_from_quotients(const std::vector<std::int64_t>& quotients);

}  // namespace qpj
