#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace msgh {

/// Empirical chi(q) dependence curve with bootstrap band. Points where the
/// joint empirical probability vanishes are flagged (defined = false) and
/// carry NaN estimates.
struct ChiCurve {
    std::vector<double> q;
    std::vector<double> chi_hat;
    std::vector<double> lower;    // bootstrap band
    std::vector<double> upper;
    std::vector<bool> defined;
    std::size_t n = 0;
    std::size_t omitted = 0;
};

struct ChiConfig {
    int bootstrap = 200;
    double band_level = 0.95;
    std::uint64_t seed = 0;
};

/// chi(q) = 2 - log P(F_X(X) < q, F_Y(Y) < q) / log q, with the marginal
/// distribution functions estimated by ranks / (N + 1) and the joint
/// probability by the empirical proportion. Estimates are clamped to the
/// analytic bounds.
ChiCurve chi_q(const std::vector<double>& x, const std::vector<double>& y,
               const std::vector<double>& q_grid, const ChiConfig& config = {});

/// Analytic bounds: upper = 1; lower = 2 - log(2q - 1)/log(q) for q > 1/2,
/// -infinity at or below 1/2.
std::pair<double, double> chi_bounds(double q);

}  // namespace msgh
