#include "msgh/taildep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "msgh/rng.hpp"

namespace msgh {

namespace {

// ranks / (N+1); ordinal ranks from a stable argsort, so the result is
// exactly invariant under strictly increasing transforms
std::vector<double> pseudo_uniforms(const std::vector<double>& x)
{
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> u(n);
    for (std::size_t r = 0; r < n; ++r)
        u[order[r]] = static_cast<double>(r + 1) / static_cast<double>(n + 1);
    return u;
}

double chi_at(const std::vector<double>& ux, const std::vector<double>& uy,
              double q)
{
    const std::size_t n = ux.size();
    std::size_t joint = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (ux[i] < q && uy[i] < q) ++joint;
    if (joint == 0) return std::numeric_limits<double>::quiet_NaN();
    const double p = static_cast<double>(joint) / static_cast<double>(n);
    return 2.0 - std::log(p) / std::log(q);
}

double clamp_chi(double v, double q)
{
    const auto [lo, hi] = chi_bounds(q);
    return std::min(hi, std::max(lo, v));
}

}  // namespace

std::pair<double, double> chi_bounds(double q)
{
    if (!(q > 0.0) || !(q < 1.0))
        throw std::domain_error("chi_bounds: q must be in (0, 1)");
    if (q <= 0.5)
        return {-std::numeric_limits<double>::infinity(), 1.0};
    return {2.0 - std::log(2.0 * q - 1.0) / std::log(q), 1.0};
}

ChiCurve chi_q(const std::vector<double>& x, const std::vector<double>& y,
               const std::vector<double>& q_grid, const ChiConfig& config)
{
    const std::size_t n = x.size();
    if (y.size() != n) throw std::invalid_argument("chi_q: length mismatch");
    if (n < 50) throw std::invalid_argument("chi_q: need at least 50 points");
    for (double q : q_grid)
        if (!(q > 0.0) || !(q < 1.0))
            throw std::domain_error("chi_q: q grid must lie in (0, 1)");

    const std::vector<double> ux = pseudo_uniforms(x);
    const std::vector<double> uy = pseudo_uniforms(y);

    ChiCurve curve;
    curve.n = n;
    curve.q = q_grid;
    const std::size_t nq = q_grid.size();
    curve.chi_hat.assign(nq, std::numeric_limits<double>::quiet_NaN());
    curve.lower.assign(nq, std::numeric_limits<double>::quiet_NaN());
    curve.upper.assign(nq, std::numeric_limits<double>::quiet_NaN());
    curve.defined.assign(nq, false);

    for (std::size_t j = 0; j < nq; ++j) {
        const double v = chi_at(ux, uy, q_grid[j]);
        if (std::isnan(v)) {
            ++curve.omitted;
            continue;
        }
        curve.defined[j] = true;
        curve.chi_hat[j] = clamp_chi(v, q_grid[j]);
    }

    // percentile bootstrap over resampled pairs
    const int b = config.bootstrap;
    if (b > 0) {
        std::vector<std::vector<double>> draws(nq);
        std::vector<double> rx(n), ry(n);
        for (int rep = 0; rep < b; ++rep) {
            Rng rng(config.seed + static_cast<std::uint64_t>(rep));
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t pick = rng.integer(n);
                rx[i] = x[pick];
                ry[i] = y[pick];
            }
            const std::vector<double> bux = pseudo_uniforms(rx);
            const std::vector<double> buy = pseudo_uniforms(ry);
            for (std::size_t j = 0; j < nq; ++j) {
                if (!curve.defined[j]) continue;
                const double v = chi_at(bux, buy, curve.q[j]);
                if (!std::isnan(v)) draws[j].push_back(clamp_chi(v, curve.q[j]));
            }
        }
        const double tail = 0.5 * (1.0 - config.band_level);
        for (std::size_t j = 0; j < nq; ++j) {
            if (!curve.defined[j] || draws[j].empty()) continue;
            std::sort(draws[j].begin(), draws[j].end());
            const auto pick = [&](double p) {
                const double pos = p * (draws[j].size() - 1);
                const std::size_t lo = static_cast<std::size_t>(pos);
                const std::size_t hi = std::min(lo + 1, draws[j].size() - 1);
                const double frac = pos - lo;
                return (1.0 - frac) * draws[j][lo] + frac * draws[j][hi];
            };
            curve.lower[j] = pick(tail);
            curve.upper[j] = pick(1.0 - tail);
        }
    }
    return curve;
}

}  // namespace msgh
