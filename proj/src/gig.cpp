#include "msgh/gig.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "msgh/bessel.hpp"
#include "msgh/errors.hpp"

namespace msgh {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

void require_interior(const GigParams& p, const char* who)
{
    if (!p.valid()) throw std::domain_error(std::string(who) + ": invalid GIG parameters");
    if (!p.interior())
        throw boundary_error(std::string(who) +
                             ": boundary GIG parameters (gamma=0 or delta=0) unsupported");
}

// log of the unnormalized density w^(lambda-1) exp(-(chi/w + psi w)/2),
// shifted so the value at the mode is 0.
struct LogKernel {
    double lambda, chi, psi, mode, at_mode;
    double operator()(double w) const
    {
        return (lambda - 1.0) * std::log(w) - 0.5 * (chi / w + psi * w) - at_mode;
    }
};

}  // namespace

double gig_log_pdf(double w, const GigParams& p)
{
    require_interior(p, "gig_log_pdf");
    if (!(w > 0.0)) throw std::domain_error("gig_log_pdf: w must be positive");
    const double dg = p.delta * p.gamma;
    return p.lambda * (std::log(p.gamma) - std::log(p.delta)) - kLn2 -
           log_bessel_k(p.lambda, dg) + (p.lambda - 1.0) * std::log(w) -
           0.5 * (p.delta * p.delta / w + p.gamma * p.gamma * w);
}

double gig_moment(int r, const GigParams& p)
{
    require_interior(p, "gig_moment");
    const double dg = p.delta * p.gamma;
    return std::exp(r * (std::log(p.delta) - std::log(p.gamma)) +
                    log_bessel_k(p.lambda + r, dg) - log_bessel_k(p.lambda, dg));
}

std::complex<double> gig_cf(double t, const GigParams& p)
{
    require_interior(p, "gig_cf");
    if (p.lambda != -0.5)
        throw unsupported_order_error(
            "gig_cf: only lambda = -1/2 supported (general order needs "
            "complex-argument Bessel K)");
    const std::complex<double> z(p.gamma * p.gamma, -2.0 * t);
    return std::exp(p.delta * p.gamma - p.delta * std::sqrt(z));
}

GigSampler::GigSampler(const GigParams& p) : p_(p)
{
    require_interior(p, "gig_sample");
    if (p.lambda == -0.5) {
        inverse_gaussian_ = true;
        ig_mean_ = p.delta / p.gamma;
        ig_shape_ = p.delta * p.delta;
        return;
    }
    // Mode-shifted ratio of uniforms. With chi = delta^2, psi = gamma^2 the
    // mode solves psi w^2 - 2(lambda-1) w - chi = 0.
    const double chi = p.delta * p.delta;
    const double psi = p.gamma * p.gamma;
    const double lm1 = p.lambda - 1.0;
    mode_ = (lm1 + std::sqrt(lm1 * lm1 + chi * psi)) / psi;
    LogKernel g{p.lambda, chi, psi, mode_, 0.0};
    g.at_mode = lm1 * std::log(mode_) - 0.5 * (chi / mode_ + psi * mode_);

    // v bounds: stationary points of (w - mode)^2 g(w) solve
    // 2 + (w - mode) dlog g(w) = 0 on each side of the mode.
    const auto stationarity = [&](double w) {
        const double dlg = lm1 / w + 0.5 * chi / (w * w) - 0.5 * psi;
        return 2.0 + (w - mode_) * dlg;
    };
    // right root: bracket by doubling
    double hi = mode_ + std::max(mode_, 1.0 / psi);
    while (stationarity(hi) > 0.0) hi = mode_ + 2.0 * (hi - mode_);
    double lo = mode_;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (stationarity(mid) > 0.0 ? lo : hi) = mid;
    }
    const double wplus = 0.5 * (lo + hi);
    vmax_ = (wplus - mode_) * std::exp(0.5 * g(wplus));
    // left root: bracket by halving toward 0
    lo = 0.5 * mode_;
    while (stationarity(lo) > 0.0) lo *= 0.5;
    hi = mode_;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (stationarity(mid) > 0.0 ? hi : lo) = mid;
    }
    const double wminus = 0.5 * (lo + hi);
    vmin_ = (wminus - mode_) * std::exp(0.5 * g(wminus));
}

double GigSampler::draw(Rng& rng) const
{
    if (inverse_gaussian_) {
        // Michael-Schucany-Haas transformation
        const double z = rng.normal();
        const double y = z * z;
        const double m = ig_mean_, l = ig_shape_;
        const double x =
            m + 0.5 * m * m * y / l -
            0.5 * (m / l) * std::sqrt(4.0 * m * l * y + m * m * y * y);
        return (rng.uniform() * (m + x) <= m) ? x : m * m / x;
    }
    const double chi = p_.delta * p_.delta;
    const double psi = p_.gamma * p_.gamma;
    const double at_mode = (p_.lambda - 1.0) * std::log(mode_) -
                           0.5 * (chi / mode_ + psi * mode_);
    for (;;) {
        const double u = rng.uniform_pos();
        const double v = vmin_ + (vmax_ - vmin_) * rng.uniform();
        const double w = mode_ + v / u;
        if (w <= 0.0) continue;
        const double lg = (p_.lambda - 1.0) * std::log(w) -
                          0.5 * (chi / w + psi * w) - at_mode;
        if (2.0 * std::log(u) <= lg) return w;
    }
}

std::vector<double> gig_sample(const GigParams& p, std::size_t n,
                               std::uint64_t seed)
{
    GigSampler sampler(p);
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& w : out) w = sampler.draw(rng);
    return out;
}

}  // namespace msgh
