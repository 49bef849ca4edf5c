#include "msgh/bessel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

// K_r(x) for real order, evaluated with the classic three-regime scheme
// (power series, Miller backward recurrence, large-x asymptotic series)
// used by the SLATEC routine DBSKNU, followed by forward recurrence in the
// order. Seeds are computed for the reduced order |r| - round(|r|) in
// [-1/2, 1/2); forward recurrence on K is stable since K grows with the
// order. Everything is carried as e^x K_r(x) plus an explicit log shift so
// the log form never overflows.

namespace msgh {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTol = 1e-15;
constexpr double kLn10 = 2.30258509299404568402;

// Series resolving (1/Gamma(1-v) - 1/Gamma(1+v)) / (2v) at small |v|.
constexpr double kGammaCc[8] = {
    0.577215664901533, -0.0420026350340952, -0.0421977345555443,
    0.007218943246663,  -2.152416741149e-4,  -2.01348547807e-5,
    1.133027232e-6,     6.116095e-9};

// e^x K_v(x) and e^x K_{v+1}(x) for |v| <= 1/2, x > 0.
void seed_scaled(double v, double x, double& kv, double& kv1)
{
    const double v2 = (std::abs(v) >= kTol) ? v * v : 0.0;

    if (std::abs(v) == 0.5) {
        // half-odd-integer closed form
        kv = kv1 = std::sqrt(kPi / (2.0 * x));
        return;
    }

    if (x > 2.0) {
        const double coef = std::sqrt(kPi / (2.0 * x));
        if (x > 17.0) {
            // asymptotic expansion in 1/x for orders v and v+1
            double fmu = 4.0 * v2;
            const double ex = 8.0 * x;
            double s1 = 0.0, s2 = 0.0;
            for (int half = 0; half < 2; ++half) {
                s1 = s2;
                double s = 1.0, ck = 1.0, sqk = 1.0, ak = 0.0, dk = ex;
                for (int j = 0; j < 30; ++j) {
                    ck *= (fmu - sqk) / dk;
                    s += ck;
                    dk += ex;
                    ak += 8.0;
                    sqk += ak;
                    if (std::abs(ck) < kTol) break;
                }
                s2 = s * coef;
                fmu += 8.0 * v + 4.0;
            }
            kv = s1;
            kv1 = s2;
        } else {
            // Miller backward recurrence, 2 < x <= 17
            const double etest = std::cos(kPi * v) / (kPi * x * kTol);
            double fks = 1.0, fhs = 0.25, fk = 0.0;
            double ck = x + x + 2.0;
            double p1 = 0.0, p2 = 1.0;
            double a[200], b[200];
            int k = 0;
            do {
                fk += 1.0;
                const double ak = (fhs - v2) / (fks + fk);
                const double bk = ck / (fk + 1.0);
                const double pt = p2;
                p2 = bk * p2 - ak * p1;
                p1 = pt;
                a[k] = ak;
                b[k] = bk;
                ck += 2.0;
                fks += fk + fk + 1.0;
                fhs += fk + fk;
                ++k;
            } while (etest > fk * p1 && k < 200);

            double s = 1.0;
            p1 = 0.0;
            p2 = 1.0;
            for (int i = k - 1; i >= 0; --i) {
                const double pt = p2;
                p2 = (b[i] * p2 - p1) / a[i];
                p1 = pt;
                s += p2;
            }
            kv = coef * (p2 / s);
            kv1 = kv * (x + v + 0.5 - p1 / p2) / x;
        }
        return;
    }

    // power series, x <= 2
    const double rx = 2.0 / x;
    const double t1 = 1.0 / std::tgamma(1.0 - v);
    const double t2 = 1.0 / std::tgamma(1.0 + v);
    double g1;
    if (std::abs(v) > 0.1) {
        g1 = (t1 - t2) / (v + v);
    } else {
        double s = kGammaCc[0];
        double ak = 1.0;
        for (int k = 1; k < 8; ++k) {
            ak *= v2;
            const double tm = kGammaCc[k] * ak;
            s += tm;
            if (std::abs(tm) < kTol) break;
        }
        g1 = -s;
    }
    const double g2 = 0.5 * (t1 + t2);
    const double flrx = std::log(rx);
    const double fmu = v * flrx;
    double smu = 1.0, fc = 1.0;
    if (v != 0.0) {
        fc = v * kPi;
        fc /= std::sin(fc);
        if (fmu != 0.0) smu = std::sinh(fmu) / fmu;
    }
    double f = fc * (g1 * std::cosh(fmu) + g2 * flrx * smu);
    const double efmu = std::exp(fmu);  // (2/x)^v
    double p = 0.5 * efmu / t2;
    double q = 0.5 / (efmu * t1);
    double ak = 1.0, ck = 1.0, bk = 1.0;
    double s1 = f, s2 = p;
    if (x >= kTol) {
        const double cx = 0.25 * x * x;
        double rel;
        do {
            f = (ak * f + p + q) / (bk - v2);
            p /= (ak - v);
            q /= (ak + v);
            ck *= cx / ak;
            const double d1 = ck * f;
            s1 += d1;
            const double d2 = ck * (p - ak * f);
            s2 += d2;
            bk += ak + ak + 1.0;
            ak += 1.0;
            rel = std::abs(d1) / (std::abs(s1) + 1.0) +
                  std::abs(d2) / (std::abs(s2) + 1.0);
        } while (rel > kTol);
    }
    s2 *= rx;
    const double ex = std::exp(x);
    kv = s1 * ex;
    kv1 = s2 * ex;
}

struct ScaledK {
    double value;      // e^x K_r(x) = value * exp(log_shift)
    double log_shift;  // 0 unless the recurrence had to rescale
};

void check_args(double order, double x)
{
    if (!std::isfinite(order) || !std::isfinite(x))
        throw std::domain_error("bessel_k: non-finite argument");
    if (x <= 0.0) throw std::domain_error("bessel_k: x must be positive");
}

// Pair (e^x K_{a-1+shift...}, e^x K_a) at a = dnu + inu via forward
// recurrence from the seed pair. Returns the pair ending at order a so a
// further recurrence step is cheap for callers needing order a+1.
struct ScaledPair {
    double lo, hi;     // orders a-1 and a (a >= 1/2), same shift
    double log_shift;
};

ScaledPair eval_pair(double a, double x)
{
    const int inu = static_cast<int>(a + 0.5);
    const double dnu = a - inu;  // in [-1/2, 1/2)
    double s1, s2;
    seed_scaled(dnu, x, s1, s2);
    double shift = 0.0;
    double ck = (dnu + dnu + 2.0) / x;
    const double rx = 2.0 / x;
    for (int i = 1; i < inu; ++i) {
        const double st = s2;
        s2 = ck * s2 + s1;
        s1 = st;
        ck += rx;
        if (s2 > 1e280) {
            s1 *= 1e-280;
            s2 *= 1e-280;
            shift += 280.0 * kLn10;
        }
    }
    return {s1, s2, shift};
}

ScaledK eval_scaled(double order, double x)
{
    const double a = std::abs(order);
    const int inu = static_cast<int>(a + 0.5);
    const ScaledPair p = eval_pair(a, x);
    if (inu == 0) return {p.lo, p.log_shift};  // pair is (K_dnu, K_dnu+1)
    return {p.hi, p.log_shift};
}

}  // namespace

double bessel_k(double order, double x)
{
    check_args(order, x);
    const ScaledK k = eval_scaled(order, x);
    if (k.log_shift == 0.0) return k.value * std::exp(-x);
    return std::exp(std::log(k.value) + k.log_shift - x);
}

double log_bessel_k(double order, double x)
{
    check_args(order, x);
    const ScaledK k = eval_scaled(order, x);
    return std::log(k.value) + k.log_shift - x;
}

double bessel_k_scaled(double order, double x)
{
    check_args(order, x);
    const ScaledK k = eval_scaled(order, x);
    if (k.log_shift == 0.0) return k.value;
    return std::exp(std::log(k.value) + k.log_shift);
}

void bessel_k012_scaled(double x, double& k0, double& k1, double& k2)
{
    check_args(0.0, x);
    seed_scaled(0.0, x, k0, k1);
    k2 = k0 + (2.0 / x) * k1;
}

void log_bessel_k_triplet(double order, double x, double& lo, double& mid,
                          double& hi)
{
    check_args(order, x);
    const double a = std::abs(order);
    if (a < 1.0)
        throw std::domain_error("log_bessel_k_triplet: |order| must be >= 1");
    const ScaledPair p = eval_pair(a, x);
    const int inu = static_cast<int>(a + 0.5);
    double klo = p.lo, kmid = p.hi;
    if (inu == 0) {  // unreachable for a >= 1, kept for clarity
        kmid = p.lo;
        klo = 0.0;
    }
    const double khi = klo + (2.0 * a / x) * kmid;
    const double base = p.log_shift - x;
    lo = std::log(klo) + base;
    mid = std::log(kmid) + base;
    hi = std::log(khi) + base;
}

}  // namespace msgh
