#include "msgh/quadrature.hpp"

#include <cmath>

namespace msgh {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Interval {
    double a, b, value, error;
};

Interval gk15(const std::function<double(double)>& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double result_g = fc * kWg[3];
    double result_k = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        result_k += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) result_g += kWg[j / 2] * (f1 + f2);
    }
    result_g *= h;
    result_k *= h;
    return {a, b, result_k, std::abs(result_k - result_g)};
}

double adapt(const std::function<double(double)>& f, const Interval& iv,
             double tol, double rel_tol, double whole, int depth)
{
    if (depth <= 0 || iv.error <= tol ||
        iv.error <= rel_tol * std::abs(whole))
        return iv.value;
    const double mid = 0.5 * (iv.a + iv.b);
    const Interval left = gk15(f, iv.a, mid);
    const Interval right = gk15(f, mid, iv.b);
    return adapt(f, left, 0.5 * tol, rel_tol, whole, depth - 1) +
           adapt(f, right, 0.5 * tol, rel_tol, whole, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, double rel_tol, int max_depth)
{
    if (a == b) return 0.0;
    const Interval whole = gk15(f, a, b);
    return adapt(f, whole, abs_tol, rel_tol, whole.value, max_depth);
}

double integrate_segmented(const std::function<double(double)>& f, double a,
                           double b, int segments, double abs_tol,
                           double rel_tol)
{
    if (segments < 1) segments = 1;
    // first pass for a magnitude estimate, second pass refines against it
    double rough = 0.0;
    const double h = (b - a) / segments;
    for (int i = 0; i < segments; ++i)
        rough += gk15(f, a + i * h, a + (i + 1) * h).value;
    double total = 0.0;
    for (int i = 0; i < segments; ++i) {
        const Interval iv = gk15(f, a + i * h, a + (i + 1) * h);
        total += adapt(f, iv, abs_tol / segments, rel_tol, rough, 52);
    }
    return total;
}

}  // namespace msgh
