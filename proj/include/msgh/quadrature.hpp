#pragma once

#include <functional>

namespace msgh {

/// Adaptive Gauss-Kronrod 7/15 quadrature of f on [a, b]. Bisects until the
/// local Kronrod-Gauss discrepancy is below the subdivided tolerance. The
/// tolerance is absolute; pass rel_tol > 0 to also stop once the estimate
/// is resolved relative to the running whole-interval magnitude.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10, double rel_tol = 1e-12,
                 int max_depth = 52);

/// Same rule applied on an initial uniform partition of [a, b]; guards
/// against false convergence when the mass sits in a narrow spike the
/// 15-point rule would miss.
double integrate_segmented(const std::function<double(double)>& f, double a,
                           double b, int segments, double abs_tol = 1e-10,
                           double rel_tol = 1e-12);

}  // namespace msgh
