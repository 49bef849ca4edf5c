#pragma once

namespace msgh {

/// Modified Bessel function of the third kind K_r(x), real order r, x > 0.
/// Satisfies K_{-r}(x) = K_r(x) exactly (the sign of the order is dropped
/// on entry). Throws std::domain_error for x <= 0 or non-finite inputs.
double bessel_k(double order, double x);

/// log K_r(x). Remains finite far past the underflow point of bessel_k
/// (x ~ 7e2) because the evaluation is carried in the scaled form
/// e^x K_r(x) throughout.
double log_bessel_k(double order, double x);

/// e^x K_r(x). May overflow for large orders at small x; use
/// log_bessel_k in that regime.
double bessel_k_scaled(double order, double x);

/// Scaled K_0, K_1, K_2 at a common argument from a single seed
/// evaluation plus one recurrence step. Used by the EM posterior moments
/// which need the ratios K0/K1 and K2/K1.
void bessel_k012_scaled(double x, double& k0, double& k1, double& k2);

/// log K at the three consecutive orders (a-1, a, a+1) where a = |order|,
/// sharing one evaluation. Requires |order| >= 1.
void log_bessel_k_triplet(double order, double x, double& lo, double& mid,
                          double& hi);

}  // namespace msgh
