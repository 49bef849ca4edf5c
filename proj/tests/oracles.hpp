#pragma once

// Independent reference computations the tests check the library against.
// Everything here goes through generic numerics (quadrature, direct
// minimization, counting) rather than the closed forms under test.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "msgh/gig.hpp"

namespace oracle {

/// log K_r(x) by Laplace-shifted adaptive quadrature of the integral
/// definition K_r(x) = 1/2 int_R exp(r t - x cosh t) dt.
double log_bessel_k(double r, double x);

/// Integral of f(w) exp(gig_log_pdf(w)) over (0, inf), with breakpoints
/// chosen from the kernel mode so narrow spikes are not missed.
double gig_expectation(const msgh::GigParams& p,
                       const std::function<double(double)>& f);

/// GIG cdf at each of the (sorted or not) points, by quadrature.
std::vector<double> gig_cdf(const msgh::GigParams& p,
                            const std::vector<double>& points);

/// Draws by inverting a finely tabulated quadrature cdf.
std::vector<double> gig_inverse_cdf_draws(const msgh::GigParams& p,
                                          std::size_t n, std::uint64_t seed);

/// One-sample Kolmogorov-Smirnov distance against a cdf callable.
double ks_distance(std::vector<double> sample,
                   const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Nelder-Mead minimizer; returns the best point found.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            Eigen::VectorXd start, double scale = 1.0,
                            int max_iter = 20000, double tol = 1e-13);

/// Golden-section minimizer on [a, b].
double golden_section(const std::function<double(double)>& f, double a,
                      double b, double tol = 1e-12);

/// Adjusted Rand index between two labelings.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

/// One finite-difference Newton step; polishes a smooth local optimum found
/// by a direct-search method to near machine precision.
Eigen::VectorXd newton_polish(const std::function<double(const Eigen::VectorXd&)>& f,
                              Eigen::VectorXd x, double h = 1e-4);

/// Mass of exp(logdens) over the plane, integrated in the rotated frame
/// y = center + axes u (axes orthogonal). The rectangle is found by
/// scanning the log density along each axis and verified on its edges.
double mass_2d(const std::function<double(const Eigen::VectorXd&)>& logdens,
               const Eigen::VectorXd& center, const Eigen::MatrixXd& axes);

}  // namespace oracle
