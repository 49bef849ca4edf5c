#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "msgh/distributions.hpp"

namespace msgh {

/// Working EM parameterization with the |A| = 1 constraint absorbed:
/// A_tilde = delta^2 A, beta_tilde = D A_tilde D' beta,
/// gamma_tilde = delta gamma. The weight prior becomes IG(gamma_tilde_m, 1).
struct TildeParams {
    Eigen::VectorXd mu;
    Eigen::MatrixXd D;
    Eigen::VectorXd A_tilde;
    Eigen::VectorXd beta_tilde;
    Eigen::VectorXd gamma_tilde;

    int dim() const { return static_cast<int>(mu.size()); }
};

/// Per-observation conditional weight moments for one component:
/// s_im = E[W_im | y_i], t_im = E[W_im^-1 | y_i], plus the posterior GIG
/// arguments phi_im and alpha_hat_m they derive from.
struct EStepStats {
    Eigen::MatrixXd s;          // N x M
    Eigen::MatrixXd t;          // N x M
    Eigen::MatrixXd phi;        // N x M
    Eigen::VectorXd alpha_hat;  // M
    Eigen::VectorXd loglik;     // N, per-observation log density
};

enum class InitStrategy { kRandomPartition, kKmeans, kTrimmedKmeans };
enum class GammaConstraint { kFree, kShared, kGroups };

struct EmConfig {
    double tol = 1e-8;
    int max_iter = 2000;
    int restarts = 10;
    InitStrategy init = InitStrategy::kTrimmedKmeans;
    double trim_fraction = 0.1;
    GammaConstraint gamma_constraint = GammaConstraint::kFree;
    std::vector<int> gamma_groups;  // group id per dimension when kGroups
    std::uint64_t seed = 0;
    int threads = 1;
};

struct MixtureModel {
    Eigen::VectorXd pi;
    std::vector<MsghParams> components;

    int dim() const
    {
        return components.empty() ? 0 : components.front().dim();
    }
    int k() const { return static_cast<int>(components.size()); }
};

struct FitReport {
    MixtureModel model;
    std::vector<double> loglik_trace;
    int n_iter = 0;
    bool converged = false;
    double bic = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> labels;
    Eigen::MatrixXd tau;  // final responsibilities, N x K
    int location_fallbacks = 0;  // degenerate-denominator events

    double loglik() const
    {
        return loglik_trace.empty()
                   ? -std::numeric_limits<double>::infinity()
                   : loglik_trace.back();
    }
};

// --- single-distribution EM building blocks ------------------------------

EStepStats e_step(const Eigen::MatrixXd& data, const TildeParams& tilde);

/// Joint exact minimizer of the conditional objective in (mu, beta_tilde)
/// at fixed D and A_tilde. Returns {mu, beta_tilde}.
std::pair<Eigen::VectorXd, Eigen::VectorXd> update_location_skew(
    const Eigen::MatrixXd& data, const EStepStats& stats,
    const Eigen::MatrixXd& D);

/// Flury-Gautschi pair sweeps from D_init; never increases the trace
/// objective. Column signs are fixed deterministically.
Eigen::MatrixXd update_orientation(const Eigen::MatrixXd& data,
                                   const EStepStats& stats,
                                   const Eigen::VectorXd& mu,
                                   const Eigen::VectorXd& beta_tilde,
                                   const Eigen::VectorXd& A_tilde,
                                   const Eigen::MatrixXd& D_init);

Eigen::VectorXd update_shape(const Eigen::MatrixXd& data,
                             const EStepStats& stats, const Eigen::MatrixXd& D,
                             const Eigen::VectorXd& mu,
                             const Eigen::VectorXd& beta_tilde);

Eigen::VectorXd update_gamma(const EStepStats& stats,
                             GammaConstraint constraint,
                             const std::vector<int>& groups = {});

MsghParams back_transform(const TildeParams& tilde);
TildeParams forward_transform(const MsghParams& p);

/// The trace objective f(D) minimized by update_orientation, exposed for
/// its descent property.
double orientation_objective(const Eigen::MatrixXd& data,
                             const EStepStats& stats,
                             const Eigen::VectorXd& mu,
                             const Eigen::VectorXd& beta_tilde,
                             const Eigen::VectorXd& A_tilde,
                             const Eigen::MatrixXd& D);

// --- fits -----------------------------------------------------------------

/// Single MSNIG maximum likelihood fit; identical to fit_mixture with K=1.
FitReport fit_msnig(const Eigen::MatrixXd& data, const EmConfig& config);

FitReport fit_mixture(const Eigen::MatrixXd& data, int k,
                      const EmConfig& config);

/// Posterior component memberships tau_ik under the model, rows sum to 1.
Eigen::MatrixXd responsibilities(const Eigen::MatrixXd& data,
                                 const MixtureModel& model);

/// Log-likelihood of data under an MSNIG mixture.
double mixture_loglik(const Eigen::MatrixXd& data, const MixtureModel& model);

/// Mixture log density at a single point.
double mixture_log_density(const Eigen::VectorXd& y, const MixtureModel& model);

/// n rows drawn from the mixture (component by pi, then the hierarchical
/// representation).
Eigen::MatrixXd mixture_sample(const MixtureModel& model, std::size_t n,
                               std::uint64_t seed);

double bic(double loglik, int n_params, std::size_t n);
int msnig_param_count(int dims, int k);
int nig_param_count(int dims, int k);

MixtureModel init_partition(const Eigen::MatrixXd& data, int k,
                            InitStrategy strategy, double trim_fraction,
                            std::uint64_t seed);

}  // namespace msgh
