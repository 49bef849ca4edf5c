#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "msgh/distributions.hpp"
#include "msgh/em.hpp"

namespace msgh {

/// Mixture of standard (single weight) NIG distributions, the baseline the
/// multiple scaled family is compared against. Components carry a full
/// scale matrix with |Sigma| = 1 and scalar gamma.
struct NigMixtureModel {
    Eigen::VectorXd pi;
    std::vector<GhParams> components;

    int dim() const
    {
        return components.empty() ? 0 : components.front().dim();
    }
    int k() const { return static_cast<int>(components.size()); }
};

struct NigFitReport {
    NigMixtureModel model;
    std::vector<double> loglik_trace;
    int n_iter = 0;
    bool converged = false;
    double bic = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> labels;
    Eigen::MatrixXd tau;

    double loglik() const
    {
        return loglik_trace.empty()
                   ? -std::numeric_limits<double>::infinity()
                   : loglik_trace.back();
    }
};

/// EM for the standard NIG mixture. The weight posterior given y is GIG of
/// order -(M+1)/2; updates follow the same conditional maximizations as the
/// multiple scaled fit with a full-matrix shape step.
NigFitReport fit_nig_baseline(const Eigen::MatrixXd& data, int k,
                              const EmConfig& config);

double nig_mixture_loglik(const Eigen::MatrixXd& data,
                          const NigMixtureModel& model);

double nig_mixture_log_density(const Eigen::VectorXd& y,
                               const NigMixtureModel& model);

Eigen::MatrixXd nig_responsibilities(const Eigen::MatrixXd& data,
                                     const NigMixtureModel& model);

Eigen::MatrixXd nig_mixture_sample(const NigMixtureModel& model,
                                   std::size_t n, std::uint64_t seed);

}  // namespace msgh
