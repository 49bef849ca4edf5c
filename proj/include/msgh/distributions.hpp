#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace msgh {

/// Parameters of a multiple scaled GH distribution: location mu,
/// orientation D (orthogonal, columns are the scale eigen-directions),
/// per-direction shape A (positive, canonical form has prod A = 1),
/// skewness beta, per-direction GIG index lambda and concentration gamma,
/// and a shared scale delta.
struct MsghParams {
    Eigen::VectorXd mu;
    Eigen::MatrixXd D;
    Eigen::VectorXd A;
    Eigen::VectorXd beta;
    Eigen::VectorXd lambda;
    Eigen::VectorXd gamma;
    double delta = 1.0;

    int dim() const { return static_cast<int>(mu.size()); }
    bool is_nig() const { return (lambda.array() == -0.5).all(); }

    /// Throws std::invalid_argument on inconsistent sizes, non-orthogonal D
    /// (tolerance 1e-10) or non-positive A, gamma, delta.
    void validate() const;

    /// NIG-order (all lambda = -1/2) parameter set.
    static MsghParams msnig(Eigen::VectorXd mu, Eigen::MatrixXd D,
                            Eigen::VectorXd A, Eigen::VectorXd beta,
                            Eigen::VectorXd gamma, double delta);
};

/// Standard (single weight) GH distribution with a full scale matrix.
struct GhParams {
    Eigen::VectorXd mu;
    Eigen::MatrixXd Sigma;
    Eigen::VectorXd beta;
    double lambda = -0.5;
    double gamma = 1.0;
    double delta = 1.0;

    int dim() const { return static_cast<int>(mu.size()); }
    void validate() const;
};

/// 2-D rotation with angle xi: D11 = D22 = cos xi, D21 = -D12 = sin xi.
Eigen::Matrix2d rotation2d(double xi);

/// Build MsghParams from a full scale matrix via its eigendecomposition
/// (eigenvalues descending, column signs fixed deterministically).
MsghParams msgh_from_sigma(const Eigen::VectorXd& mu,
                           const Eigen::MatrixXd& Sigma,
                           const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& lambda,
                           const Eigen::VectorXd& gamma, double delta);

double msgh_log_density(const Eigen::VectorXd& y, const MsghParams& p);

/// NIG-order closed form; agrees with msgh_log_density at lambda = -1/2.
double msnig_log_density(const Eigen::VectorXd& y, const MsghParams& p);

double gh_log_density(const Eigen::VectorXd& y, const GhParams& p);

/// n i.i.d. rows drawn via the hierarchical representation
/// Y = mu + D diag(W) A D' beta + D A^(1/2) (X_m sqrt(W_m)).
Eigen::MatrixXd msgh_sample(const MsghParams& p, std::size_t n,
                            std::uint64_t seed);

Eigen::MatrixXd gh_sample(const GhParams& p, std::size_t n,
                          std::uint64_t seed);

Eigen::VectorXd msgh_mean(const MsghParams& p);
Eigen::MatrixXd msgh_cov(const MsghParams& p);

/// Characteristic function at t; NIG orders only.
std::complex<double> msgh_cf(const Eigen::VectorXd& t, const MsghParams& p);

/// Marginal density of the sub-vector picked by indices (one or two
/// dimensions) at each of the given points, by numerical inversion of the
/// marginal characteristic function. NIG orders only.
std::vector<double> marginal_pdf(const MsghParams& p,
                                 const std::vector<int>& indices,
                                 const std::vector<Eigen::VectorXd>& points);

/// Identifiability canonicalization: rescales (A, gamma, delta) so that all
/// per-dimension deltas collapse to one shared value and prod A = 1, leaving
/// the density pointwise unchanged.
MsghParams canonicalize(const Eigen::VectorXd& mu, const Eigen::MatrixXd& D,
                        const Eigen::VectorXd& A, const Eigen::VectorXd& beta,
                        const Eigen::VectorXd& lambda,
                        const Eigen::VectorXd& gamma,
                        const Eigen::VectorXd& delta);

/// Same with an already-shared delta, arbitrary |A|.
MsghParams canonicalize(const MsghParams& p);

}  // namespace msgh
