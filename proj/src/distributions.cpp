#include "msgh/distributions.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "msgh/bessel.hpp"
#include "msgh/errors.hpp"
#include "msgh/gig.hpp"
#include "msgh/quadrature.hpp"
#include "msgh/rng.hpp"

namespace msgh {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2Pi = 1.83787706640934548356;
constexpr double kOrthoTol = 1e-10;

void check_orthogonal(const Eigen::MatrixXd& D)
{
    const int m = static_cast<int>(D.rows());
    if (D.cols() != m) throw std::invalid_argument("D must be square");
    const double err =
        (D.transpose() * D - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
    if (err > kOrthoTol)
        throw std::invalid_argument("D is not orthogonal (D'D deviates from I)");
}

}  // namespace

void MsghParams::validate() const
{
    const int m = dim();
    if (m < 1) throw std::invalid_argument("MsghParams: dimension must be >= 1");
    if (D.rows() != m || A.size() != m || beta.size() != m ||
        lambda.size() != m || gamma.size() != m)
        throw std::invalid_argument("MsghParams: inconsistent field sizes");
    check_orthogonal(D);
    if (!(A.array() > 0.0).all())
        throw std::invalid_argument("MsghParams: A entries must be positive");
    if (!(gamma.array() > 0.0).all() || !(delta > 0.0))
        throw std::invalid_argument("MsghParams: gamma and delta must be positive");
}

MsghParams MsghParams::msnig(Eigen::VectorXd mu, Eigen::MatrixXd D,
                             Eigen::VectorXd A, Eigen::VectorXd beta,
                             Eigen::VectorXd gamma, double delta)
{
    MsghParams p;
    p.lambda = Eigen::VectorXd::Constant(mu.size(), -0.5);
    p.mu = std::move(mu);
    p.D = std::move(D);
    p.A = std::move(A);
    p.beta = std::move(beta);
    p.gamma = std::move(gamma);
    p.delta = delta;
    p.validate();
    return p;
}

void GhParams::validate() const
{
    const int m = dim();
    if (m < 1) throw std::invalid_argument("GhParams: dimension must be >= 1");
    if (Sigma.rows() != m || Sigma.cols() != m || beta.size() != m)
        throw std::invalid_argument("GhParams: inconsistent field sizes");
    if (!(gamma > 0.0) || !(delta > 0.0))
        throw std::invalid_argument("GhParams: gamma and delta must be positive");
}

Eigen::Matrix2d rotation2d(double xi)
{
    Eigen::Matrix2d d;
    d << std::cos(xi), -std::sin(xi), std::sin(xi), std::cos(xi);
    return d;
}

MsghParams msgh_from_sigma(const Eigen::VectorXd& mu,
                           const Eigen::MatrixXd& Sigma,
                           const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& lambda,
                           const Eigen::VectorXd& gamma, double delta)
{
    const int m = static_cast<int>(mu.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Sigma);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("msgh_from_sigma: Sigma not positive definite");
    // descending eigenvalues, deterministic column signs
    MsghParams p;
    p.mu = mu;
    p.beta = beta;
    p.lambda = lambda;
    p.gamma = gamma;
    p.delta = delta;
    p.A.resize(m);
    p.D.resize(m, m);
    for (int j = 0; j < m; ++j) {
        p.A[j] = eig.eigenvalues()[m - 1 - j];
        p.D.col(j) = eig.eigenvectors().col(m - 1 - j);
        int arg = 0;
        p.D.col(j).cwiseAbs().maxCoeff(&arg);
        if (p.D(arg, j) < 0.0) p.D.col(j) = -p.D.col(j);
    }
    p.validate();
    return p;
}

double msgh_log_density(const Eigen::VectorXd& y, const MsghParams& p)
{
    const int m = p.dim();
    if (y.size() != m)
        throw std::invalid_argument("msgh_log_density: dimension mismatch");
    const Eigen::VectorXd u = p.D.transpose() * (y - p.mu);
    const Eigen::VectorXd b = p.D.transpose() * p.beta;
    double out = 0.0;
    for (int j = 0; j < m; ++j) {
        const double alpha =
            std::sqrt(p.gamma[j] * p.gamma[j] + p.A[j] * b[j] * b[j]);
        const double q = std::sqrt(p.delta * p.delta + u[j] * u[j] / p.A[j]);
        out += -0.5 * kLog2Pi - 0.5 * std::log(p.A[j]) +
               p.lambda[j] * (std::log(p.gamma[j]) - std::log(p.delta)) +
               (p.lambda[j] - 0.5) * (std::log(q) - std::log(alpha)) +
               log_bessel_k(p.lambda[j] - 0.5, q * alpha) -
               log_bessel_k(p.lambda[j], p.delta * p.gamma[j]) + u[j] * b[j];
    }
    return out;
}

double msnig_log_density(const Eigen::VectorXd& y, const MsghParams& p)
{
    if (!p.is_nig())
        throw unsupported_order_error("msnig_log_density: all lambda must be -1/2");
    const int m = p.dim();
    if (y.size() != m)
        throw std::invalid_argument("msnig_log_density: dimension mismatch");
    const Eigen::VectorXd u = p.D.transpose() * (y - p.mu);
    const Eigen::VectorXd b = p.D.transpose() * p.beta;
    const double logdelta = std::log(p.delta);
    double out = 0.0;
    for (int j = 0; j < m; ++j) {
        const double alpha =
            std::sqrt(p.gamma[j] * p.gamma[j] + p.A[j] * b[j] * b[j]);
        const double q = std::sqrt(p.delta * p.delta + u[j] * u[j] / p.A[j]);
        // the exp(delta gamma) prefactor is folded into the log Bessel term
        out += logdelta - std::log(kPi) - 0.5 * std::log(p.A[j]) +
               p.delta * p.gamma[j] + u[j] * b[j] + std::log(alpha) -
               std::log(q) + log_bessel_k(1.0, alpha * q);
    }
    return out;
}

double gh_log_density(const Eigen::VectorXd& y, const GhParams& p)
{
    const int m = p.dim();
    if (y.size() != m)
        throw std::invalid_argument("gh_log_density: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(p.Sigma);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("gh_log_density: Sigma not positive definite");
    const Eigen::VectorXd r = y - p.mu;
    const double maham = r.dot(llt.solve(r));
    const double logdet =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double q = std::sqrt(p.delta * p.delta + maham);
    const double alpha =
        std::sqrt(p.gamma * p.gamma + p.beta.dot(p.Sigma * p.beta));
    const double half_m = 0.5 * m;
    return -half_m * kLog2Pi - 0.5 * logdet +
           p.lambda * (std::log(p.gamma) - std::log(p.delta)) +
           (p.lambda - half_m) * (std::log(q) - std::log(alpha)) +
           log_bessel_k(p.lambda - half_m, q * alpha) -
           log_bessel_k(p.lambda, p.delta * p.gamma) + p.beta.dot(r);
}

Eigen::MatrixXd msgh_sample(const MsghParams& p, std::size_t n,
                            std::uint64_t seed)
{
    p.validate();
    const int m = p.dim();
    std::vector<GigSampler> samplers;
    samplers.reserve(m);
    for (int j = 0; j < m; ++j)
        samplers.emplace_back(GigParams{p.lambda[j], p.gamma[j], p.delta});
    const Eigen::VectorXd b = p.D.transpose() * p.beta;
    Rng rng(seed);
    Eigen::MatrixXd out(n, m);
    Eigen::VectorXd v(m);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const double w = samplers[j].draw(rng);
            v[j] = w * p.A[j] * b[j] + std::sqrt(p.A[j] * w) * rng.normal();
        }
        out.row(i) = (p.mu + p.D * v).transpose();
    }
    return out;
}

Eigen::MatrixXd gh_sample(const GhParams& p, std::size_t n, std::uint64_t seed)
{
    p.validate();
    const int m = p.dim();
    Eigen::LLT<Eigen::MatrixXd> llt(p.Sigma);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("gh_sample: Sigma not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::VectorXd sb = p.Sigma * p.beta;
    GigSampler sampler(GigParams{p.lambda, p.gamma, p.delta});
    Rng rng(seed);
    Eigen::MatrixXd out(n, m);
    Eigen::VectorXd x(m);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = sampler.draw(rng);
        for (int j = 0; j < m; ++j) x[j] = rng.normal();
        out.row(i) = (p.mu + w * sb + std::sqrt(w) * (L * x)).transpose();
    }
    return out;
}

namespace {

// E[W_m] and Var[W_m] for the per-direction GIG weights.
void weight_moments(const MsghParams& p, int j, double& mean, double& var)
{
    const double dg = p.delta * p.gamma[j];
    const double ratio = p.delta / p.gamma[j];
    if (p.lambda[j] == -0.5) {
        mean = ratio;
        var = ratio * ratio / dg;
        return;
    }
    const double lk0 = log_bessel_k(p.lambda[j], dg);
    const double r1 = std::exp(log_bessel_k(p.lambda[j] + 1.0, dg) - lk0);
    const double r2 = std::exp(log_bessel_k(p.lambda[j] + 2.0, dg) - lk0);
    mean = ratio * r1;
    var = ratio * ratio * (r2 - r1 * r1);
}

}  // namespace

Eigen::VectorXd msgh_mean(const MsghParams& p)
{
    p.validate();
    const int m = p.dim();
    const Eigen::VectorXd b = p.D.transpose() * p.beta;
    Eigen::VectorXd v(m);
    for (int j = 0; j < m; ++j) {
        double mean, var;
        weight_moments(p, j, mean, var);
        v[j] = mean * p.A[j] * b[j];
    }
    return p.mu + p.D * v;
}

Eigen::MatrixXd msgh_cov(const MsghParams& p)
{
    p.validate();
    const int m = p.dim();
    const Eigen::VectorXd b = p.D.transpose() * p.beta;
    Eigen::VectorXd v(m);
    for (int j = 0; j < m; ++j) {
        double mean, var;
        weight_moments(p, j, mean, var);
        v[j] = p.A[j] * mean + p.A[j] * p.A[j] * b[j] * b[j] * var;
    }
    return p.D * v.asDiagonal() * p.D.transpose();
}

namespace {

// log characteristic function of the marginal over `indices` (all of p for
// the full vector), NIG orders. z = G_I' t with G = D A^(1/2).
struct MarginalCf {
    Eigen::MatrixXd Gi;  // |I| x M, rows of G for the kept dimensions
    Eigen::VectorXd c;   // A^(1/2) D' beta
    Eigen::VectorXd mui; // kept entries of mu
    Eigen::VectorXd gamma;
    double delta;

    std::complex<double> log_cf(const Eigen::VectorXd& t) const
    {
        const Eigen::VectorXd z = Gi.transpose() * t;
        std::complex<double> out(0.0, t.dot(mui));
        for (int d = 0; d < z.size(); ++d) {
            const std::complex<double> arg(
                gamma[d] * gamma[d] + z[d] * z[d], -2.0 * z[d] * c[d]);
            out += delta * gamma[d] - delta * std::sqrt(arg);
        }
        return out;
    }

    double log_magnitude(const Eigen::VectorXd& t) const
    {
        return log_cf(t).real();
    }
};

MarginalCf make_marginal_cf(const MsghParams& p, const std::vector<int>& idx)
{
    MarginalCf cf;
    const Eigen::MatrixXd G = p.D * p.A.cwiseSqrt().asDiagonal();
    cf.Gi.resize(idx.size(), p.dim());
    cf.mui.resize(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        cf.Gi.row(j) = G.row(idx[j]);
        cf.mui[j] = p.mu[idx[j]];
    }
    cf.c = p.A.cwiseSqrt().asDiagonal() * (p.D.transpose() * p.beta);
    cf.gamma = p.gamma;
    cf.delta = p.delta;
    return cf;
}

// Radius beyond which |cf| < exp(cutoff) along +/- the given axis.
double truncation_radius(const MarginalCf& cf, int axis, int dims,
                         double cutoff)
{
    Eigen::VectorXd t = Eigen::VectorXd::Zero(dims);
    double r = 1.0;
    for (int i = 0; i < 60; ++i) {
        t[axis] = r;
        const double up = cf.log_magnitude(t);
        t[axis] = -r;
        const double dn = cf.log_magnitude(t);
        if (std::max(up, dn) < cutoff) break;
        r *= 2.0;
    }
    return r;
}

}  // namespace

std::complex<double> msgh_cf(const Eigen::VectorXd& t, const MsghParams& p)
{
    p.validate();
    if (!p.is_nig())
        throw unsupported_order_error("msgh_cf: only NIG orders supported");
    if (t.size() != p.dim())
        throw std::invalid_argument("msgh_cf: dimension mismatch");
    std::vector<int> all(p.dim());
    for (int j = 0; j < p.dim(); ++j) all[j] = j;
    return std::exp(make_marginal_cf(p, all).log_cf(t));
}

std::vector<double> marginal_pdf(const MsghParams& p,
                                 const std::vector<int>& indices,
                                 const std::vector<Eigen::VectorXd>& points)
{
    p.validate();
    if (!p.is_nig())
        throw unsupported_order_error("marginal_pdf: only NIG orders supported");
    if (indices.empty() || indices.size() > 2)
        throw unsupported_order_error(
            "marginal_pdf: only 1- and 2-dimensional marginals supported");
    for (int i : indices)
        if (i < 0 || i >= p.dim())
            throw std::invalid_argument("marginal_pdf: index out of range");

    const MarginalCf cf = make_marginal_cf(p, indices);
    const int dims = static_cast<int>(indices.size());
    std::vector<double> out;
    out.reserve(points.size());

    if (dims == 1) {
        const double radius = truncation_radius(cf, 0, 1, -40.0);
        for (const auto& y : points) {
            if (y.size() != 1)
                throw std::invalid_argument("marginal_pdf: point dimension mismatch");
            const double y0 = y[0];
            const auto integrand = [&](double t) {
                Eigen::VectorXd tv(1);
                tv[0] = t;
                const std::complex<double> val =
                    std::exp(cf.log_cf(tv) -
                             std::complex<double>(0.0, t * y0));
                return val.real();
            };
            const double v =
                integrate_segmented(integrand, 0.0, radius, 16, 1e-10, 1e-10) /
                kPi;
            out.push_back(std::max(v, 0.0));
        }
        return out;
    }

    const double r1 = truncation_radius(cf, 0, 2, -36.0);
    const double r2 = truncation_radius(cf, 1, 2, -36.0);
    for (const auto& y : points) {
        if (y.size() != 2)
            throw std::invalid_argument("marginal_pdf: point dimension mismatch");
        const auto inner = [&](double t2) {
            const auto f = [&](double t1) {
                Eigen::VectorXd tv(2);
                tv << t1, t2;
                const std::complex<double> val = std::exp(
                    cf.log_cf(tv) -
                    std::complex<double>(0.0, t1 * y[0] + t2 * y[1]));
                return val.real();
            };
            return integrate_segmented(f, -r1, r1, 8, 1e-8, 1e-8);
        };
        const double v =
            integrate_segmented(inner, 0.0, r2, 8, 1e-7, 1e-7) /
            (2.0 * kPi * kPi);
        out.push_back(std::max(v, 0.0));
    }
    return out;
}

MsghParams canonicalize(const Eigen::VectorXd& mu, const Eigen::MatrixXd& D,
                        const Eigen::VectorXd& A, const Eigen::VectorXd& beta,
                        const Eigen::VectorXd& lambda,
                        const Eigen::VectorXd& gamma,
                        const Eigen::VectorXd& delta)
{
    const int m = static_cast<int>(mu.size());
    if (delta.size() != m || A.size() != m || gamma.size() != m)
        throw std::invalid_argument("canonicalize: inconsistent sizes");
    if (!(delta.array() > 0.0).all())
        throw std::invalid_argument("canonicalize: deltas must be positive");
    // shared delta making prod A' = 1 under A'_m = k_m^2 A_m, k_m = delta_m/delta
    const Eigen::ArrayXd log_delta = delta.array().log();
    const Eigen::ArrayXd log_a = A.array().log();
    const double log_shared = log_delta.mean() + 0.5 * log_a.mean();
    Eigen::ArrayXd log_a_new = log_a + 2.0 * (log_delta - log_shared);
    log_a_new -= log_a_new.mean();  // force prod A = 1 to rounding
    MsghParams p;
    p.mu = mu;
    p.D = D;
    p.beta = beta;
    p.lambda = lambda;
    p.A = log_a_new.exp().matrix();
    p.gamma = (gamma.array() * (log_delta - log_shared).exp()).matrix();
    p.delta = std::exp(log_shared);
    p.validate();
    return p;
}

MsghParams canonicalize(const MsghParams& p)
{
    p.validate();
    const Eigen::ArrayXd log_a = p.A.array().log();
    if (std::abs(log_a.mean()) < 1e-15) return p;  // already canonical
    return canonicalize(p.mu, p.D, p.A, p.beta, p.lambda, p.gamma,
                        Eigen::VectorXd::Constant(p.dim(), p.delta));
}

}  // namespace msgh
