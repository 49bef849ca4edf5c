#include "msgh/nig_em.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "msgh/bessel.hpp"
#include "msgh/errors.hpp"
#include "msgh/rng.hpp"

namespace msgh {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSpikeGuard = 1e-12;

// Working parameterization mirroring the multiple scaled fit:
// Sigma_tilde = delta^2 Sigma (unconstrained SPD), beta_r = Sigma_tilde beta,
// gamma_tilde = delta gamma; the weight prior becomes IG(gamma_tilde, 1).
struct NigTilde {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    Eigen::VectorXd beta_r;
    double gamma = 1.0;
};

struct NigStats {
    Eigen::VectorXd s, t, loglik;  // N
};

NigStats nig_estep(const Eigen::MatrixXd& data, const NigTilde& tilde)
{
    const Eigen::Index n = data.rows();
    const int m = static_cast<int>(data.cols());
    Eigen::LLT<Eigen::MatrixXd> llt(tilde.sigma);
    if (llt.info() != Eigen::Success)
        throw degenerate_data_error("nig fit: scale matrix lost definiteness");
    const double logdet =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const Eigen::VectorXd si_beta = llt.solve(tilde.beta_r);  // = beta
    const double alpha2 = tilde.gamma * tilde.gamma + tilde.beta_r.dot(si_beta);
    const double alpha = std::sqrt(alpha2);
    const double order = -0.5 * (m + 1);
    const double half_m1 = 0.5 * (m + 1);
    const double base = -0.5 * logdet - 0.5 * (m - 1) * std::log(2.0) +
                        tilde.gamma + half_m1 * std::log(alpha / kPi);

    NigStats st;
    st.s.resize(n);
    st.t.resize(n);
    st.loglik.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd r = data.row(i).transpose() - tilde.mu;
        const double maham = r.dot(llt.solve(r));
        const double phi = std::sqrt(1.0 + maham);
        const double z = std::max(phi * alpha, kSpikeGuard);
        // posterior GIG(-(M+1)/2, alpha, phi): E[W], E[1/W]
        double lk_lo, lk_mid, lk_hi;  // orders |nu|-1, |nu|, |nu|+1
        log_bessel_k_triplet(order, z, lk_lo, lk_mid, lk_hi);
        // |nu| = (M+1)/2; K_{nu+1} = K_{|nu|-1}, K_{nu-1} = K_{|nu|+1}
        st.s[i] = phi / alpha * std::exp(lk_lo - lk_mid);
        st.t[i] = alpha / phi * std::exp(lk_hi - lk_mid);
        st.loglik[i] =
            base + r.dot(si_beta) - half_m1 * std::log(phi) + lk_mid;
    }
    return st;
}

void nig_mstep(const Eigen::MatrixXd& data, const NigStats& stats,
               const Eigen::VectorXd& w, NigTilde& tilde)
{
    const Eigen::Index nrows = data.rows();
    const int m = static_cast<int>(data.cols());
    const double n = w.sum();
    const Eigen::VectorXd ws = w.cwiseProduct(stats.s);
    const Eigen::VectorXd wt = w.cwiseProduct(stats.t);
    const double sw = ws.sum();
    const double tw = wt.sum();
    const Eigen::VectorXd y1 = data.transpose() * w;
    const Eigen::VectorXd ty = data.transpose() * wt;

    // joint (mu, beta) stationary point, scalar denominators per the same
    // Jensen argument as the per-coordinate multiple scaled update
    const double den = n * n / sw - tw;
    Eigen::VectorXd mu, beta_r;
    if (std::abs(den) < 1e-12 * (n * n / sw + tw)) {
        mu = ty / tw;
        beta_r = Eigen::VectorXd::Zero(m);
    } else {
        mu = (n / sw * y1 - ty) / den;
        beta_r = (y1 - n * mu) / sw;
    }

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < nrows; ++i) {
        const Eigen::VectorXd r = data.row(i).transpose() - mu;
        scatter += wt[i] * r * r.transpose();
        scatter -= w[i] * (r * beta_r.transpose() + beta_r * r.transpose());
    }
    scatter += sw * beta_r * beta_r.transpose();
    tilde.mu = mu;
    tilde.beta_r = beta_r;
    tilde.sigma = scatter / n;
    tilde.gamma = n / sw;
}

GhParams nig_back_transform(const NigTilde& tilde)
{
    const int m = static_cast<int>(tilde.mu.size());
    Eigen::LLT<Eigen::MatrixXd> llt(tilde.sigma);
    if (llt.info() != Eigen::Success)
        throw degenerate_data_error("nig fit: scale matrix lost definiteness");
    const double logdet =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    GhParams p;
    p.delta = std::exp(logdet / (2.0 * m));
    p.Sigma = tilde.sigma / (p.delta * p.delta);
    p.mu = tilde.mu;
    p.beta = llt.solve(tilde.beta_r);
    p.gamma = tilde.gamma / p.delta;
    p.lambda = -0.5;
    return p;
}

NigTilde nig_forward_transform(const GhParams& p)
{
    NigTilde tilde;
    tilde.mu = p.mu;
    tilde.sigma = p.delta * p.delta * p.Sigma;
    tilde.beta_r = tilde.sigma * p.beta;
    tilde.gamma = p.delta * p.gamma;
    return tilde;
}

struct NigRun {
    NigFitReport report;
    bool ok = false;
};

NigRun nig_run_em(const Eigen::MatrixXd& data, int k, const EmConfig& config,
                  const MixtureModel& init)
{
    const Eigen::Index n = data.rows();
    const int m = static_cast<int>(data.cols());
    std::vector<NigTilde> tilde;
    tilde.reserve(k);
    for (const auto& comp : init.components) {
        GhParams g;
        g.mu = comp.mu;
        g.Sigma = comp.D * comp.A.asDiagonal() * comp.D.transpose();
        g.beta = Eigen::VectorXd::Zero(m);
        g.gamma = 1.0;
        g.delta = 1.0;
        g.lambda = -0.5;
        tilde.push_back(nig_forward_transform(g));
    }
    Eigen::VectorXd pi = init.pi;

    NigFitReport report;
    Eigen::MatrixXd tau(n, k);
    std::vector<NigStats> stats(k);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < config.max_iter; ++iter) {
        Eigen::MatrixXd logd(n, k);
        for (int c = 0; c < k; ++c) {
            stats[c] = nig_estep(data, tilde[c]);
            logd.col(c) = stats[c].loglik.array() + std::log(pi[c]);
        }
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double mx = logd.row(i).maxCoeff();
            const Eigen::ArrayXd e = (logd.row(i).array() - mx).exp();
            const double sum = e.sum();
            tau.row(i) = (e / sum).matrix();
            ll += mx + std::log(sum);
        }
        report.loglik_trace.push_back(ll);
        if (std::abs(ll - prev_ll) < config.tol * (1.0 + std::abs(prev_ll))) {
            report.converged = true;
            break;
        }
        prev_ll = ll;
        if (iter + 1 == config.max_iter) break;

        const Eigen::VectorXd nk = tau.colwise().sum();
        if (nk.minCoeff() < m + 1)
            throw empty_component_error("nig EM: component collapsed");
        pi = nk / static_cast<double>(n);
        for (int c = 0; c < k; ++c)
            nig_mstep(data, stats[c], tau.col(c), tilde[c]);
    }

    report.n_iter = static_cast<int>(report.loglik_trace.size());
    report.model.pi = pi;
    for (int c = 0; c < k; ++c)
        report.model.components.push_back(nig_back_transform(tilde[c]));
    report.tau = tau;
    report.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        tau.row(i).maxCoeff(&arg);
        report.labels[i] = arg;
    }
    report.bic =
        bic(report.loglik(), nig_param_count(m, k), static_cast<size_t>(n));
    return {std::move(report), true};
}

}  // namespace

NigFitReport fit_nig_baseline(const Eigen::MatrixXd& data, int k,
                              const EmConfig& config)
{
    const Eigen::Index n = data.rows();
    const int m = static_cast<int>(data.cols());
    if (k < 1) throw std::invalid_argument("fit_nig_baseline: K must be >= 1");
    if (n <= m + 1)
        throw std::invalid_argument("fit_nig_baseline: need N > M + 1");
    if (!data.allFinite())
        throw std::invalid_argument("fit_nig_baseline: data must be finite");

    const int attempts = std::max(config.restarts, 1);
    NigRun best;
    bool saw_degenerate = false;
    for (int a = 0; a < attempts; ++a) {
        NigRun run;
        try {
            const MixtureModel init = init_partition(
                data, k, config.init, config.trim_fraction, config.seed + a);
            run = nig_run_em(data, k, config, init);
        } catch (const empty_component_error&) {
            continue;
        } catch (const degenerate_data_error&) {
            saw_degenerate = true;
            continue;
        }
        if (!best.ok || run.report.loglik() > best.report.loglik())
            best = std::move(run);
    }
    if (!best.ok) {
        if (saw_degenerate)
            throw degenerate_data_error("fit_nig_baseline: degenerate data");
        throw empty_component_error(
            "fit_nig_baseline: every restart lost a component");
    }
    return best.report;
}

double nig_mixture_loglik(const Eigen::MatrixXd& data,
                          const NigMixtureModel& model)
{
    const Eigen::Index n = data.rows();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        total += nig_mixture_log_density(data.row(i), model);
    return total;
}

double nig_mixture_log_density(const Eigen::VectorXd& y,
                               const NigMixtureModel& model)
{
    const int k = model.k();
    Eigen::VectorXd row(k);
    for (int c = 0; c < k; ++c)
        row[c] = std::log(model.pi[c]) +
                 gh_log_density(y, model.components[c]);
    const double mx = row.maxCoeff();
    return mx + std::log((row.array() - mx).exp().sum());
}

Eigen::MatrixXd nig_responsibilities(const Eigen::MatrixXd& data,
                                     const NigMixtureModel& model)
{
    const Eigen::Index n = data.rows();
    const int k = model.k();
    Eigen::MatrixXd logd(n, k);
    for (int c = 0; c < k; ++c)
        for (Eigen::Index i = 0; i < n; ++i)
            logd(i, c) = std::log(model.pi[c]) +
                         gh_log_density(data.row(i), model.components[c]);
    Eigen::MatrixXd tau(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mx = logd.row(i).maxCoeff();
        const Eigen::ArrayXd e = (logd.row(i).array() - mx).exp();
        tau.row(i) = (e / e.sum()).matrix();
    }
    return tau;
}

Eigen::MatrixXd nig_mixture_sample(const NigMixtureModel& model,
                                   std::size_t n, std::uint64_t seed)
{
    const int k = model.k();
    const int m = model.dim();
    Rng rng(seed);
    Eigen::MatrixXd out(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        int c = 0;
        double acc = 0.0;
        for (; c < k - 1; ++c) {
            acc += model.pi[c];
            if (u < acc) break;
        }
        // one component draw; a dedicated seed keeps the per-row streams
        // independent of component choice history
        const Eigen::MatrixXd row =
            gh_sample(model.components[c], 1,
                      seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
        out.row(i) = row.row(0);
    }
    return out;
}

}  // namespace msgh
