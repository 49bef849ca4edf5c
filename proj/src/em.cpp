#include "msgh/em.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "msgh/bessel.hpp"
#include "msgh/errors.hpp"
#include "msgh/rng.hpp"

namespace msgh {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSpikeGuard = 1e-12;  // floor for the Bessel argument

Eigen::VectorXd ones(Eigen::Index n) { return Eigen::VectorXd::Ones(n); }

// ---- E-step -------------------------------------------------------------

// Stats and per-observation log density for one component. The per-obs
// density in the tilde parameterization reuses phi and alpha_hat:
// each rotated coordinate is a 1-D NIG with delta = 1, q = phi_im.
EStepStats estep_impl(const Eigen::MatrixXd& data, const TildeParams& tilde)
{
    const Eigen::Index n = data.rows();
    const int m = tilde.dim();
    if (data.cols() != m) throw std::invalid_argument("e_step: dimension mismatch");
    EStepStats st;
    st.s.resize(n, m);
    st.t.resize(n, m);
    st.phi.resize(n, m);
    st.alpha_hat.resize(m);
    st.loglik = Eigen::VectorXd::Zero(n);

    const Eigen::MatrixXd u =
        (data.rowwise() - tilde.mu.transpose()) * tilde.D;  // [D'(y-mu)]_m
    const Eigen::VectorXd b = tilde.D.transpose() * tilde.beta_tilde;

    for (int j = 0; j < m; ++j) {
        const double at = tilde.A_tilde[j];
        const double gt = tilde.gamma_tilde[j];
        const double alpha = std::sqrt(gt * gt + b[j] * b[j] / at);
        st.alpha_hat[j] = alpha;
        const double base =
            -0.5 * std::log(at) + gt + std::log(alpha) - std::log(kPi);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = u(i, j);
            const double phi = std::sqrt(1.0 + v * v / at);
            st.phi(i, j) = phi;
            const double z = std::max(phi * alpha, kSpikeGuard);
            double k0, k1, k2;
            bessel_k012_scaled(z, k0, k1, k2);
            st.s(i, j) = phi / alpha * (k0 / k1);
            st.t(i, j) = alpha / phi * (k2 / k1);
            st.loglik[i] +=
                base + v * b[j] / at - std::log(phi) + std::log(k1) - z;
        }
    }
    return st;
}

// ---- M-step updates (tau-weighted; the single fit uses unit weights) -----

std::pair<Eigen::VectorXd, Eigen::VectorXd> location_skew_impl(
    const Eigen::MatrixXd& data, const EStepStats& stats,
    const Eigen::MatrixXd& D, const Eigen::VectorXd& w, int* fallbacks)
{
    const int m = static_cast<int>(D.rows());
    const double n = w.sum();
    const Eigen::MatrixXd u = data * D;  // [D'y_i]_m
    Eigen::VectorXd nu(m), b(m);
    for (int j = 0; j < m; ++j) {
        const double sw = w.dot(stats.s.col(j));
        const double tw = w.dot(stats.t.col(j));
        const double uw = w.dot(u.col(j));
        const double tu = w.dot(stats.t.col(j).cwiseProduct(u.col(j)));
        const double den = n * n / sw - tw;
        if (std::abs(den) < 1e-12 * (n * n / sw + tw)) {
            // Jensen equality case: fall back to the symmetric location
            // update and drop the skew term for this coordinate.
            nu[j] = tu / tw;
            b[j] = 0.0;
            if (fallbacks) ++*fallbacks;
            continue;
        }
        nu[j] = (n * uw / sw - tu) / den;
        b[j] = (uw - n * nu[j]) / sw;
    }
    return {D * nu, D * b};
}

// Precomputed pieces of the orientation objective
// f(D) = sum_l [d_l' G_l d_l + h_l d_l' B d_l - 2 d_l' C d_l] / A_l.
struct OrientationTerms {
    std::vector<Eigen::MatrixXd> G;  // G_l = sum_i w_i t_il r_i r_i'
    Eigen::VectorXd h;               // h_l = sum_i w_i s_il
    Eigen::MatrixXd B;               // beta_tilde beta_tilde'
    Eigen::MatrixXd C;               // sym(sum_i w_i r_i beta_tilde')
};

OrientationTerms orientation_terms(const Eigen::MatrixXd& data,
                                   const EStepStats& stats,
                                   const Eigen::VectorXd& mu,
                                   const Eigen::VectorXd& beta_tilde,
                                   const Eigen::VectorXd& w)
{
    const int m = static_cast<int>(mu.size());
    const Eigen::MatrixXd r = data.rowwise() - mu.transpose();
    OrientationTerms terms;
    terms.G.reserve(m);
    for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd wt = w.cwiseProduct(stats.t.col(j));
        terms.G.push_back(r.transpose() * wt.asDiagonal() * r);
    }
    terms.h.resize(m);
    for (int j = 0; j < m; ++j) terms.h[j] = w.dot(stats.s.col(j));
    terms.B = beta_tilde * beta_tilde.transpose();
    const Eigen::MatrixXd c = (r.transpose() * w) * beta_tilde.transpose();
    terms.C = 0.5 * (c + c.transpose());
    return terms;
}

double orientation_f(const OrientationTerms& terms,
                     const Eigen::VectorXd& A_tilde, const Eigen::MatrixXd& D)
{
    const int m = static_cast<int>(A_tilde.size());
    double f = 0.0;
    for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd d = D.col(j);
        f += (d.dot(terms.G[j] * d) + terms.h[j] * d.dot(terms.B * d) -
              2.0 * d.dot(terms.C * d)) /
             A_tilde[j];
    }
    return f;
}

Eigen::MatrixXd orientation_impl(const Eigen::MatrixXd& data,
                                 const EStepStats& stats,
                                 const Eigen::VectorXd& mu,
                                 const Eigen::VectorXd& beta_tilde,
                                 const Eigen::VectorXd& A_tilde,
                                 const Eigen::MatrixXd& D_init,
                                 const Eigen::VectorXd& w)
{
    const int m = static_cast<int>(mu.size());
    Eigen::MatrixXd D = D_init;
    if (m == 1) {
        D(0, 0) = 1.0;
        return D;
    }
    const OrientationTerms terms =
        orientation_terms(data, stats, mu, beta_tilde, w);
    double f = orientation_f(terms, A_tilde, D);
    for (int sweep = 0; sweep < 100; ++sweep) {
        for (int l = 0; l < m; ++l) {
            for (int j = l + 1; j < m; ++j) {
                const double cl = 1.0 / A_tilde[l];
                const double cj = 1.0 / A_tilde[j];
                const Eigen::MatrixXd q =
                    cl * terms.G[l] - cj * terms.G[j] +
                    (terms.h[l] * cl - terms.h[j] * cj) * terms.B -
                    2.0 * (cl - cj) * terms.C;
                Eigen::Matrix<double, Eigen::Dynamic, 2> p(m, 2);
                p.col(0) = D.col(l);
                p.col(1) = D.col(j);
                const Eigen::Matrix2d m2 = p.transpose() * q * p;
                // eigenvectors of the symmetric 2x2 matrix [[a, b], [b, c]]
                // via the Jacobi angle; (cos, sin) belongs to the largest
                // eigenvalue, so the smallest-eigenvalue vector is its
                // perpendicular. Stable as b -> 0, where the textbook
                // (b, lambda - a) form cancels to rounding noise.
                const double a = m2(0, 0), b2 = 0.5 * (m2(0, 1) + m2(1, 0)),
                             c = m2(1, 1);
                if (b2 == 0.0 && a <= c) continue;  // already diagonal
                const double theta = 0.5 * std::atan2(2.0 * b2, a - c);
                const Eigen::Vector2d v1(-std::sin(theta), std::cos(theta));
                const Eigen::Vector2d v2(std::cos(theta), std::sin(theta));
                const Eigen::VectorXd dl = p * v1;
                const Eigen::VectorXd dj = p * v2;
                D.col(l) = dl;
                D.col(j) = dj;
            }
        }
        const double f_new = orientation_f(terms, A_tilde, D);
        const bool done = (f - f_new) < 1e-10 * (std::abs(f) + 1e-30);
        f = f_new;
        if (done) break;
    }
    // deterministic column signs
    for (int j = 0; j < m; ++j) {
        int arg = 0;
        D.col(j).cwiseAbs().maxCoeff(&arg);
        if (D(arg, j) < 0.0) D.col(j) = -D.col(j);
    }
    return D;
}

Eigen::VectorXd shape_impl(const Eigen::MatrixXd& data,
                           const EStepStats& stats, const Eigen::MatrixXd& D,
                           const Eigen::VectorXd& mu,
                           const Eigen::VectorXd& beta_tilde,
                           const Eigen::VectorXd& w)
{
    const int m = static_cast<int>(mu.size());
    const double n = w.sum();
    const Eigen::MatrixXd u = (data.rowwise() - mu.transpose()) * D;
    const Eigen::VectorXd b = D.transpose() * beta_tilde;
    Eigen::VectorXd a(m);
    for (int j = 0; j < m; ++j) {
        const Eigen::ArrayXd uj = u.col(j).array();
        const Eigen::ArrayXd term = uj.square() * stats.t.col(j).array() +
                                    b[j] * b[j] * stats.s.col(j).array() -
                                    2.0 * b[j] * uj;
        a[j] = (w.array() * term).sum() / n;
        if (!(a[j] > 1e-290) || !std::isfinite(a[j]))
            throw degenerate_data_error(
                "shape update: rotated coordinate with vanishing scale");
    }
    return a;
}

Eigen::VectorXd gamma_impl(const EStepStats& stats, const Eigen::VectorXd& w,
                           GammaConstraint constraint,
                           const std::vector<int>& groups)
{
    const int m = static_cast<int>(stats.s.cols());
    const double n = w.sum();
    Eigen::VectorXd g(m);
    switch (constraint) {
        case GammaConstraint::kFree:
            for (int j = 0; j < m; ++j) g[j] = n / w.dot(stats.s.col(j));
            break;
        case GammaConstraint::kShared: {
            double total = 0.0;
            for (int j = 0; j < m; ++j) total += w.dot(stats.s.col(j));
            g.setConstant(n * m / total);
            break;
        }
        case GammaConstraint::kGroups: {
            if (static_cast<int>(groups.size()) != m)
                throw std::invalid_argument(
                    "update_gamma: need one group id per dimension");
            for (int j = 0; j < m; ++j) {
                double total = 0.0;
                int count = 0;
                for (int l = 0; l < m; ++l) {
                    if (groups[l] != groups[j]) continue;
                    total += w.dot(stats.s.col(l));
                    ++count;
                }
                g[j] = n * count / total;
            }
            break;
        }
    }
    return g;
}

// Relabel the rotated coordinates so A_tilde is descending; permutes the
// per-coordinate stats consistently. Pure relabeling, the model and the
// likelihood are unchanged.
void relabel_descending(Eigen::MatrixXd& D, Eigen::VectorXd& A_tilde,
                        EStepStats& stats)
{
    const int m = static_cast<int>(A_tilde.size());
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](int a, int b) { return A_tilde[a] > A_tilde[b]; });
    bool identity = true;
    for (int j = 0; j < m; ++j) identity = identity && perm[j] == j;
    if (identity) return;
    const Eigen::MatrixXd d0 = D;
    const Eigen::VectorXd a0 = A_tilde;
    const EStepStats s0 = stats;
    for (int j = 0; j < m; ++j) {
        D.col(j) = d0.col(perm[j]);
        A_tilde[j] = a0[perm[j]];
        stats.s.col(j) = s0.s.col(perm[j]);
        stats.t.col(j) = s0.t.col(perm[j]);
        stats.phi.col(j) = s0.phi.col(perm[j]);
        stats.alpha_hat[j] = s0.alpha_hat[perm[j]];
    }
}

// ---- k-means style initialization ----------------------------------------

std::vector<int> kmeanspp_centers(const Eigen::MatrixXd& data, int k, Rng& rng)
{
    const Eigen::Index n = data.rows();
    std::vector<int> centers;
    centers.push_back(static_cast<int>(rng.integer(n)));
    Eigen::VectorXd d2 =
        (data.rowwise() - data.row(centers[0])).rowwise().squaredNorm();
    while (static_cast<int>(centers.size()) < k) {
        const double total = d2.sum();
        int pick;
        if (total <= 0.0) {
            pick = static_cast<int>(rng.integer(n));
        } else {
            double target = rng.uniform() * total;
            pick = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= d2[i];
                if (target <= 0.0) {
                    pick = static_cast<int>(i);
                    break;
                }
            }
        }
        centers.push_back(pick);
        const Eigen::VectorXd nd =
            (data.rowwise() - data.row(pick)).rowwise().squaredNorm();
        d2 = d2.cwiseMin(nd);
    }
    return centers;
}

struct Partition {
    std::vector<int> labels;    // for every observation
    std::vector<char> kept;     // center/scatter computation mask
    Eigen::MatrixXd centers;    // k x M
};

Partition run_kmeans(const Eigen::MatrixXd& data, int k, double trim_fraction,
                     Rng& rng)
{
    const Eigen::Index n = data.rows();
    const Eigen::Index m = data.cols();
    const Eigen::Index n_drop =
        static_cast<Eigen::Index>(std::floor(trim_fraction * n));
    Partition part;
    part.labels.assign(n, 0);
    part.kept.assign(n, 1);
    part.centers.resize(k, m);
    const std::vector<int> seeds = kmeanspp_centers(data, k, rng);
    for (int c = 0; c < k; ++c) part.centers.row(c) = data.row(seeds[c]);

    std::vector<int> prev(n, -1);
    Eigen::VectorXd best_d2(n);
    for (int iter = 0; iter < 100; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            int arg = 0;
            double best = (data.row(i) - part.centers.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double d = (data.row(i) - part.centers.row(c)).squaredNorm();
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            part.labels[i] = arg;
            best_d2[i] = best;
        }
        std::fill(part.kept.begin(), part.kept.end(), 1);
        if (n_drop > 0) {
            std::vector<Eigen::Index> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](Eigen::Index a, Eigen::Index b) {
                                 return best_d2[a] > best_d2[b];
                             });
            for (Eigen::Index i = 0; i < n_drop; ++i) part.kept[order[i]] = 0;
        }
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, m);
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!part.kept[i]) continue;
            sums.row(part.labels[i]) += data.row(i);
            counts[part.labels[i]] += 1.0;
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0.0) part.centers.row(c) = sums.row(c) / counts[c];
        if (part.labels == prev) break;
        prev = part.labels;
    }
    return part;
}

}  // namespace

// ---- public single-distribution ops --------------------------------------

EStepStats e_step(const Eigen::MatrixXd& data, const TildeParams& tilde)
{
    return estep_impl(data, tilde);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> update_location_skew(
    const Eigen::MatrixXd& data, const EStepStats& stats,
    const Eigen::MatrixXd& D)
{
    if (data.rows() < 2)
        throw std::invalid_argument("update_location_skew: need N >= 2");
    return location_skew_impl(data, stats, D, ones(data.rows()), nullptr);
}

Eigen::MatrixXd update_orientation(const Eigen::MatrixXd& data,
                                   const EStepStats& stats,
                                   const Eigen::VectorXd& mu,
                                   const Eigen::VectorXd& beta_tilde,
                                   const Eigen::VectorXd& A_tilde,
                                   const Eigen::MatrixXd& D_init)
{
    return orientation_impl(data, stats, mu, beta_tilde, A_tilde, D_init,
                            ones(data.rows()));
}

double orientation_objective(const Eigen::MatrixXd& data,
                             const EStepStats& stats,
                             const Eigen::VectorXd& mu,
                             const Eigen::VectorXd& beta_tilde,
                             const Eigen::VectorXd& A_tilde,
                             const Eigen::MatrixXd& D)
{
    const OrientationTerms terms =
        orientation_terms(data, stats, mu, beta_tilde, ones(data.rows()));
    return orientation_f(terms, A_tilde, D);
}

Eigen::VectorXd update_shape(const Eigen::MatrixXd& data,
                             const EStepStats& stats, const Eigen::MatrixXd& D,
                             const Eigen::VectorXd& mu,
                             const Eigen::VectorXd& beta_tilde)
{
    return shape_impl(data, stats, D, mu, beta_tilde, ones(data.rows()));
}

Eigen::VectorXd update_gamma(const EStepStats& stats,
                             GammaConstraint constraint,
                             const std::vector<int>& groups)
{
    return gamma_impl(stats, ones(stats.s.rows()), constraint, groups);
}

MsghParams back_transform(const TildeParams& tilde)
{
    const int m = tilde.dim();
    const Eigen::ArrayXd log_a = tilde.A_tilde.array().log();
    const double log_delta = 0.5 * log_a.mean();
    MsghParams p;
    p.mu = tilde.mu;
    p.D = tilde.D;
    p.A = (log_a - 2.0 * log_delta).exp().matrix();
    p.beta = tilde.D * (tilde.D.transpose() * tilde.beta_tilde)
                           .cwiseQuotient(tilde.A_tilde);
    p.lambda = Eigen::VectorXd::Constant(m, -0.5);
    p.gamma = tilde.gamma_tilde / std::exp(log_delta);
    p.delta = std::exp(log_delta);
    return p;
}

TildeParams forward_transform(const MsghParams& p)
{
    TildeParams tilde;
    tilde.mu = p.mu;
    tilde.D = p.D;
    tilde.A_tilde = p.delta * p.delta * p.A;
    tilde.beta_tilde =
        p.D * tilde.A_tilde.cwiseProduct(p.D.transpose() * p.beta);
    tilde.gamma_tilde = p.delta * p.gamma;
    return tilde;
}

// ---- mixture machinery ----------------------------------------------------

Eigen::MatrixXd responsibilities(const Eigen::MatrixXd& data,
                                 const MixtureModel& model)
{
    const Eigen::Index n = data.rows();
    const int k = model.k();
    Eigen::MatrixXd logd(n, k);
    for (int c = 0; c < k; ++c) {
        const double logpi = std::log(model.pi[c]);
        for (Eigen::Index i = 0; i < n; ++i)
            logd(i, c) =
                logpi + msnig_log_density(data.row(i), model.components[c]);
    }
    Eigen::MatrixXd tau(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mx = logd.row(i).maxCoeff();
        const Eigen::ArrayXd e = (logd.row(i).array() - mx).exp();
        tau.row(i) = (e / e.sum()).matrix();
    }
    return tau;
}

double mixture_loglik(const Eigen::MatrixXd& data, const MixtureModel& model)
{
    const Eigen::Index n = data.rows();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        total += mixture_log_density(data.row(i), model);
    return total;
}

double mixture_log_density(const Eigen::VectorXd& y, const MixtureModel& model)
{
    const int k = model.k();
    Eigen::VectorXd row(k);
    for (int c = 0; c < k; ++c)
        row[c] = std::log(model.pi[c]) +
                 msnig_log_density(y, model.components[c]);
    const double mx = row.maxCoeff();
    return mx + std::log((row.array() - mx).exp().sum());
}

Eigen::MatrixXd mixture_sample(const MixtureModel& model, std::size_t n,
                               std::uint64_t seed)
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
        const Eigen::MatrixXd row = msgh_sample(
            model.components[c], 1, seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
        out.row(i) = row.row(0);
    }
    return out;
}

double bic(double loglik, int n_params, std::size_t n)
{
    return -2.0 * loglik + n_params * std::log(static_cast<double>(n));
}

int msnig_param_count(int dims, int k)
{
    // per component: mu M, beta M, D M(M-1)/2, A with det 1 (M-1),
    // gamma M, delta 1; plus K-1 proportions
    const int comp = 4 * dims + dims * (dims - 1) / 2;
    return k * comp + (k - 1);
}

int nig_param_count(int dims, int k)
{
    // per component: mu M, beta M, Sigma with det 1, gamma 1, delta 1
    const int comp = 2 * dims + dims * (dims + 1) / 2 + 1;
    return k * comp + (k - 1);
}

MixtureModel init_partition(const Eigen::MatrixXd& data, int k,
                            InitStrategy strategy, double trim_fraction,
                            std::uint64_t seed)
{
    const Eigen::Index n = data.rows();
    const Eigen::Index m = data.cols();
    if (k < 1) throw std::invalid_argument("init_partition: K must be >= 1");
    if (n < static_cast<Eigen::Index>(k) * (m + 2))
        throw std::invalid_argument("init_partition: not enough observations");
    if (trim_fraction < 0.0 || trim_fraction >= 0.5)
        throw std::invalid_argument("init_partition: trim fraction in [0, 0.5)");

    for (int attempt = 0; attempt < 64; ++attempt) {
        Rng rng(seed + 0x9E3779B97F4A7C15ULL * attempt);
        Partition part;
        switch (strategy) {
            case InitStrategy::kRandomPartition: {
                part.labels.resize(n);
                part.kept.assign(n, 1);
                for (auto& l : part.labels)
                    l = static_cast<int>(rng.integer(k));
                break;
            }
            case InitStrategy::kKmeans:
                part = run_kmeans(data, k, 0.0, rng);
                break;
            case InitStrategy::kTrimmedKmeans:
                part = run_kmeans(data, k, trim_fraction, rng);
                break;
        }
        // per-cluster kept counts
        std::vector<Eigen::Index> counts(k, 0), full_counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            ++full_counts[part.labels[i]];
            if (part.kept[i]) ++counts[part.labels[i]];
        }
        const Eigen::Index min_size = m + 2;
        if (*std::min_element(counts.begin(), counts.end()) < min_size)
            continue;  // empty-ish cluster: redraw

        MixtureModel model;
        model.pi.resize(k);
        for (int c = 0; c < k; ++c)
            model.pi[c] = static_cast<double>(full_counts[c]) / n;
        for (int c = 0; c < k; ++c) {
            Eigen::VectorXd center = Eigen::VectorXd::Zero(m);
            for (Eigen::Index i = 0; i < n; ++i)
                if (part.kept[i] && part.labels[i] == c)
                    center += data.row(i).transpose();
            center /= static_cast<double>(counts[c]);
            Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(m, m);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!part.kept[i] || part.labels[i] != c) continue;
                const Eigen::VectorXd r = data.row(i).transpose() - center;
                scatter += r * r.transpose();
            }
            Eigen::MatrixXd cov = scatter / static_cast<double>(counts[c] - 1);
            // tiny ridge so degenerate clusters still give a usable frame
            cov += 1e-10 * (cov.trace() / m + 1e-30) *
                   Eigen::MatrixXd::Identity(m, m);
            MsghParams comp = msgh_from_sigma(
                center, cov, Eigen::VectorXd::Zero(m),
                Eigen::VectorXd::Constant(m, -0.5),
                Eigen::VectorXd::Ones(m), 1.0);
            // det-1 normalization of the shape
            const Eigen::ArrayXd log_a = comp.A.array().log();
            comp.A = (log_a - log_a.mean()).exp().matrix();
            model.components.push_back(std::move(comp));
        }
        return model;
    }
    throw empty_component_error(
        "init_partition: could not build K clusters of workable size");
}

namespace {

struct EmRun {
    FitReport report;
    bool ok = false;
};

EmRun run_em(const Eigen::MatrixXd& data, int k, const EmConfig& config,
             const MixtureModel& init)
{
    const Eigen::Index n = data.rows();
    const int m = static_cast<int>(data.cols());
    std::vector<TildeParams> tilde;
    tilde.reserve(k);
    for (const auto& comp : init.components)
        tilde.push_back(forward_transform(comp));
    Eigen::VectorXd pi = init.pi;

    FitReport report;
    Eigen::MatrixXd tau(n, k);
    double prev_ll = -std::numeric_limits<double>::infinity();
    std::vector<EStepStats> stats(k);

    for (int iter = 0; iter < config.max_iter; ++iter) {
        Eigen::MatrixXd logd(n, k);
        for (int c = 0; c < k; ++c) {
            stats[c] = estep_impl(data, tilde[c]);
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
            throw empty_component_error("EM: component collapsed");
        pi = nk / static_cast<double>(n);

        for (int c = 0; c < k; ++c) {
            const Eigen::VectorXd w = tau.col(c);
            auto [mu, beta_tilde] = location_skew_impl(
                data, stats[c], tilde[c].D, w, &report.location_fallbacks);
            Eigen::MatrixXd D =
                orientation_impl(data, stats[c], mu, beta_tilde,
                                 tilde[c].A_tilde, tilde[c].D, w);
            Eigen::VectorXd a =
                shape_impl(data, stats[c], D, mu, beta_tilde, w);
            relabel_descending(D, a, stats[c]);
            const Eigen::VectorXd g = gamma_impl(
                stats[c], w, config.gamma_constraint, config.gamma_groups);
            tilde[c].mu = mu;
            tilde[c].beta_tilde = beta_tilde;
            tilde[c].D = D;
            tilde[c].A_tilde = a;
            tilde[c].gamma_tilde = g;
        }
    }

    report.n_iter = static_cast<int>(report.loglik_trace.size());
    report.model.pi = pi;
    for (int c = 0; c < k; ++c)
        report.model.components.push_back(back_transform(tilde[c]));
    report.tau = tau;
    report.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        tau.row(i).maxCoeff(&arg);
        report.labels[i] = arg;
    }
    report.bic =
        bic(report.loglik(), msnig_param_count(m, k), static_cast<size_t>(n));
    return {std::move(report), true};
}

}  // namespace

FitReport fit_mixture(const Eigen::MatrixXd& data, int k,
                      const EmConfig& config)
{
    const Eigen::Index n = data.rows();
    const int m = static_cast<int>(data.cols());
    if (k < 1) throw std::invalid_argument("fit_mixture: K must be >= 1");
    if (n <= m + 1)
        throw std::invalid_argument("fit_mixture: need N > M + 1 observations");
    if (!data.allFinite())
        throw std::invalid_argument("fit_mixture: data must be finite");

    const int attempts = std::max(config.restarts, 1);
    const auto one_attempt = [&](int a) -> EmRun {
        try {
            const MixtureModel init = init_partition(
                data, k, config.init, config.trim_fraction, config.seed + a);
            return run_em(data, k, config, init);
        } catch (const empty_component_error&) {
            return {};
        } catch (const degenerate_data_error&) {
            if (attempts == 1) throw;
            return {};
        }
    };

    std::vector<EmRun> runs(attempts);
    if (config.threads > 1) {
        std::vector<std::future<EmRun>> futures;
        futures.reserve(attempts);
        for (int a = 0; a < attempts; ++a)
            futures.push_back(
                std::async(std::launch::async, one_attempt, a));
        for (int a = 0; a < attempts; ++a) runs[a] = futures[a].get();
    } else {
        for (int a = 0; a < attempts; ++a) runs[a] = one_attempt(a);
    }

    int best = -1;
    for (int a = 0; a < attempts; ++a) {
        if (!runs[a].ok) continue;
        if (best < 0 || runs[a].report.loglik() > runs[best].report.loglik())
            best = a;
    }
    if (best < 0)
        throw empty_component_error(
            "fit_mixture: every restart lost a component or degenerated");
    return std::move(runs[best].report);
}

FitReport fit_msnig(const Eigen::MatrixXd& data, const EmConfig& config)
{
    return fit_mixture(data, 1, config);
}

}  // namespace msgh
