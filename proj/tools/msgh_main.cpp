// Command line front end: fit / sample / density-grid / classify /
// taildep / marginal over CSV files, with a JSON model document as the
// persistent artifact.
//
// Exit codes: 0 success, 2 usage, 3 data or model error, 4 convergence
// failure under --strict.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "msgh/csv.hpp"
#include "msgh/distributions.hpp"
#include "msgh/em.hpp"
#include "msgh/errors.hpp"
#include "msgh/model_io.hpp"
#include "msgh/nig_em.hpp"
#include "msgh/taildep.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;

std::vector<std::string> split_csv_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

int default_threads()
{
    if (const char* env = std::getenv("MSGH_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

std::string format_vec(const Eigen::VectorXd& v)
{
    std::ostringstream os;
    os << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << v[i];
    }
    os << ")";
    return os.str();
}

std::string format_mat(const Eigen::MatrixXd& m)
{
    std::ostringstream os;
    os << "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) os << "; ";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << " ";
            os << m(i, j);
        }
    }
    os << "]";
    return os.str();
}

struct FitOptions {
    std::string input;
    std::string out = "model.json";
    std::string model = "msnig";
    std::string cols;
    std::string init = "trimmed-kmeans";
    std::string gamma = "free";
    int k = 1;
    double trim = 0.1;
    double tol = 1e-8;
    int max_iter = 2000;
    int restarts = 10;
    std::uint64_t seed = 1;
    bool no_header = false;
    bool strict = false;
};

msgh::EmConfig make_config(const FitOptions& opt)
{
    msgh::EmConfig config;
    config.tol = opt.tol;
    config.max_iter = opt.max_iter;
    config.restarts = opt.restarts;
    config.seed = opt.seed;
    config.trim_fraction = opt.trim;
    config.threads = default_threads();
    if (opt.init == "random")
        config.init = msgh::InitStrategy::kRandomPartition;
    else if (opt.init == "kmeans")
        config.init = msgh::InitStrategy::kKmeans;
    else
        config.init = msgh::InitStrategy::kTrimmedKmeans;
    config.gamma_constraint = opt.gamma == "shared"
                                  ? msgh::GammaConstraint::kShared
                                  : msgh::GammaConstraint::kFree;
    return config;
}

std::map<std::string, std::string> echo_config(const FitOptions& opt)
{
    return {
        {"input", opt.input},       {"model", opt.model},
        {"K", std::to_string(opt.k)}, {"cols", opt.cols},
        {"init", opt.init},         {"trim", std::to_string(opt.trim)},
        {"gamma", opt.gamma},       {"tol", std::to_string(opt.tol)},
        {"max_iter", std::to_string(opt.max_iter)},
        {"restarts", std::to_string(opt.restarts)},
        {"seed", std::to_string(opt.seed)},
    };
}

int cmd_fit(const FitOptions& opt)
{
    const msgh::Dataset data = msgh::read_csv(
        opt.input, split_csv_list(opt.cols), !opt.no_header);
    if (data.dropped_rows > 0)
        std::cerr << "note: dropped " << data.dropped_rows
                  << " malformed rows from " << opt.input << "\n";

    msgh::ModelFile file;
    file.kind = opt.model;
    file.columns = data.columns;
    file.seed = opt.seed;
    file.config_echo = echo_config(opt);
    const msgh::EmConfig config = make_config(opt);

    bool converged = false;
    if (opt.model == "msnig") {
        const msgh::FitReport rep =
            msgh::fit_mixture(data.values, opt.k, config);
        file.msnig = rep.model;
        file.loglik = rep.loglik();
        file.bic = rep.bic;
        file.n_iter = rep.n_iter;
        file.converged = converged = rep.converged;
        std::cout << "model      msnig\nK          " << opt.k << "\n"
                  << "N          " << data.values.rows() << "\n"
                  << "loglik     " << rep.loglik() << "\n"
                  << "BIC        " << rep.bic << "\n"
                  << "iterations " << rep.n_iter << "\n"
                  << "converged  " << (rep.converged ? "yes" : "no") << "\n";
        for (int c = 0; c < rep.model.k(); ++c) {
            const msgh::MsghParams& p = rep.model.components[c];
            std::cout << "component " << c + 1
                      << "  (pi = " << rep.model.pi[c] << ")\n"
                      << "  mu     " << format_vec(p.mu) << "\n"
                      << "  beta   " << format_vec(p.beta) << "\n"
                      << "  D      " << format_mat(p.D) << "\n"
                      << "  A      " << format_vec(p.A) << "\n"
                      << "  gamma  " << format_vec(p.gamma) << "\n"
                      << "  delta  " << p.delta << "\n";
        }
    } else if (opt.model == "nig") {
        const msgh::NigFitReport rep =
            msgh::fit_nig_baseline(data.values, opt.k, config);
        file.nig = rep.model;
        file.loglik = rep.loglik();
        file.bic = rep.bic;
        file.n_iter = rep.n_iter;
        file.converged = converged = rep.converged;
        std::cout << "model      nig\nK          " << opt.k << "\n"
                  << "N          " << data.values.rows() << "\n"
                  << "loglik     " << rep.loglik() << "\n"
                  << "BIC        " << rep.bic << "\n"
                  << "iterations " << rep.n_iter << "\n"
                  << "converged  " << (rep.converged ? "yes" : "no") << "\n";
        for (int c = 0; c < rep.model.k(); ++c) {
            const msgh::GhParams& p = rep.model.components[c];
            std::cout << "component " << c + 1
                      << "  (pi = " << rep.model.pi[c] << ")\n"
                      << "  mu     " << format_vec(p.mu) << "\n"
                      << "  beta   " << format_vec(p.beta) << "\n"
                      << "  Sigma  " << format_mat(p.Sigma) << "\n"
                      << "  gamma  " << p.gamma << "\n"
                      << "  delta  " << p.delta << "\n";
        }
    } else {
        std::cerr << "error: --model must be msnig or nig\n";
        return kExitUsage;
    }

    msgh::save_model(opt.out, file);
    std::cout << "model written to " << opt.out << "\n";
    if (opt.strict && !converged) {
        std::cerr << "error: EM did not converge within --max-iter\n";
        return kExitConvergence;
    }
    return 0;
}

int cmd_sample(const std::string& model_path, long long n, std::uint64_t seed,
               const std::string& out)
{
    if (n < 0) {
        std::cerr << "error: -n must be >= 0\n";
        return kExitUsage;
    }
    const msgh::ModelFile file = msgh::load_model(model_path);
    Eigen::MatrixXd rows;
    if (file.kind == "msnig")
        rows = msgh::mixture_sample(file.msnig, static_cast<std::size_t>(n), seed);
    else
        rows = msgh::nig_mixture_sample(file.nig, static_cast<std::size_t>(n), seed);
    std::vector<std::string> cols = file.columns;
    if (static_cast<int>(cols.size()) != file.dim()) {
        cols.clear();
        for (int j = 0; j < file.dim(); ++j)
            cols.push_back("y" + std::to_string(j));
    }
    if (n == 0) rows.resize(0, file.dim());
    msgh::write_csv(out, cols, rows);
    std::cout << n << " rows written to " << out << "\n";
    return 0;
}

int cmd_density_grid(const std::string& model_path, const std::string& bounds,
                     int res, const std::string& dims, const std::string& out)
{
    const msgh::ModelFile file = msgh::load_model(model_path);
    const int m = file.dim();

    std::vector<int> dim_pair;
    if (!dims.empty()) {
        for (const auto& tok : split_csv_list(dims))
            dim_pair.push_back(std::stoi(tok));
        if (dim_pair.size() != 2) {
            std::cerr << "error: --dims needs exactly two indices\n";
            return kExitUsage;
        }
    }
    if (m != 2 && dim_pair.empty()) {
        std::cerr << "error: model is " << m
                  << "-dimensional; pick two dimensions with --dims\n";
        return kExitData;
    }
    const bool marginal_mode = !dim_pair.empty() && m != 2;

    // grid bounds: explicit or mean +/- 8 sd of the mixture
    double xmin, xmax, ymin, ymax;
    if (!bounds.empty()) {
        const auto parts = split_csv_list(bounds);
        if (parts.size() != 4) {
            std::cerr << "error: --bounds is xmin,xmax,ymin,ymax\n";
            return kExitUsage;
        }
        xmin = std::stod(parts[0]);
        xmax = std::stod(parts[1]);
        ymin = std::stod(parts[2]);
        ymax = std::stod(parts[3]);
    } else {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
        Eigen::MatrixXd second = Eigen::MatrixXd::Zero(m, m);
        if (file.kind == "msnig") {
            for (int c = 0; c < file.msnig.k(); ++c) {
                const Eigen::VectorXd mc = msgh_mean(file.msnig.components[c]);
                mean += file.msnig.pi[c] * mc;
                second += file.msnig.pi[c] *
                          (msgh_cov(file.msnig.components[c]) + mc * mc.transpose());
            }
        } else {
            for (int c = 0; c < file.nig.k(); ++c) {
                // moment bounds via a moderate sample; adequate for a plot box
                const Eigen::MatrixXd s =
                    msgh::gh_sample(file.nig.components[c], 4096, 12345);
                const Eigen::VectorXd mc = s.colwise().mean();
                Eigen::MatrixXd cc = Eigen::MatrixXd::Zero(m, m);
                for (int i = 0; i < s.rows(); ++i) {
                    const Eigen::VectorXd r = s.row(i).transpose() - mc;
                    cc += r * r.transpose();
                }
                cc /= s.rows() - 1;
                mean += file.nig.pi[c] * mc;
                second += file.nig.pi[c] * (cc + mc * mc.transpose());
            }
        }
        const Eigen::MatrixXd cov = second - mean * mean.transpose();
        const int dx = marginal_mode ? dim_pair[0] : 0;
        const int dy = marginal_mode ? dim_pair[1] : 1;
        xmin = mean[dx] - 8.0 * std::sqrt(cov(dx, dx));
        xmax = mean[dx] + 8.0 * std::sqrt(cov(dx, dx));
        ymin = mean[dy] - 8.0 * std::sqrt(cov(dy, dy));
        ymax = mean[dy] + 8.0 * std::sqrt(cov(dy, dy));
    }

    Eigen::MatrixXd grid(static_cast<Eigen::Index>(res) * res, 3);
    if (marginal_mode) {
        if (file.kind != "msnig") {
            std::cerr << "error: --dims marginals are only available for "
                         "msnig models\n";
            return kExitData;
        }
        std::vector<Eigen::VectorXd> pts;
        pts.reserve(static_cast<std::size_t>(res) * res);
        for (int iy = 0; iy < res; ++iy)
            for (int ix = 0; ix < res; ++ix) {
                Eigen::VectorXd p(2);
                p << xmin + (xmax - xmin) * ix / (res - 1),
                    ymin + (ymax - ymin) * iy / (res - 1);
                pts.push_back(p);
            }
        Eigen::VectorXd dens = Eigen::VectorXd::Zero(pts.size());
        for (int c = 0; c < file.msnig.k(); ++c) {
            const std::vector<double> vals = msgh::marginal_pdf(
                file.msnig.components[c], {dim_pair[0], dim_pair[1]}, pts);
            for (std::size_t i = 0; i < vals.size(); ++i)
                dens[i] += file.msnig.pi[c] * vals[i];
        }
        for (std::size_t i = 0; i < pts.size(); ++i)
            grid.row(i) << pts[i][0], pts[i][1],
                std::log(std::max(dens[i], 1e-300));
    } else {
        Eigen::Index row = 0;
        for (int iy = 0; iy < res; ++iy)
            for (int ix = 0; ix < res; ++ix, ++row) {
                Eigen::VectorXd p(2);
                p << xmin + (xmax - xmin) * ix / (res - 1),
                    ymin + (ymax - ymin) * iy / (res - 1);
                const double ld =
                    file.kind == "msnig"
                        ? msgh::mixture_log_density(p, file.msnig)
                        : msgh::nig_mixture_log_density(p, file.nig);
                grid.row(row) << p[0], p[1], ld;
            }
    }
    msgh::write_csv(out, {"x", "y", "log_density"}, grid);
    std::cout << res << "x" << res << " grid written to " << out << "\n";
    return 0;
}

int cmd_classify(const std::string& model_path, const std::string& input,
                 const std::string& cols, bool no_header,
                 const std::string& out)
{
    const msgh::ModelFile file = msgh::load_model(model_path);
    const msgh::Dataset data =
        msgh::read_csv(input, split_csv_list(cols), !no_header);
    if (data.dropped_rows > 0)
        std::cerr << "note: dropped " << data.dropped_rows
                  << " malformed rows from " << input << "\n";
    if (data.values.cols() != file.dim())
        throw std::invalid_argument("classify: data dimension " +
                                    std::to_string(data.values.cols()) +
                                    " does not match model dimension " +
                                    std::to_string(file.dim()));
    const Eigen::MatrixXd tau =
        file.kind == "msnig"
            ? msgh::responsibilities(data.values, file.msnig)
            : msgh::nig_responsibilities(data.values, file.nig);
    Eigen::MatrixXd table(tau.rows(), tau.cols() + 1);
    for (Eigen::Index i = 0; i < tau.rows(); ++i) {
        int arg = 0;
        tau.row(i).maxCoeff(&arg);
        table(i, 0) = arg;
        table.row(i).tail(tau.cols()) = tau.row(i);
    }
    std::vector<std::string> header{"label"};
    for (int c = 0; c < tau.cols(); ++c)
        header.push_back("tau" + std::to_string(c));
    msgh::write_csv(out, header, table);
    std::cout << tau.rows() << " rows written to " << out << "\n";
    return 0;
}

int cmd_taildep(const std::string& input, const std::string& cols,
                double q_min, double q_max, int q_count, int bootstrap,
                std::uint64_t seed, bool no_header, const std::string& out)
{
    const auto col_list = split_csv_list(cols);
    if (col_list.size() != 2) {
        std::cerr << "error: --cols must name exactly two columns\n";
        return kExitUsage;
    }
    const msgh::Dataset data = msgh::read_csv(input, col_list, !no_header);
    std::vector<double> x(data.values.rows()), y(data.values.rows());
    for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
        x[i] = data.values(i, 0);
        y[i] = data.values(i, 1);
    }
    std::vector<double> q_grid(q_count);
    for (int i = 0; i < q_count; ++i)
        q_grid[i] = q_min + (q_max - q_min) * i / (q_count - 1);
    msgh::ChiConfig config;
    config.bootstrap = bootstrap;
    config.seed = seed;
    const msgh::ChiCurve curve = msgh::chi_q(x, y, q_grid, config);
    if (curve.omitted > 0)
        std::cerr << "note: " << curve.omitted
                  << " grid points omitted (empty joint tail)\n";
    Eigen::MatrixXd table(q_count, 6);
    for (int i = 0; i < q_count; ++i) {
        const auto [lo, hi] = msgh::chi_bounds(curve.q[i]);
        table.row(i) << curve.q[i], curve.chi_hat[i], curve.lower[i],
            curve.upper[i], lo, hi;
    }
    msgh::write_csv(out, {"q", "chi", "band_lo", "band_hi", "bound_lo", "bound_hi"},
                    table);
    std::cout << q_count - static_cast<int>(curve.omitted)
              << " chi(q) points written to " << out << "\n";
    return 0;
}

int cmd_marginal(const std::string& model_path, const std::string& dims,
                 double lo, double hi, int points, const std::string& out)
{
    const msgh::ModelFile file = msgh::load_model(model_path);
    if (file.kind != "msnig") {
        std::cerr << "error: marginals are only available for msnig models\n";
        return kExitData;
    }
    std::vector<int> dim_list;
    for (const auto& tok : split_csv_list(dims)) dim_list.push_back(std::stoi(tok));
    if (dim_list.empty() || dim_list.size() > 2) {
        std::cerr << "error: --dims must pick one or two dimensions\n";
        return kExitUsage;
    }

    std::vector<Eigen::VectorXd> pts;
    if (dim_list.size() == 1) {
        pts.reserve(points);
        for (int i = 0; i < points; ++i) {
            Eigen::VectorXd p(1);
            p << lo + (hi - lo) * i / (points - 1);
            pts.push_back(p);
        }
    } else {
        pts.reserve(static_cast<std::size_t>(points) * points);
        for (int iy = 0; iy < points; ++iy)
            for (int ix = 0; ix < points; ++ix) {
                Eigen::VectorXd p(2);
                p << lo + (hi - lo) * ix / (points - 1),
                    lo + (hi - lo) * iy / (points - 1);
                pts.push_back(p);
            }
    }
    Eigen::VectorXd dens = Eigen::VectorXd::Zero(pts.size());
    for (int c = 0; c < file.msnig.k(); ++c) {
        const std::vector<double> vals =
            msgh::marginal_pdf(file.msnig.components[c], dim_list, pts);
        for (std::size_t i = 0; i < vals.size(); ++i)
            dens[i] += file.msnig.pi[c] * vals[i];
    }
    Eigen::MatrixXd table(pts.size(), dim_list.size() + 1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = 0; j < dim_list.size(); ++j)
            table(i, j) = pts[i][j];
        table(i, dim_list.size()) = dens[i];
    }
    std::vector<std::string> header;
    for (const int d : dim_list) header.push_back("y" + std::to_string(d));
    header.push_back("pdf");
    msgh::write_csv(out, header, table);
    std::cout << pts.size() << " marginal values written to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"multiple scaled GH / NIG distributions: fitting, sampling "
                 "and diagnostics"};
    app.require_subcommand(1);

    FitOptions fit;
    CLI::App* cfit = app.add_subcommand("fit", "fit a model to CSV data");
    cfit->add_option("input", fit.input, "input CSV file")->required();
    cfit->add_option("--cols", fit.cols, "comma separated column names");
    cfit->add_option("--model", fit.model, "msnig or nig")
        ->check(CLI::IsMember({"msnig", "nig"}));
    cfit->add_option("-K,--components", fit.k, "number of mixture components")
        ->check(CLI::PositiveNumber);
    cfit->add_option("--init", fit.init, "initialization strategy")
        ->check(CLI::IsMember({"random", "kmeans", "trimmed-kmeans"}));
    cfit->add_option("--trim", fit.trim, "trimmed k-means fraction");
    cfit->add_option("--gamma", fit.gamma, "gamma constraint")
        ->check(CLI::IsMember({"free", "shared"}));
    cfit->add_option("--tol", fit.tol, "relative log-likelihood tolerance");
    cfit->add_option("--max-iter", fit.max_iter, "EM iteration cap");
    cfit->add_option("--restarts", fit.restarts, "number of restarts");
    cfit->add_option("--seed", fit.seed, "random seed");
    cfit->add_option("--out", fit.out, "output model file");
    cfit->add_flag("--no-header", fit.no_header, "input has no header row");
    cfit->add_flag("--strict", fit.strict, "exit 4 when EM fails to converge");

    std::string model_path, out_path, cols, bounds, dims;
    long long n_samples = 0;
    std::uint64_t seed = 1;
    int res = 200, q_count = 50, bootstrap = 200, points = 201;
    double q_min = 0.55, q_max = 0.99, lo = -5.0, hi = 5.0;
    bool no_header = false;

    CLI::App* csample = app.add_subcommand("sample", "draw rows from a model");
    csample->add_option("model", model_path, "model file")->required();
    csample->add_option("-n", n_samples, "number of rows")->required();
    csample->add_option("--seed", seed, "random seed");
    csample->add_option("--out", out_path, "output CSV")->required();

    CLI::App* cgrid =
        app.add_subcommand("density-grid", "log density on a 2-D grid");
    cgrid->add_option("model", model_path, "model file")->required();
    cgrid->add_option("--bounds", bounds, "xmin,xmax,ymin,ymax");
    cgrid->add_option("--res", res, "grid resolution per axis");
    cgrid->add_option("--dims", dims, "two dimensions for M > 2 models");
    cgrid->add_option("--out", out_path, "output CSV")->required();

    std::string classify_input, classify_cols;
    CLI::App* cclassify =
        app.add_subcommand("classify", "MAP labels and responsibilities");
    cclassify->add_option("model", model_path, "model file")->required();
    cclassify->add_option("input", classify_input, "input CSV")->required();
    cclassify->add_option("--cols", classify_cols, "column names");
    cclassify->add_flag("--no-header", no_header, "input has no header row");
    cclassify->add_option("--out", out_path, "output CSV")->required();

    CLI::App* ctail = app.add_subcommand("taildep", "empirical chi(q) curve");
    std::string tail_input;
    ctail->add_option("input", tail_input, "input CSV")->required();
    ctail->add_option("--cols", cols, "two column names")->required();
    ctail->add_option("--q-min", q_min, "lowest quantile level");
    ctail->add_option("--q-max", q_max, "highest quantile level");
    ctail->add_option("--q-count", q_count, "grid size");
    ctail->add_option("--bootstrap", bootstrap, "bootstrap resamples");
    ctail->add_option("--seed", seed, "bootstrap seed");
    ctail->add_flag("--no-header", no_header, "input has no header row");
    ctail->add_option("--out", out_path, "output CSV")->required();

    CLI::App* cmarg =
        app.add_subcommand("marginal", "marginal pdf by CF inversion");
    cmarg->add_option("model", model_path, "model file")->required();
    cmarg->add_option("--dims", dims, "one or two dimension indices")
        ->required();
    cmarg->add_option("--min", lo, "grid lower bound");
    cmarg->add_option("--max", hi, "grid upper bound");
    cmarg->add_option("--points", points, "grid points per axis");
    cmarg->add_option("--out", out_path, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (cfit->parsed()) return cmd_fit(fit);
        if (csample->parsed())
            return cmd_sample(model_path, n_samples, seed, out_path);
        if (cgrid->parsed())
            return cmd_density_grid(model_path, bounds, res, dims, out_path);
        if (cclassify->parsed())
            return cmd_classify(model_path, classify_input, classify_cols,
                                no_header, out_path);
        if (ctail->parsed())
            return cmd_taildep(tail_input, cols, q_min, q_max, q_count,
                               bootstrap, seed, no_header, out_path);
        if (cmarg->parsed())
            return cmd_marginal(model_path, dims, lo, hi, points, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
