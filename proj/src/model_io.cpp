#include "msgh/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "msgh/csv.hpp"

namespace msgh {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json mat_to_json_rowmajor(const Eigen::MatrixXd& m)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    return out;
}

Eigen::VectorXd vec_from_json(const json& j)
{
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

Eigen::MatrixXd mat_from_json_rowmajor(const json& j, int rows, int cols)
{
    if (static_cast<int>(j.size()) != rows * cols)
        throw std::runtime_error("model file: matrix size mismatch");
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int c = 0; c < cols; ++c)
            m(i, c) = j[i * cols + c].get<double>();
    return m;
}

}  // namespace

void save_model(const std::string& path, const ModelFile& model)
{
    json doc;
    doc["schema_version"] = model.schema_version;
    doc["kind"] = model.kind;
    doc["K"] = model.k();
    json comps = json::array();
    if (model.kind == "msnig") {
        for (int c = 0; c < model.msnig.k(); ++c) {
            const MsghParams& p = model.msnig.components[c];
            json jc;
            jc["pi"] = model.msnig.pi[c];
            jc["mu"] = vec_to_json(p.mu);
            jc["D"] = mat_to_json_rowmajor(p.D);
            jc["A"] = vec_to_json(p.A);
            jc["beta"] = vec_to_json(p.beta);
            jc["lambda"] = vec_to_json(p.lambda);
            jc["gamma"] = vec_to_json(p.gamma);
            jc["delta"] = p.delta;
            comps.push_back(std::move(jc));
        }
    } else if (model.kind == "nig") {
        for (int c = 0; c < model.nig.k(); ++c) {
            const GhParams& p = model.nig.components[c];
            json jc;
            jc["pi"] = model.nig.pi[c];
            jc["mu"] = vec_to_json(p.mu);
            jc["sigma"] = mat_to_json_rowmajor(p.Sigma);
            jc["beta"] = vec_to_json(p.beta);
            jc["lambda"] = p.lambda;
            jc["gamma"] = p.gamma;
            jc["delta"] = p.delta;
            comps.push_back(std::move(jc));
        }
    } else {
        throw std::invalid_argument("save_model: kind must be msnig or nig");
    }
    doc["components"] = std::move(comps);
    doc["columns"] = model.columns;
    json fit;
    fit["loglik"] = model.loglik;
    fit["bic"] = model.bic;
    fit["n_iter"] = model.n_iter;
    fit["converged"] = model.converged;
    fit["seed"] = model.seed;
    fit["config"] = model.config_echo;
    doc["fit"] = std::move(fit);
    write_file_atomic(path, doc.dump(2) + "\n");
}

ModelFile load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": not a model file (" + e.what() + ")");
    }

    ModelFile model;
    model.schema_version = doc.at("schema_version").get<int>();
    if (model.schema_version != 1)
        throw std::runtime_error(path + ": unsupported schema version");
    model.kind = doc.at("kind").get<std::string>();
    const json& comps = doc.at("components");
    if (comps.empty()) throw std::runtime_error(path + ": no components");

    if (model.kind == "msnig") {
        const int m = static_cast<int>(comps[0].at("mu").size());
        model.msnig.pi.resize(comps.size());
        for (std::size_t c = 0; c < comps.size(); ++c) {
            const json& jc = comps[c];
            model.msnig.pi[c] = jc.at("pi").get<double>();
            MsghParams p;
            p.mu = vec_from_json(jc.at("mu"));
            p.D = mat_from_json_rowmajor(jc.at("D"), m, m);
            p.A = vec_from_json(jc.at("A"));
            p.beta = vec_from_json(jc.at("beta"));
            p.lambda = vec_from_json(jc.at("lambda"));
            p.gamma = vec_from_json(jc.at("gamma"));
            p.delta = jc.at("delta").get<double>();
            p.validate();  // re-checks orthogonality and positivity
            model.msnig.components.push_back(std::move(p));
        }
    } else if (model.kind == "nig") {
        const int m = static_cast<int>(comps[0].at("mu").size());
        model.nig.pi.resize(comps.size());
        for (std::size_t c = 0; c < comps.size(); ++c) {
            const json& jc = comps[c];
            model.nig.pi[c] = jc.at("pi").get<double>();
            GhParams p;
            p.mu = vec_from_json(jc.at("mu"));
            p.Sigma = mat_from_json_rowmajor(jc.at("sigma"), m, m);
            p.beta = vec_from_json(jc.at("beta"));
            p.lambda = jc.at("lambda").get<double>();
            p.gamma = jc.at("gamma").get<double>();
            p.delta = jc.at("delta").get<double>();
            p.validate();
            model.nig.components.push_back(std::move(p));
        }
    } else {
        throw std::runtime_error(path + ": unknown model kind '" + model.kind + "'");
    }

    const Eigen::VectorXd& pi =
        model.kind == "nig" ? model.nig.pi : model.msnig.pi;
    if (!(pi.array() > 0.0).all() || std::abs(pi.sum() - 1.0) > 1e-8)
        throw std::runtime_error(path + ": proportions must be positive and sum to 1");

    if (doc.contains("columns"))
        model.columns = doc.at("columns").get<std::vector<std::string>>();

    const json& fit = doc.at("fit");
    model.loglik = fit.at("loglik").get<double>();
    model.bic = fit.at("bic").get<double>();
    model.n_iter = fit.at("n_iter").get<int>();
    model.converged = fit.at("converged").get<bool>();
    model.seed = fit.at("seed").get<std::uint64_t>();
    if (fit.contains("config"))
        model.config_echo =
            fit.at("config").get<std::map<std::string, std::string>>();
    return model;
}

}  // namespace msgh
