#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "msgh/em.hpp"
#include "msgh/nig_em.hpp"

namespace msgh {

/// On-disk model document: versioned JSON with per-component parameters,
/// orientation matrices row-major, and fit metadata including an echo of
/// the fitting configuration. Loads re-validate invariants (orthogonal D,
/// positive scales).
struct ModelFile {
    int schema_version = 1;
    std::string kind;  // "msnig" or "nig"
    MixtureModel msnig;
    NigMixtureModel nig;
    std::vector<std::string> columns;  // names of the fitted variables
    double loglik = 0.0;
    double bic = 0.0;
    int n_iter = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> config_echo;

    int k() const { return kind == "nig" ? nig.k() : msnig.k(); }
    int dim() const { return kind == "nig" ? nig.dim() : msnig.dim(); }
};

ModelFile load_model(const std::string& path);

/// Serializes with shortest round-trip doubles and sorted keys, so equal
/// models produce byte-identical files; written atomically.
void save_model(const std::string& path, const ModelFile& model);

}  // namespace msgh
