#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "momray/exactfield.hpp"

namespace momray {

struct IdentityParams {
    int m = 0;
    int k = 0;
    int l = 0;
    int n = 2;
    int axis = 0;   // fixed index for index_split
    int rank = 0;   // test field rank for the operator commutators
    std::uint64_t seed = 1;
    // scalar identity arguments
    Rational a = Rational(3, 2);
    Rational b = Rational(-1, 4);
};

struct IdentityReport {
    std::string identity;
    nlohmann::json params;
    bool pass = false;
    double elapsed_ms = 0;
    std::size_t lhs_terms = 0;
    std::size_t rhs_terms = 0;
};

nlohmann::json to_json(const IdentityReport& r);

// Names accepted by check_identity.
const std::vector<std::string>& identity_names();
bool is_identity(const std::string& name);

// Throws std::invalid_argument on an unknown name or parameters outside the
// identity's range.
IdentityReport check_identity(const std::string& name, const IdentityParams& p);

struct SuiteOptions {
    int max_m = 3;
    int max_m_ladder = 4;  // for the A-field ladder identities
    std::vector<int> dims{2, 3, 4};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

// Run one identity (or "all") over the parameter grid.
std::vector<IdentityReport> run_identity_suite(const std::string& suite, const SuiteOptions& opt);

// The solution formula for the algebraic system A^(m,k)/g = H^(m,k).
RadialPolyField reconstruct_from_H(const std::vector<RadialPolyField>& H, int m);
// F^(m,l) = A^(m,0) / (d^l g) for l = 0..m.
std::vector<RadialPolyField> build_F(const RadialPolyField& g, int m);
// H^(m,k) assembled from the F fields.
RadialPolyField build_H(const std::vector<RadialPolyField>& F, int m, int k, int n);

}  // namespace momray
