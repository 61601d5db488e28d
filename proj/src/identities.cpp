#include "momray/identities.hpp"

#include <chrono>
#include <random>
#include <stdexcept>

#include "momray/coeffs.hpp"

namespace momray {

namespace {

Rational q_of(const Integer& z) { return Rational(z); }

Rational sign(int e) { return (e % 2) ? Rational(-1) : Rational(1); }

struct Sides {
    RadialPolyField lhs;
    RadialPolyField rhs;
};

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

RadialPolyField zero_like(int n, int m) { return RadialPolyField(n, m); }

// j_y A^(m,k) = -k A^(m-1,k-1)
Sides a_contraction(const IdentityParams& p) {
    require(p.m >= 1 && p.k >= 0 && p.k <= p.m, "a_contraction needs m >= 1, 0 <= k <= m");
    Sides s;
    s.lhs = contract_y(build_A(p.m, p.k, p.n));
    s.rhs = p.k == 0 ? zero_like(p.n, 2 * p.m - 1) : build_A(p.m - 1, p.k - 1, p.n) * Rational(-p.k);
    return s;
}

// div A^(m,k) = (2m-2k-1)(n+2m-2k-3) A^(m,k+1)
Sides a_divergence(const IdentityParams& p) {
    require(p.m >= 1 && p.k >= 0 && p.k <= p.m - 1, "a_divergence needs 0 <= k <= m-1");
    Sides s;
    s.lhs = divergence(build_A(p.m, p.k, p.n));
    s.rhs = build_A(p.m, p.k + 1, p.n) * Rational((2 * p.m - 2 * p.k - 1) * (p.n + 2 * p.m - 2 * p.k - 3));
    return s;
}

Sides a_divergence_power(const IdentityParams& p) {
    require(p.m >= 0 && p.k >= 0 && p.k <= p.m, "a_divergence_power needs 0 <= k <= m");
    int m = p.m, k = p.k, n = p.n;
    Sides s;
    s.lhs = divergence_pow(build_A(m, 0, n), k);
    Rational c(double_factorial(2 * m - 1) * double_factorial(n + 2 * m - 3),
               double_factorial(2 * m - 2 * k - 1) * double_factorial(n + 2 * m - 2 * k - 3));
    c.canonicalize();
    s.rhs = build_A(m, k, n) * c;
    return s;
}

Sides div_system(const IdentityParams& p) {
    int m = p.m, k = p.k, l = p.l, n = p.n;
    require(m >= 0 && k >= 0 && k <= m && l >= 0 && l <= m - k, "div_system needs 0 <= k <= m, 0 <= l <= m-k");
    RadialPolyField g = random_field(n, m, p.seed);
    auto F = build_F(g, m);
    Sides s;
    s.lhs = contract(divergence_pow(build_A(m, 0, n), k), inner_d_pow(g, l));
    s.rhs = zero_like(n, m - k - l);
    for (int q = 0; q <= k; ++q)
        s.rhs += divergence_pow(F[k + l - q], q) * (sign(k + q) * q_of(binom_ext(k, q)));
    return s;
}

Sides algebraic_reduction(const IdentityParams& p) {
    int m = p.m, k = p.k, n = p.n;
    require(m >= 0 && k >= 0 && k <= m, "algebraic_reduction needs 0 <= k <= m");
    RadialPolyField g = random_field(n, m, p.seed);
    auto F = build_F(g, m);
    Sides s;
    s.lhs = contract(build_A(m, k, n), g);
    s.rhs = build_H(F, m, k, n);
    return s;
}

Sides index_split(const IdentityParams& p) {
    int m = p.m, k = p.k, n = p.n, a = p.axis;
    require(m >= 0 && k >= 0 && k <= m && a >= 0 && a < n, "index_split needs 0 <= k <= m, 0 <= axis < n");
    RadialPolyField g = random_field(n, m + 1, p.seed);
    RadialPolyField gt = contract_axis(g, a);
    Sides s;
    s.lhs = contract(build_A(m, k, n), gt);
    RadialPolyField r = contract_axis(contract(build_A(m + 1, k, n), g), a) * Rational(1, 2 * m - 2 * k + 1);
    r -= times_var(contract(build_A(m + 1, k + 1, n), g), a);
    if (k < m) r -= mul_axis(contract(build_A(m, k, n), g), a) * Rational(m - k);
    s.rhs = r * Rational(1, m + 1);
    return s;
}

Sides beta_expansion(const IdentityParams& p) {
    int m = p.m, n = p.n;
    require(m >= 0, "beta_expansion needs m >= 0");
    RadialPolyField g = random_field(n, m, p.seed);
    Sides s;
    s.lhs = contract(build_A(m, 0, n), g);
    s.rhs = times_radial(g, -1) * q_of(factorial(m) * double_factorial(2 * m - 1));
    for (int k = 1; k <= m; ++k) {
        RadialPolyField Ak = contract(build_A(m, k, n), g);
        for (int q = 0; q <= std::min(k, m - k); ++q) {
            Rational b = beta_closed(m, k, q);
            if (b == 0) continue;
            s.rhs += mul_y_pow(delta_mul_pow(contract_y_pow(Ak, q), q), k - q) * b;
        }
    }
    return s;
}

Sides reconstruction(const IdentityParams& p) {
    int m = p.m, n = p.n;
    require(m >= 0, "reconstruction needs m >= 0");
    RadialPolyField g = random_field(n, m, p.seed);
    std::vector<RadialPolyField> H;
    for (int k = 0; k <= m; ++k) H.push_back(contract(build_A(m, k, n), g));
    Sides s;
    s.lhs = g;
    s.rhs = reconstruct_from_H(H, m);
    return s;
}

// Same formula, with H built from the F data instead of from g directly.
Sides reconstruction_from_data(const IdentityParams& p) {
    int m = p.m, n = p.n;
    require(m >= 0, "reconstruction_from_data needs m >= 0");
    RadialPolyField g = random_field(n, m, p.seed);
    auto F = build_F(g, m);
    std::vector<RadialPolyField> H;
    for (int k = 0; k <= m; ++k) H.push_back(build_H(F, m, k, n));
    Sides s;
    s.lhs = g;
    s.rhs = reconstruct_from_H(H, m);
    return s;
}

// d^k i_y^l = sum_p C(k,p) l!/(p-k+l)! i_y^(p-k+l) i^(k-p) d^p
Sides d_iy_commutator(const IdentityParams& p) {
    int k = p.k, l = p.l;
    require(k >= 0 && l >= 0 && p.rank >= 0, "d_iy_commutator needs k, l, rank >= 0");
    RadialPolyField u = random_field(p.n, p.rank, p.seed, 2, true);
    Sides s;
    s.lhs = inner_d_pow(mul_y_pow(u, l), k);
    s.rhs = zero_like(p.n, p.rank + k + l);
    for (int q = std::max(0, k - l); q <= k; ++q) {
        Rational c = q_of(binom_ext(k, q) * factorial(l)) / q_of(factorial(q - k + l));
        s.rhs += mul_y_pow(delta_mul_pow(inner_d_pow(u, q), k - q), q - k + l) * c;
    }
    return s;
}

Sides d_iy_basic(const IdentityParams& p) {
    require(p.rank >= 0, "d_iy_basic needs rank >= 0");
    RadialPolyField u = random_field(p.n, p.rank, p.seed, 2, true);
    Sides s;
    s.lhs = inner_d(mul_y(u));
    s.rhs = delta_mul(u) + mul_y(inner_d(u));
    return s;
}

// j_y^l div^k = (-1)^k sum_p (-1)^p C(k,p) l!/(p-k+l)! j^(k-p) div^p j_y^(p-k+l)
Sides jy_div_commutator(const IdentityParams& p) {
    int k = p.k, l = p.l;
    require(k >= 0 && l >= 0 && p.rank >= k + l, "jy_div_commutator needs rank >= k + l");
    RadialPolyField u = random_field(p.n, p.rank, p.seed, 2, true);
    Sides s;
    s.lhs = contract_y_pow(divergence_pow(u, k), l);
    s.rhs = zero_like(p.n, p.rank - k - l);
    for (int q = std::max(0, k - l); q <= k; ++q) {
        Rational c = sign(k + q) * q_of(binom_ext(k, q) * factorial(l)) / q_of(factorial(q - k + l));
        s.rhs += trace_pow(divergence_pow(contract_y_pow(u, q - k + l), q), k - q) * c;
    }
    return s;
}

Sides final_assembly(const IdentityParams& p) {
    int m = p.m, n = p.n;
    require(m >= 0, "final_assembly needs m >= 0");
    RadialPolyField g = random_field(n, m, p.seed);
    auto F = build_F(g, m);
    Sides s;
    s.lhs = g * q_of(double_factorial(2 * m - 1) * double_factorial(n + 2 * m - 3));
    RadialPolyField acc = zero_like(n, m);
    for (int k = 0; k <= m; ++k) {
        for (int q = k; q <= m; ++q) {
            for (int r = 0; r <= std::min({q, m - q, q - k}); ++r) {
                Rational c = sign(k + q) * q_of(double_factorial(n + 2 * m - 2 * q - 3));
                c /= q_of(factorial(k) * (Integer(1) << r) * factorial(r) * factorial(m - q - r) *
                          factorial(q - k - r));
                RadialPolyField t = divergence_pow(F[k], q - k - r);
                t = mul_y_pow(delta_mul_pow(trace_pow(t, r), r), q - r);
                acc += t * c;
            }
        }
    }
    s.rhs = times_radial(acc, 1);
    return s;
}

IdentityReport scalar_report(const IdentityParams& p) {
    require(p.a != 0 && p.k >= 0, "binomial_scalar needs a != 0, k >= 0");
    Rational lhs = 0, rhs = 0;
    Rational s2 = p.a * p.a + p.b;
    for (int l = 0; l <= p.k; ++l) {
        Rational t = sign(l) * q_of(binom_ext(p.k, l));
        Rational x = 1;
        for (int i = 0; i < 2 * p.k - l; ++i) x *= s2;
        Rational y = 1;
        for (int i = 0; i < 2 * p.k - 2 * l; ++i) y *= p.a;
        lhs += t * x / y;
        Rational z = 1;
        for (int i = 0; i < p.k + l; ++i) z *= p.b;
        Rational w = 1;
        for (int i = 0; i < 2 * l; ++i) w *= p.a;
        rhs += q_of(binom_ext(p.k, l)) * z / w;
    }
    IdentityReport r;
    r.pass = (lhs == rhs);
    r.lhs_terms = r.rhs_terms = static_cast<std::size_t>(p.k + 1);
    return r;
}

using Checker = Sides (*)(const IdentityParams&);

struct Entry {
    const char* name;
    Checker fn;
};

const Entry kEntries[] = {
    {"a_contraction", a_contraction},
    {"a_divergence", a_divergence},
    {"a_divergence_power", a_divergence_power},
    {"div_system", div_system},
    {"algebraic_reduction", algebraic_reduction},
    {"index_split", index_split},
    {"beta_expansion", beta_expansion},
    {"reconstruction", reconstruction},
    {"reconstruction_from_data", reconstruction_from_data},
    {"d_iy_commutator", d_iy_commutator},
    {"d_iy_basic", d_iy_basic},
    {"jy_div_commutator", jy_div_commutator},
    {"final_assembly", final_assembly},
};

nlohmann::json params_json(const std::string& name, const IdentityParams& p) {
    nlohmann::json j;
    if (name == "binomial_scalar") {
        j["a"] = p.a.get_str();
        j["b"] = p.b.get_str();
        j["k"] = p.k;
        return j;
    }
    j["n"] = p.n;
    if (name == "d_iy_commutator" || name == "jy_div_commutator" || name == "d_iy_basic") {
        j["rank"] = p.rank;
        if (name != "d_iy_basic") {
            j["k"] = p.k;
            j["l"] = p.l;
        }
        j["seed"] = p.seed;
        return j;
    }
    j["m"] = p.m;
    if (name != "beta_expansion" && name != "reconstruction" && name != "reconstruction_from_data" &&
        name != "final_assembly")
        j["k"] = p.k;
    if (name == "div_system") j["l"] = p.l;
    if (name == "index_split") j["axis"] = p.axis + 1;
    bool seeded = !(name == "a_contraction" || name == "a_divergence" || name == "a_divergence_power");
    if (seeded) j["seed"] = p.seed;
    return j;
}

}  // namespace

std::vector<RadialPolyField> build_F(const RadialPolyField& g, int m) {
    std::vector<RadialPolyField> F;
    RadialPolyField dg = g;
    const RadialPolyField& A = build_A(m, 0, g.n());
    for (int l = 0; l <= m; ++l) {
        F.push_back(contract(A, dg));
        if (l < m) dg = inner_d(dg);
    }
    return F;
}

RadialPolyField build_H(const std::vector<RadialPolyField>& F, int m, int k, int n) {
    RadialPolyField H(n, m - k);
    for (int q = 0; q <= k; ++q) H += divergence_pow(F[q], k - q) * (sign(q) * q_of(binom_ext(k, q)));
    return H * h_factor(m, k, n);
}

RadialPolyField reconstruct_from_H(const std::vector<RadialPolyField>& H, int m) {
    int n = H.at(0).n();
    RadialPolyField acc(n, m);
    for (int k = 0; k <= m; ++k) {
        Rational ck = sign(k) * q_of(binom_ext(m, k)) / q_of(double_factorial(2 * m - 2 * k - 1));
        for (int q = 0; q <= std::min(k, m - k); ++q) {
            Rational c = ck * sign(q) * q_of(binom_ext(m - k, q)) / Rational(Integer(1) << q);
            RadialPolyField t = contract_y_pow(H[k], q);
            t = mul_y_pow(delta_mul_pow(t, q), k - q);
            acc += t * c;
        }
    }
    return times_radial(acc, 1) * (Rational(1) / q_of(factorial(m)));
}

nlohmann::json to_json(const IdentityReport& r) {
    return nlohmann::json{{"identity", r.identity},   {"params", r.params},
                          {"pass", r.pass},           {"elapsed_ms", r.elapsed_ms},
                          {"lhs_terms", r.lhs_terms}, {"rhs_terms", r.rhs_terms}};
}

const std::vector<std::string>& identity_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v{"binomial_scalar"};
        for (const auto& e : kEntries) v.push_back(e.name);
        return v;
    }();
    return names;
}

bool is_identity(const std::string& name) {
    for (const auto& s : identity_names())
        if (s == name) return true;
    return false;
}

IdentityReport check_identity(const std::string& name, const IdentityParams& p) {
    if (p.n < 2 || p.n > 6) throw std::invalid_argument("identity checks support 2 <= n <= 6");
    auto t0 = std::chrono::steady_clock::now();
    IdentityReport rep;
    if (name == "binomial_scalar") {
        rep = scalar_report(p);
    } else {
        const Entry* e = nullptr;
        for (const auto& x : kEntries)
            if (name == x.name) e = &x;
        if (!e) throw std::invalid_argument("unknown identity: " + name);
        Sides s = e->fn(p);
        rep.pass = canonical_eq(s.lhs, s.rhs);
        rep.lhs_terms = s.lhs.term_count();
        rep.rhs_terms = s.rhs.term_count();
    }
    rep.identity = name;
    rep.params = params_json(name, p);
    rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::vector<IdentityReport> run_identity_suite(const std::string& suite, const SuiteOptions& opt) {
    if (suite != "all" && !is_identity(suite)) throw std::invalid_argument("unknown suite: " + suite);
    std::vector<IdentityReport> out;
    auto want = [&](const char* s) { return suite == "all" || suite == s; };
    auto run = [&](const char* name, IdentityParams p) { out.push_back(check_identity(name, p)); };

    if (want("binomial_scalar")) {
        IdentityParams p;
        for (int k = 0; k <= 6; ++k) {
            p.k = k;
            run("binomial_scalar", p);
        }
        for (auto seed : opt.seeds) {
            std::mt19937_64 rng(seed);
            IdentityParams q;
            q.a = Rational(static_cast<long>(rng() % 15) + 1, static_cast<long>(rng() % 7) + 1);
            q.b = Rational(static_cast<long>(rng() % 21) - 10, static_cast<long>(rng() % 9) + 1);
            q.a.canonicalize();
            q.b.canonicalize();
            for (int k = 0; k <= 6; ++k) {
                q.k = k;
                run("binomial_scalar", q);
            }
        }
    }
    for (int n : opt.dims) {
        IdentityParams p;
        p.n = n;
        for (int m = 0; m <= opt.max_m_ladder; ++m) {
            p.m = m;
            for (int k = 0; k <= m; ++k) {
                p.k = k;
                if (m >= 1 && want("a_contraction")) run("a_contraction", p);
                if (k <= m - 1 && want("a_divergence")) run("a_divergence", p);
                if (want("a_divergence_power")) run("a_divergence_power", p);
            }
        }
        for (auto seed : opt.seeds) {
            p.seed = seed;
            for (int m = 0; m <= opt.max_m; ++m) {
                p.m = m;
                for (int k = 0; k <= m; ++k) {
                    p.k = k;
                    if (want("div_system"))
                        for (int l = 0; l <= m - k; ++l) {
                            p.l = l;
                            run("div_system", p);
                        }
                    if (want("algebraic_reduction")) run("algebraic_reduction", p);
                    if (want("index_split"))
                        for (int a = 0; a < n; ++a) {
                            p.axis = a;
                            run("index_split", p);
                        }
                    p.axis = 0;
                }
                p.k = 0;
                p.l = 0;
                if (want("beta_expansion")) run("beta_expansion", p);
                if (want("reconstruction")) run("reconstruction", p);
                if (want("reconstruction_from_data")) run("reconstruction_from_data", p);
                if (want("final_assembly")) run("final_assembly", p);
            }
            // operator commutators: k, l up to max_m, test field rank cycles with the seed
            for (int k = 0; k <= opt.max_m; ++k)
                for (int l = 0; l <= opt.max_m; ++l) {
                    p.k = k;
                    p.l = l;
                    p.rank = static_cast<int>(seed % 2);
                    if (want("d_iy_commutator")) run("d_iy_commutator", p);
                    p.rank = k + l + static_cast<int>(seed % 2);
                    if (want("jy_div_commutator")) run("jy_div_commutator", p);
                }
            p.k = p.l = 0;
            if (want("d_iy_basic"))
                for (int r = 0; r <= opt.max_m; ++r) {
                    p.rank = r;
                    run("d_iy_basic", p);
                }
        }
    }
    return out;
}

}  // namespace momray
