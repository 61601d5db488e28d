#include <doctest.h>

#include <cmath>

#include "momray/exactfield.hpp"
#include "momray/identities.hpp"

using namespace momray;

namespace {

Poly mono(int n, std::vector<int> a, int s, Rational c = 1) { return Poly::monomial(n, a, s, c); }

RadialPolyField scalar_radial(int n, int s) { return RadialPolyField::scalar(Poly::radial(n, s)); }

}  // namespace

TEST_CASE("term rule for partial derivatives") {
    auto r = Poly::radial(2, 1);
    CHECK(r.partial(0) == mono(2, {1, 0}, -1));
    CHECK(r.partial(0).partial(0) == mono(2, {0, 0}, -1) - mono(2, {2, 0}, -3));
    CHECK(Poly::constant(3, 5).partial(1).is_zero());
    // y_1^2 |y|^-1 + y_2^2 |y|^-1 = |y|
    CHECK(mono(2, {2, 0}, -1) + mono(2, {0, 2}, -1) == r);
    std::vector<double> y{0.3, -1.2};
    double R = std::hypot(y[0], y[1]);
    CHECK(r.partial(0).partial(0).eval(y) == doctest::Approx(1 / R - y[0] * y[0] / (R * R * R)));
}

TEST_CASE("inner derivative and divergence") {
    auto dr = inner_d(scalar_radial(2, 1));
    CHECK(dr[0] == mono(2, {1, 0}, -1));
    CHECK(dr[1] == mono(2, {0, 1}, -1));
    CHECK(canonical_eq(divergence(dr), scalar_radial(2, -1)));
    RadialPolyField c(3, 2);
    c[0] = Poly::constant(3, 2);
    CHECK(divergence(c).is_zero());
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto f = random_field(3, 1, seed, 2, true);
        CHECK(canonical_eq(inner_d(delta_mul(f)), delta_mul(inner_d(f))));
        CHECK(canonical_eq(inner_d(mul_y(f)) - mul_y(inner_d(f)), delta_mul(f)));
    }
}

TEST_CASE("contraction and multiplication by y") {
    CHECK(canonical_eq(contract_y(build_A(1, 1, 2)), scalar_radial(2, -1) * Rational(-1)));
    auto d = RadialPolyField(2, 2);
    d[0] = Poly::constant(2, 1);
    d[2] = Poly::constant(2, 1);
    auto jy = contract_y(d);
    CHECK(jy[0] == mono(2, {1, 0}, 0));
    CHECK(jy[1] == mono(2, {0, 1}, 0));
    auto iy = mul_y(RadialPolyField::scalar(Poly::constant(3, 1)));
    for (int a = 0; a < 3; ++a) {
        std::vector<int> al(3, 0);
        al[a] = 1;
        CHECK(iy[a] == mono(3, al, 0));
    }
}

TEST_CASE("A fields") {
    CHECK(canonical_eq(build_A(0, 0, 3), scalar_radial(3, -1)));
    const auto& A10 = build_A(1, 0, 2);
    std::vector<double> y{0.7, -1.3};
    double R = std::hypot(y[0], y[1]);
    CHECK(A10[0].eval(y) == doctest::Approx(1 / R - y[0] * y[0] / (R * R * R)));
    CHECK(A10[1].eval(y) == doctest::Approx(-y[0] * y[1] / (R * R * R)));
    CHECK(A10[2].eval(y) == doctest::Approx(1 / R - y[1] * y[1] / (R * R * R)));
    const auto& A11 = build_A(1, 1, 3);
    std::vector<double> z{0.4, 1.1, -0.6};
    double R3 = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
    for (int a = 0; a < 3; ++a) CHECK(A11[a].eval(z) == doctest::Approx(-z[a] / (R3 * R3 * R3)));
    int deg = 0;
    CHECK(homogeneous_degree(build_A(2, 1, 3), deg));
    CHECK(deg == -2);
    // divergence ladder
    for (int n = 2; n <= 4; ++n)
        for (int m = 1; m <= 3; ++m)
            for (int k = 0; k < m; ++k) {
                Rational c = (2 * m - 2 * k - 1) * (n + 2 * m - 2 * k - 3);
                CHECK(canonical_eq(divergence(build_A(m, k, n)), build_A(m, k + 1, n) * c));
            }
}

TEST_CASE("named identities") {
    IdentityParams p;
    p.m = 2;
    p.k = 1;
    p.n = 3;
    CHECK(check_identity("a_contraction", p).pass);
    p.m = 3;
    p.k = 2;
    CHECK(check_identity("a_contraction", p).pass);
    IdentityParams b;
    b.k = 4;
    auto r = check_identity("binomial_scalar", b);
    CHECK(r.pass);
    CHECK(r.params["a"] == "3/2");
    IdentityParams g;
    g.m = 2;
    g.n = 3;
    g.seed = 4;
    CHECK(check_identity("reconstruction", g).pass);
    CHECK(check_identity("final_assembly", g).pass);
    CHECK_THROWS_AS(check_identity("no_such_identity", g), std::invalid_argument);
    IdentityParams bad;
    bad.m = 1;
    bad.k = 3;
    CHECK_THROWS_AS(check_identity("a_contraction", bad), std::invalid_argument);
}

TEST_CASE("reconstruction from the algebraic system") {
    for (int n = 2; n <= 3; ++n)
        for (int m = 0; m <= 2; ++m) {
            auto g = random_field(n, m, 17 + m, 2);
            auto F = build_F(g, m);
            std::vector<RadialPolyField> H;
            for (int k = 0; k <= m; ++k) H.push_back(build_H(F, m, k, n));
            CHECK(canonical_eq(reconstruct_from_H(H, m), g));
        }
}
