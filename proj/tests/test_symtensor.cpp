#include <doctest.h>

#include <random>

#include "momray/symtensor.hpp"

using namespace momray;

namespace {

SymTensor<Rational> random_tensor(int n, int m, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
    SymTensor<Rational> t(n, m);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = Rational(num(rng), den(rng));
        t[i].canonicalize();
    }
    return t;
}

// sum over all n^m index tuples, no symmetry used
Rational brute_pair(const SymTensor<Rational>& u, const SymTensor<Rational>& v) {
    auto a = densify(u), b = densify(v);
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// dense j_v u over all index tuples
SymTensor<Rational> brute_contract(const SymTensor<Rational>& u, const SymTensor<Rational>& v) {
    int n = u.n(), ru = u.rank(), rv = v.rank();
    auto a = densify(u), b = densify(v);
    std::size_t outer = 1, inner = 1;
    for (int i = 0; i < ru - rv; ++i) outer *= n;
    for (int i = 0; i < rv; ++i) inner *= n;
    std::vector<Rational> out(outer, Rational(0));
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t q = 0; q < inner; ++q) out[o] += a[o * inner + q] * b[q];
    return symmetrize(out, n, ru - rv);
}

}  // namespace

TEST_CASE("dimension of S^m") {
    CHECK(dim(3, 2) == 6);
    CHECK(dim(5, 0) == 1);
    CHECK(dim(2, 4) == 5);
    for (int n = 2; n <= 4; ++n)
        for (int m = 0; m <= 5; ++m) {
            const auto& T = index_table(n, m);
            CHECK(static_cast<std::int64_t>(T.size()) == dim(n, m));
            std::int64_t total = 0, nm = 1;
            for (auto w : T.mult) total += w;
            for (int i = 0; i < m; ++i) nm *= n;
            CHECK(total == nm);
        }
}

TEST_CASE("symmetrize") {
    std::vector<Rational> e12{0, 1, 0, 0};
    auto s = symmetrize(e12, 2, 2);
    CHECK(s.at({0, 1}) == Rational(1, 2));
    CHECK(s.at({0, 0}) == 0);
    CHECK(s.at({1, 1}) == 0);

    std::vector<Rational> d3(8, Rational(0));
    d3[1] = 1;  // (1,1,2)
    auto s3 = symmetrize(d3, 2, 3);
    CHECK(s3.at({0, 0, 1}) == Rational(1, 3));
    CHECK(s3.at({0, 1, 0}) == Rational(1, 3));

    std::mt19937_64 rng(7);
    auto u = random_tensor(3, 3, rng);
    CHECK(symmetrize(densify(u), 3, 3) == u);
    CHECK_THROWS_AS(symmetrize(std::vector<Rational>(5), 2, 2), shape_error);
}

TEST_CASE("dot") {
    auto d = kronecker<Rational>(3);
    CHECK(dot(d, d) == 3);
    auto e1 = vector_tensor<Rational>({1, 0}), e2 = vector_tensor<Rational>({0, 1});
    auto u = sym_mul(e1, e2);
    CHECK(u.at({0, 1}) == Rational(1, 2));
    CHECK(dot(u, u) == Rational(1, 2));
    CHECK(dot(u, SymTensor<Rational>(2, 2)) == 0);
    std::mt19937_64 rng(3);
    for (int m = 0; m <= 3; ++m) {
        auto a = random_tensor(3, m, rng), b = random_tensor(3, m, rng);
        CHECK(dot(a, b) == brute_pair(a, b));
    }
    CHECK_THROWS_AS(dot(d, kronecker<Rational>(2)), shape_error);
}

TEST_CASE("sym_mul") {
    std::vector<Rational> y{2, -3, Rational(1, 2)};
    auto yv = vector_tensor(y);
    auto p = SymTensor<Rational>::scalar(3, 1);
    for (int k = 1; k <= 4; ++k) {
        p = sym_mul(yv, p);
        CHECK(p == vector_power(y, k));
    }
    std::mt19937_64 rng(11);
    auto u = random_tensor(3, 2, rng);
    CHECK(sym_mul(u, SymTensor<Rational>::scalar(3, 1)) == u);
    // symmetrisation of the dense outer product
    auto v = random_tensor(3, 1, rng);
    auto a = densify(u), b = densify(v);
    std::vector<Rational> outer;
    for (auto& x : a)
        for (auto& z : b) outer.push_back(x * z);
    CHECK(sym_mul(u, v) == symmetrize(outer, 3, 3));
}

TEST_CASE("contract and its adjointness with sym_mul") {
    auto d = kronecker<Rational>(2);
    auto e1 = vector_tensor<Rational>({1, 0});
    CHECK(contract(d, e1) == e1);
    std::mt19937_64 rng(5);
    auto u = random_tensor(3, 2, rng);
    CHECK(contract(u, SymTensor<Rational>::scalar(3, 1)) == u);
    for (int m = 0; m <= 3; ++m)
        for (int k = 0; k <= 3; ++k) {
            auto a = random_tensor(3, m + k, rng), v = random_tensor(3, k, rng), w = random_tensor(3, m, rng);
            CHECK(contract(a, v) == brute_contract(a, v));
            // <a, v w> = <j_v a, w>
            CHECK(dot(a, sym_mul(v, w)) == dot(contract(a, v), w));
        }
    CHECK_THROWS_AS(contract(e1, d), shape_error);
}

TEST_CASE("delta_mul and trace") {
    auto one = SymTensor<Rational>::scalar(2, 1);
    CHECK(delta_mul(one) == kronecker<Rational>(2));
    CHECK(trace(delta_mul(SymTensor<Rational>::scalar(3, 1)))[0] == 3);
    CHECK(trace(kronecker<Rational>(4))[0] == 4);
    std::vector<Rational> y{3, -1, 2};
    CHECK(trace(vector_power(y, 2))[0] == 14);
    std::mt19937_64 rng(9);
    for (int m = 0; m <= 3; ++m) {
        auto u = random_tensor(3, m, rng), w = random_tensor(3, m + 2, rng);
        auto yv = vector_tensor(y);
        CHECK(delta_mul(sym_mul(yv, u)) == sym_mul(yv, delta_mul(u)));
        CHECK(dot(delta_mul(u), w) == dot(u, trace(w)));
    }
    CHECK_THROWS_AS(trace(vector_tensor(y)), shape_error);
}

TEST_CASE("permuted index access") {
    SymTensor<double> t(3, 3);
    t.at({2, 0, 1}) = 4.5;
    CHECK(t.at({0, 1, 2}) == 4.5);
    CHECK(t.at({1, 2, 0}) == 4.5);
    CHECK(index_name({0, 1, 2}) == "1,2,3");
    CHECK_THROWS_AS(t.at({0, 1}), shape_error);
}
