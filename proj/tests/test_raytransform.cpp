#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "momray/raytransform.hpp"

using namespace momray;

namespace {

GridTensorField gauss(const GridSpec& s, int m, double w, std::vector<double> c = {}) {
    if (c.empty()) c.assign(s.n, 0.0);
    SymTensor<double> t(s.n, m);
    t[0] = 1;
    return gaussian_phantom(s, m, {GaussianBlob{c, w, t}});
}

double dotv(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace

TEST_CASE("direction sets") {
    GridSpec s2;
    auto L2 = make_lines(s2, {});
    CHECK(L2.ndirs() == 360);
    CHECK(L2.total_weight() == doctest::Approx(2 * M_PI).epsilon(1e-12));
    CHECK(L2.n_off % 2 == 1);
    CHECK(L2.offset((L2.n_off - 1) / 2) == 0.0);
    GridSpec s3{3, 32, 0.25, 2};
    auto L3 = make_lines(s3, {});
    CHECK(L3.ndirs() == 64 * 128);
    CHECK(std::fabs(L3.total_weight() - 4 * M_PI) <= 1e-10);
    for (const auto* L : {&L2, &L3})
        for (std::size_t d = 0; d < L->ndirs(); ++d) {
            const auto& xi = L->dirs[d];
            CHECK(std::fabs(dotv(xi, xi) - 1) <= 1e-14);
            for (int b = 0; b < L->n - 1; ++b) {
                const auto& e = L->frames[d][b];
                CHECK(std::fabs(dotv(e, xi)) <= 1e-12);
                CHECK(std::fabs(dotv(e, e) - 1) <= 1e-12);
            }
            if (L->n == 3) CHECK(std::fabs(dotv(L->frames[d][0], L->frames[d][1])) <= 1e-12);
        }
    LineConfig bad;
    bad.n_theta = 0;
    CHECK_THROWS_AS(make_lines(s2, bad), invalid_input);
}

TEST_CASE("line integrals of a gaussian") {
    GridSpec s;
    auto f = gauss(s, 0, 1.0);
    auto L = make_lines(s, {});
    REQUIRE(L.dirs[0][0] == 1.0);
    auto g0 = forward(f, L, 0);
    auto g1 = forward(f, L, 1);
    int c = (L.n_off - 1) / 2;
    CHECK(g0.at(0, c) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-6));
    CHECK(std::fabs(g1.at(0, c)) <= 1e-12);
    for (int j : {3, 8, 12}) {
        double r = L.offset(c + j);
        CHECK(g0.at(0, c + j) == doctest::Approx(std::sqrt(M_PI) * std::exp(-r * r)).epsilon(1e-6));
    }
    CHECK(g0.boundary_leak < 1e-12);
    CHECK_THROWS(forward(f, L, -1));
}

TEST_CASE("shifted parameter along the line") {
    // int t^k p(x + t xi) dt = sum_l C(k,l) tau^(k-l) int u^l p(x + tau xi + u xi) du
    GridSpec s;
    auto f = gaussian_phantom(s, 1, default_blobs(2, 1));
    auto L = make_lines(s, {});
    int c = (L.n_off - 1) / 2, j = 5;
    double x0 = 0, x1 = L.offset(c + j);
    for (int k = 0; k <= 1; ++k) {
        double direct = forward(f, L, k).at(0, c + j);
        int tau = 7;  // cells
        double alt = 0;
        for (int l = 0; l <= k; ++l) {
            double acc = 0;
            for (int u = -s.N; u <= s.N; ++u) {
                int i0 = int(std::lround((x0 + (tau + u) * s.h) / s.h)) + s.N / 2;
                int i1 = int(std::lround(x1 / s.h)) + s.N / 2;
                if (i0 < 0 || i0 >= s.N) continue;
                double p = f.comp(0)[std::size_t(i0) * s.N + i1];
                acc += std::pow(u * s.h, l) * p * s.h;
            }
            alt += (l == k ? 1.0 : k * tau * s.h) * acc;
        }
        CHECK(std::fabs(direct - alt) <= 1e-8 * std::max(1.0, std::fabs(direct)));
    }
}

TEST_CASE("adjoint basics") {
    GridSpec s{2, 64, 0.125, 2};
    auto L = make_lines(s, {});
    Sinogram z;
    z.m = 0;
    z.k = 0;
    z.lines = L;
    z.v.assign(L.ndirs() * L.lines_per_dir(), 0.0);
    auto a0 = adjoint(z, s);
    CHECK(l2_norm(a0, 1.0) == 0.0);

    // phi = 1 for |s| <= R
    double R = 2.0;
    Sinogram one = z;
    for (std::size_t d = 0; d < L.ndirs(); ++d)
        for (int o = 0; o < L.n_off; ++o) one.at(d, o) = std::fabs(L.offset(o)) <= R ? 1.0 : 0.0;
    auto a1 = adjoint(one, s);
    int N = s.N;
    auto at = [&](int i, int j) { return a1.comp(0)[std::size_t(i) * N + j]; };
    for (int i = 4; i < N - 4; i += 5)
        for (int j = 4; j < N - 4; j += 3) {
            // 90 degree rotation about the centre node
            int ri = N / 2 - (j - N / 2), rj = N / 2 + (i - N / 2);
            CHECK(at(i, j) == doctest::Approx(at(ri, rj)).epsilon(1e-12));
        }
    CHECK(at(N / 2 + 3, N / 2 - 2) == doctest::Approx(2 * M_PI).epsilon(1e-12));
}

TEST_CASE("pairing with the adjoint") {
    GridSpec s{2, 128, 0.0625, 2};
    auto L = make_lines(s, {});
    for (int m = 0; m <= 1; ++m)
        for (int k = 0; k <= m; ++k) {
            auto f = gaussian_phantom(s, m, default_blobs(2, m, 0.5));
            auto phi = smooth_sinogram(L, m, k, 0.6, 7);
            double lhs = sinogram_inner(forward(f, L, k), phi);
            double rhs = inner(f, adjoint(phi, s));
            CHECK(std::fabs(lhs - rhs) <= 1e-3 * std::fabs(lhs));
        }
}

TEST_CASE("composed normal operator") {
    GridSpec s{2, 64, 0.125, 2};
    auto f = gauss(s, 0, 0.6);
    auto L = make_lines(s, {});
    auto N = normal_compose(f, L, 0);
    int n = s.N;
    double mn = 1e300;
    for (double v : N.comp(0)) mn = std::min(mn, v);
    CHECK(mn > 0);
    auto at = [&](int i, int j) { return N.comp(0)[std::size_t(i) * n + j]; };
    CHECK(at(n / 2 + 5, n / 2 + 2) == doctest::Approx(at(n / 2 - 2, n / 2 + 5)).epsilon(1e-10));
    CHECK(at(n / 2 + 5, n / 2 + 2) == doctest::Approx(at(n / 2 + 2, n / 2 + 5)).epsilon(1e-10));

    auto a = gaussian_phantom(s, 1, default_blobs(2, 1, 0.5));
    SymTensor<double> v(2, 1);
    v[0] = -0.4, v[1] = 0.9;
    auto b = gaussian_phantom(s, 1, {GaussianBlob{{0.2, 0.1}, 0.4, v}});
    for (int k = 0; k <= 1; ++k) {
        auto lhs = normal_compose(a * 2.0 + b, L, k);
        auto rhs = normal_compose(a, L, k) * 2.0 + normal_compose(b, L, k);
        CHECK(rel_error(lhs, rhs, 1.0) <= 1e-12);
        LineConfig anti;
        anti.antipodal = true;
        auto La = make_lines(s, anti);
        CHECK(rel_error(normal_compose(a, La, k), normal_compose(a, L, k), 1.0) <= 1e-10);
    }
}

TEST_CASE("fourier slice residual") {
    GridSpec s;
    auto f = gaussian_phantom(s, 0, default_blobs(2, 0));
    auto L = make_lines(s, {});
    CHECK(slice_residual(f, 0, L).residual <= 1e-2);
    CHECK(slice_residual(GridTensorField(s, 0), 0, L).residual == 0.0);
    // coarse t rules: the residual follows the step until sampling of f dominates
    LineConfig c;
    c.cubic = true;
    double prev = 1e300;
    for (double st : {8.0, 4.0, 2.0}) {
        c.t_step = st * s.h;
        double r = slice_residual(f, 0, make_lines(s, c)).residual;
        CHECK(r < prev);
        prev = r;
    }
    GridSpec s3{3, 16, 0.5, 2};
    CHECK_THROWS_AS(slice_residual(gauss(s3, 0, 1.0), 0, make_lines(s3, {})), invalid_input);
}

TEST_CASE("sinogram container") {
    GridSpec s{2, 32, 0.25, 2};
    auto L = make_lines(s, {});
    auto g = forward(gaussian_phantom(s, 1, default_blobs(2, 1, 0.5)), L, 1);
    auto p = std::filesystem::temp_directory_path() / "momray_sino_test.bin";
    write_sinogram(g, p.string());
    auto h = read_sinogram(p.string());
    CHECK(h.m == 1);
    CHECK(h.k == 1);
    CHECK(h.lines.ndirs() == L.ndirs());
    CHECK(h.lines.n_off == L.n_off);
    CHECK(h.v == g.v);
    std::filesystem::remove(p);
}
