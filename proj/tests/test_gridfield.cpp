#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "momray/coeffs.hpp"
#include "momray/gridfield.hpp"

using namespace momray;

namespace {

GridTensorField blob(const GridSpec& s, int m, std::vector<double> c, double w, SymTensor<double> t) {
    return gaussian_phantom(s, m, {GaussianBlob{c, w, t}});
}

SymTensor<double> unit(int n, int m) {
    SymTensor<double> t(n, m);
    t[0] = 1;
    return t;
}

// decaying field with seeded random tensor amplitudes
GridTensorField random_field(const GridSpec& s, int m, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<GaussianBlob> b;
    double L = s.L();
    for (int i = 0; i < 3; ++i) {
        GaussianBlob g;
        for (int a = 0; a < s.n; ++a) g.center.push_back(0.2 * L * u(rng));
        g.width = 0.1 * L * (1 + 0.3 * (u(rng) + 1));
        g.tensor = SymTensor<double>(s.n, m);
        for (std::size_t j = 0; j < g.tensor.size(); ++j) g.tensor[j] = u(rng);
        b.push_back(g);
    }
    return gaussian_phantom(s, m, b);
}

double max_abs(const std::vector<double>& v) {
    double r = 0;
    for (double x : v) r = std::max(r, std::fabs(x));
    return r;
}

}  // namespace

TEST_CASE("grid spec validation") {
    GridSpec s;
    CHECK_NOTHROW(s.validate());
    s.N = 255;
    CHECK_THROWS_AS(s.validate(), invalid_input);
    s = GridSpec{};
    s.n = 4;
    CHECK_THROWS_AS(s.validate(), invalid_input);
    GridSpec t;
    double x[2];
    node_coords(t, std::size_t(t.N / 2) * t.N + t.N / 2, x);
    CHECK(x[0] == 0.0);
    CHECK(x[1] == 0.0);
}

TEST_CASE("gaussian phantoms") {
    GridSpec s;
    auto f = blob(s, 0, {0.5, -0.25}, 1.0, unit(2, 0));
    double x[2];
    for (std::size_t lin : {std::size_t(0), std::size_t(33000), std::size_t(40000)}) {
        node_coords(s, lin, x);
        double r2 = (x[0] - 0.5) * (x[0] - 0.5) + (x[1] + 0.25) * (x[1] + 0.25);
        CHECK(f.comp(0)[lin] == doctest::Approx(std::exp(-r2)));
    }
    auto g = blob(s, 1, {0, 0}, 1.0, unit(2, 1));
    CHECK(max_abs(g.comp(1)) == 0.0);
    CHECK(max_abs(g.comp(0)) == doctest::Approx(1.0));
    double sum = 0;
    auto u = blob(s, 0, {0, 0}, 1.0, unit(2, 0));
    for (double v : u.comp(0)) sum += v;
    CHECK(sum * s.h * s.h == doctest::Approx(M_PI).epsilon(1e-10));
    GridSpec s3{3, 32, 0.25, 2};
    double sum3 = 0;
    auto u3 = blob(s3, 0, {0, 0, 0}, 0.6, unit(3, 0));
    for (double v : u3.comp(0)) sum3 += v;
    CHECK(sum3 * std::pow(s3.h, 3) == doctest::Approx(std::pow(M_PI, 1.5) * std::pow(0.6, 3)).epsilon(1e-8));
    CHECK_THROWS_AS(blob(s, 0, {0, 0}, 3.0, unit(2, 0)), invalid_input);
    CHECK_THROWS_AS(blob(s, 0, {14, 0}, 1.0, unit(2, 0)), invalid_input);
    CHECK_THROWS_AS(default_blobs(2, 3), invalid_input);
}

TEST_CASE("fourier transform of the self-dual gaussian") {
    GridSpec s;
    auto f = blob(s, 0, {0, 0}, std::sqrt(2.0), unit(2, 0));
    auto F = fft_field(f);
    const auto& ka = wave_abs(s);
    double err = 0;
    std::size_t H = s.M() / 2 + 1;
    for (std::size_t j = 0; j < ka.size(); ++j) {
        if (j % H == H - 1 || j / H == std::size_t(s.M() / 2)) continue;  // Nyquist rows are zeroed
        err = std::max(err, std::abs(F.c[0][j] - std::exp(-ka[j] * ka[j] / 2)));
    }
    CHECK(err <= 1e-6);

    auto r = random_field(s, 2, 3);
    auto back = ifft_field(fft_field(r));
    CHECK(rel_error(back, r, 1.0) <= 1e-12);

    auto a = random_field(s, 1, 4), b = random_field(s, 1, 5);
    auto Fa = fft_field(a), Fb = fft_field(b), Fab = fft_field(a * 2.0 + b);
    double lin = 0;
    for (std::size_t i = 0; i < Fa.ncomp(); ++i)
        for (std::size_t j = 0; j < ka.size(); ++j)
            lin = std::max(lin, std::abs(Fab.c[i][j] - 2.0 * Fa.c[i][j] - Fb.c[i][j]));
    CHECK(lin <= 1e-12);
}

TEST_CASE("half power of the laplacian") {
    GridSpec s;
    CHECK(max_abs(frac_laplacian(GridTensorField(s, 0)).comp(0)) == 0.0);
    auto f = blob(s, 0, {0, 0}, std::sqrt(2.0), unit(2, 0));
    auto P = frac_laplacian(f);
    // radial oracle: int_0^inf r^2 exp(-r^2/2) J0(r rho) dr
    auto oracle = [](double rho) {
        const int K = 40000;
        const double R = 14, dr = R / K;
        double acc = 0;
        for (int i = 1; i < K; ++i) {
            double r = i * dr;
            acc += r * r * std::exp(-r * r / 2) * std::cyl_bessel_j(0.0, r * rho);
        }
        return acc * dr;
    };
    double ref0 = oracle(0);
    for (int j = 0; j < 10; ++j) {
        int i0 = s.N / 2 + j, i1 = s.N / 2 + (j * 7) / 10;
        double rho = std::hypot(s.coord(i0), s.coord(i1));
        double v = P.comp(0)[std::size_t(i0) * s.N + i1];
        CHECK(std::fabs(v - oracle(rho)) <= 1e-3 * ref0);
    }
    // shifting the phantom by whole cells shifts the result
    auto g = blob(s, 0, {8 * s.h, -5 * s.h}, std::sqrt(2.0), unit(2, 0));
    auto Pg = frac_laplacian(g);
    double diff = 0;
    for (int i = 40; i < s.N - 40; ++i)
        for (int j = 40; j < s.N - 40; ++j)
            diff = std::max(diff, std::fabs(Pg.comp(0)[std::size_t(i + 8) * s.N + (j - 5)] -
                                            P.comp(0)[std::size_t(i) * s.N + j]));
    CHECK(diff <= 1e-6 * ref0);
}

TEST_CASE("spectral d and div") {
    GridSpec s;
    // constant away from a smooth roll-off at the box edge
    GridTensorField c(s, 1);
    c.comp(0) = edge_taper(s);
    auto dc = spectral_d(c);
    double inside = 0;
    for (int i = s.N / 4; i < 3 * s.N / 4; ++i)
        for (int j = s.N / 4; j < 3 * s.N / 4; ++j)
            for (std::size_t q = 0; q < dc.ncomp(); ++q)
                inside = std::max(inside, std::fabs(dc.comp(q)[std::size_t(i) * s.N + j]));
    CHECK(inside < 1e-8);

    for (int m = 0; m <= 2; ++m) {
        auto f = random_field(s, m, 10 + m), g = random_field(s, m + 1, 20 + m);
        double lhs = inner(spectral_d(f), g), rhs = -inner(f, spectral_div(g));
        CHECK(std::fabs(lhs - rhs) <= 1e-8 * std::fabs(lhs));
    }

    auto f = blob(s, 0, {0.3, -0.2}, 0.9, unit(2, 0));
    auto df = spectral_d(f);
    double x[2], err = 0, ref = 0;
    for (std::size_t lin = 0; lin < s.nodes(); ++lin) {
        node_coords(s, lin, x);
        double g = std::exp(-((x[0] - 0.3) * (x[0] - 0.3) + (x[1] + 0.2) * (x[1] + 0.2)) / 0.81);
        double gx = -2 * (x[0] - 0.3) / 0.81 * g, gy = -2 * (x[1] + 0.2) / 0.81 * g;
        err = std::max({err, std::fabs(df.comp(0)[lin] - gx), std::fabs(df.comp(1)[lin] - gy)});
        ref = std::max(ref, std::fabs(gx));
    }
    CHECK(err <= 1e-8 * ref);
}

TEST_CASE("pointwise algebra") {
    GridSpec s{2, 16, 0.25, 2};
    GridTensorField d(s, 2);
    for (std::size_t lin = 0; lin < s.nodes(); ++lin) d.set(lin, kronecker<double>(2));
    auto jx = contract_x(d);
    double x[2];
    for (std::size_t lin = 0; lin < s.nodes(); ++lin) {
        node_coords(s, lin, x);
        CHECK(jx.comp(0)[lin] == x[0]);
        CHECK(jx.comp(1)[lin] == x[1]);
    }
    auto r = random_field(s, 3, 7);
    auto j2 = contract_x_pow(r, 2);
    for (std::size_t lin = 0; lin < s.nodes(); ++lin) {
        node_coords(s, lin, x);
        auto want = contract(r.at(lin), vector_power<double>({x[0], x[1]}, 2));
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(j2.comp(i)[lin] == doctest::Approx(want[i]));
    }
    std::size_t origin = std::size_t(s.N / 2) * s.N + s.N / 2;
    CHECK(j2.comp(0)[origin] == 0.0);

    auto u = random_field(s, 1, 8);
    auto xu = mul_xpow(u, 2);
    for (std::size_t lin = 0; lin < s.nodes(); lin += 17) {
        node_coords(s, lin, x);
        auto want = sym_mul(vector_power<double>({x[0], x[1]}, 2), u.at(lin));
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(xu.comp(i)[lin] == doctest::Approx(want[i]));
    }
    auto t = trace(delta_mul(u));
    CHECK(rel_error(t, u * (4.0 / 3.0), 1.0) < 1e-14);  // j i u = (n + 2) u / 3 for a vector
}

TEST_CASE("the D operators for small rank") {
    GridSpec s;
    auto f = random_field(s, 0, 30);
    CHECK(rel_error(apply_D(f, 0, 0), f * c_coeff(0, 2, 0), 1.0) < 1e-14);
    for (int n = 2; n <= 3; ++n) {
        GridSpec sn = n == 2 ? s : GridSpec{3, 32, 0.25, 2};
        auto u = random_field(sn, 1, 31);
        double c = c_coeff(1, n, 0) * double_factorial_d(n - 1);
        auto want = (u + spectral_d(contract_x(u)) * (1.0 / (n - 1))) * c;
        CHECK(rel_error(apply_D(u, 1, 0), want, 1.0) <= 1e-10);
    }
    CHECK_THROWS(apply_D(f, 1, 0));
}

TEST_CASE("relative error") {
    GridSpec s{2, 32, 0.25, 2};
    auto g = random_field(s, 1, 40);
    CHECK(rel_error(g, g) == 0.0);
    CHECK(rel_error(GridTensorField(s, 1), g) == doctest::Approx(1.0));
    CHECK(rel_error(g * 1.03, g) == doctest::Approx(0.03));
    CHECK_THROWS(rel_error(g, GridTensorField(s, 1)));
}

TEST_CASE("taper") {
    GridSpec s;
    auto t = edge_taper(s);
    CHECK(t[std::size_t(s.N / 2) * s.N + s.N / 2] == doctest::Approx(1.0));
    CHECK(t[0] < 1e-6);
}

TEST_CASE("field container") {
    GridSpec s{3, 16, 0.5, 2};
    auto f = random_field(s, 2, 50);
    auto dir = std::filesystem::temp_directory_path() / "momray_field_test";
    std::filesystem::create_directories(dir);
    write_field(f, (dir / "f.bin").string());
    auto g = read_field((dir / "f.bin").string());
    CHECK(g.spec() == s);
    CHECK(g.rank() == 2);
    CHECK(rel_error(g, f, 1.0) == 0.0);
    write_slice_csv(f, (dir / "f.csv").string());
    write_profile_csv(f, (dir / "p.csv").string());
    CHECK(std::filesystem::file_size(dir / "f.csv") > 0);
    CHECK_THROWS_AS(read_field((dir / "missing.bin").string()), invalid_input);
    std::filesystem::remove_all(dir);
}
