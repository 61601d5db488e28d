#include <doctest.h>

#include <cmath>

#include "momray/inversion.hpp"
#include "momray/kernel.hpp"

using namespace momray;

namespace {

GridTensorField centred(const GridSpec& s, double w) {
    SymTensor<double> one(s.n, 0);
    one[0] = 1;
    return gaussian_phantom(s, 0, {GaussianBlob{std::vector<double>(s.n, 0.0), w, one}});
}

std::size_t origin(const GridSpec& s) {
    std::size_t lin = 0;
    for (int a = 0; a < s.n; ++a) lin = lin * s.N + s.N / 2;
    return lin;
}

}  // namespace

TEST_CASE("regularised lattice sums") {
    CHECK(lattice_zeta({0, 0}, 1) == doctest::Approx(3.9002649200).epsilon(1e-9));
    CHECK(lattice_zeta({1, 0}, 3) == 0.0);
    // x1^2 + x2^2 over |x|^3 is |x|^-1
    CHECK(lattice_zeta({2, 0}, 3) + lattice_zeta({0, 2}, 3) ==
          doctest::Approx(lattice_zeta({0, 0}, 1)).epsilon(1e-10));
    CHECK(lattice_zeta({2, 0}, 3) == doctest::Approx(lattice_zeta({0, 2}, 3)).epsilon(1e-12));
}

TEST_CASE("origin stencil is symmetric") {
    const auto& st = origin_correction({0, 0}, 1);
    double total = 0;
    for (const auto& w : st) total += w.w;
    // weights reproduce the zeroth moment, which is the lattice sum itself
    CHECK(total == doctest::Approx(lattice_zeta({0, 0}, 1)).epsilon(1e-10));
    for (const auto& a : st)
        for (const auto& b : st)
            if (a.offset[0] == -b.offset[0] && a.offset[1] == -b.offset[1]) CHECK(a.w == doctest::Approx(b.w));
}

TEST_CASE("scalar normal operator against the radial integral") {
    // 2 int exp(-|z|^2/w^2) |z|^(1-n) dz at the centre
    GridSpec s2;
    auto f2 = centred(s2, 1.0);
    auto N2 = normal_kernel(f2, 0);
    CHECK(N2.comp(0)[origin(s2)] == doctest::Approx(2 * std::pow(M_PI, 1.5)).epsilon(1e-3));
    double mn = 1e300;
    for (double v : N2.comp(0)) mn = std::min(mn, v);
    CHECK(mn > 0);

    GridSpec s3{3, 48, 0.25, 2};
    auto f3 = centred(s3, 0.9);
    auto N3 = normal_kernel(f3, 0);
    CHECK(N3.comp(0)[origin(s3)] == doctest::Approx(4 * std::pow(M_PI, 1.5) * 0.9).epsilon(2e-3));
}

TEST_CASE("multiplier of the scalar normal operator") {
    // FFT(N f) / f^ = 4 pi / |y| in the plane
    GridSpec s;
    auto f = gaussian_phantom(s, 0, default_blobs(2, 0));
    auto N = normal_kernel(f, 0);
    double c = measured_inversion_constant(f, N);
    CHECK(c == doctest::Approx(1 / (4 * M_PI)).epsilon(0.02));
}

TEST_CASE("kernel route is linear") {
    GridSpec s{2, 64, 0.25, 2};
    auto a = gaussian_phantom(s, 1, default_blobs(2, 1));
    auto b = smooth_noise(s, 1, 1.0, 3);
    auto lhs = normal_kernel(a * 2.0 + b, 1);
    auto rhs = normal_kernel(a, 1) * 2.0 + normal_kernel(b, 1);
    CHECK(rel_error(lhs, rhs, 1.0) < 1e-12);
    CHECK_THROWS(normal_kernel(a, 2));
}
