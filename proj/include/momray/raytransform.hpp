#pragma once

#include <array>
#include <string>
#include <vector>

#include "momray/gridfield.hpp"

namespace momray {

struct LineConfig {
    int n_theta = 360;     // n = 2: uniform angles on the circle
    int n_polar = 64;      // n = 3: Gauss-Legendre nodes in cos(theta)
    int n_azimuth = 128;   // n = 3: uniform azimuths
    double ds = 0;         // offset spacing, 0 -> h
    double extent = 0;     // offsets cover |s_a| <= extent, 0 -> sqrt(n) L
    double t_step = 0;     // 0 -> h
    bool antipodal = false;  // replace every direction by its negative
    bool cubic = false;      // Catmull-Rom instead of multilinear sampling of f
};

using Vec3 = std::array<double, 3>;

// Oriented lines x = sum_a s_a e_a(xi) + t xi.
struct LineSet {
    int n = 2;
    std::vector<Vec3> dirs;
    std::vector<double> weights;
    std::vector<std::array<Vec3, 2>> frames;  // orthonormal basis of xi^perp (n-1 used)
    int n_off = 0;      // offsets per chart axis, odd, centred on 0
    double ds = 0;
    double t_step = 0;
    bool cubic = false;

    std::size_t ndirs() const { return dirs.size(); }
    std::size_t lines_per_dir() const { return n == 2 ? n_off : std::size_t(n_off) * n_off; }
    double offset(int j) const { return (j - (n_off - 1) / 2) * ds; }
    double total_weight() const;
};

LineSet make_lines(const GridSpec& s, const LineConfig& cfg);

struct Sinogram {
    int m = 0;
    int k = 0;
    LineSet lines;
    std::vector<double> v;  // [direction][offset], offsets row major
    // largest |<f, xi^m>| on the outer node shell relative to its maximum;
    // lines are cut at the box, so anything above ~1e-6 is truncated data
    double boundary_leak = 0;

    double& at(std::size_t d, std::size_t o) { return v[d * lines.lines_per_dir() + o]; }
    double at(std::size_t d, std::size_t o) const { return v[d * lines.lines_per_dir() + o]; }
};

// int t^k <f(x + t xi), xi^m> dt by multilinear interpolation and a uniform t rule.
Sinogram forward(const GridTensorField& f, const LineSet& lines, int k, int threads = 1);

// sum_xi w <x,xi>^k xi^m phi(x - <x,xi> xi, xi).  Projections outside the offset
// grid count as zero; their fraction goes to *clipped when given.
GridTensorField adjoint(const Sinogram& phi, const GridSpec& s, int threads = 1, double* clipped = nullptr);

GridTensorField normal_compose(const GridTensorField& f, const LineSet& lines, int k, int threads = 1);

// sum over lines of w ds^(n-1) a b
double sinogram_inner(const Sinogram& a, const Sinogram& b);

// Sinogram with the same lines holding phi(s, xi), for pairing tests.
Sinogram smooth_sinogram(const LineSet& lines, int m, int k, double width, std::uint64_t seed);

// Max over sampled directions of the relative L2 mismatch between the offset
// transform of I_m^k f and the slice of the Fourier transform of sym(x^k f)
// contracted with xi^(m+k).  n = 2 only.
struct SliceReport {
    double residual = 0;
    std::vector<double> per_direction;
};
SliceReport slice_residual(const GridTensorField& f, int k, const LineSet& lines, int n_dirs = 8);

void write_sinogram(const Sinogram& g, const std::string& path);
Sinogram read_sinogram(const std::string& path);

}  // namespace momray
