#include "momray/raytransform.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include <boost/math/special_functions/legendre.hpp>
#include <json.hpp>

namespace momray {

namespace {

template <class F>
void parallel_for(std::size_t count, int threads, F fn) {
    if (threads <= 1 || count < 2) {
        fn(std::size_t(0), count);
        return;
    }
    std::size_t nt = std::min<std::size_t>(threads, count);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nt; ++t)
        pool.emplace_back(fn, count * t / nt, count * (t + 1) / nt);
    for (auto& th : pool) th.join();
}

// Gauss-Legendre nodes on [-1, 1] by Newton from the Chebyshev guesses.
void gauss_legendre(int q, std::vector<double>& x, std::vector<double>& w) {
    x.resize(q);
    w.resize(q);
    for (int i = 0; i < q; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (q + 0.5));
        for (int it = 0; it < 100; ++it) {
            double dz = boost::math::legendre_p(q, z) / boost::math::legendre_p_prime(q, z);
            z -= dz;
            if (std::fabs(dz) < 1e-16) break;
        }
        double dp = boost::math::legendre_p_prime(q, z);
        x[i] = z;
        w[i] = 2 / ((1 - z * z) * dp * dp);
    }
}

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// xi^I for every canonical index of rank r
std::vector<double> power_components(const Vec3& xi, int n, int r, bool weighted) {
    const auto& T = index_table(n, r);
    std::vector<double> out(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) {
        double v = weighted ? static_cast<double>(T.mult[i]) : 1.0;
        for (int a : T.entries[i]) v *= xi[a];
        out[i] = v;
    }
    return out;
}

// Multilinear interpolation of a node array; zero outside the grid.
struct Interp {
    const GridSpec& s;
    const std::vector<double>& p;
    double lo, hi;
    Interp(const GridSpec& sp, const std::vector<double>& pv)
        : s(sp), p(pv), lo(sp.coord(0)), hi(sp.coord(sp.N - 1)) {}

    double operator()(const double* x) const {
        int N = s.N;
        int i0[3] = {0, 0, 0};
        double fr[3] = {0, 0, 0};
        for (int a = 0; a < s.n; ++a) {
            if (x[a] < lo || x[a] > hi) return 0.0;
            double u = (x[a] - lo) / s.h;
            int i = std::min(static_cast<int>(u), N - 2);
            i0[a] = i;
            fr[a] = u - i;
        }
        if (s.n == 2) {
            std::size_t b = std::size_t(i0[0]) * N + i0[1];
            return (1 - fr[0]) * ((1 - fr[1]) * p[b] + fr[1] * p[b + 1]) +
                   fr[0] * ((1 - fr[1]) * p[b + N] + fr[1] * p[b + N + 1]);
        }
        std::size_t NN = std::size_t(N) * N;
        std::size_t b = i0[0] * NN + std::size_t(i0[1]) * N + i0[2];
        double v = 0;
        for (int c = 0; c < 8; ++c) {
            double w = 1;
            std::size_t o = b;
            for (int a = 0; a < 3; ++a) {
                bool up = (c >> (2 - a)) & 1;
                w *= up ? fr[a] : 1 - fr[a];
                if (up) o += a == 0 ? NN : (a == 1 ? N : 1);
            }
            v += w * p[o];
        }
        return v;
    }
};

// Tensor-product Catmull-Rom; falls back to linear in the outermost cell.
struct CubicInterp {
    const GridSpec& s;
    const std::vector<double>& p;
    double lo, hi;
    CubicInterp(const GridSpec& sp, const std::vector<double>& pv)
        : s(sp), p(pv), lo(sp.coord(0)), hi(sp.coord(sp.N - 1)) {}

    static void weights(double t, double* w) {
        double t2 = t * t, t3 = t2 * t;
        w[0] = -0.5 * t3 + t2 - 0.5 * t;
        w[1] = 1.5 * t3 - 2.5 * t2 + 1;
        w[2] = -1.5 * t3 + 2 * t2 + 0.5 * t;
        w[3] = 0.5 * t3 - 0.5 * t2;
    }

    double operator()(const double* x) const {
        int N = s.N, n = s.n;
        int i0[3] = {0, 0, 0};
        double w[3][4];
        for (int a = 0; a < n; ++a) {
            if (x[a] < lo || x[a] > hi) return 0.0;
            double u = (x[a] - lo) / s.h;
            int i = std::min(static_cast<int>(u), N - 2);
            double t = u - i;
            weights(t, w[a]);
            // points outside the grid are zero, as the field is
            i0[a] = i - 1;
        }
        double v = 0;
        if (n == 2) {
            for (int a = 0; a < 4; ++a) {
                int ia = i0[0] + a;
                if (ia < 0 || ia >= N) continue;
                const double* row = p.data() + std::size_t(ia) * N;
                double r = 0;
                for (int b = 0; b < 4; ++b) {
                    int ib = i0[1] + b;
                    if (ib >= 0 && ib < N) r += w[1][b] * row[ib];
                }
                v += w[0][a] * r;
            }
            return v;
        }
        std::size_t NN = std::size_t(N) * N;
        for (int a = 0; a < 4; ++a) {
            int ia = i0[0] + a;
            if (ia < 0 || ia >= N) continue;
            for (int b = 0; b < 4; ++b) {
                int ib = i0[1] + b;
                if (ib < 0 || ib >= N) continue;
                const double* row = p.data() + ia * NN + std::size_t(ib) * N;
                double r = 0;
                for (int c = 0; c < 4; ++c) {
                    int ic = i0[2] + c;
                    if (ic >= 0 && ic < N) r += w[2][c] * row[ic];
                }
                v += w[0][a] * w[1][b] * r;
            }
        }
        return v;
    }
};

}  // namespace

double LineSet::total_weight() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
}

LineSet make_lines(const GridSpec& s, const LineConfig& cfg) {
    s.validate();
    LineSet L;
    L.n = s.n;
    L.ds = cfg.ds > 0 ? cfg.ds : s.h;
    L.t_step = cfg.t_step > 0 ? cfg.t_step : s.h;
    L.cubic = cfg.cubic;
    double ext = cfg.extent > 0 ? cfg.extent : std::sqrt(double(s.n)) * s.L();
    L.n_off = 2 * static_cast<int>(std::ceil(ext / L.ds)) + 1;
    double sg = cfg.antipodal ? -1.0 : 1.0;
    if (s.n == 2) {
        if (cfg.n_theta < 1) throw invalid_input("direction count must be positive");
        for (int j = 0; j < cfg.n_theta; ++j) {
            double th = 2 * M_PI * j / cfg.n_theta;
            Vec3 xi{sg * std::cos(th), sg * std::sin(th), 0};
            L.dirs.push_back(xi);
            L.weights.push_back(2 * M_PI / cfg.n_theta);
            L.frames.push_back({Vec3{-xi[1], xi[0], 0}, Vec3{0, 0, 0}});
        }
    } else {
        if (cfg.n_polar < 1 || cfg.n_azimuth < 1) throw invalid_input("direction count must be positive");
        std::vector<double> z, wz;
        gauss_legendre(cfg.n_polar, z, wz);
        for (int i = 0; i < cfg.n_polar; ++i)
            for (int j = 0; j < cfg.n_azimuth; ++j) {
                double ph = 2 * M_PI * j / cfg.n_azimuth, st = std::sqrt(std::max(0.0, 1 - z[i] * z[i]));
                Vec3 xi{sg * st * std::cos(ph), sg * st * std::sin(ph), sg * z[i]};
                double nr = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
                for (auto& c : xi) c /= nr;
                int ax = 0;
                for (int a = 1; a < 3; ++a)
                    if (std::fabs(xi[a]) < std::fabs(xi[ax])) ax = a;
                Vec3 e1{0, 0, 0};
                e1[ax] = 1;
                for (int a = 0; a < 3; ++a) e1[a] -= xi[ax] * xi[a];
                double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
                for (auto& c : e1) c /= n1;
                L.dirs.push_back(xi);
                L.weights.push_back(wz[i] * 2 * M_PI / cfg.n_azimuth);
                L.frames.push_back({e1, cross(xi, e1)});
            }
    }
    return L;
}

Sinogram forward(const GridTensorField& f, const LineSet& lines, int k, int threads) {
    const GridSpec& s = f.spec();
    int n = s.n, m = f.rank();
    if (lines.n != n) throw invalid_input("line set dimension differs from the grid");
    if (k < 0) throw std::invalid_argument("forward needs k >= 0");
    Sinogram g;
    g.m = m;
    g.k = k;
    g.lines = lines;
    std::size_t per = lines.lines_per_dir();
    g.v.assign(lines.ndirs() * per, 0.0);

    // truncation check on the outer shell
    double fmax = 0, shell = 0;
    for (std::size_t lin = 0; lin < s.nodes(); ++lin) {
        double a = 0;
        for (std::size_t i = 0; i < f.ncomp(); ++i) a += std::fabs(f.comp(i)[lin]);
        fmax = std::max(fmax, a);
        std::size_t r = lin;
        bool edge = false;
        for (int b = 0; b < n; ++b) {
            int j = static_cast<int>(r % s.N);
            r /= s.N;
            edge = edge || j == 0 || j == s.N - 1;
        }
        if (edge) shell = std::max(shell, a);
    }
    g.boundary_leak = fmax > 0 ? shell / fmax : 0.0;

    double lo = s.coord(0), hi = s.coord(s.N - 1), dt = lines.t_step;
    parallel_for(lines.ndirs(), threads, [&](std::size_t d0, std::size_t d1) {
        std::vector<double> p(s.nodes());
        for (std::size_t d = d0; d < d1; ++d) {
            const Vec3& xi = lines.dirs[d];
            auto w = power_components(xi, n, m, true);
            std::fill(p.begin(), p.end(), 0.0);
            for (std::size_t i = 0; i < w.size(); ++i) {
                const auto& c = f.comp(i);
                for (std::size_t j = 0; j < p.size(); ++j) p[j] += w[i] * c[j];
            }
            Interp lin_ip(s, p);
            CubicInterp cub_ip(s, p);
            auto ip = [&](const double* xx) { return lines.cubic ? cub_ip(xx) : lin_ip(xx); };
            const auto& fr = lines.frames[d];
            for (std::size_t o = 0; o < per; ++o) {
                double b[3] = {0, 0, 0};
                int ja = n == 2 ? static_cast<int>(o) : static_cast<int>(o / lines.n_off);
                for (int a = 0; a < n; ++a) b[a] += lines.offset(ja) * fr[0][a];
                if (n == 3) {
                    int jb = static_cast<int>(o % lines.n_off);
                    for (int a = 0; a < 3; ++a) b[a] += lines.offset(jb) * fr[1][a];
                }
                double tlo = -1e300, thi = 1e300;
                bool hit = true;
                for (int a = 0; a < n; ++a) {
                    if (std::fabs(xi[a]) < 1e-14) {
                        hit = hit && b[a] >= lo && b[a] <= hi;
                        continue;
                    }
                    double t1 = (lo - b[a]) / xi[a], t2 = (hi - b[a]) / xi[a];
                    tlo = std::max(tlo, std::min(t1, t2));
                    thi = std::min(thi, std::max(t1, t2));
                }
                if (!hit || tlo > thi) continue;
                long j0 = static_cast<long>(std::ceil(tlo / dt)), j1 = static_cast<long>(std::floor(thi / dt));
                double acc = 0;
                double xx[3];
                for (long j = j0; j <= j1; ++j) {
                    double t = j * dt;
                    for (int a = 0; a < n; ++a) xx[a] = b[a] + t * xi[a];
                    double v = ip(xx);
                    for (int q = 0; q < k; ++q) v *= t;
                    acc += v;
                }
                g.v[d * per + o] = acc * dt;
            }
        }
    });
    return g;
}

GridTensorField adjoint(const Sinogram& phi, const GridSpec& s, int threads, double* clipped) {
    const LineSet& L = phi.lines;
    int n = s.n, m = phi.m, k = phi.k, N = s.N;
    if (L.n != n) throw invalid_input("line set dimension differs from the grid");
    const auto& T = index_table(n, m);
    std::size_t nd = L.ndirs(), per = L.lines_per_dir(), nodes = s.nodes();
    double c0 = (L.n_off - 1) / 2.0, umax = L.n_off - 1;
    // directions are split into fixed chunks, one partial sum each, merged in order
    std::size_t nt = std::max<std::size_t>(1, std::min<std::size_t>(std::max(1, threads), nd));
    std::vector<GridTensorField> part(nt);
    std::vector<std::size_t> clip_count(nt, 0);
    parallel_for(nt, threads, [&](std::size_t t0, std::size_t t1) {
        for (std::size_t t = t0; t < t1; ++t) {
            part[t] = GridTensorField(s, m);
            std::vector<double> S(nodes);
            std::size_t rows = nodes / N;
            for (std::size_t d = nd * t / nt; d < nd * (t + 1) / nt; ++d) {
                const Vec3& xi = L.dirs[d];
                const auto& fr = L.frames[d];
                const double* row = phi.v.data() + d * per;
                double w = L.weights[d];
                double x[3];
                for (std::size_t r = 0; r < rows; ++r) {
                    node_coords(s, r * N, x);
                    double tau = 0, u0 = 0, u1 = 0;
                    for (int a = 0; a < n; ++a) {
                        tau += x[a] * xi[a];
                        u0 += x[a] * fr[0][a];
                        u1 += x[a] * fr[1][a];
                    }
                    double dtau = s.h * xi[n - 1], du0 = s.h * fr[0][n - 1], du1 = s.h * fr[1][n - 1];
                    double* Sr = S.data() + r * N;
                    for (int j = 0; j < N; ++j, tau += dtau, u0 += du0, u1 += du1) {
                        double p0 = u0 / L.ds + c0, val;
                        if (p0 < 0 || p0 > umax) {
                            ++clip_count[t];
                            Sr[j] = 0;
                            continue;
                        }
                        int i0 = std::min(static_cast<int>(p0), L.n_off - 2);
                        double f0 = p0 - i0;
                        if (n == 2) {
                            val = (1 - f0) * row[i0] + f0 * row[i0 + 1];
                        } else {
                            double p1 = u1 / L.ds + c0;
                            if (p1 < 0 || p1 > umax) {
                                ++clip_count[t];
                                Sr[j] = 0;
                                continue;
                            }
                            int i1 = std::min(static_cast<int>(p1), L.n_off - 2);
                            double f1 = p1 - i1;
                            const double* r0 = row + std::size_t(i0) * L.n_off;
                            const double* r1 = r0 + L.n_off;
                            val = (1 - f0) * ((1 - f1) * r0[i1] + f1 * r0[i1 + 1]) +
                                  f0 * ((1 - f1) * r1[i1] + f1 * r1[i1 + 1]);
                        }
                        val *= w;
                        for (int q = 0; q < k; ++q) val *= tau;
                        Sr[j] = val;
                    }
                }
                auto xv = power_components(xi, n, m, false);
                for (std::size_t i = 0; i < T.size(); ++i) {
                    double c = xv[i];
                    if (c == 0) continue;
                    auto& o = part[t].comp(i);
                    for (std::size_t j = 0; j < nodes; ++j) o[j] += c * S[j];
                }
            }
        }
    });
    GridTensorField out = std::move(part[0]);
    for (std::size_t t = 1; t < nt; ++t) out += part[t];
    if (clipped) {
        std::size_t c = 0;
        for (auto v : clip_count) c += v;
        *clipped = static_cast<double>(c) / (static_cast<double>(nodes) * nd);
    }
    return out;
}

GridTensorField normal_compose(const GridTensorField& f, const LineSet& lines, int k, int threads) {
    return adjoint(forward(f, lines, k, threads), f.spec(), threads);
}

double sinogram_inner(const Sinogram& a, const Sinogram& b) {
    if (a.v.size() != b.v.size() || a.lines.ndirs() != b.lines.ndirs())
        throw shape_error("sinogram shape mismatch");
    std::size_t per = a.lines.lines_per_dir();
    double acc = 0;
    for (std::size_t d = 0; d < a.lines.ndirs(); ++d) {
        double s = 0;
        for (std::size_t o = 0; o < per; ++o) s += a.v[d * per + o] * b.v[d * per + o];
        acc += a.lines.weights[d] * s;
    }
    return acc * std::pow(a.lines.ds, a.lines.n - 1);
}

Sinogram smooth_sinogram(const LineSet& lines, int m, int k, double width, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    struct Bump {
        double c[2], amp, mod;
        Vec3 axis;
    };
    std::vector<Bump> bumps(3);
    for (auto& b : bumps) {
        b.c[0] = U(rng) * width;
        b.c[1] = U(rng) * width;
        b.amp = U(rng);
        b.mod = 0.5 * U(rng);
        b.axis = {U(rng), U(rng), U(rng)};
    }
    Sinogram g;
    g.m = m;
    g.k = k;
    g.lines = lines;
    std::size_t per = lines.lines_per_dir();
    g.v.assign(lines.ndirs() * per, 0.0);
    for (std::size_t d = 0; d < lines.ndirs(); ++d)
        for (std::size_t o = 0; o < per; ++o) {
            double s0 = lines.offset(lines.n == 2 ? static_cast<int>(o) : static_cast<int>(o / lines.n_off));
            double s1 = lines.n == 2 ? 0.0 : lines.offset(static_cast<int>(o % lines.n_off));
            double v = 0;
            for (const auto& b : bumps) {
                double r2 = (s0 - b.c[0]) * (s0 - b.c[0]);
                if (lines.n == 3) r2 += (s1 - b.c[1]) * (s1 - b.c[1]);
                double dot = 0;
                for (int a = 0; a < lines.n; ++a) dot += b.axis[a] * lines.dirs[d][a];
                v += b.amp * (1 + b.mod * dot) * std::exp(-r2 / (width * width));
            }
            g.v[d * per + o] = v;
        }
    return g;
}

SliceReport slice_residual(const GridTensorField& f, int k, const LineSet& lines, int n_dirs) {
    const GridSpec& s = f.spec();
    if (s.n != 2) throw invalid_input("slice check is implemented for n = 2");
    int m = f.rank();
    if (k < 0 || k > m) throw std::invalid_argument("slice check needs 0 <= k <= m");
    Sinogram g = forward(f, lines, k);
    GridTensorField u = mul_xpow(f, k);
    int N = s.N;
    double dsig = 2 * M_PI / (lines.n_off * lines.ds), smax = M_PI / (2 * s.h);
    int J = static_cast<int>(smax / dsig);
    SliceReport rep;
    std::size_t nd = lines.ndirs();
    int cnt = std::max(1, std::min<int>(n_dirs, static_cast<int>(nd)));
    std::vector<double> q(s.nodes());
    std::vector<cplx> e2(N), rows(N);
    for (int c = 0; c < cnt; ++c) {
        std::size_t d = nd * c / cnt;
        const Vec3& xi = lines.dirs[d];
        const Vec3& eta = lines.frames[d][0];
        auto w = power_components(xi, 2, m + k, true);
        std::fill(q.begin(), q.end(), 0.0);
        for (std::size_t i = 0; i < w.size(); ++i)
            for (std::size_t j = 0; j < q.size(); ++j) q[j] += w[i] * u.comp(i)[j];
        double num = 0, den = 0;
        for (int js = -J; js <= J; ++js) {
            double sg = js * dsig;
            cplx lhs = 0;
            for (int o = 0; o < lines.n_off; ++o)
                lhs += g.v[d * lines.n_off + o] * std::exp(cplx(0, -sg * lines.offset(o)));
            lhs *= lines.ds / std::sqrt(2 * M_PI);
            double y0 = sg * eta[0], y1 = sg * eta[1];
            for (int j = 0; j < N; ++j) e2[j] = std::exp(cplx(0, -y1 * s.coord(j)));
            cplx rhs = 0;
            for (int i = 0; i < N; ++i) {
                cplx r = 0;
                const double* qr = q.data() + std::size_t(i) * N;
                for (int j = 0; j < N; ++j) r += qr[j] * e2[j];
                rhs += r * std::exp(cplx(0, -y0 * s.coord(i)));
            }
            rhs *= s.h * s.h / (2 * M_PI) * std::sqrt(2 * M_PI);
            num += std::norm(lhs - rhs);
            den += std::norm(rhs);
        }
        double r = den > 0 ? std::sqrt(num / den) : (num > 0 ? 1.0 : 0.0);
        rep.per_direction.push_back(r);
        rep.residual = std::max(rep.residual, r);
    }
    return rep;
}

void write_sinogram(const Sinogram& g, const std::string& path) {
    const LineSet& L = g.lines;
    nlohmann::json hdr;
    hdr["n"] = L.n;
    hdr["m"] = g.m;
    hdr["k"] = g.k;
    std::vector<std::vector<double>> dirs, frames;
    for (std::size_t d = 0; d < L.ndirs(); ++d) {
        dirs.emplace_back(L.dirs[d].begin(), L.dirs[d].begin() + L.n);
        std::vector<double> fr;
        for (int b = 0; b < L.n - 1; ++b)
            for (int a = 0; a < L.n; ++a) fr.push_back(L.frames[d][b][a]);
        frames.push_back(fr);
    }
    hdr["directions"] = dirs;
    hdr["weights"] = L.weights;
    hdr["frames"] = frames;
    hdr["offsets"] = {{"count", L.n_off}, {"spacing", L.ds}};
    hdr["t_step"] = L.t_step;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << hdr.dump() << '\n';
    os.write(reinterpret_cast<const char*>(g.v.data()), static_cast<std::streamsize>(g.v.size() * sizeof(double)));
}

Sinogram read_sinogram(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw invalid_input("cannot open " + path);
    std::string line;
    std::getline(is, line);
    Sinogram g;
    try {
        auto hdr = nlohmann::json::parse(line);
        LineSet& L = g.lines;
        L.n = hdr.at("n");
        g.m = hdr.at("m");
        g.k = hdr.at("k");
        L.n_off = hdr.at("offsets").at("count");
        L.ds = hdr.at("offsets").at("spacing");
        L.t_step = hdr.at("t_step");
        L.weights = hdr.at("weights").get<std::vector<double>>();
        for (const auto& d : hdr.at("directions")) {
            Vec3 v{0, 0, 0};
            for (int a = 0; a < L.n; ++a) v[a] = d.at(a);
            L.dirs.push_back(v);
        }
        for (const auto& fr : hdr.at("frames")) {
            std::array<Vec3, 2> F{};
            for (int b = 0; b < L.n - 1; ++b)
                for (int a = 0; a < L.n; ++a) F[b][a] = fr.at(b * L.n + a);
            L.frames.push_back(F);
        }
    } catch (const nlohmann::json::exception&) {
        throw invalid_input("bad sinogram header in " + path);
    }
    if (g.lines.frames.size() != g.lines.ndirs() || g.lines.weights.size() != g.lines.ndirs())
        throw invalid_input("inconsistent sinogram header in " + path);
    g.v.resize(g.lines.ndirs() * g.lines.lines_per_dir());
    is.read(reinterpret_cast<char*>(g.v.data()), static_cast<std::streamsize>(g.v.size() * sizeof(double)));
    if (!is) throw invalid_input("truncated sinogram data in " + path);
    return g;
}

}  // namespace momray
