#include "momray/inversion.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "momray/coeffs.hpp"
#include "momray/exactfield.hpp"
#include "momray/kernel.hpp"

namespace momray {

namespace {

void check_stack(const std::vector<GridTensorField>& data) {
    if (data.empty()) throw invalid_input("no data");
    int m = static_cast<int>(data.size()) - 1;
    for (const auto& d : data)
        if (d.rank() != m || d.spec() != data[0].spec())
            throw invalid_input("data stack must hold m+1 fields of rank m on one grid");
}

// Half-spectrum points inside the band, with the weight that accounts for the
// conjugate half.
struct Band {
    std::vector<std::size_t> idx;
    std::vector<double> w;
};

Band band_points(const GridSpec& s, const Annulus& a) {
    const auto& kabs = wave_abs(s);
    double lo = a.lo_cells * s.dy(), hi = a.hi_frac * M_PI / s.h;
    std::size_t H = s.M() / 2 + 1;
    Band b;
    for (std::size_t i = 0; i < kabs.size(); ++i) {
        if (kabs[i] < lo || kabs[i] > hi) continue;
        std::size_t last = i % H;
        b.idx.push_back(i);
        b.w.push_back(last == 0 || last == H - 1 ? 1.0 : 2.0);
    }
    if (b.idx.empty()) throw invalid_input("frequency band is empty");
    return b;
}

}  // namespace

std::vector<GridTensorField> normal_data(const GridTensorField& f, const std::string& source,
                                         const LineConfig& lines, int threads) {
    std::vector<GridTensorField> out;
    int m = f.rank();
    if (source == "kernel") {
        for (int k = 0; k <= m; ++k) out.push_back(normal_kernel(f, k));
    } else if (source == "compose") {
        LineSet L = make_lines(f.spec(), lines);
        for (int k = 0; k <= m; ++k) out.push_back(normal_compose(f, L, k, threads));
    } else {
        throw invalid_input("unknown data source '" + source + "' (kernel or compose)");
    }
    return out;
}

GridTensorField prepared(const GridTensorField& d, const InversionOptions& opt) {
    GridTensorField out = d;
    if (opt.taper) out.scale_by(edge_taper(d.spec(), opt.taper_width, opt.taper_offset));
    return out;
}

nlohmann::json ReconReport::to_json() const {
    nlohmann::json j;
    j["m"] = m;
    j["n"] = n;
    j["operator_norms"] = op_norms;
    if (rel_error >= 0) j["interior_rel_error"] = rel_error;
    j["lemma_residuals"] = consistency;
    j["necessity_residuals"] = consistency_F;
    if (!fourier_residual.empty()) j["fourier_system_residuals"] = fourier_residual;
    j["runtime_s"] = runtime_s;
    return j;
}

GridTensorField invert_full(const std::vector<GridTensorField>& data, const InversionOptions& opt, ReconReport* rep) {
    check_stack(data);
    int m = static_cast<int>(data.size()) - 1;
    const GridSpec& s = data[0].spec();
    GridTensorField u(s, m);
    std::vector<double> norms;
    for (int k = 0; k <= m; ++k) {
        GridTensorField t = apply_D(prepared(data[k], opt), m, k);
        norms.push_back(l2_norm(t, opt.roi));
        u += t;
    }
    if (rep) {
        rep->m = m;
        rep->n = s.n;
        rep->op_norms = norms;
    }
    return frac_laplacian(u);
}

GridTensorField invert_m1(const std::vector<GridTensorField>& data, const InversionOptions& opt) {
    check_stack(data);
    if (data.size() != 2) throw invalid_input("rank 1 inversion takes two data fields");
    int n = data[0].n();
    GridTensorField N0 = prepared(data[0], opt), N1 = prepared(data[1], opt);
    GridTensorField u = N0 + (1.0 / (n - 1)) * spectral_d(contract_x(N0)) -
                        (1.0 / (n - 1)) * spectral_d(spectral_div(N1));
    double c = std::tgamma((n + 1) / 2.0) / (2 * std::pow(M_PI, (n + 1) / 2.0));
    return c * frac_laplacian(u);
}

GridTensorField invert_m2(const std::vector<GridTensorField>& data, const InversionOptions& opt) {
    check_stack(data);
    if (data.size() != 3) throw invalid_input("rank 2 inversion takes three data fields");
    int n = data[0].n();
    GridTensorField N0 = prepared(data[0], opt), N1 = prepared(data[1], opt), N2 = prepared(data[2], opt);
    GridTensorField u = N0 - (1.0 / (n + 1)) * delta_mul(trace(N0));
    u += (2.0 / (n + 1)) * spectral_d(contract_x(N0) - spectral_div(N1));
    GridTensorField inner2 = contract_x_pow(N0, 2) - 2.0 * contract_x(spectral_div(N1)) + 0.5 * spectral_div_pow(N2, 2);
    u += (1.0 / ((n - 1) * (n + 1))) * spectral_d_pow(inner2, 2);
    double c = std::tgamma((n + 3) / 2.0) / (2 * std::pow(M_PI, (n + 1) / 2.0));
    return c * frac_laplacian(u);
}

namespace {

std::vector<double> interior_window(const GridSpec& s, double roi) {
    double c = roi * s.L(), w = s.L() / 16;
    std::vector<double> t1(s.N);
    for (int j = 0; j < s.N; ++j) t1[j] = 0.5 * std::erfc((std::fabs(s.coord(j)) - c) / w);
    std::vector<double> out(s.nodes());
    for (std::size_t lin = 0; lin < out.size(); ++lin) {
        std::size_t r = lin;
        double v = 1;
        for (int a = 0; a < s.n; ++a) {
            v *= t1[r % s.N];
            r /= s.N;
        }
        out[lin] = v;
    }
    return out;
}

// d^alpha by Fourier multiplier
std::vector<double> spectral_partial(const GridSpec& s, const std::vector<double>& a, const Counts& alpha) {
    Spectral& sp = spectral_engine(s);
    std::vector<cplx> F;
    sp.forward(a, F);
    int order = 0;
    for (int x : alpha) order += x;
    cplx ip = std::pow(cplx(0, 1), order);
    for (int b = 0; b < s.n; ++b) {
        const auto& yb = wave_axis(s, b);
        for (int t = 0; t < alpha[b]; ++t)
            for (std::size_t j = 0; j < F.size(); ++j) F[j] *= yb[j];
    }
    for (auto& v : F) v *= ip;
    std::vector<double> out;
    sp.inverse(F, out);
    return out;
}

// Band energy of the transform of w * a.
double band_energy(const GridSpec& s, std::vector<double> a, const std::vector<double>& w, const Band& b) {
    for (std::size_t j = 0; j < a.size(); ++j) a[j] *= w[j];
    std::vector<cplx> F;
    spectral_engine(s).forward(a, F);
    double acc = 0;
    for (std::size_t t = 0; t < b.idx.size(); ++t) acc += b.w[t] * std::norm(F[b.idx[t]]);
    return acc;
}

double field_band_energy(const GridTensorField& f, const std::vector<double>& w, const Band& b) {
    const auto& T = f.table();
    double acc = 0;
    for (std::size_t i = 0; i < f.ncomp(); ++i) acc += T.mult[i] * band_energy(f.spec(), f.comp(i), w, b);
    return acc;
}

// Band energy of the full derivative tensor of order p: the transform side is |y|^p |u^|.
double gradient_band_energy(const GridTensorField& f, int p, const std::vector<double>& w, const Band& b) {
    const auto& T = f.table();
    const auto& P = index_table(f.n(), p);
    double acc = 0;
    for (std::size_t i = 0; i < f.ncomp(); ++i)
        for (std::size_t a = 0; a < P.size(); ++a)
            acc += T.mult[i] * P.mult[a] *
                   band_energy(f.spec(), spectral_partial(f.spec(), f.comp(i), P.counts[a]), w, b);
    return acc;
}

GridTensorField with_spec(const GridTensorField& f, const GridSpec& s) {
    GridTensorField out(s, f.rank());
    for (std::size_t i = 0; i < f.ncomp(); ++i) out.comp(i) = f.comp(i);
    return out;
}

}  // namespace

// The datum is known on the box only, and a plain FFT of it carries a
// truncation floor of order (|y| L)^(-1/2).  Derivatives are therefore taken on
// the tapered datum first and the transform is taken through a smooth interior
// window: j_y on the transform side is -i div on the field side.
double consistency_residual(const GridTensorField& Nk, int m, int k, const InversionOptions& opt, const Annulus& band) {
    if (Nk.rank() != m || k < 0 || k > m) throw std::invalid_argument("consistency residual needs 0 <= k <= m");
    if (k == m) return 0.0;
    const GridSpec& s = Nk.spec();
    GridTensorField N = prepared(Nk, opt);
    Band b = band_points(s, band);
    auto W = interior_window(s, opt.roi);
    double den = gradient_band_energy(N, k + 1, W, b);
    double num = field_band_energy(spectral_div_pow(N, k + 1), W, b);
    return den > 0 ? std::sqrt(num / den) : 0.0;
}

double consistency_residual_F(const GridTensorField& Nk, int m, int k, const InversionOptions& opt,
                              const Annulus& band) {
    if (Nk.rank() != m || k < 0 || k > m) throw std::invalid_argument("consistency residual needs 0 <= k <= m");
    if (k == m) return 0.0;
    const GridSpec& s = Nk.spec();
    // F^(m,k) up to the factor f_factor (-i)^k, which cancels in the ratio
    GridTensorField F = spectral_div_pow(prepared(Nk, opt), k);
    Band b = band_points(s, band);
    auto W = interior_window(s, opt.roi);
    double den = gradient_band_energy(F, 1, W, b);
    double num = field_band_energy(spectral_div(F), W, b);
    return den > 0 ? std::sqrt(num / den) : 0.0;
}

double fourier_system_residual(const GridTensorField& f, const GridTensorField& Nk, int k, const InversionOptions& opt,
                               const Annulus& band, int lhs_pad) {
    int m = f.rank(), n = f.n();
    if (Nk.rank() != m || Nk.spec() != f.spec() || k < 0 || k > m)
        throw std::invalid_argument("fourier residual needs matching rank m fields and 0 <= k <= m");
    const GridSpec& s = f.spec();
    // Right side: F^(m,k) = f_factor j_y^k N^, i.e. f_factor (-i)^k div^k N on the field side.
    GridTensorField uR = spectral_div_pow(prepared(Nk, opt), k) * f_factor(m, k, n);
    // Left side: A^(m,0)/(d^k g) with d^k g = (-i)^k FT(x^k f).  The common (-i)^k
    // is dropped.  The multiplier is singular at 0, so the transform is inverted
    // on a wider padding with the cell average of A in the DC sample.
    GridSpec s2 = s;
    s2.pad = std::max(lhs_pad, s.pad);
    FourierField G = fft_field(mul_xpow(with_spec(f, s2), k));
    const RadialPolyField& A = build_A(m, 0, n);
    const auto& C = contract_table(n, 2 * m, m + k);
    FourierField L;
    L.spec = s2;
    L.m = m - k;
    L.c.assign(C.size(), std::vector<cplx>(G.c[0].size(), cplx(0)));
    std::vector<const std::vector<double>*> ya;
    for (int a = 0; a < n; ++a) ya.push_back(&wave_axis(s2, a));
    std::vector<double> y(n);
    auto assemble = [&](std::size_t j, const SymTensor<double>& Ay) {
        for (std::size_t i = 0; i < C.size(); ++i) {
            cplx v = 0;
            for (const auto& w : C[i]) v += (double(w.num) / w.den) * Ay[w.a] * G.c[w.b][j];
            L.c[i][j] = v;
        }
    };
    for (std::size_t j = 0; j < G.c[0].size(); ++j) {
        bool zero = true;
        for (int a = 0; a < n; ++a) {
            y[a] = (*ya[a])[j];
            zero = zero && y[a] == 0;
        }
        if (!zero) assemble(j, A.eval(y));
    }
    {
        // cell average by midpoint subcells; S even keeps samples off the origin
        int S = n == 2 ? 64 : 16;
        double dy = s2.dy();
        SymTensor<double> Q(n, 2 * m);
        std::vector<int> c(n, 0);
        std::size_t cnt = 0;
        while (true) {
            for (int a = 0; a < n; ++a) y[a] = (c[a] + 0.5 - S / 2.0) * dy / S;
            Q += A.eval(y);
            ++cnt;
            int a = n - 1;
            while (a >= 0 && c[a] == S - 1) c[a--] = 0;
            if (a < 0) break;
            ++c[a];
        }
        Q *= 1.0 / cnt;
        assemble(0, Q);
    }
    GridTensorField uL = with_spec(ifft_field(L), s);
    Band b = band_points(s, band);
    auto W = interior_window(s, opt.roi);
    double num = field_band_energy(uL - uR, W, b), den = field_band_energy(uR, W, b);
    if (den == 0) return num > 0 ? 1.0 : 0.0;
    return std::sqrt(num / den);
}

GridTensorField smooth_noise(const GridSpec& s, int m, double amplitude, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    GridTensorField out(s, m);
    double L = s.L();
    double x[3];
    for (int blob = 0; blob < 12; ++blob) {
        std::vector<double> c(s.n), coef(out.ncomp());
        for (auto& v : c) v = 0.5 * L * U(rng);
        for (auto& v : coef) v = amplitude * U(rng);
        double w = 0.5 + 0.5 * (U(rng) + 1);
        for (std::size_t lin = 0; lin < s.nodes(); ++lin) {
            node_coords(s, lin, x);
            double r2 = 0;
            for (int a = 0; a < s.n; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
            double g = std::exp(-r2 / (w * w));
            if (g < 1e-300) continue;
            for (std::size_t i = 0; i < out.ncomp(); ++i) out.comp(i)[lin] += coef[i] * g;
        }
    }
    return out;
}

double measured_inversion_constant(const GridTensorField& f, const GridTensorField& N0, const Annulus& band) {
    if (f.rank() != 0 || N0.rank() != 0) throw std::invalid_argument("constant fit needs scalar fields");
    FourierField F = fft_field(f), G = fft_field(N0);
    Band b = band_points(f.spec(), band);
    const auto& kabs = wave_abs(f.spec());
    double num = 0, den = 0;
    for (std::size_t t = 0; t < b.idx.size(); ++t) {
        std::size_t j = b.idx[t];
        num += b.w[t] * std::norm(F.c[0][j]);
        den += b.w[t] * std::real(std::conj(F.c[0][j]) * kabs[j] * G.c[0][j]);
    }
    if (den == 0) throw std::domain_error("no signal in the band");
    return num / den;
}

RoundTrip round_trip(const GridTensorField& f, const std::string& source, const InversionOptions& opt,
                     const LineConfig& lines, int threads, bool diagnostics) {
    auto t0 = std::chrono::steady_clock::now();
    RoundTrip rt;
    rt.truth = f;
    rt.data = normal_data(f, source, lines, threads);
    rt.recon = invert_full(rt.data, opt, &rt.report);
    rt.report.rel_error = rel_error(rt.recon, f, opt.roi);
    if (diagnostics) {
        int m = f.rank();
        for (int k = 0; k <= m; ++k) {
            rt.report.consistency.push_back(consistency_residual(rt.data[k], m, k, opt));
            rt.report.consistency_F.push_back(consistency_residual_F(rt.data[k], m, k, opt));
            rt.report.fourier_residual.push_back(fourier_system_residual(f, rt.data[k], k, opt));
        }
    }
    rt.report.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rt;
}

}  // namespace momray
