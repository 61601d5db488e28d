#include "momray/gridfield.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <fftw3.h>
#include <json.hpp>

#include "momray/coeffs.hpp"

namespace momray {

void GridSpec::validate() const {
    if (n != 2 && n != 3) throw invalid_input("grid dimension must be 2 or 3");
    if (N < 4 || N % 2) throw invalid_input("samples per axis must be even and >= 4");
    if (!(h > 0)) throw invalid_input("grid spacing must be positive");
    if (pad < 1) throw invalid_input("pad factor must be >= 1");
}

std::size_t GridSpec::nodes() const {
    std::size_t t = 1;
    for (int a = 0; a < n; ++a) t *= static_cast<std::size_t>(N);
    return t;
}

std::size_t GridSpec::padded_nodes() const {
    std::size_t t = 1;
    for (int a = 0; a < n; ++a) t *= static_cast<std::size_t>(M());
    return t;
}

std::size_t GridSpec::half_nodes() const { return padded_nodes() / M() * (M() / 2 + 1); }

double GridSpec::dy() const { return 2 * M_PI / (M() * h); }

void node_coords(const GridSpec& s, std::size_t lin, double* x) {
    for (int a = s.n - 1; a >= 0; --a) {
        x[a] = s.coord(static_cast<int>(lin % s.N));
        lin /= s.N;
    }
}

// ---------------------------------------------------------------- field

GridTensorField::GridTensorField(const GridSpec& s, int m)
    : spec_(s), m_(m), c_(index_table(s.n, m).size(), std::vector<double>(s.nodes(), 0.0)) {}

SymTensor<double> GridTensorField::at(std::size_t lin) const {
    SymTensor<double> t(spec_.n, m_);
    for (std::size_t i = 0; i < c_.size(); ++i) t[i] = c_[i][lin];
    return t;
}

void GridTensorField::set(std::size_t lin, const SymTensor<double>& t) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i][lin] = t[i];
}

void GridTensorField::check_same(const GridTensorField& o) const {
    if (spec_ != o.spec_ || m_ != o.m_) throw shape_error("grid field shape mismatch");
}

GridTensorField& GridTensorField::operator+=(const GridTensorField& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i)
        for (std::size_t j = 0; j < c_[i].size(); ++j) c_[i][j] += o.c_[i][j];
    return *this;
}

GridTensorField& GridTensorField::operator-=(const GridTensorField& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i)
        for (std::size_t j = 0; j < c_[i].size(); ++j) c_[i][j] -= o.c_[i][j];
    return *this;
}

GridTensorField& GridTensorField::operator*=(double s) {
    for (auto& v : c_)
        for (auto& x : v) x *= s;
    return *this;
}

GridTensorField& GridTensorField::scale_by(const std::vector<double>& w) {
    for (auto& v : c_)
        for (std::size_t j = 0; j < v.size(); ++j) v[j] *= w[j];
    return *this;
}

// ---------------------------------------------------------------- FFT

namespace {
std::mutex fftw_mutex;  // the planner is not thread safe
}

Spectral::Spectral(const GridSpec& s) : spec_(s) {
    s.validate();
    int M = s.M(), n = s.n;
    half_ = s.half_nodes();
    embed_idx_.resize(s.N);
    for (int j = 0; j < s.N; ++j) embed_idx_[j] = ((j - s.N / 2) % M + M) % M;
    kax_.resize(M);
    for (int j = 0; j < M; ++j) {
        int f = j < M / 2 ? j : j - M;
        kax_[j] = (j == M / 2) ? 0.0 : f * s.dy();
    }
    std::lock_guard<std::mutex> lock(fftw_mutex);
    rbuf_ = fftw_alloc_real(s.padded_nodes());
    cbuf_ = fftw_alloc_complex(half_);
    int dims[3] = {M, M, M};
    plan_f_ = fftw_plan_dft_r2c(n, dims, rbuf_, static_cast<fftw_complex*>(cbuf_), FFTW_ESTIMATE);
    plan_b_ = fftw_plan_dft_c2r(n, dims, static_cast<fftw_complex*>(cbuf_), rbuf_, FFTW_ESTIMATE);
}

Spectral::~Spectral() {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_destroy_plan(static_cast<fftw_plan>(plan_f_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_b_));
    fftw_free(rbuf_);
    fftw_free(cbuf_);
}

void Spectral::half_index(std::size_t i, int* j) const {
    int M = spec_.M(), n = spec_.n, H = M / 2 + 1;
    j[n - 1] = static_cast<int>(i % H);
    i /= H;
    for (int a = n - 2; a >= 0; --a) {
        j[a] = static_cast<int>(i % M);
        i /= M;
    }
}

double Spectral::k(int a, std::size_t i) const {
    int j[3];
    half_index(i, j);
    return kax_[j[a]];
}

double Spectral::kabs(std::size_t i) const {
    int j[3];
    half_index(i, j);
    double s = 0;
    for (int a = 0; a < spec_.n; ++a) s += kax_[j[a]] * kax_[j[a]];
    return std::sqrt(s);
}

void Spectral::forward(const std::vector<double>& a, std::vector<cplx>& out) const {
    const GridSpec& s = spec_;
    std::size_t MM = s.padded_nodes();
    std::memset(rbuf_, 0, MM * sizeof(double));
    std::size_t M = s.M(), N = s.N;
    if (s.n == 2) {
        for (std::size_t i = 0; i < N; ++i) {
            double* row = rbuf_ + embed_idx_[i] * M;
            const double* src = a.data() + i * N;
            for (std::size_t j = 0; j < N; ++j) row[embed_idx_[j]] = src[j];
        }
    } else {
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) {
                double* row = rbuf_ + (embed_idx_[i] * M + embed_idx_[j]) * M;
                const double* src = a.data() + (i * N + j) * N;
                for (std::size_t l = 0; l < N; ++l) row[embed_idx_[l]] = src[l];
            }
    }
    fftw_execute(static_cast<fftw_plan>(plan_f_));
    out.resize(half_);
    std::memcpy(static_cast<void*>(out.data()), cbuf_, half_ * sizeof(cplx));
}

void Spectral::inverse(const std::vector<cplx>& in, std::vector<double>& out) const {
    const GridSpec& s = spec_;
    std::memcpy(cbuf_, static_cast<const void*>(in.data()), half_ * sizeof(cplx));
    fftw_execute(static_cast<fftw_plan>(plan_b_));
    double sc = 1.0 / static_cast<double>(s.padded_nodes());
    std::size_t M = s.M(), N = s.N;
    out.assign(s.nodes(), 0.0);
    if (s.n == 2) {
        for (std::size_t i = 0; i < N; ++i) {
            const double* row = rbuf_ + embed_idx_[i] * M;
            double* dst = out.data() + i * N;
            for (std::size_t j = 0; j < N; ++j) dst[j] = row[embed_idx_[j]] * sc;
        }
    } else {
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) {
                const double* row = rbuf_ + (embed_idx_[i] * M + embed_idx_[j]) * M;
                double* dst = out.data() + (i * N + j) * N;
                for (std::size_t l = 0; l < N; ++l) dst[l] = row[embed_idx_[l]] * sc;
            }
    }
}

void Spectral::forward_padded(const std::vector<double>& a, std::vector<cplx>& out) const {
    std::memcpy(rbuf_, a.data(), spec_.padded_nodes() * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(plan_f_));
    out.resize(half_);
    std::memcpy(static_cast<void*>(out.data()), cbuf_, half_ * sizeof(cplx));
}

Spectral& spectral_engine(const GridSpec& s) {
    static std::map<std::tuple<int, int, double, int>, std::unique_ptr<Spectral>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(s.n, s.N, s.h, s.pad);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    return *cache.emplace(key, std::make_unique<Spectral>(s)).first->second;
}

namespace {

Spectral& engine(const GridSpec& s) { return spectral_engine(s); }

// Wavenumber tables of the half spectrum, cached per grid.
struct WaveTable {
    std::vector<std::vector<double>> k;
    std::vector<double> kabs;
};

const WaveTable& waves(const GridSpec& s) {
    static std::map<std::tuple<int, int, double, int>, std::unique_ptr<WaveTable>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(s.n, s.N, s.h, s.pad);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    Spectral& sp = engine(s);
    auto w = std::make_unique<WaveTable>();
    std::size_t H = sp.half();
    w->k.assign(s.n, std::vector<double>(H));
    w->kabs.resize(H);
    for (std::size_t i = 0; i < H; ++i) {
        double r = 0;
        for (int a = 0; a < s.n; ++a) {
            double v = sp.k(a, i);
            w->k[a][i] = v;
            r += v * v;
        }
        w->kabs[i] = std::sqrt(r);
    }
    return *cache.emplace(key, std::move(w)).first->second;
}

}  // namespace

const std::vector<double>& wave_abs(const GridSpec& s) { return waves(s).kabs; }
const std::vector<double>& wave_axis(const GridSpec& s, int a) { return waves(s).k.at(a); }

FourierField fft_field(const GridTensorField& f) {
    const GridSpec& s = f.spec();
    Spectral& sp = engine(s);
    FourierField F;
    F.spec = s;
    F.m = f.rank();
    F.c.resize(f.ncomp());
    double sc = std::pow(s.h, s.n) / std::pow(2 * M_PI, s.n / 2.0);
    for (std::size_t i = 0; i < f.ncomp(); ++i) {
        sp.forward(f.comp(i), F.c[i]);
        for (auto& v : F.c[i]) v *= sc;
    }
    return F;
}

GridTensorField ifft_field(const FourierField& F) {
    const GridSpec& s = F.spec;
    Spectral& sp = engine(s);
    GridTensorField f(s, F.m);
    double sc = std::pow(2 * M_PI, s.n / 2.0) / std::pow(s.h, s.n);
    std::vector<cplx> tmp;
    for (std::size_t i = 0; i < F.ncomp(); ++i) {
        tmp = F.c[i];
        for (auto& v : tmp) v *= sc;
        sp.inverse(tmp, f.comp(i));
    }
    return f;
}

namespace {

std::vector<std::vector<cplx>> raw_fft(const GridTensorField& f) {
    Spectral& sp = engine(f.spec());
    std::vector<std::vector<cplx>> out(f.ncomp());
    for (std::size_t i = 0; i < f.ncomp(); ++i) sp.forward(f.comp(i), out[i]);
    return out;
}

}  // namespace

GridTensorField frac_laplacian(const GridTensorField& f) {
    const GridSpec& s = f.spec();
    Spectral& sp = engine(s);
    const auto& w = waves(s);
    GridTensorField out(s, f.rank());
    std::vector<cplx> F;
    for (std::size_t i = 0; i < f.ncomp(); ++i) {
        sp.forward(f.comp(i), F);
        for (std::size_t j = 0; j < F.size(); ++j) F[j] *= w.kabs[j];
        sp.inverse(F, out.comp(i));
    }
    return out;
}

GridTensorField spectral_d(const GridTensorField& f) {
    const GridSpec& s = f.spec();
    int n = s.n, M = f.rank() + 1;
    Spectral& sp = engine(s);
    const auto& w = waves(s);
    auto F = raw_fft(f);
    GridTensorField out(s, M);
    const auto& O = index_table(n, M);
    const auto& I = index_table(n, M - 1);
    std::vector<cplx> acc(sp.half());
    for (std::size_t g = 0; g < O.size(); ++g) {
        std::fill(acc.begin(), acc.end(), cplx(0));
        for (int a = 0; a < n; ++a) {
            int ca = O.counts[g][a];
            if (!ca) continue;
            Counts c = O.counts[g];
            --c[a];
            const auto& src = F[I.find(c)];
            double wt = static_cast<double>(ca) / M;
            const auto& ka = w.k[a];
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += cplx(0, wt * ka[j]) * src[j];
        }
        sp.inverse(acc, out.comp(g));
    }
    return out;
}

GridTensorField spectral_div(const GridTensorField& f) {
    if (f.rank() < 1) throw shape_error("divergence needs rank >= 1");
    const GridSpec& s = f.spec();
    int n = s.n, m = f.rank() - 1;
    Spectral& sp = engine(s);
    const auto& w = waves(s);
    auto F = raw_fft(f);
    GridTensorField out(s, m);
    const auto& O = index_table(n, m);
    const auto& U = index_table(n, m + 1);
    std::vector<cplx> acc(sp.half());
    for (std::size_t i = 0; i < O.size(); ++i) {
        std::fill(acc.begin(), acc.end(), cplx(0));
        for (int a = 0; a < n; ++a) {
            Counts c = O.counts[i];
            ++c[a];
            const auto& src = F[U.find(c)];
            const auto& ka = w.k[a];
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += cplx(0, ka[j]) * src[j];
        }
        sp.inverse(acc, out.comp(i));
    }
    return out;
}

GridTensorField spectral_d_pow(GridTensorField f, int k) {
    for (int i = 0; i < k; ++i) f = spectral_d(f);
    return f;
}

GridTensorField spectral_div_pow(GridTensorField f, int k) {
    for (int i = 0; i < k; ++i) f = spectral_div(f);
    return f;
}

// ---------------------------------------------------------------- pointwise

GridTensorField contract_x(const GridTensorField& f) {
    if (f.rank() < 1) throw shape_error("contract_x needs rank >= 1");
    const GridSpec& s = f.spec();
    int n = s.n, m = f.rank() - 1;
    GridTensorField out(s, m);
    const auto& O = index_table(n, m);
    const auto& U = index_table(n, m + 1);
    std::vector<double> xa(s.nodes());
    for (int a = 0; a < n; ++a) {
        double x[3];
        for (std::size_t lin = 0; lin < s.nodes(); ++lin) {
            node_coords(s, lin, x);
            xa[lin] = x[a];
        }
        for (std::size_t i = 0; i < O.size(); ++i) {
            Counts c = O.counts[i];
            ++c[a];
            const auto& src = f.comp(U.find(c));
            auto& dst = out.comp(i);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += xa[j] * src[j];
        }
    }
    return out;
}

GridTensorField contract_x_pow(GridTensorField f, int k) {
    for (int i = 0; i < k; ++i) f = contract_x(f);
    return f;
}

GridTensorField delta_mul(const GridTensorField& f) {
    const GridSpec& s = f.spec();
    int n = s.n, M = f.rank() + 2;
    GridTensorField out(s, M);
    const auto& O = index_table(n, M);
    const auto& I = index_table(n, M - 2);
    for (std::size_t g = 0; g < O.size(); ++g)
        for (int a = 0; a < n; ++a) {
            int ca = O.counts[g][a];
            if (ca < 2) continue;
            Counts c = O.counts[g];
            c[a] -= 2;
            double wt = static_cast<double>(ca * (ca - 1)) / (M * (M - 1));
            const auto& src = f.comp(I.find(c));
            auto& dst = out.comp(g);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += wt * src[j];
        }
    return out;
}

GridTensorField trace(const GridTensorField& f) {
    if (f.rank() < 2) throw shape_error("trace needs rank >= 2");
    const GridSpec& s = f.spec();
    int n = s.n, m = f.rank() - 2;
    GridTensorField out(s, m);
    const auto& O = index_table(n, m);
    const auto& U = index_table(n, m + 2);
    for (std::size_t i = 0; i < O.size(); ++i)
        for (int a = 0; a < n; ++a) {
            Counts c = O.counts[i];
            c[a] += 2;
            const auto& src = f.comp(U.find(c));
            auto& dst = out.comp(i);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
        }
    return out;
}

GridTensorField delta_mul_pow(GridTensorField f, int k) {
    for (int i = 0; i < k; ++i) f = delta_mul(f);
    return f;
}

GridTensorField trace_pow(GridTensorField f, int k) {
    for (int i = 0; i < k; ++i) f = trace(f);
    return f;
}

GridTensorField mul_xpow(const GridTensorField& f, int k) {
    const GridSpec& s = f.spec();
    int n = s.n, m = f.rank();
    GridTensorField out(s, m + k);
    const auto& P = product_table(n, k, m);
    const auto& X = index_table(n, k);
    std::vector<std::vector<double>> xp(X.size(), std::vector<double>(s.nodes()));
    double x[3];
    for (std::size_t lin = 0; lin < s.nodes(); ++lin) {
        node_coords(s, lin, x);
        for (std::size_t i = 0; i < X.size(); ++i) {
            double v = 1;
            for (int a : X.entries[i]) v *= x[a];
            xp[i][lin] = v;
        }
    }
    for (std::size_t g = 0; g < P.size(); ++g) {
        auto& dst = out.comp(g);
        for (const auto& t : P[g]) {
            double wt = static_cast<double>(t.num) / t.den;
            const auto& a = xp[t.a];
            const auto& b = f.comp(t.b);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += wt * a[j] * b[j];
        }
    }
    return out;
}

GridTensorField contract_const(const GridTensorField& f, const SymTensor<double>& v) {
    int n = f.n();
    if (v.n() != n || v.rank() > f.rank()) throw shape_error("contract_const shape mismatch");
    GridTensorField out(f.spec(), f.rank() - v.rank());
    const auto& C = contract_table(n, f.rank(), v.rank());
    for (std::size_t i = 0; i < C.size(); ++i) {
        auto& dst = out.comp(i);
        for (const auto& t : C[i]) {
            double wt = static_cast<double>(t.num) / t.den * v[t.b];
            if (wt == 0) continue;
            const auto& src = f.comp(t.a);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += wt * src[j];
        }
    }
    return out;
}

GridTensorField apply_D(const GridTensorField& f, int m, int k) {
    if (f.rank() != m || k < 0 || k > m) throw std::invalid_argument("apply_D needs rank m data and 0 <= k <= m");
    int n = f.n();
    GridTensorField divk = spectral_div_pow(f, k);
    GridTensorField tot(f.spec(), m);
    for (int p = k; p <= m; ++p)
        for (int q = 0; q <= std::min({p, m - p, p - k}); ++q) {
            double coef = (q % 2 ? -1.0 : 1.0) * double_factorial_d(n + 2 * m - 2 * p - 3) /
                          (std::ldexp(1.0, q) * factorial(q).get_d() * factorial(m - p - q).get_d() *
                           factorial(p - k - q).get_d());
            GridTensorField v = contract_x_pow(divk, p - k - q);
            v = trace_pow(std::move(v), q);
            v = delta_mul_pow(std::move(v), q);
            v = spectral_d_pow(std::move(v), p - q);
            tot += v * coef;
        }
    return tot * c_coeff(m, n, k);
}

// ---------------------------------------------------------------- norms

namespace {

std::vector<char> box_mask(const GridSpec& s, double frac) {
    std::vector<char> mask(s.nodes());
    double lim = frac * s.L() + 1e-12;
    double x[3];
    for (std::size_t lin = 0; lin < s.nodes(); ++lin) {
        node_coords(s, lin, x);
        bool in = true;
        for (int a = 0; a < s.n; ++a) in = in && std::fabs(x[a]) <= lim;
        mask[lin] = in;
    }
    return mask;
}

}  // namespace

double inner(const GridTensorField& f, const GridTensorField& g, double frac) {
    f.check_same(g);
    const auto& T = f.table();
    auto mask = box_mask(f.spec(), frac);
    double acc = 0;
    for (std::size_t i = 0; i < f.ncomp(); ++i) {
        double s = 0;
        const auto& a = f.comp(i);
        const auto& b = g.comp(i);
        for (std::size_t j = 0; j < a.size(); ++j)
            if (mask[j]) s += a[j] * b[j];
        acc += T.mult[i] * s;
    }
    return acc * std::pow(f.spec().h, f.n());
}

double l2_norm(const GridTensorField& f, double frac) { return std::sqrt(std::max(0.0, inner(f, f, frac))); }

double rel_error(const GridTensorField& f, const GridTensorField& g, double frac) {
    double den = l2_norm(g, frac);
    if (den == 0) throw std::domain_error("reference field has zero norm");
    return l2_norm(f - g, frac) / den;
}

std::vector<double> edge_taper(const GridSpec& s, double width_cells, double offset) {
    double w = width_cells * s.h, c = s.L() - offset * w;
    std::vector<double> t1(s.N);
    for (int j = 0; j < s.N; ++j) t1[j] = 0.5 * std::erfc((std::fabs(s.coord(j)) - c) / w);
    std::vector<double> out(s.nodes());
    for (std::size_t lin = 0; lin < s.nodes(); ++lin) {
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

// ---------------------------------------------------------------- phantom

std::vector<GaussianBlob> default_blobs(int n, int m, double scale) {
    std::vector<GaussianBlob> b(2);
    b[0].center = {0.5, -0.3};
    b[1].center = {-0.6, 0.4};
    if (n == 3) {
        b[0].center.push_back(0.2);
        b[1].center.push_back(-0.1);
    }
    for (auto& x : b[0].center) x *= scale;
    for (auto& x : b[1].center) x *= scale;
    b[0].width = 0.8 * scale;
    b[1].width = 0.6 * scale;
    b[0].tensor = SymTensor<double>(n, m);
    b[1].tensor = SymTensor<double>(n, m);
    auto& A = b[0].tensor;
    auto& B = b[1].tensor;
    if (m == 0) {
        A[0] = 1;
        B[0] = 0.5;
    } else if (m == 1) {
        A.at({0}) = 1, A.at({1}) = -0.5;
        B.at({0}) = 0.3, B.at({1}) = 1;
        if (n == 3) A.at({2}) = 0.4, B.at({2}) = -0.2;
    } else if (m == 2) {
        A.at({0, 0}) = 1, A.at({1, 1}) = -0.7;
        B.at({0, 1}) = 0.4, B.at({1, 1}) = 1;
        if (n == 3) {
            A.at({0, 2}) = 0.2, B.at({1, 2}) = -0.3;
            A.at({2, 2}) = 0.5, B.at({2, 2}) = 0.6;
        }
    } else {
        throw invalid_input("default phantom covers m <= 2");
    }
    return b;
}

GridTensorField gaussian_phantom(const GridSpec& s, int m, const std::vector<GaussianBlob>& blobs) {
    s.validate();
    GridTensorField f(s, m);
    double L = s.L();
    for (const auto& b : blobs) {
        if (static_cast<int>(b.center.size()) != s.n) throw invalid_input("blob centre has wrong dimension");
        if (b.tensor.n() != s.n || b.tensor.rank() != m) throw invalid_input("blob tensor has wrong shape");
        if (!(b.width > 0)) throw invalid_input("blob width must be positive");
        if (6 * b.width > L) throw invalid_input("phantom too wide for the grid (6 w > L)");
        for (double c : b.center)
            if (std::fabs(c) + 3 * b.width > L) throw invalid_input("phantom too close to the grid boundary");
    }
    double x[3];
    for (std::size_t lin = 0; lin < s.nodes(); ++lin) {
        node_coords(s, lin, x);
        for (const auto& b : blobs) {
            double r2 = 0;
            for (int a = 0; a < s.n; ++a) r2 += (x[a] - b.center[a]) * (x[a] - b.center[a]);
            double g = std::exp(-r2 / (b.width * b.width));
            for (std::size_t i = 0; i < f.ncomp(); ++i) f.comp(i)[lin] += g * b.tensor[i];
        }
    }
    return f;
}

// ---------------------------------------------------------------- I/O

void write_field(const GridTensorField& f, const std::string& path) {
    const GridSpec& s = f.spec();
    nlohmann::json hdr;
    hdr["n"] = s.n;
    hdr["m"] = f.rank();
    hdr["shape"] = std::vector<int>(s.n, s.N);
    hdr["h"] = s.h;
    hdr["origin"] = std::vector<double>(s.n, 0.0);
    hdr["pad"] = s.pad;
    std::vector<std::string> order;
    for (const auto& e : f.table().entries) order.push_back(index_name(e));
    hdr["component_order"] = order;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << hdr.dump() << '\n';
    for (std::size_t i = 0; i < f.ncomp(); ++i)
        os.write(reinterpret_cast<const char*>(f.comp(i).data()),
                 static_cast<std::streamsize>(f.comp(i).size() * sizeof(double)));
}

GridTensorField read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw invalid_input("cannot open " + path);
    std::string line;
    std::getline(is, line);
    nlohmann::json hdr;
    try {
        hdr = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
        throw invalid_input("bad field header in " + path);
    }
    GridSpec s;
    s.n = hdr.at("n");
    s.N = hdr.at("shape").at(0);
    s.h = hdr.at("h");
    s.pad = hdr.value("pad", 2);
    s.validate();
    GridTensorField f(s, hdr.at("m").get<int>());
    for (std::size_t i = 0; i < f.ncomp(); ++i) {
        is.read(reinterpret_cast<char*>(f.comp(i).data()),
                static_cast<std::streamsize>(f.comp(i).size() * sizeof(double)));
        if (!is) throw invalid_input("truncated field data in " + path);
    }
    return f;
}

void write_slice_csv(const GridTensorField& f, const std::string& path) {
    const GridSpec& s = f.spec();
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "x1,x2";
    for (const auto& e : f.table().entries) os << ",f[" << index_name(e) << "]";
    os << '\n';
    os.precision(10);
    for (int i = 0; i < s.N; ++i)
        for (int j = 0; j < s.N; ++j) {
            std::size_t lin = static_cast<std::size_t>(i) * s.N + j;
            if (s.n == 3) lin = lin * s.N + s.N / 2;
            os << s.coord(i) << ',' << s.coord(j);
            for (std::size_t c = 0; c < f.ncomp(); ++c) os << ',' << f.comp(c)[lin];
            os << '\n';
        }
}

void write_profile_csv(const GridTensorField& f, const std::string& path) {
    const GridSpec& s = f.spec();
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "x1";
    for (const auto& e : f.table().entries) os << ",f[" << index_name(e) << "]";
    os << '\n';
    os.precision(10);
    std::size_t stride = s.n == 2 ? s.N : static_cast<std::size_t>(s.N) * s.N;
    std::size_t base = s.n == 2 ? s.N / 2 : (static_cast<std::size_t>(s.N / 2) * s.N + s.N / 2);
    for (int i = 0; i < s.N; ++i) {
        std::size_t lin = base + i * stride;
        os << s.coord(i);
        for (std::size_t c = 0; c < f.ncomp(); ++c) os << ',' << f.comp(c)[lin];
        os << '\n';
    }
}

}  // namespace momray
