#include "momray/kernel.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Dense>

#include "momray/coeffs.hpp"

namespace momray {

namespace {

// Smooth cutoff exp(-(r/R)^(2p)) for the lattice sums.
constexpr int kP = 4;
constexpr double kR = 24.0;

struct Lattice {
    std::vector<std::vector<int>> pts;  // nonnegative octant, origin excluded
    std::vector<double> r2;
    std::vector<double> wt;  // cutoff times the number of sign images
};

const Lattice& lattice(int n) {
    static std::map<int, Lattice> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    int rc = static_cast<int>(std::ceil(kR * std::pow(40.0, 1.0 / (2 * kP))));
    Lattice L;
    std::vector<int> j(n, 0);
    while (true) {
        double r2 = 0;
        int nz = 0;
        for (int v : j) {
            r2 += double(v) * v;
            nz += v != 0;
        }
        if (r2 > 0) {
            double g = std::exp(-std::pow(r2 / (kR * kR), kP));
            if (g > 0) {
                L.pts.push_back(j);
                L.r2.push_back(r2);
                L.wt.push_back(g * std::ldexp(1.0, nz));
            }
        }
        int a = n - 1;
        while (a >= 0 && j[a] == rc) j[a--] = 0;
        if (a < 0) break;
        ++j[a];
    }
    return cache.emplace(n, std::move(L)).first->second;
}

}  // namespace

double lattice_zeta(const Counts& c, int e) {
    for (int ci : c)
        if (ci % 2) return 0.0;
    static std::map<std::pair<Counts, int>, double> cache;
    static std::mutex mu;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find({c, e});
        if (it != cache.end()) return it->second;
    }
    int n = static_cast<int>(c.size()), cs = 0;
    double lg = 0;
    for (int ci : c) {
        cs += ci;
        lg += std::lgamma((ci + 1) / 2.0);
    }
    int d = cs - e;
    if (d + n <= 0) throw std::domain_error("lattice_zeta: kernel not locally integrable");
    double sph = 2 * std::exp(lg - std::lgamma((cs + n) / 2.0));
    double integral = std::pow(kR, d + n) * sph * std::tgamma((d + n) / (2.0 * kP)) / (2 * kP);
    const Lattice& L = lattice(n);
    double sum = 0;
    for (std::size_t i = 0; i < L.pts.size(); ++i) {
        double num = 1;
        for (int a = 0; a < n; ++a)
            if (c[a]) num *= std::pow(double(L.pts[i][a]), c[a]);
        if (num == 0) continue;
        sum += L.wt[i] * num * std::pow(L.r2[i], -0.5 * e);
    }
    double z = integral - sum;
    std::lock_guard<std::mutex> lock(mu);
    cache[{c, e}] = z;
    return z;
}

const std::vector<StencilWeight>& origin_correction(const Counts& c, int e, int order) {
    static std::map<std::tuple<Counts, int, int>, std::vector<StencilWeight>> cache;
    static std::mutex mu;
    auto key = std::make_tuple(c, e, order);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    int n = static_cast<int>(c.size()), q = order / 2;
    std::vector<std::vector<int>> pts, betas;
    std::vector<int> v(n, -q);
    while (true) {
        pts.push_back(v);
        int a = n - 1;
        while (a >= 0 && v[a] == q) v[a--] = -q;
        if (a < 0) break;
        ++v[a];
    }
    std::vector<int> b(n, 0);
    while (true) {
        int s = 0;
        for (int x : b) s += x;
        if (s <= order) betas.push_back(b);
        int a = n - 1;
        while (a >= 0 && b[a] == order) b[a--] = 0;
        if (a < 0) break;
        ++b[a];
    }
    Eigen::MatrixXd A(betas.size(), pts.size());
    Eigen::VectorXd rhs(betas.size());
    for (std::size_t i = 0; i < betas.size(); ++i) {
        for (std::size_t j = 0; j < pts.size(); ++j) {
            double p = 1;
            for (int a = 0; a < n; ++a) p *= std::pow(double(pts[j][a]), betas[i][a]);
            A(i, j) = p;
        }
        Counts cb = c;
        for (int a = 0; a < n; ++a) cb[a] += betas[i][a];
        rhs(i) = lattice_zeta(cb, e);
    }
    // minimum-norm solution of the underdetermined moment system
    Eigen::VectorXd w = A.completeOrthogonalDecomposition().solve(rhs);
    std::vector<StencilWeight> out;
    for (std::size_t j = 0; j < pts.size(); ++j) out.push_back({pts[j], w(j)});
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(key, std::move(out)).first->second;
}

std::vector<double> kernel_samples(const GridSpec& s, const Counts& c, int e, int order) {
    int n = s.n, M = s.M(), cs = 0;
    for (int ci : c) cs += ci;
    std::vector<double> ax(M);
    for (int j = 0; j < M; ++j) ax[j] = (j < M / 2 ? j : j - M) * s.h;
    std::vector<double> out(s.padded_nodes());
    std::vector<int> j(n, 0);
    for (std::size_t lin = 0; lin < out.size(); ++lin) {
        double r2 = 0, num = 1;
        for (int a = 0; a < n; ++a) {
            double x = ax[j[a]];
            r2 += x * x;
            for (int t = 0; t < c[a]; ++t) num *= x;
        }
        out[lin] = r2 > 0 ? num * std::pow(r2, -0.5 * e) : 0.0;
        for (int a = n - 1; a >= 0; --a) {
            if (++j[a] < M) break;
            j[a] = 0;
        }
    }
    double hd = std::pow(s.h, cs - e);
    for (const auto& sw : origin_correction(c, e, order)) {
        std::size_t lin = 0;
        for (int a = 0; a < n; ++a) lin = lin * M + ((sw.offset[a] % M + M) % M);
        out[lin] += hd * sw.w;
    }
    return out;
}

GridTensorField normal_kernel(const GridTensorField& f, int k, int order) {
    const GridSpec& s = f.spec();
    int n = s.n, m = f.rank();
    if (k < 0 || k > m) throw std::invalid_argument("normal_kernel needs 0 <= k <= m");
    Spectral& sp = spectral_engine(s);
    const auto& I = index_table(n, m);
    GridTensorField out(s, m);
    std::vector<double> tmp;
    for (int l = 0; l <= k; ++l) {
        int r = m + k + l, e = 2 * m + 2 * l + n - 1;
        GridTensorField u = mul_xpow(f, k + l);
        const auto& J = index_table(n, r);
        std::vector<std::vector<cplx>> U(J.size());
        for (std::size_t j = 0; j < J.size(); ++j) sp.forward(u.comp(j), U[j]);
        u = GridTensorField();
        std::vector<std::vector<cplx>> acc(I.size(), std::vector<cplx>(sp.half(), cplx(0)));
        const auto& G = index_table(n, m + r);
        std::vector<cplx> K;
        for (std::size_t g = 0; g < G.size(); ++g) {
            sp.forward_padded(kernel_samples(s, G.counts[g], e, order), K);
            for (std::size_t i = 0; i < I.size(); ++i) {
                Counts cj = G.counts[g];
                bool ok = true;
                for (int a = 0; a < n; ++a) ok = ok && (cj[a] -= I.counts[i][a]) >= 0;
                if (!ok) continue;
                int jj = J.find(cj);
                double w = static_cast<double>(J.mult[jj]);
                const auto& Uj = U[jj];
                auto& A = acc[i];
                for (std::size_t t = 0; t < A.size(); ++t) A[t] += w * K[t] * Uj[t];
            }
        }
        double sc = 2 * binom_ext(k, l).get_d() * std::pow(s.h, n);
        for (std::size_t i = 0; i < I.size(); ++i) {
            sp.inverse(acc[i], tmp);
            auto& o = out.comp(i);
            for (std::size_t t = 0; t < o.size(); ++t) o[t] += sc * tmp[t];
        }
    }
    return out;
}

}  // namespace momray
