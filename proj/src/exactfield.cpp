#include "momray/exactfield.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace momray {

Poly::Key Poly::pack(const std::vector<int>& alpha, int s) {
    if (alpha.size() > 6) throw std::invalid_argument("exact fields support n <= 6");
    if (s < -128 || s > 127) throw std::overflow_error("radial power out of packed range");
    Key k = static_cast<Key>(s + 128);
    for (std::size_t a = 0; a < alpha.size(); ++a) {
        if (alpha[a] < 0 || alpha[a] > 255) throw std::overflow_error("exponent out of packed range");
        k |= static_cast<Key>(alpha[a]) << (8 * (a + 1));
    }
    return k;
}

void Poly::unpack(Key k, int n, std::vector<int>& alpha, int& s) {
    s = static_cast<int>(k & 0xff) - 128;
    alpha.assign(n, 0);
    for (int a = 0; a < n; ++a) alpha[a] = static_cast<int>((k >> (8 * (a + 1))) & 0xff);
}

Poly Poly::constant(int n, const Rational& c) { return monomial(n, std::vector<int>(n, 0), 0, c); }

Poly Poly::radial(int n, int s, const Rational& c) { return monomial(n, std::vector<int>(n, 0), s, c); }

Poly Poly::monomial(int n, const std::vector<int>& alpha, int s, const Rational& c) {
    Poly p(n);
    p.add(alpha, s, c);
    return p;
}

void Poly::add_raw(Key k, const Rational& c) {
    if (c == 0) return;
    auto [it, fresh] = t_.try_emplace(k, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) t_.erase(it);
    }
}

void Poly::add(const std::vector<int>& alpha, int s, const Rational& c) {
    if (c == 0) return;
    if (alpha[0] < 2) {
        add_raw(pack(alpha, s), c);
        return;
    }
    std::vector<int> b = alpha;
    b[0] -= 2;
    add(b, s + 2, c);
    for (int i = 1; i < n_; ++i) {
        b[i] += 2;
        add(b, s, -c);
        b[i] -= 2;
    }
}

std::vector<RadialTerm> Poly::term_list() const {
    std::vector<RadialTerm> out;
    for (const auto& [k, c] : t_) {
        RadialTerm t;
        t.coef = c;
        unpack(k, n_, t.mono, t.rpow);
        out.push_back(std::move(t));
    }
    return out;
}

Poly& Poly::operator+=(const Poly& o) {
    if (n_ == 0) n_ = o.n_;
    for (const auto& [k, c] : o.t_) add_raw(k, c);
    return *this;
}

Poly& Poly::operator-=(const Poly& o) {
    if (n_ == 0) n_ = o.n_;
    for (const auto& [k, c] : o.t_) add_raw(k, -c);
    return *this;
}

Poly& Poly::operator*=(const Rational& c) {
    if (c == 0) {
        t_.clear();
        return *this;
    }
    for (auto& [k, v] : t_) v *= c;
    return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
    int n = a.n_ ? a.n_ : b.n_;
    Poly out(n);
    std::vector<int> aa, bb, cc(n);
    int sa, sb;
    for (const auto& [ka, ca] : a.t_) {
        Poly::unpack(ka, n, aa, sa);
        for (const auto& [kb, cb] : b.t_) {
            Poly::unpack(kb, n, bb, sb);
            for (int i = 0; i < n; ++i) cc[i] = aa[i] + bb[i];
            out.add(cc, sa + sb, ca * cb);
        }
    }
    return out;
}

Poly Poly::partial(int axis) const {
    Poly out(n_);
    std::vector<int> al;
    int s;
    for (const auto& [k, c] : t_) {
        unpack(k, n_, al, s);
        if (al[axis] > 0) {
            Rational w = c * al[axis];
            --al[axis];
            out.add(al, s, w);
            ++al[axis];
        }
        if (s != 0) {
            ++al[axis];
            out.add(al, s - 2, c * s);
        }
    }
    return out;
}

Poly Poly::times_var(int axis) const {
    Poly out(n_);
    std::vector<int> al;
    int s;
    for (const auto& [k, c] : t_) {
        unpack(k, n_, al, s);
        ++al[axis];
        out.add(al, s, c);
    }
    return out;
}

Poly Poly::times_radial(int s0) const {
    Poly out(n_);
    std::vector<int> al;
    int s;
    for (const auto& [k, c] : t_) {
        unpack(k, n_, al, s);
        out.add_raw(pack(al, s + s0), c);
    }
    return out;
}

double Poly::eval(const std::vector<double>& y) const {
    double r = 0;
    for (double v : y) r += v * v;
    r = std::sqrt(r);
    double acc = 0;
    std::vector<int> al;
    int s;
    for (const auto& [k, c] : t_) {
        unpack(k, n_, al, s);
        double v = c.get_d() * std::pow(r, s);
        for (int a = 0; a < n_; ++a) v *= std::pow(y[a], al[a]);
        acc += v;
    }
    return acc;
}

std::string to_string(const Poly& p) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& t : p.term_list()) {
        if (!first) os << " + ";
        first = false;
        os << t.coef.get_str();
        for (std::size_t a = 0; a < t.mono.size(); ++a)
            if (t.mono[a]) os << "*y" << a + 1 << (t.mono[a] > 1 ? "^" + std::to_string(t.mono[a]) : "");
        if (t.rpow) os << "*|y|^" << t.rpow;
    }
    return os.str();
}

// ---------------------------------------------------------------- fields

RadialPolyField::RadialPolyField(int n, int m) : n_(n), m_(m), c_(index_table(n, m).size(), Poly(n)) {
    if (n > 6) throw std::invalid_argument("exact fields support n <= 6");
}

RadialPolyField RadialPolyField::scalar(const Poly& p) {
    RadialPolyField f(p.n(), 0);
    f.c_[0] = p;
    return f;
}

std::size_t RadialPolyField::term_count() const {
    std::size_t t = 0;
    for (const auto& p : c_) t += p.terms();
    return t;
}

bool RadialPolyField::is_zero() const {
    for (const auto& p : c_)
        if (!p.is_zero()) return false;
    return true;
}

void RadialPolyField::check_same(const RadialPolyField& o) const {
    if (n_ != o.n_ || m_ != o.m_) throw shape_error("field shape mismatch");
}

RadialPolyField& RadialPolyField::operator+=(const RadialPolyField& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

RadialPolyField& RadialPolyField::operator-=(const RadialPolyField& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

RadialPolyField& RadialPolyField::operator*=(const Rational& c) {
    for (auto& p : c_) p *= c;
    return *this;
}

SymTensor<double> RadialPolyField::eval(const std::vector<double>& y) const {
    SymTensor<double> t(n_, m_);
    for (std::size_t i = 0; i < c_.size(); ++i) t[i] = c_[i].eval(y);
    return t;
}

namespace {

// For each out index gamma of rank m+1, the (a, position of gamma - e_a) pairs.
template <class Fn>
void for_each_lower(int n, int m_out, Fn fn) {
    const auto& O = index_table(n, m_out);
    const auto& I = index_table(n, m_out - 1);
    Counts c;
    for (std::size_t g = 0; g < O.size(); ++g) {
        for (int a = 0; a < n; ++a) {
            if (O.counts[g][a] == 0) continue;
            c = O.counts[g];
            --c[a];
            fn(g, a, O.counts[g][a], I.find(c));
        }
    }
}

// For each out index alpha of rank m, the positions of alpha + e_a in rank m+1.
template <class Fn>
void for_each_upper(int n, int m_out, Fn fn) {
    const auto& O = index_table(n, m_out);
    const auto& U = index_table(n, m_out + 1);
    Counts c;
    for (std::size_t i = 0; i < O.size(); ++i) {
        for (int a = 0; a < n; ++a) {
            c = O.counts[i];
            ++c[a];
            fn(i, a, U.find(c));
        }
    }
}

void need_rank(const RadialPolyField& f, int r, const char* what) {
    if (f.rank() < r) throw shape_error(std::string(what) + ": rank underflow");
}

}  // namespace

RadialPolyField partial(const RadialPolyField& f, int axis) {
    if (axis < 0 || axis >= f.n()) throw std::out_of_range("axis out of range");
    RadialPolyField out(f.n(), f.rank());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].partial(axis);
    return out;
}

RadialPolyField inner_d(const RadialPolyField& f) {
    int M = f.rank() + 1;
    RadialPolyField out(f.n(), M);
    std::vector<std::vector<Poly>> parts(f.n());
    for (int a = 0; a < f.n(); ++a)
        for (std::size_t i = 0; i < f.size(); ++i) parts[a].push_back(f[i].partial(a));
    for_each_lower(f.n(), M, [&](std::size_t g, int a, int cnt, int lo) {
        out[g] += parts[a][lo] * Rational(cnt, M);
    });
    return out;
}

RadialPolyField mul_y(const RadialPolyField& f) {
    int M = f.rank() + 1;
    RadialPolyField out(f.n(), M);
    for_each_lower(f.n(), M, [&](std::size_t g, int a, int cnt, int lo) {
        out[g] += f[lo].times_var(a) * Rational(cnt, M);
    });
    return out;
}

RadialPolyField mul_axis(const RadialPolyField& f, int ax) {
    int M = f.rank() + 1;
    RadialPolyField out(f.n(), M);
    for_each_lower(f.n(), M, [&](std::size_t g, int a, int cnt, int lo) {
        if (a == ax) out[g] += f[lo] * Rational(cnt, M);
    });
    return out;
}

RadialPolyField divergence(const RadialPolyField& f) {
    need_rank(f, 1, "divergence");
    RadialPolyField out(f.n(), f.rank() - 1);
    for_each_upper(f.n(), f.rank() - 1, [&](std::size_t i, int a, int up) { out[i] += f[up].partial(a); });
    return out;
}

RadialPolyField contract_y(const RadialPolyField& f) {
    need_rank(f, 1, "contract_y");
    RadialPolyField out(f.n(), f.rank() - 1);
    for_each_upper(f.n(), f.rank() - 1, [&](std::size_t i, int a, int up) { out[i] += f[up].times_var(a); });
    return out;
}

RadialPolyField contract_axis(const RadialPolyField& f, int ax) {
    need_rank(f, 1, "contract_axis");
    RadialPolyField out(f.n(), f.rank() - 1);
    for_each_upper(f.n(), f.rank() - 1, [&](std::size_t i, int a, int up) {
        if (a == ax) out[i] += f[up];
    });
    return out;
}

RadialPolyField trace(const RadialPolyField& f) {
    need_rank(f, 2, "trace");
    int n = f.n(), m = f.rank() - 2;
    RadialPolyField out(n, m);
    const auto& O = index_table(n, m);
    const auto& U = index_table(n, m + 2);
    for (std::size_t i = 0; i < O.size(); ++i) {
        for (int a = 0; a < n; ++a) {
            Counts c = O.counts[i];
            c[a] += 2;
            out[i] += f[U.find(c)];
        }
    }
    return out;
}

RadialPolyField delta_mul(const RadialPolyField& f) {
    int n = f.n(), M = f.rank() + 2;
    RadialPolyField out(n, M);
    const auto& O = index_table(n, M);
    const auto& I = index_table(n, M - 2);
    for (std::size_t g = 0; g < O.size(); ++g) {
        for (int a = 0; a < n; ++a) {
            int ca = O.counts[g][a];
            if (ca < 2) continue;
            Counts c = O.counts[g];
            c[a] -= 2;
            out[g] += f[I.find(c)] * Rational(ca * (ca - 1), M * (M - 1));
        }
    }
    return out;
}

RadialPolyField times_var(const RadialPolyField& f, int a) {
    RadialPolyField out(f.n(), f.rank());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].times_var(a);
    return out;
}

RadialPolyField times_radial(const RadialPolyField& f, int s) {
    RadialPolyField out(f.n(), f.rank());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].times_radial(s);
    return out;
}

RadialPolyField contract(const RadialPolyField& u, const RadialPolyField& v) {
    if (u.n() != v.n()) throw shape_error("dimension mismatch in contract");
    if (u.rank() < v.rank()) throw shape_error("contraction rank underflow");
    RadialPolyField out(u.n(), u.rank() - v.rank());
    const auto& C = contract_table(u.n(), u.rank(), v.rank());
    for (std::size_t i = 0; i < C.size(); ++i)
        for (const auto& t : C[i]) {
            if (u[t.a].is_zero() || v[t.b].is_zero()) continue;
            out[i] += (u[t.a] * v[t.b]) * Rational(t.num, t.den);
        }
    return out;
}

#define MOMRAY_POW(name, op)                          \
    RadialPolyField name(RadialPolyField f, int k) {  \
        for (int i = 0; i < k; ++i) f = op(f);        \
        return f;                                     \
    }
MOMRAY_POW(inner_d_pow, inner_d)
MOMRAY_POW(divergence_pow, divergence)
MOMRAY_POW(contract_y_pow, contract_y)
MOMRAY_POW(mul_y_pow, mul_y)
MOMRAY_POW(delta_mul_pow, delta_mul)
MOMRAY_POW(trace_pow, trace)
#undef MOMRAY_POW

const RadialPolyField& build_A(int m, int k, int n) {
    if (m < 0 || k < 0 || k > m) throw std::invalid_argument("build_A needs 0 <= k <= m");
    static std::mutex mu;
    // keyed by (n, s, j) for d^j |y|^s; A^(m+1,k+1) = d A^(m,k) shares the chain
    static std::map<std::tuple<int, int, int>, std::unique_ptr<RadialPolyField>> cache;
    std::lock_guard<std::mutex> lock(mu);
    int s = 2 * m - 2 * k - 1, j = 2 * m - k;
    auto key = std::make_tuple(n, s, j);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    RadialPolyField f = RadialPolyField::scalar(Poly::radial(n, s));
    if (j == 0) cache.emplace(key, std::make_unique<RadialPolyField>(f));
    int have = 0;
    for (int jj = j - 1; jj >= 0; --jj) {
        auto lo = cache.find(std::make_tuple(n, s, jj));
        if (lo != cache.end()) {
            f = *lo->second;
            have = jj;
            break;
        }
    }
    for (int jj = have; jj < j; ++jj) {
        f = inner_d(f);
        cache.emplace(std::make_tuple(n, s, jj + 1), std::make_unique<RadialPolyField>(f));
    }
    return *cache.at(key);
}

namespace {

using PlainMono = std::vector<int>;
using PlainPoly = std::map<PlainMono, Rational>;

// (y_1^2 + ... + y_n^2)^t, expanded.
const PlainPoly& norm_power(int n, int t) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, PlainPoly> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, t);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    PlainPoly cur{{PlainMono(n, 0), Rational(1)}};
    for (int s = 0; s < t; ++s) {
        PlainPoly next;
        for (const auto& [mo, c] : cur)
            for (int a = 0; a < n; ++a) {
                PlainMono b = mo;
                b[a] += 2;
                next[b] += c;
            }
        cur.swap(next);
    }
    return cache.emplace(key, std::move(cur)).first->second;
}

bool plain_zero(const PlainPoly& p) {
    for (const auto& [mo, c] : p)
        if (c != 0) return false;
    return true;
}

bool component_vanishes(const Poly& p) {
    auto terms = p.term_list();
    if (terms.empty()) return true;
    int smin = terms[0].rpow;
    for (const auto& t : terms) smin = std::min(smin, t.rpow);
    int n = p.n();
    PlainPoly P, Q;
    for (const auto& t : terms) {
        int s = t.rpow - smin;
        int half = s / 2;
        PlainPoly& dst = (s % 2) ? Q : P;
        for (const auto& [mo, c] : norm_power(n, half)) {
            PlainMono b = mo;
            for (int a = 0; a < n; ++a) b[a] += t.mono[a];
            dst[b] += c * t.coef;
        }
    }
    return plain_zero(P) && plain_zero(Q);
}

}  // namespace

bool canonical_eq(const RadialPolyField& f, const RadialPolyField& g) {
    f.check_same(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        Poly d = f[i] - g[i];
        if (!component_vanishes(d)) return false;
    }
    return true;
}

bool homogeneous_degree(const RadialPolyField& f, int& degree) {
    bool seen = false;
    int deg = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        for (const auto& t : f[i].term_list()) {
            int d = t.rpow;
            for (int e : t.mono) d += e;
            if (!seen) {
                deg = d;
                seen = true;
            } else if (d != deg) {
                return false;
            }
        }
    if (seen) degree = deg;
    return true;
}

RadialPolyField random_field(int n, int m, std::uint64_t seed, int degree, bool radial) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(n * 131 + m));
    auto rnd_q = [&] {
        long num = static_cast<long>(rng() % 17) - 8;
        long den = static_cast<long>(rng() % 16) + 1;
        Rational q(num, den);
        q.canonicalize();
        return q;
    };
    RadialPolyField f(n, m);
    std::vector<PlainMono> monos;
    for (int d = 0; d <= degree; ++d) {
        const auto& T = index_table(n, d);
        for (const auto& c : T.counts) monos.push_back(c);
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
        Poly p(n);
        for (const auto& mo : monos) p.add(mo, 0, rnd_q());
        if (radial) {
            PlainMono mo(n, 0);
            mo[rng() % n] = static_cast<int>(rng() % 2);
            static const int pw[] = {-1, 1, 3};
            Rational c = rnd_q();
            if (c == 0) c = 1;
            p.add(mo, pw[rng() % 3], c);
        }
        f[i] = std::move(p);
    }
    return f;
}

}  // namespace momray
