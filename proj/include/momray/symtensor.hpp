#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <gmpxx.h>

namespace momray {

using Rational = mpq_class;

// Axis counts of a canonical multi-index: counts[a] = number of times axis a occurs.
using Counts = std::vector<int>;

// All canonical (sorted) multi-indices of rank m over n axes, in lexicographic
// order of their sorted entry lists.
struct IndexTable {
    int n = 0;
    int m = 0;
    std::vector<std::vector<int>> entries;  // sorted, 0-based axes
    std::vector<Counts> counts;
    std::vector<std::int64_t> mult;         // m! / prod counts!

    std::size_t size() const { return entries.size(); }
    int find(const Counts& c) const;
    int find_entries(std::vector<int> e) const;
};

const IndexTable& index_table(int n, int m);

std::int64_t dim(int n, int m);
std::int64_t multiplicity(const Counts& c);

// Weighted term lists for the algebra operations.  A weight is num/den with
// small integers, so it can be realised exactly for rationals.
struct WTerm {
    int a;
    int b;
    std::int64_t num;
    std::int64_t den;
};

// sym_mul: out[g] = sum over (ia, ib, w) of w * u[ia] * v[ib]
const std::vector<std::vector<WTerm>>& product_table(int n, int ra, int rb);
// contract (rank ra) by (rank rb): out[I] = sum mult(beta) * u[a] * v[b]
const std::vector<std::vector<WTerm>>& contract_table(int n, int ra, int rb);

template <class S>
S weight_as(std::int64_t num, std::int64_t den) {
    if constexpr (std::is_same_v<S, Rational>) {
        Rational q(static_cast<long>(num), static_cast<unsigned long>(den));
        q.canonicalize();
        return q;
    } else {
        return S(static_cast<double>(num) / static_cast<double>(den));
    }
}

template <class S>
S conj_of(const S& s) {
    if constexpr (std::is_same_v<S, std::complex<double>>)
        return std::conj(s);
    else
        return s;
}

struct shape_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

template <class S>
class SymTensor {
public:
    SymTensor() = default;
    SymTensor(int n, int m) : n_(n), m_(m), c_(index_table(n, m).size(), S(0)) {}

    static SymTensor scalar(int n, const S& v) {
        SymTensor t(n, 0);
        t.c_[0] = v;
        return t;
    }

    int n() const { return n_; }
    int rank() const { return m_; }
    std::size_t size() const { return c_.size(); }
    const IndexTable& table() const { return index_table(n_, m_); }

    S& operator[](std::size_t i) { return c_[i]; }
    const S& operator[](std::size_t i) const { return c_[i]; }
    std::vector<S>& data() { return c_; }
    const std::vector<S>& data() const { return c_; }

    // Read at any index tuple, permuted or not (0-based axes).
    const S& at(const std::vector<int>& tuple) const {
        if (static_cast<int>(tuple.size()) != m_) throw shape_error("index length differs from rank");
        return c_[table().find_entries(tuple)];
    }
    S& at(const std::vector<int>& tuple) {
        if (static_cast<int>(tuple.size()) != m_) throw shape_error("index length differs from rank");
        return c_[table().find_entries(tuple)];
    }

    SymTensor& operator+=(const SymTensor& o) {
        check_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    SymTensor& operator-=(const SymTensor& o) {
        check_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    SymTensor& operator*=(const S& s) {
        for (auto& x : c_) x *= s;
        return *this;
    }
    friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
    friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
    friend SymTensor operator*(SymTensor a, const S& s) { return a *= s; }
    friend SymTensor operator*(const S& s, SymTensor a) { return a *= s; }

    bool operator==(const SymTensor& o) const { return n_ == o.n_ && m_ == o.m_ && c_ == o.c_; }

    void check_same(const SymTensor& o) const {
        if (n_ != o.n_ || m_ != o.m_) throw shape_error("tensor shape mismatch");
    }

private:
    int n_ = 0;
    int m_ = 0;
    std::vector<S> c_;
};

// Dense layout: row-major over n^m entries, first index slowest.
template <class S>
SymTensor<S> symmetrize(const std::vector<S>& dense, int n, int m) {
    std::size_t total = 1;
    for (int i = 0; i < m; ++i) total *= static_cast<std::size_t>(n);
    if (dense.size() != total) throw shape_error("dense array has wrong number of entries");
    SymTensor<S> out(n, m);
    const auto& T = index_table(n, m);
    std::vector<S> acc(T.size(), S(0));
    std::vector<int> tup(m, 0);
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t r = lin;
        for (int i = m - 1; i >= 0; --i) {
            tup[i] = static_cast<int>(r % n);
            r /= n;
        }
        acc[T.find_entries(tup)] += dense[lin];
    }
    for (std::size_t i = 0; i < T.size(); ++i) out[i] = acc[i] * weight_as<S>(1, T.mult[i]);
    return out;
}

template <class S>
std::vector<S> densify(const SymTensor<S>& u) {
    int n = u.n(), m = u.rank();
    std::size_t total = 1;
    for (int i = 0; i < m; ++i) total *= static_cast<std::size_t>(n);
    std::vector<S> dense(total);
    std::vector<int> tup(m, 0);
    const auto& T = u.table();
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t r = lin;
        for (int i = m - 1; i >= 0; --i) {
            tup[i] = static_cast<int>(r % n);
            r /= n;
        }
        dense[lin] = u[T.find_entries(tup)];
    }
    return dense;
}

template <class S>
S dot(const SymTensor<S>& u, const SymTensor<S>& v) {
    u.check_same(v);
    const auto& T = u.table();
    S acc(0);
    for (std::size_t i = 0; i < T.size(); ++i) acc += weight_as<S>(T.mult[i], 1) * u[i] * conj_of(v[i]);
    return acc;
}

template <class S>
SymTensor<S> sym_mul(const SymTensor<S>& u, const SymTensor<S>& v) {
    if (u.n() != v.n()) throw shape_error("dimension mismatch in sym_mul");
    SymTensor<S> out(u.n(), u.rank() + v.rank());
    const auto& P = product_table(u.n(), u.rank(), v.rank());
    for (std::size_t g = 0; g < P.size(); ++g) {
        S acc(0);
        for (const auto& t : P[g]) acc += weight_as<S>(t.num, t.den) * u[t.a] * v[t.b];
        out[g] = acc;
    }
    return out;
}

// j_v u, i.e. u/v: contracts all indices of v against u.
template <class S>
SymTensor<S> contract(const SymTensor<S>& u, const SymTensor<S>& v) {
    if (u.n() != v.n()) throw shape_error("dimension mismatch in contract");
    if (u.rank() < v.rank()) throw shape_error("contraction rank underflow");
    SymTensor<S> out(u.n(), u.rank() - v.rank());
    const auto& C = contract_table(u.n(), u.rank(), v.rank());
    for (std::size_t i = 0; i < C.size(); ++i) {
        S acc(0);
        for (const auto& t : C[i]) acc += weight_as<S>(t.num, t.den) * u[t.a] * v[t.b];
        out[i] = acc;
    }
    return out;
}

template <class S>
SymTensor<S> kronecker(int n) {
    SymTensor<S> d(n, 2);
    for (int a = 0; a < n; ++a) d.at({a, a}) = S(1);
    return d;
}

template <class S>
SymTensor<S> vector_tensor(const std::vector<S>& y) {
    SymTensor<S> v(static_cast<int>(y.size()), 1);
    for (std::size_t a = 0; a < y.size(); ++a) v[a] = y[a];
    return v;
}

template <class S>
SymTensor<S> delta_mul(const SymTensor<S>& u) {
    return sym_mul(kronecker<S>(u.n()), u);
}

template <class S>
SymTensor<S> trace(const SymTensor<S>& u) {
    if (u.rank() < 2) throw shape_error("trace needs rank >= 2");
    return contract(u, kronecker<S>(u.n()));
}

// y^k as a symmetric tensor: components y^{i1}...y^{ik}.
template <class S>
SymTensor<S> vector_power(const std::vector<S>& y, int k) {
    int n = static_cast<int>(y.size());
    SymTensor<S> out(n, k);
    const auto& T = index_table(n, k);
    for (std::size_t i = 0; i < T.size(); ++i) {
        S p(1);
        for (int a : T.entries[i]) p *= y[a];
        out[i] = p;
    }
    return out;
}

std::string index_name(const std::vector<int>& entries);  // "1,1,2" style, 1-based

}  // namespace momray
