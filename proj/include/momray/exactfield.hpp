#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "momray/symtensor.hpp"

namespace momray {

// One term c * y^alpha * |y|^s.  Stored packed: byte 0 holds s + 128, byte
// 1 + a holds alpha_a.  At most 6 axes, exponents below 256.
struct RadialTerm {
    Rational coef;
    std::vector<int> mono;
    int rpow = 0;
};

class Poly {
public:
    using Key = std::uint64_t;

    Poly() = default;
    explicit Poly(int n) : n_(n) {}
    static Poly constant(int n, const Rational& c);
    static Poly radial(int n, int s, const Rational& c = 1);  // c |y|^s
    static Poly monomial(int n, const std::vector<int>& alpha, int s, const Rational& c);

    int n() const { return n_; }
    bool is_zero() const { return t_.empty(); }
    std::size_t terms() const { return t_.size(); }
    const std::map<Key, Rational>& raw() const { return t_; }
    std::vector<RadialTerm> term_list() const;

    // Adds c * y^alpha |y|^s, rewriting y_1^2 = |y|^2 - sum_{i>1} y_i^2 so
    // that y_1 never appears squared.  The reduced form is unique.
    void add(const std::vector<int>& alpha, int s, const Rational& c);

    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    Poly& operator*=(const Rational& c);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(Poly a, const Rational& c) { return a *= c; }
    friend Poly operator*(const Poly& a, const Poly& b);
    bool operator==(const Poly& o) const { return n_ == o.n_ && t_ == o.t_; }

    Poly partial(int axis) const;
    Poly times_var(int axis) const;       // y_axis * this
    Poly times_radial(int s) const;       // |y|^s * this
    double eval(const std::vector<double>& y) const;

    static Key pack(const std::vector<int>& alpha, int s);
    static void unpack(Key k, int n, std::vector<int>& alpha, int& s);

private:
    void add_raw(Key k, const Rational& c);
    int n_ = 0;
    std::map<Key, Rational> t_;
};

class RadialPolyField {
public:
    RadialPolyField() = default;
    RadialPolyField(int n, int m);
    static RadialPolyField scalar(const Poly& p);

    int n() const { return n_; }
    int rank() const { return m_; }
    std::size_t size() const { return c_.size(); }
    Poly& operator[](std::size_t i) { return c_[i]; }
    const Poly& operator[](std::size_t i) const { return c_[i]; }
    const IndexTable& table() const { return index_table(n_, m_); }
    std::size_t term_count() const;
    bool is_zero() const;

    RadialPolyField& operator+=(const RadialPolyField& o);
    RadialPolyField& operator-=(const RadialPolyField& o);
    RadialPolyField& operator*=(const Rational& c);
    friend RadialPolyField operator+(RadialPolyField a, const RadialPolyField& b) { return a += b; }
    friend RadialPolyField operator-(RadialPolyField a, const RadialPolyField& b) { return a -= b; }
    friend RadialPolyField operator*(RadialPolyField a, const Rational& c) { return a *= c; }
    friend RadialPolyField operator*(const Rational& c, RadialPolyField a) { return a *= c; }

    void check_same(const RadialPolyField& o) const;

    // Evaluate all components at y (y != 0).
    SymTensor<double> eval(const std::vector<double>& y) const;

private:
    int n_ = 0;
    int m_ = 0;
    std::vector<Poly> c_;
};

RadialPolyField partial(const RadialPolyField& f, int axis);
RadialPolyField inner_d(const RadialPolyField& f);
RadialPolyField divergence(const RadialPolyField& f);
RadialPolyField contract_y(const RadialPolyField& f);    // j_y
RadialPolyField mul_y(const RadialPolyField& f);         // i_y
RadialPolyField delta_mul(const RadialPolyField& f);     // i
RadialPolyField trace(const RadialPolyField& f);         // j
RadialPolyField contract_axis(const RadialPolyField& f, int a);  // j_{e_a}
RadialPolyField mul_axis(const RadialPolyField& f, int a);       // i_{e_a}
RadialPolyField times_var(const RadialPolyField& f, int a);      // y_a f
RadialPolyField times_radial(const RadialPolyField& f, int s);   // |y|^s f
// u / v, i.e. j_v u: all indices of v contracted against u.
RadialPolyField contract(const RadialPolyField& u, const RadialPolyField& v);

// Operator powers; k = 0 returns the input.
RadialPolyField inner_d_pow(RadialPolyField f, int k);
RadialPolyField divergence_pow(RadialPolyField f, int k);
RadialPolyField contract_y_pow(RadialPolyField f, int k);
RadialPolyField mul_y_pow(RadialPolyField f, int k);
RadialPolyField delta_mul_pow(RadialPolyField f, int k);
RadialPolyField trace_pow(RadialPolyField f, int k);

// A^(m,k) = d^(2m-k) |y|^(2m-2k-1), cached.
const RadialPolyField& build_A(int m, int k, int n);

// Structural equality through the P + |y| Q split of f - g.
bool canonical_eq(const RadialPolyField& f, const RadialPolyField& g);

// Returns the common value of |alpha| + s over all terms, or false if the
// field mixes degrees.  A zero field reports true with degree unchanged.
bool homogeneous_degree(const RadialPolyField& f, int& degree);

// Components are random polynomials of total degree <= degree with
// numerators in [-8, 8] and denominators in [1, 16].  With radial = true each
// component also gets one term c y^alpha |y|^s, s odd.
RadialPolyField random_field(int n, int m, std::uint64_t seed, int degree = 2, bool radial = false);

std::string to_string(const Poly& p);

}  // namespace momray
