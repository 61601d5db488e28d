#pragma once

#include <string>
#include <vector>

#include <gmpxx.h>

namespace momray {

using Integer = mpz_class;
using Rational = mpq_class;

// v!! for v >= -1.  Odd v is the usual product 1*3*...*v.  Even v gives
// 2*4*...*v with 0!! = 1; the n = 3 coefficient (n+2m-3)!! needs it.
Integer double_factorial(long v);
double double_factorial_d(long v);

Integer factorial(long v);
// C(k, p), zero if k < 0, p < 0 or k < p.
Integer binom_ext(long k, long p);

bool beta_in_support(int m, int k, int p);

// beta(m,k,p) by the tilde-beta recurrence, starting from the all-zero m = 0 level.
Rational beta_recurrence(int m, int k, int p);
// Closed form, restricted to the support of the recurrence.
Rational beta_closed(int m, int k, int p);
// Closed form without the support mask; differs from the recurrence on cells
// with k < p <= m-k.
Rational beta_closed_raw(int m, int k, int p);

double c_coeff(int m, int n, int k);
double f_factor(int m, int k, int n);
Rational h_factor(int m, int k, int n);

struct BetaRow {
    int m, k, p;
    Rational value;
};
// Every support cell (m', k, p) with m' <= max_m.
std::vector<BetaRow> beta_table(int max_m);
std::string beta_csv(int max_m);

struct BetaComparison {
    long cells = 0;
    long mismatches = 0;
    long raw_mismatches = 0;  // closed form without mask vs recurrence
    std::vector<std::string> first_failures;
};
// Compare closed form and recurrence on (k, p) in [-2, m+2]^2 for 0 <= m <= max_m.
BetaComparison compare_beta(int max_m);

}  // namespace momray
