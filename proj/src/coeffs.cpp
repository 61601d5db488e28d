#include "momray/coeffs.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace momray {

Integer double_factorial(long v) {
    if (v < -1) throw std::invalid_argument("double factorial needs v >= -1");
    Integer r = 1;
    for (long i = v; i > 1; i -= 2) r *= i;
    return r;
}

double double_factorial_d(long v) { return double_factorial(v).get_d(); }

Integer factorial(long v) {
    if (v < 0) throw std::invalid_argument("factorial of negative integer");
    Integer r;
    mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(v));
    return r;
}

Integer binom_ext(long k, long p) {
    if (k < 0 || p < 0 || k < p) return 0;
    Integer r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(k), static_cast<unsigned long>(p));
    return r;
}

bool beta_in_support(int m, int k, int p) {
    if (k <= 0 || k > m || p < 0) return false;
    return p <= std::min(k, m - k);
}

namespace {

std::mutex beta_mutex;
// levels[m] maps (k,p) -> beta(m,k,p) over the support.
std::vector<std::map<std::pair<int, int>, Rational>> beta_levels{{}};

Rational level_get(const std::map<std::pair<int, int>, Rational>& lv, int k, int p) {
    auto it = lv.find({k, p});
    return it == lv.end() ? Rational(0) : it->second;
}

void extend_levels(int m) {
    while (static_cast<int>(beta_levels.size()) <= m) {
        int mm = static_cast<int>(beta_levels.size()) - 1;  // build level mm+1
        const auto& prev = beta_levels[mm];
        std::map<std::pair<int, int>, Rational> next;
        for (int k = 1; k <= mm + 1; ++k) {
            for (int p = 0; p <= std::min(k, mm + 1 - k); ++p) {
                Rational bt = level_get(prev, k, p) / Rational(2 * mm - 2 * k + 1);
                bt -= Rational(k - p, k) * level_get(prev, k - 1, p);
                bt += Rational(mm - k - p + 2, k) * level_get(prev, k - 1, p - 1);
                Rational v;
                if (k == 1 && p == 0)
                    v = Rational(2 * mm + 1) * (bt + 1);
                else if (k == 1 && p == 1)
                    v = Rational(2 * mm + 1) * (bt - mm);
                else
                    v = Rational(2 * mm + 1) * bt;
                v.canonicalize();
                if (v != 0) next[{k, p}] = v;
            }
        }
        beta_levels.push_back(std::move(next));
    }
}

}  // namespace

Rational beta_recurrence(int m, int k, int p) {
    if (m < 0) throw std::invalid_argument("beta needs m >= 0");
    if (!beta_in_support(m, k, p)) return 0;
    std::lock_guard<std::mutex> lock(beta_mutex);
    extend_levels(m);
    return level_get(beta_levels[m], k, p);
}

Rational beta_closed_raw(int m, int k, int p) {
    if (k <= 0 || m < 0) return 0;
    Integer b = binom_ext(m, k) * binom_ext(m - k, p);
    if (b == 0) return 0;
    // 2m-2k-1 >= -1 whenever C(m,k) != 0
    Rational v(double_factorial(2 * m - 1) * b, double_factorial(2 * m - 2 * k - 1));
    v /= Rational(Integer(1) << p);
    v.canonicalize();
    return ((k + p + 1) % 2 == 0) ? v : Rational(-v);
}

Rational beta_closed(int m, int k, int p) {
    if (!beta_in_support(m, k, p)) return 0;
    return beta_closed_raw(m, k, p);
}

double c_coeff(int m, int n, int k) {
    if (k < 0 || k > m || n < 2) throw std::invalid_argument("c_coeff needs 0 <= k <= m, n >= 2");
    double kf = std::lgamma(k + 1.0);
    double lg = (m - 2) * std::log(2.0) + std::lgamma((2.0 * m + n - 1) / 2) - 2 * kf -
                (n + 1) / 2.0 * std::log(M_PI) - std::log(double_factorial_d(n + 2 * m - 3));
    return (k % 2 ? -1.0 : 1.0) * std::exp(lg);
}

double f_factor(int m, int k, int n) {
    if (k < 0 || k > m || n < 2) throw std::invalid_argument("f_factor needs 0 <= k <= m, n >= 2");
    double lg = (m - 2) * std::log(2.0) + std::log(double_factorial_d(2 * m - 1)) +
                std::lgamma((2.0 * m + n - 1) / 2) - (n + 1) / 2.0 * std::log(M_PI) - std::lgamma(k + 1.0);
    return std::exp(lg);
}

Rational h_factor(int m, int k, int n) {
    if (k < 0 || k > m || n < 2) throw std::invalid_argument("h_factor needs 0 <= k <= m, n >= 2");
    Rational v(double_factorial(2 * m - 2 * k - 1) * double_factorial(n + 2 * m - 2 * k - 3),
               double_factorial(2 * m - 1) * double_factorial(n + 2 * m - 3));
    v.canonicalize();
    return v;
}

std::vector<BetaRow> beta_table(int max_m) {
    std::vector<BetaRow> rows;
    for (int m = 0; m <= max_m; ++m)
        for (int k = 1; k <= m; ++k)
            for (int p = 0; p <= std::min(k, m - k); ++p) rows.push_back({m, k, p, beta_recurrence(m, k, p)});
    return rows;
}

std::string beta_csv(int max_m) {
    std::ostringstream os;
    os << "m,k,p,numerator,denominator\n";
    for (const auto& r : beta_table(max_m))
        os << r.m << ',' << r.k << ',' << r.p << ',' << r.value.get_num() << ',' << r.value.get_den() << '\n';
    return os.str();
}

BetaComparison compare_beta(int max_m) {
    BetaComparison out;
    for (int m = 0; m <= max_m; ++m) {
        for (int k = -2; k <= m + 2; ++k) {
            for (int p = -2; p <= m + 2; ++p) {
                ++out.cells;
                Rational rec = beta_recurrence(m, k, p);
                if (beta_closed(m, k, p) != rec) {
                    ++out.mismatches;
                    if (out.first_failures.size() < 10) {
                        std::ostringstream os;
                        os << "beta(" << m << ',' << k << ',' << p << ")";
                        out.first_failures.push_back(os.str());
                    }
                }
                if (beta_closed_raw(m, k, p) != rec) ++out.raw_mismatches;
            }
        }
    }
    return out;
}

}  // namespace momray
