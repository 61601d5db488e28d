#include "momray/symtensor.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <tuple>

namespace momray {

namespace {

std::int64_t factorial64(int k) {
    std::int64_t r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

void gen_sorted(int n, int m, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == m) {
        out.push_back(cur);
        return;
    }
    for (int a = start; a < n; ++a) {
        cur.push_back(a);
        gen_sorted(n, m, a, cur, out);
        cur.pop_back();
    }
}

std::mutex g_mutex;

template <class Key, class Val, class Make>
const Val& cached(std::map<Key, std::unique_ptr<Val>>& cache, const Key& key, Make make) {
    std::lock_guard<std::mutex> lock(g_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    auto v = std::make_unique<Val>(make());
    const Val& ref = *v;
    cache.emplace(key, std::move(v));
    return ref;
}

IndexTable build_table(int n, int m) {
    if (n < 1 || m < 0) throw shape_error("index table needs n >= 1, m >= 0");
    IndexTable t;
    t.n = n;
    t.m = m;
    std::vector<int> cur;
    gen_sorted(n, m, 0, cur, t.entries);
    for (const auto& e : t.entries) {
        Counts c(n, 0);
        for (int a : e) ++c[a];
        t.mult.push_back(multiplicity(c));
        t.counts.push_back(std::move(c));
    }
    return t;
}

// Position of a sorted entry list via a binary search over the lexicographic table.
int locate(const IndexTable& t, const std::vector<int>& sorted) {
    auto it = std::lower_bound(t.entries.begin(), t.entries.end(), sorted);
    if (it == t.entries.end() || *it != sorted) return -1;
    return static_cast<int>(it - t.entries.begin());
}

}  // namespace

std::int64_t multiplicity(const Counts& c) {
    int m = std::accumulate(c.begin(), c.end(), 0);
    std::int64_t r = factorial64(m);
    for (int x : c) r /= factorial64(x);
    return r;
}

std::int64_t dim(int n, int m) {
    if (n < 1 || m < 0) throw shape_error("dim needs n >= 1, m >= 0");
    // C(n+m-1, m)
    std::int64_t r = 1;
    for (int i = 1; i <= m; ++i) r = r * (n - 1 + i) / i;
    return r;
}

int IndexTable::find(const Counts& c) const {
    std::vector<int> e;
    for (int a = 0; a < static_cast<int>(c.size()); ++a)
        for (int j = 0; j < c[a]; ++j) e.push_back(a);
    return locate(*this, e);
}

int IndexTable::find_entries(std::vector<int> e) const {
    std::sort(e.begin(), e.end());
    for (int a : e)
        if (a < 0 || a >= n) throw shape_error("axis index out of range");
    int p = locate(*this, e);
    if (p < 0) throw shape_error("index not found");
    return p;
}

const IndexTable& index_table(int n, int m) {
    static std::map<std::pair<int, int>, std::unique_ptr<IndexTable>> cache;
    return cached(cache, std::make_pair(n, m), [&] { return build_table(n, m); });
}

const std::vector<std::vector<WTerm>>& product_table(int n, int ra, int rb) {
    static std::map<std::tuple<int, int, int>, std::unique_ptr<std::vector<std::vector<WTerm>>>> cache;
    const IndexTable& A = index_table(n, ra);
    const IndexTable& B = index_table(n, rb);
    const IndexTable& G = index_table(n, ra + rb);
    return cached(cache, std::make_tuple(n, ra, rb), [&] {
        std::vector<std::vector<WTerm>> out(G.size());
        for (std::size_t ia = 0; ia < A.size(); ++ia) {
            for (std::size_t ib = 0; ib < B.size(); ++ib) {
                Counts c(n);
                for (int a = 0; a < n; ++a) c[a] = A.counts[ia][a] + B.counts[ib][a];
                int g = G.find(c);
                std::int64_t num = A.mult[ia] * B.mult[ib];
                std::int64_t den = G.mult[g];
                std::int64_t q = std::gcd(num, den);
                out[g].push_back({static_cast<int>(ia), static_cast<int>(ib), num / q, den / q});
            }
        }
        return out;
    });
}

const std::vector<std::vector<WTerm>>& contract_table(int n, int ra, int rb) {
    static std::map<std::tuple<int, int, int>, std::unique_ptr<std::vector<std::vector<WTerm>>>> cache;
    if (ra < rb) throw shape_error("contraction rank underflow");
    const IndexTable& U = index_table(n, ra);
    const IndexTable& V = index_table(n, rb);
    const IndexTable& O = index_table(n, ra - rb);
    return cached(cache, std::make_tuple(n, ra, rb), [&] {
        std::vector<std::vector<WTerm>> out(O.size());
        for (std::size_t io = 0; io < O.size(); ++io) {
            for (std::size_t iv = 0; iv < V.size(); ++iv) {
                Counts c(n);
                for (int a = 0; a < n; ++a) c[a] = O.counts[io][a] + V.counts[iv][a];
                int iu = U.find(c);
                out[io].push_back({iu, static_cast<int>(iv), V.mult[iv], 1});
            }
        }
        return out;
    });
}

std::string index_name(const std::vector<int>& entries) {
    std::string s;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(entries[i] + 1);
    }
    return s;
}

}  // namespace momray
