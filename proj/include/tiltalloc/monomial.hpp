#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tiltalloc {

// Exponent vector; index i is the exponent of variable i.
using Monomial = std::vector<int>;

inline int total_degree(const Monomial& m) {
    return std::accumulate(m.begin(), m.end(), 0);
}

inline bool mono_divides(const Monomial& a, const Monomial& b) {
    if (a.size() != b.size()) throw std::invalid_argument("monomial length mismatch");
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

inline Monomial mono_mul(const Monomial& a, const Monomial& b) {
    if (a.size() != b.size()) throw std::invalid_argument("monomial length mismatch");
    Monomial r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

// b / a, requires a | b
inline Monomial mono_div(const Monomial& b, const Monomial& a) {
    if (a.size() != b.size()) throw std::invalid_argument("monomial length mismatch");
    Monomial r(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        r[i] = b[i] - a[i];
        if (r[i] < 0) throw std::invalid_argument("monomial division not exact");
    }
    return r;
}

inline Monomial mono_lcm(const Monomial& a, const Monomial& b) {
    if (a.size() != b.size()) throw std::invalid_argument("monomial length mismatch");
    Monomial r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = std::max(a[i], b[i]);
    return r;
}

struct MonomialOrder {
    enum class Kind { Grevlex, Lex };

    Kind kind = Kind::Grevlex;
    // var_order[0] is the most significant variable index.
    std::vector<int> var_order;

    static MonomialOrder grevlex(int nvars) {
        MonomialOrder o;
        o.kind = Kind::Grevlex;
        o.var_order.resize(nvars);
        std::iota(o.var_order.begin(), o.var_order.end(), 0);
        return o;
    }

    static MonomialOrder lex(int nvars) {
        MonomialOrder o = grevlex(nvars);
        o.kind = Kind::Lex;
        return o;
    }

    static MonomialOrder with_vars(Kind k, std::vector<int> order) {
        MonomialOrder o;
        o.kind = k;
        o.var_order = std::move(order);
        std::vector<int> seen(o.var_order.size(), 0);
        for (int v : o.var_order) {
            if (v < 0 || v >= static_cast<int>(o.var_order.size()) || seen[v]++)
                throw std::invalid_argument("variable order is not a permutation");
        }
        return o;
    }

    int nvars() const { return static_cast<int>(var_order.size()); }

    // -1 if a < b, 0 if equal, +1 if a > b.
    int compare(const Monomial& a, const Monomial& b) const {
        const int n = nvars();
        if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n)
            throw std::invalid_argument("monomial length mismatch");
        if (kind == Kind::Lex) {
            for (int i = 0; i < n; ++i) {
                const int v = var_order[i];
                if (a[v] != b[v]) return a[v] < b[v] ? -1 : 1;
            }
            return 0;
        }
        const int da = total_degree(a), db = total_degree(b);
        if (da != db) return da < db ? -1 : 1;
        // grevlex tie-break: last differing variable, smaller exponent wins
        for (int i = n - 1; i >= 0; --i) {
            const int v = var_order[i];
            if (a[v] != b[v]) return a[v] < b[v] ? 1 : -1;
        }
        return 0;
    }

    bool less(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }
    bool greater(const Monomial& a, const Monomial& b) const { return compare(a, b) > 0; }

    bool operator==(const MonomialOrder& o) const {
        return kind == o.kind && var_order == o.var_order;
    }
};

// Comparator putting the leading monomial first in ordered containers.
struct MonoGreater {
    MonomialOrder order;
    bool operator()(const Monomial& a, const Monomial& b) const {
        return order.compare(a, b) > 0;
    }
};

}  // namespace tiltalloc
