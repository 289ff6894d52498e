#pragma once

#include <optional>
#include <set>
#include <stdexcept>

#include "tiltalloc/polynomial.hpp"

namespace tiltalloc {

struct ResourceLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BuchbergerLimits {
    size_t max_reductions = 100000;
};

template <class K>
Polynomial<K> s_polynomial(const Polynomial<K>& p, const Polynomial<K>& q) {
    if (p.zero() || q.zero()) throw std::invalid_argument("s_polynomial of zero polynomial");
    const Monomial lcm = mono_lcm(p.leading_monomial(), q.leading_monomial());
    Polynomial<K> s(p.nvars(), p.order());
    s.sub_mul(-(coeff_traits<K>::one() / p.leading_coeff()),
              mono_div(lcm, p.leading_monomial()), p);
    s.sub_mul(coeff_traits<K>::one() / q.leading_coeff(),
              mono_div(lcm, q.leading_monomial()), q);
    return s;
}

namespace detail {

struct Pair {
    int deg;
    Monomial lcm;
    int i, j;
};

}  // namespace detail

// Reduced Groebner basis of the ideal generated by `gens` under `order`.
// Normal selection strategy (smallest lcm degree first) with the coprimality
// and chain criteria. Leading coefficients of the result are 1.
template <class K>
std::vector<Polynomial<K>> buchberger(const std::vector<Polynomial<K>>& gens,
                                      const MonomialOrder& order,
                                      const BuchbergerLimits& limits = {}) {
    std::vector<Polynomial<K>> basis;
    for (const auto& g : gens) {
        if (g.zero()) continue;
        Polynomial<K> p = g.order() == order ? g : g.reordered(order);
        normalize_for_basis(p);
        basis.push_back(std::move(p));
    }
    if (basis.empty()) throw std::invalid_argument("empty generating system");

    auto pair_less = [&order](const detail::Pair& a, const detail::Pair& b) {
        if (a.deg != b.deg) return a.deg < b.deg;
        int c = order.compare(a.lcm, b.lcm);
        if (c != 0) return c < 0;
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    };
    std::multiset<detail::Pair, decltype(pair_less)> queue(pair_less);
    std::set<std::pair<int, int>> pending;

    auto push_pair = [&](int i, int j) {
        const Monomial lcm =
            mono_lcm(basis[i].leading_monomial(), basis[j].leading_monomial());
        queue.insert({total_degree(lcm), lcm, i, j});
        pending.insert({i, j});
    };
    for (size_t j = 1; j < basis.size(); ++j)
        for (size_t i = 0; i < j; ++i) push_pair(static_cast<int>(i), static_cast<int>(j));

    size_t reductions = 0;
    while (!queue.empty()) {
        detail::Pair pr = *queue.begin();
        queue.erase(queue.begin());
        pending.erase({pr.i, pr.j});

        const Monomial& lmi = basis[pr.i].leading_monomial();
        const Monomial& lmj = basis[pr.j].leading_monomial();
        // coprimality criterion
        if (pr.lcm == mono_mul(lmi, lmj)) continue;
        // chain criterion: some k with LM_k | lcm and both companion pairs done
        bool skip = false;
        for (size_t k = 0; k < basis.size() && !skip; ++k) {
            if (static_cast<int>(k) == pr.i || static_cast<int>(k) == pr.j) continue;
            if (!mono_divides(basis[k].leading_monomial(), pr.lcm)) continue;
            auto key = [](int a, int b) { return std::pair{std::min(a, b), std::max(a, b)}; };
            if (!pending.count(key(pr.i, static_cast<int>(k))) &&
                !pending.count(key(pr.j, static_cast<int>(k))))
                skip = true;
        }
        if (skip) continue;

        if (++reductions > limits.max_reductions)
            throw ResourceLimitError("buchberger reduction budget exceeded");
        Polynomial<K> s = s_polynomial(basis[pr.i], basis[pr.j]);
        Polynomial<K> r = normal_form<K>(s, basis);
        if (r.zero()) continue;
        normalize_for_basis(r);
        basis.push_back(std::move(r));
        const int last = static_cast<int>(basis.size()) - 1;
        for (int i = 0; i < last; ++i) push_pair(i, last);
    }

    // minimalize: drop elements whose leading monomial another one divides
    std::vector<Polynomial<K>> minimal;
    for (size_t i = 0; i < basis.size(); ++i) {
        bool redundant = false;
        for (size_t j = 0; j < basis.size() && !redundant; ++j) {
            if (i == j) continue;
            const Monomial &a = basis[j].leading_monomial(),
                           &b = basis[i].leading_monomial();
            if (mono_divides(a, b) && !(a == b && j > i)) redundant = true;
        }
        if (!redundant) minimal.push_back(basis[i]);
    }

    // tail-reduce each element against the others
    std::vector<Polynomial<K>> reduced;
    for (size_t i = 0; i < minimal.size(); ++i) {
        std::vector<Polynomial<K>> others;
        for (size_t j = 0; j < minimal.size(); ++j)
            if (j != i) others.push_back(minimal[j]);
        Polynomial<K> r = normal_form<K>(minimal[i], others);
        if (r.zero()) continue;
        r.make_monic();
        reduced.push_back(std::move(r));
    }
    std::sort(reduced.begin(), reduced.end(), [&order](const auto& a, const auto& b) {
        return order.compare(a.leading_monomial(), b.leading_monomial()) < 0;
    });
    return reduced;
}

// Re-verifies the Buchberger postcondition in exact arithmetic: every S-pair
// of the basis reduces to zero and every original generator reduces to zero.
template <class K>
bool verify_groebner(const std::vector<Polynomial<K>>& basis,
                     const std::vector<Polynomial<K>>& generators) {
    for (size_t i = 0; i < basis.size(); ++i)
        for (size_t j = i + 1; j < basis.size(); ++j)
            if (!normal_form<K>(s_polynomial(basis[i], basis[j]), basis).zero())
                return false;
    for (const auto& g : generators) {
        Polynomial<K> p = g.order() == basis.front().order()
                              ? g
                              : g.reordered(basis.front().order());
        if (!normal_form<K>(p, basis).zero()) return false;
    }
    return true;
}

}  // namespace tiltalloc
