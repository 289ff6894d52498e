#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "tiltalloc/monomial.hpp"

namespace tiltalloc {

using Rational = mpq_class;

// Exact binary expansion of a double (no rounding).
inline Rational rational_from_double(double x) {
    Rational r(x);
    r.canonicalize();
    return r;
}

// Best rational approximation of x within rel_tol, by continued fractions.
// rel_tol = 0 returns the exact binary image. Short coefficients keep exact
// basis computations fast without moving well-conditioned roots.
inline Rational rational_approx(double x, double rel_tol) {
    if (rel_tol <= 0.0 || x == 0.0 || !std::isfinite(x)) return rational_from_double(x);
    const double target = std::abs(x);
    mpz_class p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double frac = target;
    for (int it = 0; it < 64; ++it) {
        const double fl = std::floor(frac);
        if (!(fl < 9e18)) return rational_from_double(x);
        mpz_class a(static_cast<unsigned long>(fl));
        mpz_class p2 = a * p1 + p0, q2 = a * q1 + q0;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        Rational approx(p1, q1);
        approx.canonicalize();
        if (std::abs(approx.get_d() - target) <= rel_tol * target) break;
        const double rem = frac - fl;
        if (rem < 1e-18) break;
        frac = 1.0 / rem;
    }
    Rational r(p1, q1);
    r.canonicalize();
    return x < 0 ? Rational(-r) : r;
}

template <class K>
struct coeff_traits {
    static K zero() { return K(0); }
    static K one() { return K(1); }
    static bool is_zero(const K& c) { return c == K(0); }
};

// Sparse multivariate polynomial over an exact coefficient field K.
// Terms are kept in a map sorted descending under the attached monomial
// order, so begin() is always the leading term.
template <class K>
class Polynomial {
public:
    using TermMap = std::map<Monomial, K, MonoGreater>;

    Polynomial(int nvars, MonomialOrder order)
        : nvars_(nvars), order_(std::move(order)), terms_(MonoGreater{order_}) {
        if (order_.nvars() != nvars) throw std::invalid_argument("order/nvars mismatch");
    }

    static Polynomial constant(int nvars, const MonomialOrder& order, K c) {
        Polynomial p(nvars, order);
        p.add_term(Monomial(nvars, 0), std::move(c));
        return p;
    }

    static Polynomial variable(int nvars, const MonomialOrder& order, int k) {
        Polynomial p(nvars, order);
        Monomial m(nvars, 0);
        m.at(k) = 1;
        p.add_term(std::move(m), coeff_traits<K>::one());
        return p;
    }

    int nvars() const { return nvars_; }
    const MonomialOrder& order() const { return order_; }
    bool zero() const { return terms_.empty(); }
    size_t term_count() const { return terms_.size(); }
    const TermMap& terms() const { return terms_; }

    const Monomial& leading_monomial() const {
        require_nonzero();
        return terms_.begin()->first;
    }
    const K& leading_coeff() const {
        require_nonzero();
        return terms_.begin()->second;
    }
    int degree() const {
        int d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, total_degree(m));
        return d;
    }

    // Removes and returns the leading term.
    std::pair<Monomial, K> pop_leading() {
        require_nonzero();
        auto node = terms_.extract(terms_.begin());
        return {std::move(node.key()), std::move(node.mapped())};
    }

    void add_term(Monomial m, K c) {
        if (static_cast<int>(m.size()) != nvars_)
            throw std::invalid_argument("variable count mismatch");
        if (coeff_traits<K>::is_zero(c)) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(std::move(m), std::move(c));
        } else {
            it->second += c;
            if (coeff_traits<K>::is_zero(it->second)) terms_.erase(it);
        }
    }

    Polynomial reordered(const MonomialOrder& order) const {
        Polynomial r(nvars_, order);
        for (const auto& [m, c] : terms_) r.add_term(m, c);
        return r;
    }

    Polynomial& operator+=(const Polynomial& q) {
        check_compatible(q);
        for (const auto& [m, c] : q.terms_) add_term(m, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& q) {
        check_compatible(q);
        for (const auto& [m, c] : q.terms_) add_term(m, -c);
        return *this;
    }
    friend Polynomial operator+(Polynomial p, const Polynomial& q) { return p += q; }
    friend Polynomial operator-(Polynomial p, const Polynomial& q) { return p -= q; }

    friend Polynomial operator*(const Polynomial& p, const Polynomial& q) {
        p.check_compatible(q);
        Polynomial r(p.nvars_, p.order());
        for (const auto& [mp, cp] : p.terms_)
            for (const auto& [mq, cq] : q.terms_) r.add_term(mono_mul(mp, mq), cp * cq);
        return r;
    }

    Polynomial scaled(const K& s) const {
        Polynomial r(nvars_, order());
        if (coeff_traits<K>::is_zero(s)) return r;
        for (const auto& [m, c] : terms_) r.add_term(m, c * s);
        return r;
    }

    // this -= s * x^m * q (in place, the basic reduction step)
    void sub_mul(const K& s, const Monomial& m, const Polynomial& q) {
        check_compatible(q);
        for (const auto& [mq, cq] : q.terms_) add_term(mono_mul(m, mq), -(s * cq));
    }

    void make_monic() {
        if (zero()) return;
        K lc = leading_coeff();
        for (auto& [m, c] : terms_) c /= lc;
    }

    bool operator==(const Polynomial& q) const {
        if (nvars_ != q.nvars_) return false;
        if (terms_.size() != q.terms_.size()) return false;
        auto it = terms_.begin();
        for (const auto& [m, c] : q.terms_) {
            if (it->first != m || it->second != c) return false;
            ++it;
        }
        return true;
    }

    template <class V>
    V eval(std::span<const V> point) const;

    Polynomial derivative(int k) const {
        Polynomial r(nvars_, order());
        for (const auto& [m, c] : terms_) {
            if (m[k] == 0) continue;
            Monomial d = m;
            d[k] -= 1;
            r.add_term(std::move(d), c * K(m[k]));
        }
        return r;
    }

private:
    void require_nonzero() const {
        if (terms_.empty()) throw std::logic_error("zero polynomial has no leading term");
    }
    void check_compatible(const Polynomial& q) const {
        if (nvars_ != q.nvars_)
            throw std::invalid_argument("variable count mismatch");
    }

    int nvars_;
    MonomialOrder order_;
    TermMap terms_;
};

template <class K>
template <class V>
V Polynomial<K>::eval(std::span<const V> point) const {
    if (static_cast<int>(point.size()) != nvars_)
        throw std::invalid_argument("evaluation point size mismatch");
    V acc{};
    for (const auto& [m, c] : terms_) {
        V t;
        if constexpr (std::is_same_v<K, Rational>)
            t = V(c.get_d());
        else
            t = V(c);
        for (int i = 0; i < nvars_; ++i)
            for (int e = 0; e < m[i]; ++e) t *= point[i];
        acc += t;
    }
    return acc;
}

// Divide out the integer content and the denominator lcm; leading sign positive.
// Keeps coefficient bit sizes small during basis computation.
inline void make_primitive(Polynomial<Rational>& p) {
    if (p.zero()) return;
    mpz_class num_gcd = 0, den_lcm = 1;
    for (const auto& [m, c] : p.terms()) {
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num().get_mpz_t());
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den().get_mpz_t());
    }
    Rational scale(den_lcm, num_gcd);
    scale.canonicalize();
    if (sgn(p.leading_coeff()) < 0) scale = -scale;
    Polynomial<Rational> r = p.scaled(scale);
    p = std::move(r);
}

template <class K>
inline void normalize_for_basis(Polynomial<K>& p) {
    if constexpr (std::is_same_v<K, Rational>)
        make_primitive(p);
    else
        p.make_monic();
}

template <class K>
struct PolySystem {
    std::vector<Polynomial<K>> polys;
    std::vector<std::string> var_names;
};

// --- normal form (multivariate division) ---

// Remainder of p modulo basis; no remainder term is divisible by any basis
// leading monomial. If quotients is non-null it receives one polynomial per
// basis element with p = sum(q_i * b_i) + r exactly.
template <class K>
Polynomial<K> normal_form(const Polynomial<K>& p,
                          std::span<const Polynomial<K>> basis,
                          std::vector<Polynomial<K>>* quotients = nullptr) {
    if (quotients) {
        quotients->clear();
        for (size_t i = 0; i < basis.size(); ++i)
            quotients->emplace_back(p.nvars(), p.order());
    }
    Polynomial<K> work = p;
    Polynomial<K> rem(p.nvars(), p.order());
    while (!work.zero()) {
        const Monomial& lm = work.leading_monomial();
        bool reduced = false;
        for (size_t i = 0; i < basis.size(); ++i) {
            const auto& b = basis[i];
            if (b.zero()) continue;
            if (!mono_divides(b.leading_monomial(), lm)) continue;
            K q = work.leading_coeff() / b.leading_coeff();
            Monomial qm = mono_div(lm, b.leading_monomial());
            work.sub_mul(q, qm, b);
            if (quotients) (*quotients)[i].add_term(qm, q);
            reduced = true;
            break;
        }
        if (!reduced) {
            auto [m, c] = work.pop_leading();
            rem.add_term(std::move(m), std::move(c));
        }
    }
    return rem;
}

// --- serialization ---

// Format: "num/den * T^1 s^2" terms joined by " + ".
inline std::string coeff_to_string(const Rational& c) {
    std::ostringstream os;
    os << c.get_num() << "/" << c.get_den();
    return os.str();
}

template <class K>
std::string to_string(const Polynomial<K>& p, const std::vector<std::string>& names) {
    if (p.zero()) return "0/1";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : p.terms()) {
        if (!first) os << " + ";
        first = false;
        if constexpr (std::is_same_v<K, Rational>)
            os << coeff_to_string(c);
        else
            os << c;
        if (total_degree(m) > 0) {
            os << " *";
            for (size_t i = 0; i < m.size(); ++i)
                if (m[i] != 0) os << " " << names.at(i) << "^" << m[i];
        }
    }
    return os.str();
}

// Inverse of to_string for the rational case; used by golden-file tests.
inline Polynomial<Rational> parse_polynomial(const std::string& text,
                                             const std::vector<std::string>& names,
                                             const MonomialOrder& order) {
    const int n = static_cast<int>(names.size());
    Polynomial<Rational> p(n, order);
    std::istringstream is(text);
    std::string tok;
    Rational coeff;
    Monomial mono(n, 0);
    bool have_term = false;
    auto flush = [&] {
        if (have_term) p.add_term(mono, coeff);
        mono.assign(n, 0);
        have_term = false;
    };
    while (is >> tok) {
        if (tok == "+") {
            flush();
            continue;
        }
        if (tok == "*") continue;
        auto caret = tok.find('^');
        if (caret != std::string::npos) {
            const std::string name = tok.substr(0, caret);
            auto it = std::find(names.begin(), names.end(), name);
            if (it == names.end()) throw std::invalid_argument("unknown variable " + name);
            mono[it - names.begin()] += std::stoi(tok.substr(caret + 1));
        } else {
            coeff = Rational(tok);
            coeff.canonicalize();
            have_term = true;
        }
    }
    flush();
    return p;
}

}  // namespace tiltalloc
