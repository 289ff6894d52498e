#pragma once

#include <cstdint>
#include <iosfwd>
#include <ostream>

#include "tiltalloc/polynomial.hpp"

namespace tiltalloc {

// Prime field used by the optional modular fast path. The modulus is a
// Mersenne prime large enough that random tilt-rotor instances stay generic.
class ModP {
public:
    static constexpr uint64_t P = (uint64_t{1} << 61) - 1;

    ModP() : v_(0) {}
    explicit ModP(int64_t x) {
        int64_t r = x % static_cast<int64_t>(P);
        if (r < 0) r += P;
        v_ = static_cast<uint64_t>(r);
    }
    static ModP from_raw(uint64_t v) {
        ModP r;
        r.v_ = v % P;
        return r;
    }
    static ModP from_rational(const Rational& q) {
        ModP num = from_mpz(q.get_num());
        ModP den = from_mpz(q.get_den());
        return num / den;
    }

    uint64_t raw() const { return v_; }

    friend ModP operator+(ModP a, ModP b) { return from_raw(add(a.v_, b.v_)); }
    friend ModP operator-(ModP a, ModP b) { return from_raw(add(a.v_, P - b.v_)); }
    ModP operator-() const { return from_raw(v_ == 0 ? 0 : P - v_); }
    friend ModP operator*(ModP a, ModP b) {
        return from_raw(static_cast<uint64_t>(
            (static_cast<unsigned __int128>(a.v_) * b.v_) % P));
    }
    friend ModP operator/(ModP a, ModP b) { return a * b.inverse(); }
    ModP& operator+=(ModP b) { return *this = *this + b; }
    ModP& operator-=(ModP b) { return *this = *this - b; }
    ModP& operator*=(ModP b) { return *this = *this * b; }
    ModP& operator/=(ModP b) { return *this = *this / b; }
    bool operator==(const ModP&) const = default;

    ModP inverse() const {
        if (v_ == 0) throw std::domain_error("division by zero in GF(p)");
        // Fermat: v^(P-2)
        ModP base = *this, acc(1);
        uint64_t e = P - 2;
        while (e) {
            if (e & 1) acc *= base;
            base *= base;
            e >>= 1;
        }
        return acc;
    }

    friend std::ostream& operator<<(std::ostream& os, ModP a) { return os << a.v_; }

private:
    static uint64_t add(uint64_t a, uint64_t b) {
        uint64_t s = a + b;
        if (s >= P) s -= P;
        return s;
    }
    static ModP from_mpz(const mpz_class& z) {
        mpz_class r = z % static_cast<unsigned long>(P);
        if (r < 0) r += static_cast<unsigned long>(P);
        return from_raw(r.get_ui());
    }

    uint64_t v_;
};

template <>
struct coeff_traits<ModP> {
    static ModP zero() { return ModP(0); }
    static ModP one() { return ModP(1); }
    static bool is_zero(const ModP& c) { return c == ModP(0); }
};

// Image of a rational polynomial in GF(p); throws if a denominator vanishes.
inline Polynomial<ModP> to_modp(const Polynomial<Rational>& p) {
    Polynomial<ModP> r(p.nvars(), p.order());
    for (const auto& [m, c] : p.terms()) r.add_term(m, ModP::from_rational(c));
    return r;
}

}  // namespace tiltalloc
