#pragma once

#include <gmpxx.h>

#include <string>

#include "errors.hpp"

namespace jetvar {

using Int = mpz_class;
using Rational = mpq_class;

inline Rational rat(long num, long den = 1) { return Rational(num, den); }

inline std::string to_string(const Rational& q) { return q.get_str(); }

/// Element of the quadratic extension Q(sqrt(d)): value = a + b*sqrt(d).
/// d is carried per evaluation point (d = 0 degenerates to dual numbers,
/// d a perfect square is still handled formally; we never need to split it).
struct QuadExt {
    Rational a;
    Rational b;
    Rational d; // the radicand; meaningful only when b != 0

    QuadExt() : a(0), b(0), d(0) {}
    QuadExt(Rational r) : a(std::move(r)), b(0), d(0) {}
    QuadExt(Rational a_, Rational b_, Rational d_) : a(std::move(a_)), b(std::move(b_)), d(std::move(d_)) {}

    bool is_zero() const { return a == 0 && b == 0; }
    bool is_rational() const { return b == 0; }

    /// Exact rational value; throws if an irrational part is present.
    const Rational& rational() const {
        if (b != 0) throw eval_error("value has an irrational part: " + str());
        return a;
    }

    std::string str() const {
        if (b == 0) return a.get_str();
        return a.get_str() + " + (" + b.get_str() + ")*sqrt(" + d.get_str() + ")";
    }

    friend QuadExt operator+(const QuadExt& x, const QuadExt& y) {
        return {x.a + y.a, x.b + y.b, x.b != 0 ? x.d : y.d};
    }
    friend QuadExt operator-(const QuadExt& x, const QuadExt& y) {
        return {x.a - y.a, x.b - y.b, x.b != 0 ? x.d : y.d};
    }
    friend QuadExt operator*(const QuadExt& x, const QuadExt& y) {
        Rational d = x.b != 0 ? x.d : y.d;
        return {x.a * y.a + x.b * y.b * d, x.a * y.b + x.b * y.a, d};
    }
    QuadExt inverse() const {
        // 1/(a + b s) = (a - b s)/(a^2 - b^2 d)
        Rational norm = a * a - b * b * d;
        if (norm == 0) throw eval_error("division by zero in quadratic extension");
        return {a / norm, -b / norm, d};
    }
    QuadExt pow(long e) const {
        if (e < 0) return inverse().pow(-e);
        QuadExt r(Rational(1));
        QuadExt base = *this;
        while (e > 0) {
            if (e & 1) r = r * base;
            base = base * base;
            e >>= 1;
        }
        return r;
    }
    friend bool operator==(const QuadExt& x, const QuadExt& y) {
        return x.a == y.a && x.b == y.b && (x.b == 0 || x.d == y.d);
    }
};

} // namespace jetvar
