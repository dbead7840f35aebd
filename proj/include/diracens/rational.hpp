#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>
#include <string>

namespace diracens {

// Exact arbitrary-precision rational scalar used by the formal (order-by-order)
// mode and the Wick oracle.  Numeric continuation uses plain double; most of
// the library is templated on the scalar type so both modes share one code path.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.template convert_to<double>(); }
inline double to_double(double x) { return x; }

inline Rational rational_pow(const Rational& base, long e) {
    if (e < 0) {
        if (base == 0) throw std::domain_error("rational_pow: 0^negative");
        return Rational(1) / rational_pow(base, -e);
    }
    Rational acc(1), b = base;
    while (e) {
        if (e & 1) acc *= b;
        b *= b;
        e >>= 1;
    }
    return acc;
}

// Parses "p/q", plain integers and decimal literals ("-0.25") exactly.
inline Rational rational_from_string(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        BigInt p(s.substr(0, slash)), q(s.substr(slash + 1));
        if (q == 0) throw std::invalid_argument("rational_from_string: zero denominator");
        return Rational(p, q);
    }
    auto dot = s.find('.');
    std::string body = s;
    std::string expo;
    auto e = s.find_first_of("eE");
    if (e != std::string::npos) {
        body = s.substr(0, e);
        expo = s.substr(e + 1);
        dot = body.find('.');
    }
    Rational r;
    if (dot == std::string::npos) {
        r = Rational(BigInt(body));
    } else {
        std::string digits = body.substr(0, dot) + body.substr(dot + 1);
        BigInt q(1);
        for (size_t i = dot + 1; i < body.size(); ++i) q *= 10;
        r = Rational(BigInt(digits), q);
    }
    if (!expo.empty()) {
        long ex = std::stol(expo);
        Rational ten(10);
        r *= rational_pow(ten, ex);
    }
    return r;
}

inline std::string rational_to_string(const Rational& r) { return r.str(); }

inline BigInt binomial_big(long n, long k) {
    if (k < 0 || n < 0 || k > n) return BigInt(0);
    BigInt acc(1);
    for (long i = 0; i < k; ++i) {
        acc *= (n - i);
        acc /= (i + 1);
    }
    return acc;
}

// Scalar factory, partially specializable (Series<T>, Dual<T> add their own).
template <class T>
struct ScalarMaker {
    static T from_int(long v) { return T(static_cast<double>(v)); }
    static T from_rational(const Rational& r) { return T(to_double(r)); }
};
template <>
struct ScalarMaker<double> {
    static double from_int(long v) { return static_cast<double>(v); }
    static double from_rational(const Rational& r) { return to_double(r); }
};
template <>
struct ScalarMaker<Rational> {
    static Rational from_int(long v) { return Rational(v); }
    static Rational from_rational(const Rational& r) { return r; }
};

template <class T>
T scalar_from_int(long v) { return ScalarMaker<T>::from_int(v); }
template <class T>
T scalar_from_rational(const Rational& r) { return ScalarMaker<T>::from_rational(r); }

}  // namespace diracens
