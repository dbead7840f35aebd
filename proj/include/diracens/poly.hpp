#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "diracens/rational.hpp"

namespace diracens {

// Dense univariate polynomial, coefficients ascending in degree.
// Trailing zero coefficients are trimmed so the leading coefficient is
// nonzero unless the polynomial is identically zero.
template <class T>
class Poly {
  public:
    Poly() = default;
    explicit Poly(std::vector<T> coeff) : coeff_(std::move(coeff)) { trim(); }
    static Poly zero() { return Poly(); }
    static Poly constant(const T& c) { return Poly(std::vector<T>{c}); }
    // c * x^k
    static Poly monomial(const T& c, size_t k) {
        std::vector<T> v(k + 1, T(0));
        v[k] = c;
        return Poly(std::move(v));
    }

    bool is_zero() const { return coeff_.empty(); }
    int degree() const { return static_cast<int>(coeff_.size()) - 1; }
    const std::vector<T>& coefficients() const { return coeff_; }
    T coeff(size_t k) const { return k < coeff_.size() ? coeff_[k] : T(0); }

    T eval(const T& x) const {
        T acc(0);
        for (size_t k = coeff_.size(); k-- > 0;) acc = acc * x + coeff_[k];
        return acc;
    }
    template <class U>
    U eval_as(const U& x) const {
        U acc(0);
        for (size_t k = coeff_.size(); k-- > 0;) acc = acc * x + U(scalar_to<U>(coeff_[k]));
        return acc;
    }

    Poly derivative() const {
        if (coeff_.size() <= 1) return Poly();
        std::vector<T> d(coeff_.size() - 1);
        for (size_t k = 1; k < coeff_.size(); ++k) d[k - 1] = coeff_[k] * scalar_from_int<T>(static_cast<long>(k));
        return Poly(std::move(d));
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<T> v(std::max(a.coeff_.size(), b.coeff_.size()), T(0));
        for (size_t k = 0; k < v.size(); ++k) v[k] = a.coeff(k) + b.coeff(k);
        return Poly(std::move(v));
    }
    friend Poly operator-(const Poly& a, const Poly& b) {
        std::vector<T> v(std::max(a.coeff_.size(), b.coeff_.size()), T(0));
        for (size_t k = 0; k < v.size(); ++k) v[k] = a.coeff(k) - b.coeff(k);
        return Poly(std::move(v));
    }
    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return Poly();
        std::vector<T> v(a.coeff_.size() + b.coeff_.size() - 1, T(0));
        for (size_t i = 0; i < a.coeff_.size(); ++i)
            for (size_t j = 0; j < b.coeff_.size(); ++j) v[i + j] += a.coeff_[i] * b.coeff_[j];
        return Poly(std::move(v));
    }
    friend Poly operator*(const T& c, const Poly& a) {
        std::vector<T> v = a.coeff_;
        for (auto& x : v) x = c * x;
        return Poly(std::move(v));
    }

    T max_abs_coeff() const;

  private:
    template <class U>
    static U scalar_to(const T& v);
    void trim() {
        while (!coeff_.empty() && coeff_.back() == T(0)) coeff_.pop_back();
    }
    std::vector<T> coeff_;
};

template <>
template <>
inline double Poly<double>::scalar_to<double>(const double& v) { return v; }
template <>
inline double Poly<double>::max_abs_coeff() const {
    double m = 0;
    for (double c : coeff_) m = std::max(m, std::fabs(c));
    return m;
}
template <>
inline Rational Poly<Rational>::max_abs_coeff() const {
    Rational m(0);
    for (const auto& c : coeff_) {
        Rational a = c < 0 ? Rational(-c) : c;
        if (a > m) m = a;
    }
    return m;
}

struct RootFindOptions {
    double tol = 1e-12;
    int max_iter = 200;
};

// All real roots of p in [lo, hi], ascending, multiplicity-collapsed.
// Roots are isolated by recursively bracketing with the roots of p' (so the
// polynomial is monotone on every probed subinterval), then polished with
// bisection-safeguarded Newton.
std::vector<double> poly_real_roots(const Poly<double>& p, double lo, double hi,
                                    const RootFindOptions& opt = {});

}  // namespace diracens
