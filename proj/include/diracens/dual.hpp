#pragma once

#include <vector>

#include "diracens/rational.hpp"

namespace diracens {

// Forward-mode dual number with a dynamic gradient vector.  The one-cut
// residual is evaluated once on Dual<T> to obtain an exact Jacobian in the
// same scalar field T (double or Series<Rational>).
template <class T>
struct Dual {
    T val;
    std::vector<T> grad;

    Dual() : val(scalar_from_int<T>(0)) {}
    explicit Dual(int v) : val(scalar_from_int<T>(v)) {}
    explicit Dual(const T& v, size_t n = 0) : val(v), grad(n, scalar_from_int<T>(0)) {}
    static Dual seed(const T& v, size_t n, size_t slot) {
        Dual d(v, n);
        d.grad[slot] = T(1);
        return d;
    }

    friend Dual operator+(const Dual& a, const Dual& b) {
        Dual out(a.val + b.val, std::max(a.grad.size(), b.grad.size()));
        for (size_t i = 0; i < out.grad.size(); ++i) out.grad[i] = a.g(i) + b.g(i);
        return out;
    }
    friend Dual operator-(const Dual& a, const Dual& b) {
        Dual out(a.val - b.val, std::max(a.grad.size(), b.grad.size()));
        for (size_t i = 0; i < out.grad.size(); ++i) out.grad[i] = a.g(i) - b.g(i);
        return out;
    }
    Dual operator-() const {
        Dual out(-val, grad.size());
        for (size_t i = 0; i < grad.size(); ++i) out.grad[i] = -grad[i];
        return out;
    }
    friend Dual operator*(const Dual& a, const Dual& b) {
        Dual out(a.val * b.val, std::max(a.grad.size(), b.grad.size()));
        for (size_t i = 0; i < out.grad.size(); ++i) out.grad[i] = a.g(i) * b.val + a.val * b.g(i);
        return out;
    }
    friend Dual operator/(const Dual& a, const Dual& b) {
        Dual out(a.val / b.val, std::max(a.grad.size(), b.grad.size()));
        for (size_t i = 0; i < out.grad.size(); ++i)
            out.grad[i] = (a.g(i) - out.val * b.g(i)) / b.val;
        return out;
    }

    friend Dual operator+(const T& c, const Dual& a) { return Dual(c) + a; }
    friend Dual operator+(const Dual& a, const T& c) { return a + Dual(c); }
    friend Dual operator-(const T& c, const Dual& a) { return Dual(c) - a; }
    friend Dual operator-(const Dual& a, const T& c) { return a - Dual(c); }
    friend Dual operator*(const T& c, const Dual& a) {
        Dual out(c * a.val, a.grad.size());
        for (size_t i = 0; i < a.grad.size(); ++i) out.grad[i] = c * a.grad[i];
        return out;
    }
    friend Dual operator*(const Dual& a, const T& c) { return c * a; }
    friend Dual operator/(const Dual& a, const T& c) {
        Dual out(a.val / c, a.grad.size());
        for (size_t i = 0; i < a.grad.size(); ++i) out.grad[i] = a.grad[i] / c;
        return out;
    }

    // chain rule for square roots (numeric use)
    friend Dual sqrt(const Dual& a) {
        using std::sqrt;
        Dual out(sqrt(a.val), a.grad.size());
        T half_inv = T(1) / (T(2) * out.val);
        for (size_t i = 0; i < a.grad.size(); ++i) out.grad[i] = a.grad[i] * half_inv;
        return out;
    }

  private:
    T g(size_t i) const { return i < grad.size() ? grad[i] : T(0); }
};

template <class T>
struct ScalarMaker<Dual<T>> {
    static Dual<T> from_int(long v) { return Dual<T>(scalar_from_int<T>(v)); }
    static Dual<T> from_rational(const Rational& r) { return Dual<T>(scalar_from_rational<T>(r)); }
};

}  // namespace diracens

