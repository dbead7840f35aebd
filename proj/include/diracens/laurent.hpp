#pragma once

#include <map>
#include <stdexcept>

#include "diracens/rational.hpp"

namespace diracens {

// Laurent polynomial: finite support over integer exponents, possibly negative.
// Used for everything expressed in the Zhukovsky variable z.
template <class T>
class LaurentPoly {
  public:
    LaurentPoly() = default;
    explicit LaurentPoly(std::map<int, T> c, char label = 'z') : coeff_(std::move(c)), label_(label) { trim(); }

    static LaurentPoly monomial(const T& c, int k, char label = 'z') {
        LaurentPoly out;
        out.label_ = label;
        if (!(c == T(0))) out.coeff_[k] = c;
        return out;
    }

    char label() const { return label_; }
    const std::map<int, T>& coefficients() const { return coeff_; }
    T coeff(int k) const {
        auto it = coeff_.find(k);
        return it == coeff_.end() ? T(0) : it->second;
    }
    bool is_zero() const { return coeff_.empty(); }
    int min_exp() const { return coeff_.empty() ? 0 : coeff_.begin()->first; }
    int max_exp() const { return coeff_.empty() ? 0 : coeff_.rbegin()->first; }

    void add_term(int k, const T& c) {
        coeff_[k] += c;
        if (coeff_[k] == T(0)) coeff_.erase(k);
    }

    friend LaurentPoly operator+(const LaurentPoly& a, const LaurentPoly& b) {
        LaurentPoly out = a;
        for (const auto& [k, c] : b.coeff_) out.add_term(k, c);
        return out;
    }
    friend LaurentPoly operator-(const LaurentPoly& a, const LaurentPoly& b) {
        LaurentPoly out = a;
        for (const auto& [k, c] : b.coeff_) out.add_term(k, -c);
        return out;
    }
    friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
        LaurentPoly out;
        out.label_ = a.label_;
        for (const auto& [i, ci] : a.coeff_)
            for (const auto& [j, cj] : b.coeff_) out.add_term(i + j, ci * cj);
        return out;
    }
    friend LaurentPoly operator*(const T& c, const LaurentPoly& a) {
        LaurentPoly out;
        out.label_ = a.label_;
        for (const auto& [k, v] : a.coeff_) out.add_term(k, c * v);
        return out;
    }

    LaurentPoly derivative() const {
        LaurentPoly out;
        out.label_ = label_;
        for (const auto& [k, c] : coeff_)
            if (k != 0) out.add_term(k - 1, c * scalar_from_int<T>(k));
        return out;
    }

    LaurentPoly pow(unsigned e) const {
        LaurentPoly acc = monomial(T(1), 0, label_);
        LaurentPoly base = *this;
        while (e) {
            if (e & 1) acc = acc * base;
            base = base * base;
            e >>= 1;
        }
        return acc;
    }

    T eval(const T& z) const {
        if (z == T(0)) throw std::domain_error("LaurentPoly evaluation at 0");
        T acc(0);
        T zi = T(1) / z;
        for (const auto& [k, c] : coeff_) {
            T p(1);
            T b = k >= 0 ? z : zi;
            for (int i = 0; i < (k >= 0 ? k : -k); ++i) p = p * b;
            acc += c * p;
        }
        return acc;
    }

  private:
    void trim() {
        for (auto it = coeff_.begin(); it != coeff_.end();)
            it = (it->second == T(0)) ? coeff_.erase(it) : std::next(it);
    }
    std::map<int, T> coeff_;
    char label_ = 'z';
};

// Coefficient of z^{-1}.
template <class T>
T laurent_residue(const LaurentPoly<T>& f) {
    return f.coeff(-1);
}

}  // namespace diracens
