#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "diracens/rational.hpp"

namespace diracens {

// Truncated power series in one formal variable.  Coefficients are either
// exact rationals (formal mode) or doubles; arithmetic truncates to the
// smaller order of the operands and never reports coefficients beyond it.
//
// Constants built from bare scalars (Series(int), constant_like) are
// "scalar-like": they carry no truncation constraint of their own, so
// field-generic code using T(0)/T(1) literals cannot collapse the order of
// real series.  Anything constructed with an explicit order is a genuine
// truncated series.
template <class T>
class Series {
    static constexpr size_t kInf = std::numeric_limits<size_t>::max();

  public:
    Series() : order_(0), coeff_(1, T(0)), scalar_like_(true) {}
    explicit Series(int v) : order_(0), coeff_(1, T(v)), scalar_like_(true) {}
    explicit Series(size_t order, char label = 't') : order_(order), coeff_(order + 1, T(0)), label_(label) {}
    Series(std::vector<T> coeff, size_t order, char label = 't')
        : order_(order), coeff_(std::move(coeff)), label_(label) {
        coeff_.resize(order + 1, T(0));
    }

    static Series constant_like(const T& c) {
        Series s;
        s.coeff_[0] = c;
        return s;
    }
    static Series constant(const T& c, size_t order, char label = 't') {
        Series s(order, label);
        s.coeff_[0] = c;
        return s;
    }
    // The identity series c0 + x.
    static Series variable(const T& c0, size_t order, char label = 't') {
        if (order < 1) throw std::invalid_argument("Series::variable needs order >= 1");
        Series s(order, label);
        s.coeff_[0] = c0;
        s.coeff_[1] = T(1);
        return s;
    }

    size_t order() const { return order_; }
    bool scalar_like() const { return scalar_like_; }
    char label() const { return label_; }
    const std::vector<T>& coefficients() const { return coeff_; }
    const T& operator[](size_t k) const {
        static const T zero(0);
        return k < coeff_.size() ? coeff_[k] : zero;
    }
    void set(size_t k, const T& v) {
        if (k > order_ || scalar_like_) throw std::out_of_range("Series::set beyond truncation order");
        coeff_[k] = v;
    }

    bool is_zero() const {
        for (const auto& c : coeff_)
            if (!(c == T(0))) return false;
        return true;
    }

    Series truncated(size_t new_order) const {
        Series out(new_order, label_);
        for (size_t k = 0; k <= new_order && k < coeff_.size(); ++k) out.coeff_[k] = coeff_[k];
        return out;
    }

    friend Series operator+(const Series& a, const Series& b) { return zip(a, b, false); }
    friend Series operator-(const Series& a, const Series& b) { return zip(a, b, true); }
    Series& operator+=(const Series& o) { return *this = *this + o; }
    Series& operator-=(const Series& o) { return *this = *this - o; }
    Series& operator*=(const Series& o) { return *this = *this * o; }
    Series operator-() const {
        Series out = *this;
        for (auto& c : out.coeff_) c = -c;
        return out;
    }
    friend Series operator*(const Series& a, const Series& b) {
        check_labels(a, b);
        Series out = make_result(a, b);
        size_t n = out.coeff_.size();
        for (size_t i = 0; i < n && i < a.coeff_.size(); ++i) {
            if (a.coeff_[i] == T(0)) continue;
            size_t jmax = std::min(n - i, b.coeff_.size());
            for (size_t j = 0; j < jmax; ++j) out.coeff_[i + j] += a.coeff_[i] * b.coeff_[j];
        }
        return out;
    }
    friend Series operator*(const T& c, const Series& a) {
        Series out = a;
        for (auto& v : out.coeff_) v = c * v;
        return out;
    }
    friend Series operator*(const Series& a, const T& c) { return c * a; }

    // Division requires an invertible constant term in b.
    friend Series operator/(const Series& a, const Series& b) {
        check_labels(a, b);
        if (b[0] == T(0)) throw std::domain_error("Series division by series with zero constant term");
        Series out = make_result(a, b);
        size_t n = out.coeff_.size();
        for (size_t k = 0; k < n; ++k) {
            T acc = a[k];
            for (size_t j = 1; j <= k && j < b.coeff_.size(); ++j) acc -= b.coeff_[j] * out.coeff_[k - j];
            out.coeff_[k] = acc / b[0];
        }
        return out;
    }
    friend Series operator/(const Series& a, const T& c) {
        Series out = a;
        for (auto& v : out.coeff_) v = v / c;
        return out;
    }

    // a(b(x)); b must have zero constant term.
    friend Series compose(const Series& a, const Series& b) {
        if (b[0] != T(0)) throw std::domain_error("Series composition with nonzero constant term");
        Series out = make_result(a, b);
        if (out.scalar_like_) out = constant_like(a[0]);
        size_t n = out.coeff_.size();
        out.coeff_[0] = a[0];
        Series pw = out;  // running power of b, starts as 1
        for (auto& v : pw.coeff_) v = T(0);
        pw.coeff_[0] = T(1);
        for (size_t k = 1; k < a.coeff_.size() && k <= out.order_; ++k) {
            pw = pw * b;
            if (pw.is_zero()) break;
            for (size_t j = 0; j < n; ++j) out.coeff_[j] += a.coeff_[k] * pw[j];
        }
        return out;
    }

    Series derivative() const {
        if (scalar_like_) return constant_like(T(0));
        Series out(order_ == 0 ? 0 : order_ - 1, label_);
        for (size_t k = 1; k <= order_; ++k) out.coeff_[k - 1] = coeff_[k] * scalar_from_int<T>(static_cast<long>(k));
        return out;
    }
    // Antiderivative with zero constant term; keeps the truncation order.
    Series integral() const {
        Series out(scalar_like_ ? 1 : order_, label_);
        for (size_t k = 0; k + 1 < out.coeff_.size() && k < coeff_.size(); ++k)
            out.coeff_[k + 1] = coeff_[k] / scalar_from_int<T>(static_cast<long>(k + 1));
        return out;
    }

    // Square root; the constant term must have an exact square root in T.
    friend Series sqrt(const Series& a) {
        T r0 = sqrt_scalar(a[0]);
        Series out = a;
        out.coeff_.assign(out.coeff_.size(), T(0));
        out.coeff_[0] = r0;
        T two_r0 = scalar_from_int<T>(2) * r0;
        for (size_t k = 1; k < out.coeff_.size(); ++k) {
            T acc = a[k];
            for (size_t j = 1; j < k; ++j) acc -= out.coeff_[j] * out.coeff_[k - j];
            out.coeff_[k] = acc / two_r0;
        }
        return out;
    }

    // Evaluation at a point (sums all retained coefficients).
    T eval(const T& x) const {
        T acc(0);
        for (size_t k = coeff_.size(); k-- > 0;) acc = acc * x + coeff_[k];
        return acc;
    }

    friend bool operator==(const Series& a, const Series& b) {
        size_t n = std::max(a.coeff_.size(), b.coeff_.size());
        if (!a.scalar_like_ && !b.scalar_like_) n = std::min(a.order_, b.order_) + 1;
        for (size_t k = 0; k < n; ++k)
            if (!(a[k] == b[k])) return false;
        return true;
    }
    friend bool operator!=(const Series& a, const Series& b) { return !(a == b); }

  private:
    size_t effective_order() const { return scalar_like_ ? kInf : order_; }
    static Series make_result(const Series& a, const Series& b) {
        size_t ord = std::min(a.effective_order(), b.effective_order());
        if (ord == kInf) {
            Series s;
            s.coeff_[0] = T(0);
            return s;
        }
        return Series(ord, a.scalar_like_ ? b.label_ : a.label_);
    }
    static Series zip(const Series& a, const Series& b, bool sub) {
        check_labels(a, b);
        Series out = make_result(a, b);
        for (size_t k = 0; k < out.coeff_.size(); ++k) {
            if (sub)
                out.coeff_[k] = T(a[k] - b[k]);
            else
                out.coeff_[k] = T(a[k] + b[k]);
        }
        return out;
    }
    static void check_labels(const Series& a, const Series& b) {
        if (!a.scalar_like_ && !b.scalar_like_ && a.label_ != b.label_)
            throw std::invalid_argument("Series variable labels differ");
    }
    static T sqrt_scalar(const T& c);

    size_t order_;
    std::vector<T> coeff_;
    char label_ = 't';
    bool scalar_like_ = false;
};

template <>
inline double Series<double>::sqrt_scalar(const double& c) {
    if (c <= 0) throw std::domain_error("Series sqrt: nonpositive constant term");
    return std::sqrt(c);
}

template <>
inline Rational Series<Rational>::sqrt_scalar(const Rational& c) {
    using boost::multiprecision::sqrt;
    BigInt n = numerator(c), d = denominator(c);
    if (n < 0) throw std::domain_error("Series sqrt: negative constant term");
    BigInt rn = sqrt(n), rd = sqrt(d);
    if (rn * rn != n || rd * rd != d)
        throw std::domain_error("Series sqrt: constant term is not a perfect square in exact mode");
    return Rational(rn, rd);
}

template <class T>
struct ScalarMaker<Series<T>> {
    static Series<T> from_int(long v) { return Series<T>::constant_like(scalar_from_int<T>(v)); }
    static Series<T> from_rational(const Rational& r) { return Series<T>::constant_like(scalar_from_rational<T>(r)); }
};

using DSeries = Series<double>;
using QSeries = Series<Rational>;

}  // namespace diracens
