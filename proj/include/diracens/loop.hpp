#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "diracens/dirac.hpp"
#include "diracens/poly.hpp"
#include "diracens/rational.hpp"

namespace diracens {

// (genus, sorted boundary lengths) index of a connected correlator T^g_L.
struct CorrelatorKey {
    int g = 0;
    std::vector<int> lengths;  // stored sorted ascending

    CorrelatorKey() = default;
    CorrelatorKey(int genus, std::vector<int> ls) : g(genus), lengths(std::move(ls)) {
        std::sort(lengths.begin(), lengths.end());
    }
    friend bool operator<(const CorrelatorKey& a, const CorrelatorKey& b) {
        if (a.g != b.g) return a.g < b.g;
        return a.lengths < b.lengths;
    }
    friend bool operator==(const CorrelatorKey& a, const CorrelatorKey& b) {
        return a.g == b.g && a.lengths == b.lengths;
    }
    std::string str() const {
        std::ostringstream os;
        os << "T^" << g << "_(";
        for (size_t i = 0; i < lengths.size(); ++i) os << (i ? "," : "") << lengths[i];
        os << ")";
        return os.str();
    }
};

struct MissingCorrelator : std::runtime_error {
    explicit MissingCorrelator(const CorrelatorKey& k)
        : std::runtime_error("correlator table is missing " + k.str()), key(k) {}
    CorrelatorKey key;
};

// Table of connected correlators indexed by genus and boundary lengths.
// Entries are scalars (double / Rational) or Series for formal mode.
template <class T>
class CorrelatorTable {
  public:
    void set(const CorrelatorKey& k, const T& v) { entries_[k] = v; }
    void set(int g, std::vector<int> lengths, const T& v) { entries_[CorrelatorKey(g, std::move(lengths))] = v; }
    bool has(const CorrelatorKey& k) const { return entries_.count(k) != 0; }
    const T& get(const CorrelatorKey& k) const {
        auto it = entries_.find(k);
        if (it == entries_.end()) throw MissingCorrelator(k);
        return it->second;
    }
    const T& get(int g, std::vector<int> lengths) const { return get(CorrelatorKey(g, std::move(lengths))); }
    const std::map<CorrelatorKey, T>& entries() const { return entries_; }
    int max_genus() const {
        int g = 0;
        for (const auto& [k, v] : entries_) g = std::max(g, k.g);
        return g;
    }

  private:
    std::map<CorrelatorKey, T> entries_;
};

// Folded single-trace derivative: poly = S'(x) with the bi-trace couplings
// replaced by their genus-0 mean-field combinations (the tilde couplings).
template <class T>
struct EffectiveDerivative {
    Poly<T> poly;                // sum_m tilde_m x^{m-1}
    std::map<int, T> tilde;      // m -> tilde coupling, m = 1..degree
};

namespace detail {

// Potential couplings lifted into the working scalar field F.
template <class F>
struct PotentialView {
    F gaussian{};
    F hooft{};
    std::map<int, F> single;                    // i != 2
    std::map<std::pair<int, int>, F> bi;        // i <= j, symmetric value
    int degree = 2;

    static PotentialView from(const BitracialPotential& p) {
        PotentialView v;
        v.gaussian = scalar_from_rational<F>(p.gaussian_coeff);
        v.hooft = scalar_from_rational<F>(p.hooft_t);
        for (const auto& [i, c] : p.single_trace)
            if (c != 0) v.single[i] = scalar_from_rational<F>(c);
        for (const auto& [ij, c] : p.bi_trace)
            if (c != 0) v.bi[ij] = scalar_from_rational<F>(c);
        v.degree = p.degree();
        return v;
    }
};

// tilde_m = g2 [m=2] + t_m [m != 2] + 2m sum_j t_{m,j}/(m+j) T0_j.
// `moment` must supply T0_j for every bi-trace partner j.
template <class F, class MomentFn>
std::map<int, F> tilde_couplings(const PotentialView<F>& p, const MomentFn& moment) {
    std::map<int, F> tl;
    for (int m = 1; m <= p.degree; ++m) tl[m] = F(0);
    tl[2] = p.gaussian;
    for (const auto& [i, c] : p.single) tl[i] = tl[i] + c;
    for (const auto& [ij, c] : p.bi) {
        auto [i, j] = ij;
        F w = c / scalar_from_int<F>(i + j);
        tl[i] = tl[i] + scalar_from_int<F>(2 * i) * w * moment(j);
        if (i != j) tl[j] = tl[j] + scalar_from_int<F>(2 * j) * w * moment(i);
    }
    return tl;
}

}  // namespace detail

// Genus-0 effective derivative from supplied genus-0 moments.
// Affine in the moments; reduces to the raw S'(x) when no bi-trace term exists.
template <class T>
EffectiveDerivative<T> fold_effective_derivative(const BitracialPotential& p, const std::map<int, T>& moments0) {
    auto view = detail::PotentialView<T>::from(p);
    auto moment = [&](int j) -> T {
        auto it = moments0.find(j);
        if (it == moments0.end()) throw MissingCorrelator(CorrelatorKey(0, {j}));
        return it->second;
    };
    EffectiveDerivative<T> out;
    out.tilde = detail::tilde_couplings(view, moment);
    std::vector<T> coeff(view.degree, T(0));
    for (const auto& [m, v] : out.tilde) coeff[m - 1] = v;
    out.poly = Poly<T>(std::move(coeff));
    return out;
}

// LHS - RHS of the bi-tracial Schwinger-Dyson equation at (g, l1, L).
// L carries one label per extra boundary; sub-multiset sums run over subsets
// of boundary positions.  T^{(-1)} = 0.  Throws MissingCorrelator when the
// table lacks a touched index.
template <class T>
T sde_residual(const BitracialPotential& p, const CorrelatorTable<T>& table, int g, int l1,
               const std::vector<int>& L) {
    if (g < 0 || l1 < 0) throw std::invalid_argument("sde_residual: g and l1 must be nonnegative");
    const int n = 1 + static_cast<int>(L.size());
    const size_t subsets = size_t(1) << L.size();
    auto view = detail::PotentialView<T>::from(p);

    auto corr = [&](int genus, std::vector<int> ls) -> T {
        if (genus < 0) return T(0);
        return table.get(CorrelatorKey(genus, std::move(ls)));
    };
    auto with_subset = [&](size_t mask, std::initializer_list<int> extra) {
        std::vector<int> ls(extra);
        for (size_t b = 0; b < L.size(); ++b)
            if (mask & (size_t(1) << b)) ls.push_back(L[b]);
        return ls;
    };
    const size_t full = subsets - 1;

    T lhs(0);
    for (int k = 0; k <= l1 - 1; ++k) {
        for (int h = 0; h <= g; ++h)
            for (size_t mask = 0; mask < subsets; ++mask)
                lhs = lhs + corr(h, with_subset(mask, {k})) * corr(g - h, with_subset(full & ~mask, {l1 - 1 - k}));
        lhs = lhs + corr(g - 1, with_subset(full, {k, l1 - 1 - k}));
    }
    for (size_t r = 0; r < L.size(); ++r) {
        size_t rest = full & ~(size_t(1) << r);
        lhs = lhs + scalar_from_int<T>(L[r]) * corr(g, with_subset(rest, {l1 + L[r] - 1}));
    }

    T rhs = view.gaussian * corr(g, with_subset(full, {l1 + 1}));
    for (const auto& [i, ti] : view.single) rhs = rhs + ti * corr(g, with_subset(full, {l1 + i - 1}));
    for (const auto& [ij, tij] : view.bi) {
        auto [i, j] = ij;
        T w = tij / scalar_from_int<T>(i + j);
        // ordered pairs (i,j) and (j,i) share the symmetric coupling
        std::vector<std::pair<int, int>> ordered{{i, j}};
        if (i != j) ordered.push_back({j, i});
        for (auto [a, b] : ordered) {
            T term(0);
            for (int h = 0; h <= g; ++h)
                for (size_t mask = 0; mask < subsets; ++mask) {
                    term = term + scalar_from_int<T>(a) * corr(h, with_subset(mask, {l1 + a - 1})) *
                                      corr(g - h, with_subset(full & ~mask, {b}));
                    term = term + scalar_from_int<T>(b) * corr(h, with_subset(mask, {l1 + b - 1})) *
                                      corr(g - h, with_subset(full & ~mask, {a}));
                }
            term = term + scalar_from_int<T>(a) * corr(g - 1, with_subset(full, {l1 + a - 1, b}));
            term = term + scalar_from_int<T>(b) * corr(g - 1, with_subset(full, {l1 + b - 1, a}));
            rhs = rhs + w * term;
        }
    }
    (void)n;
    return lhs - rhs;
}

// Classical single-trace loop equation residual (no bi-trace couplings),
// kept as an independent reduction reference for tests.
template <class T>
T single_trace_sde_residual(const T& gaussian, const std::map<int, T>& single, const CorrelatorTable<T>& table,
                            int g, int l1, const std::vector<int>& L) {
    BitracialPotential p;
    p.gaussian_coeff = Rational(1);
    CorrelatorTable<T> dummy;
    const size_t subsets = size_t(1) << L.size();
    const size_t full = subsets - 1;
    auto corr = [&](int genus, std::vector<int> ls) -> T {
        if (genus < 0) return T(0);
        return table.get(CorrelatorKey(genus, std::move(ls)));
    };
    auto with_subset = [&](size_t mask, std::initializer_list<int> extra) {
        std::vector<int> ls(extra);
        for (size_t b = 0; b < L.size(); ++b)
            if (mask & (size_t(1) << b)) ls.push_back(L[b]);
        return ls;
    };
    T lhs(0);
    for (int k = 0; k <= l1 - 1; ++k) {
        for (int h = 0; h <= g; ++h)
            for (size_t mask = 0; mask < subsets; ++mask)
                lhs = lhs + corr(h, with_subset(mask, {k})) * corr(g - h, with_subset(full & ~mask, {l1 - 1 - k}));
        lhs = lhs + corr(g - 1, with_subset(full, {k, l1 - 1 - k}));
    }
    for (size_t r = 0; r < L.size(); ++r) {
        size_t rest = full & ~(size_t(1) << r);
        lhs = lhs + scalar_from_int<T>(L[r]) * corr(g, with_subset(rest, {l1 + L[r] - 1}));
    }
    T rhs = gaussian * corr(g, with_subset(full, {l1 + 1}));
    for (const auto& [i, ti] : single) rhs = rhs + ti * corr(g, with_subset(full, {l1 + i - 1}));
    return lhs - rhs;
}

}  // namespace diracens
