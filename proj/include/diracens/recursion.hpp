#pragma once

#include <cassert>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "diracens/laurent.hpp"
#include "diracens/loop.hpp"
#include "diracens/spectral.hpp"

namespace diracens {

// ---------------------------------------------------------------------------
// Truncated local Laurent expansion in u = z - b around a branch point.
// `val` is the true valuation (coefficients below are exactly zero); entries
// above `max_exp` are unknown.  All objects carry `len` stored coefficients.
// ---------------------------------------------------------------------------
namespace detail {
// magnitude used to detect numerically-cancelled leading coefficients
inline double local_mag(double v) { return std::fabs(v); }
inline double local_mag(const Rational& v) { return v == 0 ? 0.0 : 1.0; }
template <class U>
double local_mag(const Series<U>& s) { return s.is_zero() ? 0.0 : 1.0; }
}  // namespace detail

template <class T>
struct LaurentLocal {
    static constexpr int kInf = 1 << 28;
    int val = 0;
    int max_exp = kInf;
    std::vector<T> c;  // c[i] = coefficient of u^{val+i}

    static LaurentLocal zero(int len) {
        LaurentLocal out;
        out.val = 0;
        out.max_exp = kInf;
        out.c.assign(len, T(0));
        return out;
    }
    static LaurentLocal monomial(const T& a, int e, int len) {
        LaurentLocal out = zero(len);
        out.val = e;
        out.c[0] = a;
        return out;
    }

    int len() const { return static_cast<int>(c.size()); }
    bool is_zero() const {
        for (const auto& x : c)
            if (!(x == T(0))) return false;
        return true;
    }
    void normalize() {
        // shift val up past leading zeros; in floating arithmetic an exactly
        // cancelled coefficient survives as roundoff noise, so leading entries
        // far below the expansion scale are treated as zero
        double scale = 0;
        for (const auto& x : c) scale = std::max(scale, detail::local_mag(x));
        double eps = 1e-10 * scale;
        int shift = 0;
        while (shift < len() - 1 && detail::local_mag(c[shift]) <= eps && val + shift < max_exp) ++shift;
        if (shift > 0) {
            c.erase(c.begin(), c.begin() + shift);
            c.resize(c.size() + shift, T(0));
            val += shift;
        }
    }

    friend LaurentLocal operator*(const LaurentLocal& a, const LaurentLocal& b) {
        LaurentLocal out = zero(a.len());
        out.val = a.val + b.val;
        long ma = a.max_exp == kInf ? kInf : a.max_exp + b.val;
        long mb = b.max_exp == kInf ? kInf : b.max_exp + a.val;
        out.max_exp = static_cast<int>(std::min({ma, mb, static_cast<long>(kInf)}));
        int n = out.len();
        for (int i = 0; i < n && i < a.len(); ++i) {
            if (a.c[i] == T(0)) continue;
            for (int j = 0; i + j < n && j < b.len(); ++j) out.c[i + j] += a.c[i] * b.c[j];
        }
        return out;
    }
    friend LaurentLocal operator+(const LaurentLocal& a, const LaurentLocal& b) {
        LaurentLocal out = zero(a.len());
        out.val = std::min(a.val, b.val);
        out.max_exp = std::min(a.max_exp, b.max_exp);
        for (int i = 0; i < out.len(); ++i) {
            int e = out.val + i;
            T acc(0);
            if (e >= a.val && e - a.val < a.len()) acc = acc + a.c[e - a.val];
            if (e >= b.val && e - b.val < b.len()) acc = acc + b.c[e - b.val];
            out.c[i] = acc;
        }
        out.normalize();
        return out;
    }
    LaurentLocal scaled(const T& s) const {
        LaurentLocal out = *this;
        for (auto& x : out.c) x = s * x;
        return out;
    }
    // multiplicative inverse (leading coefficient must be invertible)
    LaurentLocal inverse() const {
        LaurentLocal a = *this;
        a.normalize();
        if (a.c[0] == T(0)) throw std::domain_error("LaurentLocal inverse of zero");
        LaurentLocal out = zero(a.len());
        out.val = -a.val;
        int rel = a.max_exp == kInf ? a.len() : std::min(a.len(), a.max_exp - a.val + 1);
        out.max_exp = out.val + rel - 1;
        out.c[0] = T(1) / a.c[0];
        for (int k = 1; k < out.len(); ++k) {
            T acc(0);
            for (int j = 1; j <= k && j < a.len(); ++j) acc = acc + a.c[j] * out.c[k - j];
            out.c[k] = -(acc / a.c[0]);
        }
        return out;
    }
    // coefficient of u^{-1}; throws if the expansion cannot resolve it
    T residue() const {
        if (-1 < val) return T(0);
        if (-1 > max_exp || -1 - val >= len())
            throw std::runtime_error("LaurentLocal: residue beyond reliable expansion range");
        return c[-1 - val];
    }
};

// ---------------------------------------------------------------------------
// Sum of products of per-variable pole factors 1/(z_i - b)^k, b in {+1,-1}.
// This is the representation of stable omega_{g,n}/ (dz_1..dz_n): rational,
// decaying at infinity, with poles only at the branch points.
// ---------------------------------------------------------------------------
template <class T>
struct PoleForm {
    // per-variable (sign, order); order >= 1 for every variable of the form
    using Key = std::vector<std::pair<int, int>>;
    int nvars = 0;
    std::map<Key, T> terms;

    void add(const Key& k, const T& v) {
        auto it = terms.find(k);
        if (it == terms.end())
            terms[k] = v;
        else {
            it->second = it->second + v;
            if (it->second == T(0)) terms.erase(it);
        }
    }
    template <class C>
    C eval(const std::vector<C>& z) const {
        C acc(0);
        for (const auto& [key, coeff] : terms) {
            C prod(scalar_to<C>(coeff));
            for (int i = 0; i < nvars; ++i) {
                C d = z[i] - C(static_cast<double>(key[i].first));
                C p(1);
                for (int e = 0; e < key[i].second; ++e) p = p * d;
                prod = prod / p;
            }
            acc = acc + prod;
        }
        return acc;
    }

  private:
    template <class C>
    static C scalar_to(const T& v) { return C(to_double(v)); }
};

// Correlator form with bookkeeping demanded of stable (g, n) outputs.
template <class T>
struct CorrelatorForm {
    int g = 0;
    int n = 1;
    PoleForm<T> form;
    // "exact-single-trace-reduction" when the potential has no bi-trace
    // couplings (or sits on a matching curve by construction);
    // "general-coupling-unverified" otherwise, pending the SDE certificate.
    std::string validity;
};

// ---------------------------------------------------------------------------
// One-cut topological recursion on x(z) = alpha + gamma(z + 1/z) with
// y(z) = -1/2 sum_k u_k (z^k - z^-k)  (so omega_{0,1} = y dx and
// W_1^0(x(z)) = S'(x(z))/2 + y(z)).
// ---------------------------------------------------------------------------
template <class T>
class RecursionEngine {
  public:
    struct Options {
        int euler_min = -2;   // compute omega_{g,n} with 2-2g-n >= euler_min
        int local_len = 40;   // stored coefficients per local expansion
    };

    RecursionEngine(const T& alpha, const T& gamma, std::vector<T> u, Options opt = {})
        : alpha_(alpha), gamma_(gamma), u_(std::move(u)), opt_(opt) {}

    static RecursionEngine from_solution(const SpectralSolutionT<T>& sol, Options opt = {}) {
        return RecursionEngine(sol.alpha, sol.gamma, sol.u, opt);
    }

    const PoleForm<T>& omega(int g, int n) {
        if (2 - 2 * g - n >= 0) throw std::invalid_argument("omega: (g,n) must be stable (2g-2+n > 0)");
        if (2 - 2 * g - n < opt_.euler_min)
            throw std::invalid_argument("omega: request past configured Euler-characteristic bound");
        auto key = std::make_pair(g, n);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        compute(g, n);
        return memo_.at(key);
    }

    // T^g_{l_1..l_n} extracted from omega_{g,n} (stable (g,n) only).
    T moment(int g, const std::vector<int>& lengths) {
        const PoleForm<T>& f = omega(g, static_cast<int>(lengths.size()));
        T acc(0);
        for (const auto& [key, coeff] : f.terms) {
            T prod = coeff;
            for (size_t i = 0; i < lengths.size(); ++i)
                prod = prod * extract_E(lengths[i], key[i].first, key[i].second);
            acc = acc + prod;
        }
        return acc;
    }

    // [z^{-1}] x(z)^l / (z - b)^k  in the |z| > 1 expansion.
    T extract_E(int l, int b, int k) {
        auto xk = xpow(l);
        T acc(0);
        for (int j = k - 1; j <= l; ++j) {
            T xj = xk.coeff(j);
            if (xj == T(0)) continue;
            long w = detail::binom_long(j, j + 1 - k);
            if (w == 0) continue;
            T term = scalar_from_int<T>(w) * xj;
            if ((j + 1 - k) % 2 != 0 && b < 0) term = -term;
            acc = acc + term;
        }
        return acc;
    }

  private:
    using Local = LaurentLocal<T>;
    using SpecKey = std::map<int, std::pair<int, int>>;  // spectator var -> (b, k)
    using ExpMap = std::map<SpecKey, Local>;

    enum class SlotKind { Z, Sigma, Spec };
    struct Slot {
        SlotKind kind;
        int spec = -1;
    };

    T alpha_, gamma_;
    std::vector<T> u_;
    Options opt_;
    std::map<std::pair<int, int>, PoleForm<T>> memo_;
    std::map<int, LaurentPoly<T>> xpow_;

    const LaurentPoly<T>& xpow(int l) {
        auto it = xpow_.find(l);
        if (it != xpow_.end()) return it->second;
        LaurentPoly<T> x;
        x.add_term(0, alpha_);
        x.add_term(1, gamma_);
        x.add_term(-1, gamma_);
        xpow_[l] = x.pow(static_cast<unsigned>(l));
        return xpow_.at(l);
    }

    // (b+u)^e for e >= 0 exact, e < 0 as a truncated series.
    Local bu_pow(int b, int e) const {
        const int L = opt_.local_len;
        Local out = Local::zero(L);
        if (e >= 0) {
            for (int i = 0; i <= e && i < L; ++i)
                out.c[i] = scalar_from_int<T>(detail::binom_long(e, i) * ipow(b, e - i));
            return out;
        }
        out.max_exp = L - 1;
        // (b+u)^e = b^e (1 + b u)^e with b^2 = 1; generalized binomial series
        T coef(1);
        for (int m = 0; m < L; ++m) {
            if (m > 0) coef = coef * scalar_from_int<T>(e - (m - 1)) / scalar_from_int<T>(m);
            long sign = ipow(b, m % 2) * ipow(b, (-e) % 2);
            out.c[m] = sign == 1 ? coef : -coef;
        }
        return out;
    }

    static long ipow(int b, int e) {
        long r = 1;
        for (int i = 0; i < e; ++i) r *= b;
        return r;
    }

    // localize a Laurent polynomial in z at z = b + u
    Local localize(const LaurentPoly<T>& f, int b) const {
        Local out = Local::zero(opt_.local_len);
        bool started = false;
        for (const auto& [e, coeff] : f.coefficients()) {
            Local term = bu_pow(b, e).scaled(coeff);
            out = started ? (out + term) : term;
            started = true;
        }
        out.normalize();
        return out;
    }

    // 1/(z - b0)^k at z = b + u
    Local z_pole(int b0, int k, int b) const {
        if (b0 == b) return Local::monomial(T(1), -k, opt_.local_len);
        // 1/(u + (b - b0))^k, with b - b0 = 2b
        Local base = Local::zero(opt_.local_len);
        base.val = 0;
        base.c[0] = scalar_from_int<T>(2 * b);
        base.c[1] = T(1);
        Local inv = base.inverse();
        Local out = inv;
        for (int i = 1; i < k; ++i) out = out * inv;
        return out;
    }
    // 1/(sigma(z) - b0)^k at z = b + u, sigma(z) = 1/z
    Local sigma_pole(int b0, int k, int b) const {
        if (b0 == b) {
            // sigma z - b = -b u / (b+u):  1/(.)^k = (-b)^k (b+u)^k u^{-k}
            return Local::monomial(scalar_from_int<T>(ipow(-b, k)), -k, opt_.local_len) * bu_pow(b, k);
        }
        // sigma z + b = (2 + b u)/(b + u)  (for b0 = -b)
        Local num = Local::zero(opt_.local_len);
        num.val = 0;
        num.c[0] = scalar_from_int<T>(2);
        num.c[1] = scalar_from_int<T>(b);
        Local frac = num * bu_pow(b, -1);
        Local inv = frac.inverse();
        Local out = inv;
        for (int i = 1; i < k; ++i) out = out * inv;
        return out;
    }
    // sigma'(z) = -1/z^2
    Local sigma_prime(int b) const {
        return bu_pow(b, -2).scaled(T(-1));
    }

    // omega_{0,2}(z_slot, z_spec): per spectator order m+2, local (m+1) u^m
    ExpMap B_spec(bool sigma_slot, int spec, int b) const {
        ExpMap out;
        const int L = opt_.local_len;
        if (!sigma_slot) {
            // 1/((b - z_i) + u)^2 = sum_m (m+1) u^m (z_i - b)^{-(m+2)}
            for (int m = 0; m < L; ++m) {
                SpecKey k;
                k[spec] = {b, m + 2};
                Local loc = Local::monomial(scalar_from_int<T>(m + 1), m, L);
                out[k] = loc;
            }
        } else {
            // 1/(sigma z - z_i)^2 = sum_m (m+1)(-b)^m u^m (b+u)^{-m} (z_i - b)^{-(m+2)}
            for (int m = 0; m < L; ++m) {
                SpecKey k;
                k[spec] = {b, m + 2};
                Local loc = bu_pow(b, -m).scaled(scalar_from_int<T>((m + 1) * ipow(-b, m)));
                Local shifted = Local::monomial(T(1), m, L) * loc;
                out[k] = shifted;
            }
        }
        return out;
    }

    // omega_{0,2}(z, sigma z) = 1/(z - 1/z)^2 = u^{-2} (b+u)^2 (u + 2b)^{-2}
    Local B_z_sigma(int b) const {
        const int L = opt_.local_len;
        Local q = Local::zero(L);
        q.val = 0;
        q.c[0] = scalar_from_int<T>(2 * b);
        q.c[1] = T(1);
        Local qinv = q.inverse();
        return Local::monomial(T(1), -2, L) * bu_pow(b, 2) * qinv * qinv;
    }

    static ExpMap map_scale(ExpMap m, const Local& f) {
        for (auto& [k, loc] : m) loc = loc * f;
        return m;
    }
    static ExpMap map_add(ExpMap a, const ExpMap& b) {
        for (const auto& [k, loc] : b) {
            auto it = a.find(k);
            if (it == a.end())
                a[k] = loc;
            else
                it->second = it->second + loc;
        }
        return a;
    }
    static ExpMap map_mul(const ExpMap& a, const ExpMap& b) {
        ExpMap out;
        for (const auto& [ka, la] : a)
            for (const auto& [kb, lb] : b) {
                SpecKey k = ka;
                for (const auto& [var, pole] : kb) {
                    if (k.count(var)) throw std::logic_error("recursion: spectator variable used twice");
                    k[var] = pole;
                }
                Local prod = la * lb;
                auto it = out.find(k);
                if (it == out.end())
                    out[k] = prod;
                else
                    it->second = it->second + prod;
            }
        return out;
    }

    // expand a stored form with the given slot assignment at z = b + u
    ExpMap expand_form(const PoleForm<T>& f, const std::vector<Slot>& slots, int b) const {
        ExpMap out;
        for (const auto& [key, coeff] : f.terms) {
            ExpMap term;
            term[SpecKey{}] = Local::monomial(coeff, 0, opt_.local_len);
            for (size_t i = 0; i < slots.size(); ++i) {
                auto [pb, pk] = key[i];
                switch (slots[i].kind) {
                    case SlotKind::Z:
                        term = map_scale(std::move(term), z_pole(pb, pk, b));
                        break;
                    case SlotKind::Sigma:
                        term = map_scale(std::move(term), sigma_pole(pb, pk, b));
                        break;
                    case SlotKind::Spec: {
                        ExpMap moved;
                        for (auto& [k, loc] : term) {
                            SpecKey nk = k;
                            if (nk.count(slots[i].spec)) throw std::logic_error("spectator collision");
                            nk[slots[i].spec] = {pb, pk};
                            moved[nk] = loc;
                        }
                        term = std::move(moved);
                        break;
                    }
                }
            }
            out = map_add(std::move(out), term);
        }
        return out;
    }

    // expansion of a recursion part omega_{g1, |I|+1}(slot, I) at z = b + u.
    // `sigma_slot` selects evaluation at sigma(z); the sigma' pullback factor
    // is applied here.
    ExpMap part_expansion(int g1, const std::vector<int>& spec_vars, bool sigma_slot, int b) {
        ExpMap out;
        if (g1 == 0 && spec_vars.size() == 1) {
            out = B_spec(sigma_slot, spec_vars[0], b);
        } else {
            const PoleForm<T>& f = omega(g1, static_cast<int>(spec_vars.size()) + 1);
            std::vector<Slot> slots(1 + spec_vars.size());
            slots[0] = {sigma_slot ? SlotKind::Sigma : SlotKind::Z, -1};
            for (size_t i = 0; i < spec_vars.size(); ++i) slots[1 + i] = {SlotKind::Spec, spec_vars[i]};
            out = expand_form(f, slots, b);
        }
        if (sigma_slot) out = map_scale(std::move(out), sigma_prime(b));
        return out;
    }

    void compute(int g, int n) {
        // n = 1 + |I|; spectator variables are 1..n-1, z0 is variable 0
        const int nspec = n - 1;
        PoleForm<T> result;
        result.nvars = n;

        for (int b : {1, -1}) {
            // A(u): bracket of the recursion at this branch point
            ExpMap A;
            bool a_started = false;

            // (i) omega_{g-1, n+1+... }(z, sigma z, I)
            if (g >= 1) {
                ExpMap piece;
                if (g - 1 == 0 && nspec == 0) {
                    piece[SpecKey{}] = B_z_sigma(b) * sigma_prime(b);
                } else {
                    const PoleForm<T>& f = omega(g - 1, nspec + 2);
                    std::vector<Slot> slots(nspec + 2);
                    slots[0] = {SlotKind::Z, -1};
                    slots[1] = {SlotKind::Sigma, -1};
                    for (int i = 0; i < nspec; ++i) slots[2 + i] = {SlotKind::Spec, i + 1};
                    piece = expand_form(f, slots, b);
                    piece = map_scale(std::move(piece), sigma_prime(b));
                }
                A = a_started ? map_add(std::move(A), piece) : std::move(piece);
                a_started = true;
            }

            // (ii) ordered stable splits
            for (int g1 = 0; g1 <= g; ++g1) {
                int g2 = g - g1;
                for (size_t mask = 0; mask < (size_t(1) << nspec); ++mask) {
                    std::vector<int> I1, I2;
                    for (int i = 0; i < nspec; ++i)
                        ((mask >> i) & 1 ? I1 : I2).push_back(i + 1);
                    if (g1 == 0 && I1.empty()) continue;
                    if (g2 == 0 && I2.empty()) continue;
                    ExpMap p1 = part_expansion(g1, I1, false, b);
                    ExpMap p2 = part_expansion(g2, I2, true, b);
                    ExpMap prod = map_mul(p1, p2);
                    A = a_started ? map_add(std::move(A), prod) : std::move(prod);
                    a_started = true;
                }
            }
            if (!a_started) continue;

            // K(z0, z) = [1/(z0-z) - 1/(z0-sigma z)] / (4 y(z) x'(z))
            LaurentPoly<T> y;  // y(z) = -1/2 sum u_k (z^k - z^-k)
            for (int k = 1; k < static_cast<int>(u_.size()); ++k) {
                if (u_[k] == T(0)) continue;
                T half = u_[k] / scalar_from_int<T>(2);
                y.add_term(k, -half);
                y.add_term(-k, half);
            }
            LaurentPoly<T> xp;  // x'(z) = gamma (1 - z^-2)
            xp.add_term(0, gamma_);
            xp.add_term(-2, -gamma_);
            LaurentPoly<T> den = (scalar_from_int<T>(4) * y) * xp;
            Local dinv = localize(den, b).inverse();

            for (const auto& [skey, aloc] : A) {
                Local core = aloc * dinv;
                core.normalize();
                // z0 pole order m+1 needs residue of u^m * (stuff): m <= -val - 1 bound
                int mmax = std::max(0, -core.val - 1) + 2;
                for (int m = 0; m <= mmax; ++m) {
                    Local nm = Local::monomial(T(1), m, opt_.local_len);
                    Local corr = bu_pow(b, -m).scaled(scalar_from_int<T>(ipow(-1, m) * ipow(b, m)));
                    Local nm_total = nm + Local::monomial(T(-1), m, opt_.local_len) * corr;
                    T res = (nm_total * core).residue();
                    if (res == T(0)) continue;
                    typename PoleForm<T>::Key key(n);
                    key[0] = {b, m + 1};
                    for (int i = 0; i < nspec; ++i) {
                        auto it = skey.find(i + 1);
                        if (it == skey.end())
                            throw std::logic_error("recursion: spectator without pole factor");
                        key[1 + i] = it->second;
                    }
                    result.add(key, res);
                }
            }
        }
        memo_[{g, n}] = std::move(result);
    }
};

// Universal genus-0 cylinder in Zhukovsky variables:
// W_2^0(x(z1), x(z2)) x'(z1) x'(z2) = 1/(z1-z2)^2 - x'(z1) x'(z2)/(x(z1)-x(z2))^2.
template <class C>
C w2_universal_value(const ZhukovskyMap& map, const C& z1, const C& z2) {
    C x1 = map.forward(z1), x2 = map.forward(z2);
    C xp1 = C(map.gamma) * (C(1) - C(1) / (z1 * z1));
    C xp2 = C(map.gamma) * (C(1) - C(1) / (z2 * z2));
    C d = z1 - z2, dx = x1 - x2;
    return C(1) / (d * d) - xp1 * xp2 / (dx * dx);
}

// Universal-cylinder extraction: T^0_{l1,l2} = sum_{m>=1} m X^(l1)_m X^(l2)_m
// with X^(l) the Laurent coefficients of x(z)^l (only the Bergman part of
// W_2^0 contributes to the double residue).  Exact for single-trace models.
template <class T>
T mixed_moment_universal(const T& alpha, const T& gamma, int l1, int l2) {
    LaurentPoly<T> x;
    x.add_term(0, alpha);
    x.add_term(1, gamma);
    x.add_term(-1, gamma);
    LaurentPoly<T> a = x.pow(static_cast<unsigned>(l1));
    LaurentPoly<T> b = x.pow(static_cast<unsigned>(l2));
    T acc(0);
    for (int m = 1; m <= std::max(l1, l2); ++m) {
        T c1 = a.coeff(m), c2 = b.coeff(m);
        if (c1 == T(0) || c2 == T(0)) continue;
        acc = acc + scalar_from_int<T>(m) * c1 * c2;
    }
    return acc;
}

// Genus-0 two-boundary moment as a coupling response,
//   T^0_{l1,l2} = -l2 d T^0_{l1} / d t_{l2},
// by implicit differentiation of the one-cut self-consistency system.  For
// single-trace potentials this reduces to the universal cylinder above; for
// bi-tracial potentials it carries the connected contributions in which a
// two-trace cell bridges the two boundaries, which the bare Bergman form
// misses (the Wick oracle arbitrates; see the tests).
template <class T>
T mixed_moment(const SpectralSolutionT<T>& sol, int l1, int l2) {
    if (l2 == 0 || l1 == 0) return T(0);
    if (!sol.potential.has_bi_trace()) return mixed_moment_universal(sol.alpha, sol.gamma, l1, l2);
    using G = Dual<T>;
    const detail::PotentialView<T>& base = sol.view;
    const int dprime = std::max(base.degree, l2);
    const size_t nunk = 2 + static_cast<size_t>(dprime - 1);
    const size_t nslots = nunk + 1;  // trailing slot: the probe coupling

    detail::PotentialView<G> view;
    view.hooft = G(base.hooft, nslots);
    view.degree = dprime;
    G eps = G::seed(T(0), nslots, nunk);
    if (l2 == 2)
        view.gaussian = G(base.gaussian, nslots) + eps;
    else
        view.gaussian = G(base.gaussian, nslots);
    for (const auto& [i, c] : base.single) view.single[i] = G(c, nslots);
    if (l2 != 2) {
        auto it = view.single.find(l2);
        if (it == view.single.end())
            view.single[l2] = eps;
        else
            it->second = it->second + eps;
    }
    for (const auto& [ij, c] : base.bi) view.bi[ij] = G(c, nslots);

    detail::OneCutSystem<G> sys(view, /*force_full=*/true);
    std::vector<G> x;
    x.reserve(nunk);
    x.push_back(G::seed(sol.alpha, nslots, 0));
    x.push_back(G::seed(sol.gamma_sq, nslots, 1));
    for (int j = 1; j <= dprime - 1; ++j) {
        T mj = (sol.symmetric && j % 2) ? T(0)
                                        : detail::moment_from_v(j, sol.alpha, sol.gamma_sq, sol.v);
        x.push_back(G::seed(mj, nslots, 1 + static_cast<size_t>(j)));
    }
    std::vector<G> res = sys.residual(x);
    std::vector<std::vector<T>> J(nunk, std::vector<T>(nunk, T(0)));
    std::vector<T> rhs(nunk, T(0));
    for (size_t r = 0; r < nunk; ++r) {
        for (size_t c = 0; c < nunk; ++c) J[r][c] = res[r].grad[c];
        rhs[r] = -res[r].grad[nunk];
    }
    std::vector<T> dx = solve_linear(J, rhs);

    // moment response: explicit epsilon dependence plus the solution shift
    std::map<int, G> tilde;
    for (int m = 1; m <= dprime; ++m) tilde[m] = G(T(0), nslots);
    tilde[2] = view.gaussian;
    for (const auto& [i, c] : view.single) tilde[i] = tilde[i] + c;
    {
        auto moment = [&](int j) -> G { return x[1 + static_cast<size_t>(j)]; };
        for (const auto& [ij, c] : view.bi) {
            auto [i, j] = ij;
            G w = c / scalar_from_int<G>(i + j);
            tilde[i] = tilde[i] + scalar_from_int<G>(2 * i) * w * moment(j);
            if (i != j) tilde[j] = tilde[j] + scalar_from_int<G>(2 * j) * w * moment(i);
        }
    }
    std::vector<G> v = detail::v_coefficients(tilde, x[0], x[1], dprime);
    G Tl = detail::moment_from_v(l1, x[0], x[1], v);
    T total = Tl.grad[nunk];
    for (size_t i = 0; i < nunk; ++i) total = total + Tl.grad[i] * dx[i];
    return scalar_from_int<T>(-l2) * total;
}

// Correlator table for SDE certification: genus-0 single moments, genus-0
// two-boundary moments, and (when gmax >= 1) genus-1 moments from the
// recursion.  `l1max` bounds the first SDE index the table must support.
CorrelatorTable<double> build_correlator_table(const SpectralSolution& sol, int gmax, int l1max);

// Free-energy coupling series for a one-parameter family at t = 1:
// dF_g/dlambda = -[ g'/2 T^g_2 + sum_i (c_i/i) T^g_i + bi-trace terms ].
QSeries free_energy_series(const CouplingFamily& fam, int genus, size_t order);

}  // namespace diracens
