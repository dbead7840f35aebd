#pragma once

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "diracens/dual.hpp"
#include "diracens/laurent.hpp"
#include "diracens/loop.hpp"
#include "diracens/newton.hpp"
#include "diracens/poly.hpp"
#include "diracens/series.hpp"

namespace diracens {

// x(z) = alpha + gamma (z + 1/z); cut = [alpha - 2 gamma, alpha + 2 gamma].
struct ZhukovskyMap {
    double alpha = 0;
    double gamma = 1;

    double a() const { return alpha + 2 * gamma; }
    double b() const { return alpha - 2 * gamma; }

    template <class C>
    C forward(const C& z) const {
        return C(alpha) + C(gamma) * (z + C(1) / z);
    }
    // Branch with |z| >= 1; x strictly inside the cut maps to the unit
    // circle and is reported through the `on_cut` flag.
    std::complex<double> inverse(std::complex<double> x, bool* on_cut = nullptr) const;
};

namespace detail {

inline long binom_long(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    long acc = 1;
    for (int i = 0; i < k; ++i) acc = acc * (n - i) / (i + 1);
    return acc;
}

// v_k(alpha, c): S'(x(z)) = sum_k u_k (z^k + z^-k) with u_k = gamma^k v_k and
// c = gamma^2.  Polynomial in (alpha, c), so valid in every mode including
// formal-in-t where gamma itself is not a series.
template <class F>
std::vector<F> v_coefficients(const std::map<int, F>& tilde, const F& alpha, const F& c, int degree) {
    std::vector<F> v(degree, F(0));
    for (const auto& [m, tm] : tilde) {
        for (int k = 0; k <= m - 1; ++k) {
            F acc(0);
            bool any = false;
            for (int j = k; j <= m - 1; j += 2) {
                long w = binom_long(m - 1, j) * binom_long(j, (j - k) / 2);
                if (w == 0) continue;
                F term = scalar_from_int<F>(w);
                for (int e = 0; e < m - 1 - j; ++e) term = term * alpha;
                for (int e = 0; e < (j - k) / 2; ++e) term = term * c;
                acc = acc + term;
                any = true;
            }
            if (any) v[k] = v[k] + tm * acc;
        }
    }
    return v;
}

// T^0_l as a polynomial in (alpha, c, v): the z^-1 coefficient of
// x(z)^l W(x(z)) x'(z) with W = sum u_k z^-k.
template <class F>
F moment_from_v(int l, const F& alpha, const F& c, const std::vector<F>& v) {
    F total(0);
    for (int r = 0; r <= l; ++r) {
        for (int k = 0; k < static_cast<int>(v.size()); ++k) {
            if ((r - k) % 2 == 0) continue;
            long w = binom_long(r, (r - k + 1) / 2) - binom_long(r, (r - k - 1) / 2);
            if (w == 0) continue;
            F term = scalar_from_int<F>(binom_long(l, r) * w) * v[k];
            for (int e = 0; e < l - r; ++e) term = term * alpha;
            for (int e = 0; e < (r + k + 1) / 2; ++e) term = term * c;
            total = total + term;
        }
    }
    return total;
}

// sum_{i<k, i = k-1 mod 2} i^2; M'(a) = sum_k sigma2(k) gamma^{k-2} v_k.
inline long sigma2(int k) {
    long s = 0;
    for (int i = k - 1; i >= 0; i -= 2) s += long(i) * i;
    return s;
}

}  // namespace detail

// One-cut genus-0 data.  T is double for numeric solutions and
// Series<Rational> for formal one-parameter families.
template <class T>
struct SpectralSolutionT {
    BitracialPotential potential;
    detail::PotentialView<T> view;  // couplings in the working field (series mode differs from `potential`)
    T hooft;
    T alpha;
    T gamma_sq;
    T gamma;                  // sqrt(gamma_sq); see solve notes for formal-in-t
    std::vector<T> v;         // u_k = gamma^k v_k
    std::vector<T> u;
    std::map<int, T> tilde;   // effective derivative couplings
    std::map<int, T> moments0;
    bool symmetric = false;

    T a() const { return alpha + scalar_from_int<T>(2) * gamma; }
    T b() const { return alpha - scalar_from_int<T>(2) * gamma; }
};

using SpectralSolution = SpectralSolutionT<double>;
using SpectralSolutionSeries = SpectralSolutionT<QSeries>;

// Formal-in-t genus-0 data: gamma^2 = t + O(t^2) is a series but gamma is
// not, so only (alpha, c, v, moments) are exposed.
struct FormalTSolution {
    BitracialPotential potential;
    QSeries alpha;
    QSeries gamma_sq;
    std::vector<QSeries> v;
    std::map<int, QSeries> moments0;
};

struct SolveError : std::runtime_error {
    SolveError(const std::string& msg, double last_good)
        : std::runtime_error(msg), last_good_fraction(last_good) {}
    double last_good_fraction;  // fraction of the coupling path that solved
};

struct SolveOptions {
    double tol = 1e-12;
    int max_newton = 80;
    double initial_step = 0.5;
    double min_step = 1e-7;
    int moments_to = 0;  // extra moments beyond the self-consistency set
};

// Numeric one-cut solve: continuation from the Gaussian point in the scaled
// couplings, Newton-corrected; selects the Brown-lemma branch.
SpectralSolution solve_one_cut(const BitracialPotential& p, const SolveOptions& opt = {});

// Assemble a solution directly from known (alpha, gamma^2) branch data plus
// the moments entering the bi-trace folding (ignored for single-trace
// potentials).  Verifies the one-cut residual; usable at fold points where
// the Newton continuation degenerates.
SpectralSolution assemble_from_point(const BitracialPotential& p, double alpha, double gamma_sq,
                                     const std::map<int, double>& folding_moments = {},
                                     double residual_tol = 1e-8);

// Same, reusing a previous nearby solution as the starting point (no
// continuation walk).  Used by grid sweeps and augmented systems.
SpectralSolution solve_one_cut_warm(const BitracialPotential& p, const SpectralSolution& guess,
                                    const SolveOptions& opt = {});

// One-parameter coupling family p(lambda) = base + lambda * direction.
struct CouplingFamily {
    BitracialPotential base;       // must solve to the Gaussian branch at lambda = 0
    BitracialPotential direction;  // coupling increments (hooft_t ignored)

    BitracialPotential at(const Rational& lambda) const;
    BitracialPotential at(double lambda) const;
};

// Exact order-by-order solve in the family parameter at the Gaussian-regular
// point lambda = 0.
SpectralSolutionSeries solve_one_cut_family(const CouplingFamily& fam, size_t order);

// Exact order-by-order solve in the 't Hooft parameter t at fixed couplings
// (Brown's lemma branch: alpha = O(t), gamma^2 = t + O(t^2)).
FormalTSolution solve_one_cut_formal_t(const BitracialPotential& p, size_t order);

template <class T>
T moment_from_solution(const SpectralSolutionT<T>& sol, int l) {
    return detail::moment_from_v(l, sol.alpha, sol.gamma_sq, sol.v);
}

// T^0_l for l = 0..l_max.
template <class T>
std::map<int, T> moments_from_solution(const SpectralSolutionT<T>& sol, int l_max) {
    std::map<int, T> out;
    for (int l = 0; l <= l_max; ++l) out[l] = moment_from_solution(sol, l);
    return out;
}

// Edge factor values: M(a), M(b), M'(a).
template <class T>
T edge_M_at_a(const SpectralSolutionT<T>& sol) {
    T s(0);
    for (int k = 1; k < static_cast<int>(sol.u.size()); ++k)
        s = s + scalar_from_int<T>(k) * sol.u[k];
    return s / sol.gamma;
}
template <class T>
T edge_M_at_b(const SpectralSolutionT<T>& sol) {
    T s(0);
    for (int k = 1; k < static_cast<int>(sol.u.size()); ++k)
        s = s + scalar_from_int<T>(k % 2 ? k : -k) * sol.u[k];
    return s / sol.gamma;
}
template <class T>
T edge_Mprime_at_a(const SpectralSolutionT<T>& sol) {
    T s(0);
    for (int k = 1; k < static_cast<int>(sol.u.size()); ++k)
        s = s + scalar_from_int<T>(detail::sigma2(k)) * sol.u[k];
    return s / (sol.gamma * sol.gamma);
}

// Edge polynomial M(x) of the discriminant factorization
// S'(x)^2 - 4 P^0_1(x) = M(x)^2 (x-a)(x-b), via the Chebyshev-type basis
// p_j = z^j + z^-j.
template <class T>
Poly<T> edge_poly(const SpectralSolutionT<T>& sol) {
    const int d = static_cast<int>(sol.u.size());
    std::vector<Poly<T>> p(std::max(2, d));
    p[0] = Poly<T>::constant(scalar_from_int<T>(2));
    Poly<T> xa = Poly<T>(std::vector<T>{-sol.alpha / sol.gamma, T(1) / sol.gamma});
    p[1] = xa;
    for (int j = 2; j < static_cast<int>(p.size()); ++j) p[j] = xa * p[j - 1] - p[j - 2];
    Poly<T> M;
    for (int k = 1; k < d; ++k) {
        if (sol.u[k] == T(0)) continue;
        Poly<T> Sk;
        for (int i = k - 1; i >= 0; i -= 2)
            Sk = Sk + (i == 0 ? Poly<T>::constant(T(1)) : p[i]);
        M = M + (sol.u[k] / sol.gamma) * Sk;
    }
    return M;
}

// P^0_1(x): polynomial part of S'(x) W(x).
template <class T>
Poly<T> p01_poly(const SpectralSolutionT<T>& sol) {
    Poly<T> P;
    std::map<int, T> mom = sol.moments0;
    for (const auto& [m, tm] : sol.tilde) {
        for (int j = 0; j <= m - 2; ++j) {
            auto it = mom.find(j);
            T Tj = (j == 0) ? sol.hooft : (it != mom.end() ? it->second : moment_from_solution(sol, j));
            P = P + Poly<T>::monomial(tm * Tj, m - 2 - j);
        }
    }
    return P;
}

// S'_eff(x) from the solution's tilde couplings.
template <class T>
Poly<T> effective_derivative_poly(const SpectralSolutionT<T>& sol) {
    Poly<T> S;
    for (const auto& [m, tm] : sol.tilde) S = S + Poly<T>::monomial(tm, m - 1);
    return S;
}

// Limiting eigenvalue density rho(x) = M(x) sqrt((a-x)(x-b)) / (2 pi t).
struct Density {
    Poly<double> factor_poly;  // M(x)
    double a = 0, b = 0;       // support [b, a]
    double hooft = 1;

    double operator()(double x) const;
    // integral of x^l rho(x) over the support (Chebyshev-substituted Gauss-Legendre)
    double moment(int l, int quad_points = 96) const;
    double cdf(double x, int quad_points = 256) const;
};

Density density(const SpectralSolution& sol);

// W^0_1 at a point outside the cut, evaluated in the z-form W = sum u_k z^-k.
std::complex<double> resolvent(const SpectralSolution& sol, std::complex<double> x);
double resolvent(const SpectralSolution& sol, double x);

// W^0_1(x(z)) as a Laurent polynomial in z.
LaurentPoly<double> resolvent_z(const SpectralSolution& sol);

// ---- generic field-valued Newton (shared by numeric and formal modes) ----

inline bool residual_small(double v, double tol) { return std::fabs(v) <= tol; }
inline bool residual_small(const QSeries& v, double) { return v.is_zero(); }

template <class F>
using FieldResidual = std::function<std::vector<Dual<F>>(const std::vector<Dual<F>>&)>;

template <class F>
std::vector<F> newton_field(const FieldResidual<F>& R, std::vector<F> x, double tol, int max_iter,
                            bool* converged = nullptr) {
    const size_t n = x.size();
    bool ok = false;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<Dual<F>> xd;
        xd.reserve(n);
        for (size_t i = 0; i < n; ++i) xd.push_back(Dual<F>::seed(x[i], n, i));
        std::vector<Dual<F>> f = R(xd);
        bool small = true;
        for (const auto& fi : f) small = small && residual_small(fi.val, tol);
        if (small) { ok = true; break; }
        std::vector<std::vector<F>> J(n, std::vector<F>(n, F(0)));
        std::vector<F> rhs(n, F(0));
        for (size_t r = 0; r < n; ++r) {
            rhs[r] = f[r].val;
            for (size_t c = 0; c < n; ++c) J[r][c] = f[r].grad[c];
        }
        std::vector<F> step = solve_linear(J, rhs);
        for (size_t i = 0; i < n; ++i) x[i] = x[i] - step[i];
    }
    if (converged) *converged = ok;
    else if (!ok) throw std::runtime_error("newton_field: no convergence");
    return x;
}

namespace detail {

// Unknown layout and residual of the one-cut self-consistency system over a
// generic scalar field.  Symmetric (even) potentials pin alpha = 0 and odd
// moments to 0.
template <class F>
struct OneCutSystem {
    PotentialView<F> pot;
    bool symmetric;
    std::vector<int> moment_idx;  // moment labels carried as unknowns

    explicit OneCutSystem(const PotentialView<F>& p, bool force_full = false)
        : pot(p) {
        symmetric = !force_full && even_view();
        for (int j = 1; j <= pot.degree - 1; ++j)
            if (!symmetric || j % 2 == 0) moment_idx.push_back(j);
    }
    bool even_view() const {
        for (const auto& [i, c] : pot.single)
            if (i % 2) return false;
        for (const auto& [ij, c] : pot.bi)
            if ((ij.first + ij.second) % 2) return false;
        return true;
    }
    size_t unknowns() const { return (symmetric ? 1 : 2) + moment_idx.size(); }

    // x = [alpha?, c, m...]
    template <class G>
    std::vector<G> residual(const std::vector<G>& x) const {
        size_t at = 0;
        G alpha = symmetric ? G(F(0)) : x[at++];
        G c = x[at++];
        std::map<int, G> mom;
        for (size_t i = 0; i < moment_idx.size(); ++i) mom[moment_idx[i]] = x[at + i];
        auto moment = [&](int j) -> G {
            if (symmetric && j % 2) return G(F(0));
            auto it = mom.find(j);
            if (it == mom.end()) throw std::logic_error("one-cut system: moment index out of range");
            return it->second;
        };
        std::map<int, G> tilde;
        {
            // lift couplings into G
            for (int m = 1; m <= pot.degree; ++m) tilde[m] = G(F(0));
            tilde[2] = G(pot.gaussian);
            for (const auto& [i, cc] : pot.single) tilde[i] = tilde[i] + G(cc);
            for (const auto& [ij, cc] : pot.bi) {
                auto [i, j] = ij;
                G w = G(cc) / G(scalar_from_int<F>(i + j));
                tilde[i] = tilde[i] + G(scalar_from_int<F>(2 * i)) * w * moment(j);
                if (i != j) tilde[j] = tilde[j] + G(scalar_from_int<F>(2 * j)) * w * moment(i);
            }
        }
        std::vector<G> v = v_coefficients(tilde, alpha, c, pot.degree);
        std::vector<G> res;
        if (!symmetric) res.push_back(v[0]);
        res.push_back(c * v[1] - G(pot.hooft));
        for (int j : moment_idx) res.push_back(mom[j] - moment_from_v(j, alpha, c, v));
        return res;
    }

    std::vector<F> gaussian_start() const {
        // exact Gaussian-branch values at zero non-Gaussian couplings
        std::vector<F> x;
        F c0 = pot.hooft / pot.gaussian;
        if (!symmetric) x.push_back(F(0));
        x.push_back(c0);
        for (int j : moment_idx) {
            if (j % 2) {
                x.push_back(F(0));
            } else {
                long cat = 1;  // Catalan number C_{j/2}
                for (int i = 0; i < j / 2; ++i) cat = cat * 2 * (2 * i + 1) / (i + 2);
                F m = scalar_from_int<F>(cat) * pot.hooft;
                for (int e = 0; e < j / 2; ++e) m = m * c0;
                x.push_back(m);
            }
        }
        return x;
    }
};

inline double sqrt_field(double v) {
    if (v <= 0) throw std::domain_error("one-cut solution with nonpositive gamma^2");
    return std::sqrt(v);
}
inline QSeries sqrt_field(const QSeries& v) { return sqrt(v); }

template <class T>
SpectralSolutionT<T> assemble_solution(const BitracialPotential& p, const PotentialView<T>& view,
                                       const OneCutSystem<T>& sys, const std::vector<T>& x, int extra_moments) {
    SpectralSolutionT<T> sol;
    sol.potential = p;
    sol.view = view;
    sol.hooft = view.hooft;
    sol.symmetric = sys.symmetric;
    size_t at = 0;
    sol.alpha = sys.symmetric ? T(0) : x[at++];
    sol.gamma_sq = x[at++];
    sol.gamma = sqrt_field(sol.gamma_sq);
    std::map<int, T> mom;
    for (size_t i = 0; i < sys.moment_idx.size(); ++i) mom[sys.moment_idx[i]] = x[at + i];
    auto moment = [&](int j) -> T {
        if (sys.symmetric && j % 2) return T(0);
        return mom.at(j);
    };
    sol.tilde = tilde_couplings(view, moment);
    sol.v = v_coefficients(sol.tilde, sol.alpha, sol.gamma_sq, view.degree);
    sol.u.assign(sol.v.size(), T(0));
    T gp = T(1);
    for (size_t k = 0; k < sol.v.size(); ++k) {
        sol.u[k] = gp * sol.v[k];
        gp = gp * sol.gamma;
    }
    int mmax = std::max(view.degree - 1, extra_moments);
    for (int l = 0; l <= mmax; ++l) sol.moments0[l] = detail::moment_from_v(l, sol.alpha, sol.gamma_sq, sol.v);
    return sol;
}

}  // namespace detail

}  // namespace diracens
