#include "diracens/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace diracens {

std::complex<double> ZhukovskyMap::inverse(std::complex<double> x, bool* on_cut) const {
    std::complex<double> w = x - alpha;
    std::complex<double> disc = std::sqrt(w * w - 4.0 * gamma * gamma);
    std::complex<double> z1 = (w + disc) / (2.0 * gamma);
    std::complex<double> z2 = (w - disc) / (2.0 * gamma);
    std::complex<double> z = std::abs(z1) >= std::abs(z2) ? z1 : z2;
    if (on_cut) *on_cut = std::abs(std::abs(z) - 1.0) < 1e-12;
    return z;
}

BitracialPotential CouplingFamily::at(const Rational& lambda) const {
    BitracialPotential p = base;
    p.gaussian_coeff += lambda * direction.gaussian_coeff;
    for (const auto& [i, c] : direction.single_trace) p.add_single(i, lambda * c);
    for (const auto& [ij, c] : direction.bi_trace) p.add_bi(ij.first, ij.second, lambda * c);
    return p;
}
BitracialPotential CouplingFamily::at(double lambda) const {
    // binary doubles convert to rationals exactly
    return at(Rational(lambda));
}

namespace {

using detail::OneCutSystem;
using detail::PotentialView;

// Numeric Newton with exact dual-number Jacobian and backtracking.
bool newton_numeric(const OneCutSystem<double>& sys, std::vector<double>& x, double tol, int max_iter) {
    const size_t n = x.size();
    auto norm_of = [&](const std::vector<double>& v) {
        double m = 0;
        for (double y : v) m = std::max(m, std::fabs(y));
        return m;
    };
    auto eval_plain = [&](const std::vector<double>& xv) { return sys.residual(xv); };
    double fnorm = norm_of(eval_plain(x));
    for (int it = 0; it < max_iter; ++it) {
        if (fnorm <= tol) return true;
        std::vector<Dual<double>> xd;
        xd.reserve(n);
        for (size_t i = 0; i < n; ++i) xd.push_back(Dual<double>::seed(x[i], n, i));
        std::vector<Dual<double>> f = sys.residual(xd);
        std::vector<std::vector<double>> J(n, std::vector<double>(n));
        std::vector<double> rhs(n);
        for (size_t r = 0; r < n; ++r) {
            rhs[r] = f[r].val;
            for (size_t c = 0; c < n; ++c) J[r][c] = f[r].grad[c];
        }
        std::vector<double> step;
        try {
            step = solve_linear(J, rhs);
        } catch (const std::exception&) {
            return false;
        }
        double lam = 1.0;
        bool ok = false;
        for (int back = 0; back < 40; ++back) {
            std::vector<double> xn(n);
            for (size_t i = 0; i < n; ++i) xn[i] = x[i] - lam * step[i];
            if (xn[sys.symmetric ? 0 : 1] > 0) {  // gamma^2 must stay positive
                double fn = norm_of(eval_plain(xn));
                if (fn < fnorm || fn <= tol) {
                    x = std::move(xn);
                    fnorm = fn;
                    ok = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if (!ok) return fnorm <= tol;
    }
    return fnorm <= tol;
}

// Continuation path from the unit Gaussian: when the target Gaussian weight
// is positive, first morph the Gaussian sector alone (always solvable), then
// ramp the non-Gaussian couplings at fixed weight; otherwise interpolate
// everything linearly.
PotentialView<double> view_at(const BitracialPotential& target, double s) {
    BitracialPotential p;
    p.hooft_t = target.hooft_t;
    double sg = s, sc = s;
    if (target.gaussian_coeff > 0) {
        sg = std::min(1.0, 2.0 * s);
        sc = std::max(0.0, 2.0 * s - 1.0);
    }
    p.gaussian_coeff = Rational(1) + Rational(sg) * (target.gaussian_coeff - 1);
    for (const auto& [i, c] : target.single_trace) p.single_trace[i] = Rational(sc) * c;
    for (const auto& [ij, c] : target.bi_trace) p.bi_trace[ij] = Rational(sc) * c;
    return PotentialView<double>::from(p);
}

}  // namespace

SpectralSolution solve_one_cut(const BitracialPotential& p, const SolveOptions& opt) {
    auto target_view = PotentialView<double>::from(p);
    OneCutSystem<double> sys(target_view);
    // the unknown layout is shared along the whole path
    OneCutSystem<double> sys0(view_at(p, 0.0));
    sys0.symmetric = sys.symmetric;
    sys0.moment_idx = sys.moment_idx;
    std::vector<double> x = sys0.gaussian_start();

    double s = 0.0, step = opt.initial_step;
    double s_good = 0.0;
    const size_t c_idx = sys.symmetric ? 0 : 1;
    while (s < 1.0) {
        double s_try = std::min(1.0, s + step);
        OneCutSystem<double> sys_s(view_at(p, s_try));
        sys_s.symmetric = sys.symmetric;
        sys_s.moment_idx = sys.moment_idx;
        std::vector<double> x_try = x;
        bool ok = newton_numeric(sys_s, x_try, opt.tol, opt.max_newton);
        // trust region on gamma^2 catches branch jumps across folds
        ok = ok && std::fabs(x_try[c_idx] - x[c_idx]) <= 0.5 * std::max(0.2, std::fabs(x[c_idx]));
        if (ok) {
            x = x_try;
            s = s_try;
            s_good = s;
            step = std::min(opt.initial_step, step * 1.7);
        } else {
            step *= 0.5;
            if (step < opt.min_step)
                throw SolveError("one-cut continuation failed (fold or no real branch); last good coupling fraction " +
                                     std::to_string(s_good),
                                 s_good);
        }
    }
    return detail::assemble_solution(p, target_view, sys, x, opt.moments_to);
}

SpectralSolution assemble_from_point(const BitracialPotential& p, double alpha, double gamma_sq,
                                     const std::map<int, double>& folding_moments, double residual_tol) {
    auto view = PotentialView<double>::from(p);
    OneCutSystem<double> sys(view);
    std::vector<double> x;
    if (!sys.symmetric) x.push_back(alpha);
    x.push_back(gamma_sq);
    const size_t mom_at = x.size();
    for (int j : sys.moment_idx) {
        auto it = folding_moments.find(j);
        x.push_back(it != folding_moments.end() ? it->second : 0.0);
    }
    // settle the moment slots at fixed (alpha, gamma^2); exact in one pass for
    // single-trace potentials, a no-op when consistent values were supplied
    for (int pass = 0; pass < 4; ++pass) {
        std::vector<double> res = sys.residual(x);
        size_t base = sys.symmetric ? 1 : 2;
        for (size_t i = 0; i < sys.moment_idx.size(); ++i) x[mom_at + i] -= res[base + i];
    }
    std::vector<double> res = sys.residual(x);
    double norm = 0;
    for (double r : res) norm = std::max(norm, std::fabs(r));
    if (norm > residual_tol)
        throw SolveError("assemble_from_point: supplied data violates the one-cut system (residual " +
                             std::to_string(norm) + ")",
                         0.0);
    return detail::assemble_solution(p, view, sys, x, 0);
}

SpectralSolution solve_one_cut_warm(const BitracialPotential& p, const SpectralSolution& guess,
                                    const SolveOptions& opt) {
    auto view = PotentialView<double>::from(p);
    OneCutSystem<double> sys(view);
    std::vector<double> x;
    if (!sys.symmetric) x.push_back(guess.alpha);
    x.push_back(guess.gamma_sq);
    for (int j : sys.moment_idx) {
        auto it = guess.moments0.find(j);
        x.push_back(it != guess.moments0.end() ? it->second : 0.0);
    }
    if (!newton_numeric(sys, x, opt.tol, opt.max_newton))
        throw SolveError("warm-start one-cut solve did not converge", 0.0);
    return detail::assemble_solution(p, view, sys, x, opt.moments_to);
}

SpectralSolutionSeries solve_one_cut_family(const CouplingFamily& fam, size_t order) {
    PotentialView<QSeries> view;
    auto lin = [&](const Rational& b, const Rational& d) {
        QSeries s(order, 'g');
        s.set(0, b);
        if (order >= 1) s.set(1, d);
        return s;
    };
    view.gaussian = lin(fam.base.gaussian_coeff, fam.direction.gaussian_coeff);
    view.hooft = QSeries::constant(fam.base.hooft_t, order, 'g');
    std::map<int, std::pair<Rational, Rational>> sing, bi_flat;
    for (const auto& [i, c] : fam.base.single_trace) sing[i].first = c;
    for (const auto& [i, c] : fam.direction.single_trace) sing[i].second = c;
    for (const auto& [i, bd] : sing)
        if (bd.first != 0 || bd.second != 0) view.single[i] = lin(bd.first, bd.second);
    std::map<std::pair<int, int>, std::pair<Rational, Rational>> bis;
    for (const auto& [ij, c] : fam.base.bi_trace) bis[ij].first = c;
    for (const auto& [ij, c] : fam.direction.bi_trace) bis[ij].second = c;
    for (const auto& [ij, bd] : bis)
        if (bd.first != 0 || bd.second != 0) view.bi[ij] = lin(bd.first, bd.second);
    view.degree = std::max(fam.base.degree(), fam.direction.degree());

    OneCutSystem<QSeries> sys(view);
    std::vector<QSeries> x = sys.gaussian_start();
    // order-0 values are exact; pad to full series order
    for (auto& xi : x) xi = xi.scalar_like() ? QSeries::constant(xi[0], order, 'g') : xi.truncated(order);

    auto residual = [&](const std::vector<Dual<QSeries>>& xd) { return sys.residual(xd); };
    bool conv = false;
    x = newton_field<QSeries>(residual, x, 0.0, static_cast<int>(order) + 8, &conv);
    if (!conv) throw std::runtime_error("solve_one_cut_family: series Newton did not close");
    return detail::assemble_solution(fam.base, view, sys, x, 0);
}

FormalTSolution solve_one_cut_formal_t(const BitracialPotential& p, size_t order) {
    const int d = p.degree();
    PotentialView<QSeries> view = PotentialView<QSeries>::from(p);
    QSeries tvar(order, 't');
    if (order >= 1) tvar.set(1, Rational(1));
    view.hooft = tvar;

    QSeries alpha = QSeries(order, 't');
    QSeries c = tvar;
    std::map<int, QSeries> mom;
    for (int j = 1; j <= d - 1; ++j) mom[j] = QSeries(order, 't');
    auto moment = [&](int j) -> QSeries { return mom.at(j); };

    const bool even = p.is_even();
    for (size_t sweep = 0; sweep < order + 6; ++sweep) {
        auto tilde = detail::tilde_couplings(view, moment);
        auto v = detail::v_coefficients(tilde, alpha, c, d);
        for (int j = 1; j <= d - 1; ++j) mom[j] = detail::moment_from_v(j, alpha, c, v);
        tilde = detail::tilde_couplings(view, moment);
        v = detail::v_coefficients(tilde, alpha, c, d);
        if (!even) {
            alpha = alpha - v[0] / tilde[2];
            v = detail::v_coefficients(tilde, alpha, c, d);
        }
        c = tvar / v[1];
    }
    // fixed-point certificate
    auto tilde = detail::tilde_couplings(view, moment);
    auto v = detail::v_coefficients(tilde, alpha, c, d);
    if (!(c * v[1] - tvar).is_zero() || !v[0].is_zero())
        throw std::runtime_error("solve_one_cut_formal_t: sweeps did not reach a fixed point");
    for (int j = 1; j <= d - 1; ++j)
        if (!(mom[j] - detail::moment_from_v(j, alpha, c, v)).is_zero())
            throw std::runtime_error("solve_one_cut_formal_t: moment self-consistency failed");

    FormalTSolution sol;
    sol.potential = p;
    sol.alpha = alpha;
    sol.gamma_sq = c;
    sol.v = v;
    for (int l = 0; l <= std::max(2 * (int)order, d - 1); ++l)
        sol.moments0[l] = detail::moment_from_v(l, alpha, c, v);
    return sol;
}

double Density::operator()(double x) const {
    if (x <= b || x >= a) return 0.0;
    return factor_poly.eval(x) * std::sqrt((a - x) * (x - b)) / (2.0 * M_PI * hooft);
}

double Density::moment(int l, int n) const {
    // x = mid + h s, s in [-1,1]: integral = h^2/(2 pi t) * int f(x) sqrt(1-s^2) ds
    const double mid = 0.5 * (a + b), h = 0.5 * (a - b);
    double acc = 0;
    for (int k = 1; k <= n; ++k) {
        double th = M_PI * k / (n + 1.0);
        double s = std::cos(th);
        double w = M_PI / (n + 1.0) * std::sin(th) * std::sin(th);
        double x = mid + h * s;
        acc += w * std::pow(x, l) * factor_poly.eval(x);
    }
    return acc * h * h / (2.0 * M_PI * hooft);
}

double Density::cdf(double x, int n) const {
    if (x <= b) return 0.0;
    if (x >= a) return cdf(a - 1e-300, n) ;
    const double mid = 0.5 * (a + b), h = 0.5 * (a - b);
    // theta substitution x = mid + h cos(theta): smooth integrand M h^2 sin^2 / (2 pi t)
    double th_x = std::acos(std::clamp((x - mid) / h, -1.0, 1.0));
    double lo = th_x, hi = M_PI;
    int m = n + (n % 2);  // Simpson needs even interval count
    double acc = 0, dt = (hi - lo) / m;
    for (int k = 0; k <= m; ++k) {
        double th = lo + k * dt;
        double f = factor_poly.eval(mid + h * std::cos(th)) * std::sin(th) * std::sin(th);
        double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        acc += w * f;
    }
    return acc * dt / 3.0 * h * h / (2.0 * M_PI * hooft);
}

Density density(const SpectralSolution& sol) {
    Density d;
    d.factor_poly = edge_poly(sol);
    d.a = sol.a();
    d.b = sol.b();
    d.hooft = sol.hooft;
    return d;
}

std::complex<double> resolvent(const SpectralSolution& sol, std::complex<double> x) {
    ZhukovskyMap map{sol.alpha, sol.gamma};
    std::complex<double> z = map.inverse(x);
    std::complex<double> w(0.0);
    std::complex<double> zi = 1.0 / z;
    std::complex<double> zp(1.0);
    for (size_t k = 0; k < sol.u.size(); ++k) {
        if (k > 0) zp *= zi;
        w += sol.u[k] * zp;
    }
    return w;
}

double resolvent(const SpectralSolution& sol, double x) {
    if (x > sol.b() && x < sol.a())
        throw std::domain_error("resolvent: x inside the cut; use the density instead");
    return resolvent(sol, std::complex<double>(x, 0.0)).real();
}

LaurentPoly<double> resolvent_z(const SpectralSolution& sol) {
    LaurentPoly<double> w;
    for (size_t k = 1; k < sol.u.size(); ++k) w.add_term(-static_cast<int>(k), sol.u[k]);
    return w;
}

}  // namespace diracens
