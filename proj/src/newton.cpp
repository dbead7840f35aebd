#include "diracens/newton.hpp"

#include <algorithm>
#include <cmath>

#include "diracens/poly.hpp"

namespace diracens {

namespace {

double inf_norm(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace

NewtonResult newton_system(const VecFn& F, std::vector<double> x0, const NewtonOptions& opt, bool nothrow) {
    NewtonResult res;
    res.x = std::move(x0);
    const size_t n = res.x.size();
    std::vector<double> f = F(res.x);
    if (f.size() != n) throw std::invalid_argument("newton_system: residual dimension mismatch");
    res.residual_norm = inf_norm(f);

    for (int it = 0; it < opt.max_iter; ++it) {
        if (res.residual_norm <= opt.tol) {
            res.converged = true;
            res.iterations = it;
            return res;
        }
        // Finite-difference Jacobian, column by column.
        std::vector<std::vector<double>> J(n, std::vector<double>(n, 0.0));
        for (size_t c = 0; c < n; ++c) {
            double h = opt.fd_step * std::max(1.0, std::fabs(res.x[c]));
            std::vector<double> xp = res.x;
            xp[c] += h;
            std::vector<double> fp = F(xp);
            for (size_t r = 0; r < n; ++r) J[r][c] = (fp[r] - f[r]) / h;
        }
        std::vector<double> step;
        try {
            step = solve_linear(J, f);
        } catch (const std::exception&) {
            res.message = "singular Jacobian";
            res.iterations = it;
            if (nothrow) return res;
            throw std::runtime_error("newton_system: singular Jacobian at residual " +
                                     std::to_string(res.residual_norm));
        }
        double lambda = 1.0;
        bool accepted = false;
        for (int back = 0; back < 30; ++back) {
            std::vector<double> xn = res.x;
            for (size_t i = 0; i < n; ++i) xn[i] -= lambda * step[i];
            std::vector<double> fn = F(xn);
            double norm_n = inf_norm(fn);
            if (!opt.line_search || norm_n < res.residual_norm || norm_n <= opt.tol) {
                res.x = std::move(xn);
                f = std::move(fn);
                res.residual_norm = norm_n;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            res.message = "line search stalled";
            res.iterations = it;
            if (nothrow) return res;
            throw std::runtime_error("newton_system: stalled at residual " + std::to_string(res.residual_norm));
        }
    }
    res.iterations = opt.max_iter;
    if (res.residual_norm <= opt.tol) {
        res.converged = true;
        return res;
    }
    res.message = "max_iter exceeded";
    if (nothrow) return res;
    throw std::runtime_error("newton_system: max_iter exceeded at residual " + std::to_string(res.residual_norm));
}

namespace {

// Polished root in [lo, hi] where p is monotone and changes sign.
double polish_root(const Poly<double>& p, const Poly<double>& dp, double lo, double hi,
                   double flo, const RootFindOptions& opt) {
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < opt.max_iter; ++it) {
        double fx = p.eval(x);
        if (fx == 0.0) return x;
        if ((fx < 0) == (flo < 0)) lo = x; else hi = x;
        double d = dp.eval(x);
        double xn = d != 0.0 ? x - fx / d : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::fabs(xn - x) <= opt.tol * std::max(1.0, std::fabs(xn))) return xn;
        x = xn;
    }
    return x;
}

std::vector<double> roots_rec(const Poly<double>& p, double lo, double hi, const RootFindOptions& opt) {
    if (p.degree() <= 0) return {};
    if (p.degree() == 1) {
        double r = -p.coeff(0) / p.coeff(1);
        if (r >= lo && r <= hi) return {r};
        return {};
    }
    Poly<double> dp = p.derivative();
    std::vector<double> crit = roots_rec(dp, lo, hi, opt);
    std::vector<double> knots{lo};
    for (double c : crit)
        if (c > knots.back() + opt.tol) knots.push_back(c);
    if (hi > knots.back()) knots.push_back(hi);

    std::vector<double> roots;
    double scale = 1.0 + p.max_abs_coeff();
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
        double a = knots[i], b = knots[i + 1];
        double fa = p.eval(a), fb = p.eval(b);
        if (std::fabs(fa) <= opt.tol * scale) {
            if (roots.empty() || a > roots.back() + 1e3 * opt.tol) roots.push_back(a);
            if (fa == 0.0) continue;
        }
        if ((fa < 0) != (fb < 0)) {
            double r = polish_root(p, dp, a, b, fa, opt);
            if (roots.empty() || r > roots.back() + 1e3 * opt.tol) roots.push_back(r);
        }
    }
    double fend = p.eval(hi);
    if (std::fabs(fend) <= opt.tol * scale && (roots.empty() || hi > roots.back() + 1e3 * opt.tol))
        roots.push_back(hi);
    return roots;
}

}  // namespace

std::vector<double> poly_real_roots(const Poly<double>& p, double lo, double hi, const RootFindOptions& opt) {
    if (!(opt.tol > 0)) throw std::invalid_argument("poly_real_roots: tol must be positive");
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("poly_real_roots: interval must be finite and nonempty");
    std::vector<double> r = roots_rec(p, lo, hi, opt);
    std::sort(r.begin(), r.end());
    return r;
}

}  // namespace diracens
