#include "diracens/criticality.hpp"

#include <algorithm>
#include <cmath>

namespace diracens {

namespace {

using detail::v_coefficients;
using D = Dual<double>;

// Generic augmented Newton over Dual<double> residuals.
using DualFn = std::function<std::vector<D>(const std::vector<D>&)>;

std::vector<double> newton_dual(const DualFn& F, std::vector<double> x, double tol = 1e-13,
                                int max_iter = 80) {
    const size_t n = x.size();
    for (int it = 0; it < max_iter; ++it) {
        std::vector<D> xd;
        xd.reserve(n);
        for (size_t i = 0; i < n; ++i) xd.push_back(D::seed(x[i], n, i));
        std::vector<D> f = F(xd);
        double norm = 0;
        for (const auto& fi : f) norm = std::max(norm, std::fabs(fi.val));
        if (norm <= tol) return x;
        std::vector<std::vector<double>> J(n, std::vector<double>(n));
        std::vector<double> rhs(n);
        for (size_t r = 0; r < n; ++r) {
            rhs[r] = f[r].val;
            for (size_t c = 0; c < n; ++c) J[r][c] = f[r].grad[c];
        }
        std::vector<double> step = solve_linear(J, rhs);
        for (size_t i = 0; i < n; ++i) x[i] -= step[i];
    }
    throw std::runtime_error("critical-point Newton did not converge");
}

// edge factor combinations sum_k k u_k (= gamma M(a)) and
// sum_k sigma2(k) u_k (= gamma^2 M'(a)) over duals
D edge_sum_a(const std::vector<D>& v, const D& gamma) {
    D s(0.0);
    D gp = gamma;  // gamma^k
    for (size_t k = 1; k < v.size(); ++k) {
        s = s + scalar_from_int<D>(static_cast<long>(k)) * gp * v[k];
        gp = gp * gamma;
    }
    return s;
}
D edge_sum_a_prime(const std::vector<D>& v, const D& gamma) {
    D s(0.0);
    D gp = gamma;
    for (size_t k = 1; k < v.size(); ++k) {
        s = s + scalar_from_int<D>(detail::sigma2(static_cast<int>(k))) * gp * v[k];
        gp = gp * gamma;
    }
    return s;
}

}  // namespace

CriticalPoint find_critical(const std::string& family) {
    CriticalPoint out;
    out.family = family;
    if (family == "quartic-single") {
        // unknowns (c, t4): { c v1 = 1, sum k u_k = 0 }
        auto F = [](const std::vector<D>& x) {
            D c = x[0], t4 = x[1];
            std::map<int, D> tilde{{1, D(0.0)}, {2, D(1.0)}, {3, D(0.0)}, {4, t4}};
            auto v = v_coefficients(tilde, D(0.0), c, 4);
            D gamma = sqrt(c);
            return std::vector<D>{c * v[1] - D(1.0), edge_sum_a(v, gamma)};
        };
        auto x = newton_dual(F, {1.8, -0.07});
        out.gamma_sq_c = x[0];
        out.couplings["t4"] = x[1];
        out.minimal_model = {3, 2};
    } else if (family == "hexic-single") {
        // unknowns (c, t4, t6): { c v1 = 1, M(a) = 0, M'(a) = 0 }
        auto F = [](const std::vector<D>& x) {
            D c = x[0], t4 = x[1], t6 = x[2];
            std::map<int, D> tilde{{1, D(0.0)}, {2, D(1.0)}, {3, D(0.0)}, {4, t4}, {5, D(0.0)}, {6, t6}};
            auto v = v_coefficients(tilde, D(0.0), c, 6);
            D gamma = sqrt(c);
            return std::vector<D>{c * v[1] - D(1.0), edge_sum_a(v, gamma), edge_sum_a_prime(v, gamma)};
        };
        auto x = newton_dual(F, {2.6, -0.1, 0.004});
        out.gamma_sq_c = x[0];
        out.couplings["t4"] = x[1];
        out.couplings["t6"] = x[2];
        out.minimal_model = {5, 2};
    } else if (family == "cubic-single") {
        // unknowns (alpha, c, t3): { v0 = 0, c v1 = 1, M(a) = 0 }
        auto F = [](const std::vector<D>& x) {
            D alpha = x[0], c = x[1], t3 = x[2];
            std::map<int, D> tilde{{1, D(0.0)}, {2, D(1.0)}, {3, t3}};
            auto v = v_coefficients(tilde, alpha, c, 3);
            D gamma = sqrt(c);
            return std::vector<D>{v[0], c * v[1] - D(1.0), edge_sum_a(v, gamma)};
        };
        auto x = newton_dual(F, {0.9, 1.6, -0.2});
        out.alpha_c = x[0];
        out.gamma_sq_c = x[1];
        out.couplings["t3"] = x[2];
        out.minimal_model = {3, 2};
    } else {
        throw std::invalid_argument("find_critical: unknown family " + family);
    }
    return out;
}

CriticalPoint find_critical_cubic_dirac(double t3v) {
    // Full self-consistent cubic Dirac system plus the cusp condition,
    // solved for (alpha, c, m1, m2, t2) at fixed t3.
    auto F = [t3v](const std::vector<D>& x) {
        D alpha = x[0], c = x[1], m1 = x[2], m2 = x[3], t2 = x[4];
        D t3(t3v);
        // tilde couplings of the cubic Dirac ensemble
        std::map<int, D> tilde;
        tilde[1] = t2 * m1 + t3 * m2;
        tilde[2] = t2 + D(2.0) * t3 * m1;
        tilde[3] = t3;
        auto v = v_coefficients(tilde, alpha, c, 3);
        D gamma = sqrt(c);
        std::vector<D> res;
        res.push_back(v[0]);
        res.push_back(c * v[1] - D(1.0));
        res.push_back(m1 - detail::moment_from_v(1, alpha, c, v));
        res.push_back(m2 - detail::moment_from_v(2, alpha, c, v));
        res.push_back(edge_sum_a(v, gamma));
        return res;
    };
    auto x = newton_dual(F, {0.9, 1.7, 0.3, 1.4, 1.1});
    CriticalPoint out;
    out.family = "cubic-dirac";
    out.alpha_c = x[0];
    out.gamma_sq_c = x[1];
    out.couplings["t3"] = t3v;
    out.couplings["t2"] = x[4];
    out.minimal_model = {3, 2};
    return out;
}

namespace {

// Gaussian-branch gamma^2 of the single-trace models, robust through the
// critical fold (smallest positive root of the branch polynomial).
double quartic_branch_c(double t4) {
    if (t4 == 0) return 1.0;
    return 2.0 / (1.0 + std::sqrt(1.0 + 12.0 * t4));  // root of 3 t4 c^2 + c - 1
}

double smallest_positive_root(const Poly<double>& p, double hi) {
    auto roots = poly_real_roots(p, 1e-9, hi);
    for (double r : roots)
        if (r > 1e-9) return r;
    throw std::runtime_error("branch root not found in (0, " + std::to_string(hi) + "]");
}

double hexic_branch_c(double t4, double t6) {
    // c v1 = 1: 10 t6 c^3 + 3 t4 c^2 + c - 1 = 0
    return smallest_positive_root(Poly<double>({-1.0, 1.0, 3.0 * t4, 10.0 * t6}), 40.0);
}

double cubic_branch_c(double t3) {
    // eliminating alpha from {u0 = 0, c v1 = 1}: c^2 - 8 t3^2 c^3 = 1
    if (t3 == 0) return 1.0;
    return smallest_positive_root(Poly<double>({-1.0, 0.0, 1.0, -8.0 * t3 * t3}), 40.0);
}

}  // namespace

MatchingResult matching_tuning_quartic(double t4) {
    auto st = BitracialPotential::single_trace_model({{4, Rational(t4)}});
    double c = quartic_branch_c(t4);
    double m2 = c + t4 * c * c * c;
    double t2 = 1.0 - 3.0 * t4 * m2;
    MatchingResult out;
    out.single = st;
    out.dirac = potential_to_bitracial(DiracPotential::quartic(Rational(t2), Rational(t4)));
    out.couplings = {{"t2", t2}, {"t4", t4}, {"gamma_sq", c}};
    out.shift = 0;
    return out;
}

MatchingResult matching_tuning_hexic(double t4, double t6) {
    auto st = BitracialPotential::single_trace_model({{4, Rational(t4)}, {6, Rational(t6)}});
    double c = hexic_branch_c(t4, t6);
    double v3 = t4 + 5.0 * t6 * c;
    double m2 = c + c * c * c * v3;
    double m4 = 2.0 * c * c + 3.0 * std::pow(c, 4) * v3 + t6 * std::pow(c, 5);
    double d_t6 = t6;
    double d_t4 = t4 - 10.0 * m2 * d_t6;
    double d_t2 = 1.0 - 3.0 * m2 * d_t4 - 5.0 * m4 * d_t6;
    MatchingResult out;
    out.single = st;
    out.dirac = potential_to_bitracial(DiracPotential::hexic(Rational(d_t2), Rational(d_t4), Rational(d_t6)));
    out.couplings = {{"t2", d_t2}, {"t4", d_t4}, {"t6", d_t6}, {"gamma_sq", c}};
    out.shift = 0;
    return out;
}

MatchingResult matching_tuning_cubic(double t3) {
    auto st = BitracialPotential::single_trace_model({{3, Rational(t3)}});
    double c = cubic_branch_c(t3);
    double alpha = t3 == 0 ? 0.0 : (1.0 / c - 1.0) / (2.0 * t3);
    double m1 = alpha + t3 * c * c;
    double m2 = alpha * alpha + c + 2.0 * alpha * t3 * c * c;
    // Recentring x -> x - s makes the two matching conditions compatible:
    //   -4 t3 s^2 + 2 (1 - 2 t3 m1) s + f = 0,   f = m1 - 2 t3 m1^2 + t3 m2.
    double f = m1 - 2 * t3 * m1 * m1 + t3 * m2;
    double A = -4 * t3, B = 2 * (1 - 2 * t3 * m1), C = f;
    double shift = 0;
    if (t3 != 0) {
        double disc = B * B - 4 * A * C;
        if (disc < 0) throw std::runtime_error("matching_tuning_cubic: no real recentring shift");
        double q = -(B + (B >= 0 ? 1.0 : -1.0) * std::sqrt(disc)) / 2.0;
        double s1 = q / A, s2 = C / q;  // the small root is the physical branch
        shift = std::fabs(s1) < std::fabs(s2) ? s1 : s2;
    }
    double t2 = 1.0 - 2 * t3 * m1 - 4 * t3 * shift;
    MatchingResult out;
    out.single = st;
    out.dirac = potential_to_bitracial(DiracPotential::cubic(Rational(t2), Rational(t3)));
    out.couplings = {{"t2", t2}, {"t3", t3}, {"gamma_sq", c}};
    out.shift = shift;
    return out;
}

double matching_resolvent_mismatch(const MatchingResult& m, int npoints) {
    // Both solutions are assembled from the shared branch data; the Dirac
    // moments are the recentred single-trace ones.
    double c = m.couplings.at("gamma_sq");
    double s = m.shift;
    SpectralSolution ss;
    std::map<int, double> st_mom;
    double alpha_st = 0;
    if (m.couplings.count("t3")) {
        double t3 = m.couplings.at("t3");
        alpha_st = t3 == 0 ? 0.0 : (1.0 / c - 1.0) / (2.0 * t3);
    }
    ss = assemble_from_point(m.single, alpha_st, c);
    int d = m.dirac.degree();
    std::map<int, double> stm = moments_from_solution(ss, d - 1);
    std::map<int, double> dirac_mom;
    for (int l = 1; l <= d - 1; ++l) {
        double acc = 0;
        for (int k = 0; k <= l; ++k) {
            double mk = k == 0 ? 1.0 : stm.at(k);  // T0_0 = t = 1
            acc += to_double(Rational(binomial_big(l, k))) * std::pow(s, l - k) * mk;
        }
        dirac_mom[l] = acc;
    }
    SpectralSolution sd = assemble_from_point(m.dirac, alpha_st + s, c, dirac_mom);
    double rad = std::max(std::fabs(sd.a()), std::fabs(sd.b())) + 1.0;
    double worst = 0;
    for (int k = 0; k < npoints; ++k) {
        double th = 2 * M_PI * (k + 0.5) / npoints;
        std::complex<double> x(sd.alpha + 1.8 * rad * std::cos(th), 1.2 * rad * std::sin(th));
        std::complex<double> wd = resolvent(sd, x);
        std::complex<double> ws = resolvent(ss, x - std::complex<double>(m.shift, 0));
        worst = std::max(worst, std::abs(wd - ws));
    }
    return worst;
}

std::string region_label(double t2, double t4) {
    const bool convergent = t4 > 0;
    const bool formal = t2 > 0;
    if (convergent && formal) return "both";
    if (formal) return "formal";
    if (convergent) return "convergent";
    return "neither";
}

namespace {

double matching_t2_single_trace(double t4) {
    // gamma^2 of the single-trace quartic on the Gaussian branch
    double c = t4 == 0 ? 1.0 : (-1.0 + std::sqrt(1.0 + 12.0 * t4)) / (6.0 * t4);
    double m2 = c + t4 * c * c * c;
    return 1.0 - 3.0 * t4 * m2;
}

double matching_t2_closed_form(double t4) {
    if (t4 == 0) return 1.0;
    double r = std::sqrt(1.0 + 12.0 * t4);
    return -(std::pow(1.0 + 12.0 * t4, 1.5) - 4.0 - 144.0 * t4 + (36.0 * t4 + 3.0) * r) / (72.0 * t4);
}

}  // namespace

std::vector<PhaseDiagramRow> quartic_phase_diagram(double t4_lo, double t4_hi, int n) {
    std::vector<PhaseDiagramRow> rows;
    rows.reserve(n);
    for (int i = 0; i < n; ++i) {
        double t4 = n == 1 ? t4_lo : t4_lo + (t4_hi - t4_lo) * i / (n - 1.0);
        PhaseDiagramRow row;
        row.t4 = t4;
        if (t4 >= -1.0 / 12.0) {
            row.t2_matching = matching_t2_single_trace(t4);
            row.t2_matching_closed = matching_t2_closed_form(t4);
            row.region_at_matching = region_label(row.t2_matching, t4);
        }
        if (t4 > 0) {
            row.t2_transition_closed = -(5.0 * t4 + 3.0) / std::sqrt(t4);
            // rho(0) = 0 on the branch continued from the Gaussian side:
            // walk t2 down until the edge factor at x = 0 changes sign, bisect.
            auto M0 = [&](double t2, const SpectralSolution* warm) -> std::pair<double, SpectralSolution> {
                BitracialPotential p = potential_to_bitracial(
                    DiracPotential::quartic(Rational(t2), Rational(t4)));
                SpectralSolution s = warm ? solve_one_cut_warm(p, *warm) : solve_one_cut(p);
                return {edge_poly(s).eval(0.0), s};
            };
            try {
                double hi = 1.0;
                auto [fhi, shi] = M0(hi, nullptr);
                SpectralSolution warm = shi;
                double lo = hi, flo = fhi, above = hi;
                double step = 0.25;
                while (flo > 0 && lo > -400.0 && step > 1e-9) {
                    try {
                        auto [fv, sv] = M0(lo - step, &warm);
                        warm = sv;
                        above = lo;
                        lo = lo - step;
                        flo = fv;
                        step = std::min(1.6 * step, 1.0);
                    } catch (const SolveError&) {
                        step *= 0.5;
                    }
                }
                if (flo <= 0) {
                    double a = lo, b = above;  // M(0) <= 0 at a, > 0 at b
                    for (int it = 0; it < 80; ++it) {
                        double mid = 0.5 * (a + b);
                        auto [fv, sv] = M0(mid, &warm);
                        warm = sv;
                        (fv <= 0 ? a : b) = mid;
                        if (std::fabs(b - a) < 1e-12 * std::max(1.0, std::fabs(a))) break;
                    }
                    row.t2_transition = 0.5 * (a + b);
                    row.transition_deviation = row.t2_transition - row.t2_transition_closed;
                    row.region_at_transition = region_label(row.t2_transition, t4);
                }
            } catch (const SolveError&) {
                // grid point past criticality: flagged by the NaN column, not fatal
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

PainleveSeries painleve_series(size_t order) {
    PainleveSeries out;
    out.a.resize(order + 1);
    out.a[0] = Rational(1);
    auto p = [](long k) { return Rational(1 - 5 * k, 2); };
    for (size_t m = 1; m <= order; ++m) {
        Rational rhs = Rational(1, 3) * out.a[m - 1] * p(m - 1) * (p(m - 1) - 1);
        for (size_t i = 1; i < m; ++i) rhs -= out.a[i] * out.a[m - i];
        out.a[m] = rhs / 2;
    }
    return out;
}

std::vector<Rational> PainleveSeries::substitution_residual() const {
    const size_t n = a.size();
    std::vector<Rational> res(n, Rational(0));
    auto p = [](long k) { return Rational(1 - 5 * k, 2); };
    for (size_t m = 0; m < n; ++m) {
        Rational v2(0);
        for (size_t i = 0; i <= m; ++i) v2 += a[i] * a[m - i];
        Rational vpp = m >= 1 ? a[m - 1] * p(m - 1) * (p(m - 1) - 1) : Rational(0);
        Rational y = m == 0 ? Rational(1) : Rational(0);
        res[m] = y - (v2 - Rational(1, 3) * vpp);
    }
    return res;
}

RatioAnalysis singular_exponent(const std::vector<double>& coeffs, int min_points) {
    RatioAnalysis out;
    // detect parity-sparse series (every other coefficient zero)
    std::vector<double> f;
    int stride = 1;
    {
        bool odd_zero = true, even_zero = true;
        for (size_t k = 1; k < coeffs.size(); ++k) {
            if (std::fabs(coeffs[k]) > 1e-300) (k % 2 ? odd_zero : even_zero) = false;
        }
        if (odd_zero != even_zero) stride = 2;
    }
    size_t start = 1;
    if (stride == 2) {
        bool odd_nonzero = false;
        for (size_t k = 1; k < coeffs.size(); k += 2)
            if (std::fabs(coeffs[k]) > 1e-300) odd_nonzero = true;
        start = odd_nonzero ? 1 : 2;
    }
    for (size_t k = start; k < coeffs.size(); k += stride) f.push_back(coeffs[k]);
    out.stride = stride;

    size_t nz = 0;
    for (double c : f)
        if (std::fabs(c) > 1e-300) ++nz;
    if (nz + 2 < f.size() || f.size() < static_cast<size_t>(min_points) + 1) {
        out.singular = false;  // vanishing tail: no finite-distance singularity
        return out;
    }
    // Domb-Sykes ratios r_k = f_k/f_{k-1} fitted as A + B/k + C/k^2 on the
    // top half; the quadratic term removes the leading finite-k bias.
    std::vector<std::pair<double, double>> pts;  // (1/k, r_k)
    for (size_t k = f.size() / 2; k < f.size(); ++k) {
        if (std::fabs(f[k - 1]) < 1e-300) continue;
        pts.push_back({1.0 / static_cast<double>(k), f[k] / f[k - 1]});
    }
    if (pts.size() < 6) {
        out.singular = false;
        return out;
    }
    double s0 = pts.size(), s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    double b0 = 0, b1 = 0, b2 = 0;
    for (auto [x, y] : pts) {
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
        b0 += y;
        b1 += x * y;
        b2 += x * x * y;
    }
    std::vector<std::vector<double>> Amat{{s0, s1, s2}, {s1, s2, s3}, {s2, s3, s4}};
    std::vector<double> sol = solve_linear(Amat, std::vector<double>{b0, b1, b2});
    double inter = sol[0], slope = sol[1];
    out.singular = std::fabs(inter) > 1e-12;
    if (!out.singular) return out;
    out.t_c = 1.0 / inter;
    out.exponent = -slope / inter - 1.0;
    out.points_used = static_cast<int>(pts.size());
    return out;
}

std::pair<int, int> minimal_model_label(const DiracPotential& p) {
    int lmax = 0;
    for (const auto& [l, c] : p.terms)
        if (c != 0) lmax = std::max(lmax, l);
    if (lmax == 3) return {3, 2};
    if (lmax >= 4 && lmax % 2 == 0) return {lmax - 1, 2};
    throw std::invalid_argument("minimal_model_label: potential outside the classified families");
}

double edge_exponent(const Density& d, const std::vector<double>& eps_ladder) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (double eps : eps_ladder) {
        double r = d(d.a - eps);
        if (r <= 0) continue;
        double x = std::log(eps), y = std::log(r);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 3) throw std::runtime_error("edge_exponent: density vanished on the sample ladder");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double edge_exponent(const Density& d) {
    std::vector<double> ladder;
    for (double e = 1e-2; e >= 0.9e-6; e /= std::sqrt(10.0)) ladder.push_back(e);
    return edge_exponent(d, ladder);
}

}  // namespace diracens
