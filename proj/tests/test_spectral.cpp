#include <doctest.h>

#include <complex>
#include <random>

#include "diracens/spectral.hpp"

using namespace diracens;

TEST_SUITE("zhukovsky") {
    TEST_CASE("forward, inverse and the branch point") {
        ZhukovskyMap m{0.0, 1.0};
        CHECK(m.forward(std::complex<double>(2.0)).real() == doctest::Approx(2.5).epsilon(1e-15));
        bool on_cut = false;
        auto z = m.inverse({2.5, 0.0}, &on_cut);
        CHECK(z.real() == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(!on_cut);
        auto ze = m.inverse({2.0, 0.0}, &on_cut);
        CHECK(std::abs(ze - std::complex<double>(1.0, 0.0)) < 1e-7);
        CHECK(on_cut);
    }

    TEST_CASE("round trips off the cut") {
        ZhukovskyMap m{1.0, 0.5};
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> mod(1.05, 4.0), arg(0.0, 2 * M_PI);
        for (int k = 0; k < 100; ++k) {
            std::complex<double> z = std::polar(mod(rng), arg(rng));
            auto x = m.forward(z);
            auto z2 = m.inverse(x);
            CHECK(std::abs(z2 - z) < 1e-12 * std::abs(z));
            // sqrt identity: sqrt((x-a)(x-b)) = gamma (z - 1/z) on |z| > 1
            auto lhs = std::sqrt((x - m.a()) * (x - m.b()));
            auto rhs = m.gamma * (z - 1.0 / z);
            CHECK(std::abs(lhs * lhs - rhs * rhs) < 1e-10 * std::abs(rhs * rhs));
        }
    }
}

TEST_SUITE("spectral") {
    TEST_CASE("Gaussian baseline") {
        auto sol = solve_one_cut(BitracialPotential::gaussian());
        CHECK(sol.alpha == doctest::Approx(0.0));
        CHECK(sol.gamma_sq == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(moment_from_solution(sol, 2) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(moment_from_solution(sol, 4) == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(moment_from_solution(sol, 6) == doctest::Approx(5.0).epsilon(1e-14));
        CHECK(resolvent(sol, 3.0) == doctest::Approx((3.0 - std::sqrt(5.0)) / 2).epsilon(1e-14));
        // semicircle density
        Density d = density(sol);
        for (double x = -1.9; x < 2.0; x += 0.37)
            CHECK(d(x) == doctest::Approx(std::sqrt(4 - x * x) / (2 * M_PI)).epsilon(1e-12));
    }

    TEST_CASE("quartic u coefficients match the transformed derivative") {
        auto p = potential_to_bitracial(DiracPotential::quartic(Rational(1), Rational(1, 20)));
        auto sol = solve_one_cut(p);
        double t4 = 0.05, g = sol.gamma;
        double m2 = sol.moments0.at(2);
        double u1 = (1.0 + 3 * m2 * t4) * g + 3 * t4 * g * g * g;
        CHECK(sol.u[1] == doctest::Approx(u1).epsilon(1e-12));
        CHECK(sol.u[1] == doctest::Approx(1.0 / g).epsilon(1e-12));  // u1 = t/gamma
        CHECK(sol.u[2] == doctest::Approx(0.0));
        CHECK(sol.u[3] == doctest::Approx(t4 * g * g * g).epsilon(1e-12));
        CHECK(sol.u[0] == doctest::Approx(0.0));
        // z-form of the resolvent: W = 1/(gamma z) + t4 gamma^3 / z^3
        auto w = resolvent_z(sol);
        CHECK(w.coeff(-1) == doctest::Approx(1.0 / g).epsilon(1e-12));
        CHECK(w.coeff(-3) == doctest::Approx(t4 * g * g * g).epsilon(1e-12));
    }

    TEST_CASE("hexic and cubic u coefficients") {
        auto h = potential_to_bitracial(DiracPotential::hexic(Rational(1), Rational(1, 50), Rational(1, 200)));
        auto sh = solve_one_cut(h);
        CHECK(sh.u[5] == doctest::Approx((1.0 / 200) * std::pow(sh.gamma, 5)).epsilon(1e-11));
        CHECK(sh.u[2] == doctest::Approx(0.0));
        CHECK(sh.u[4] == doctest::Approx(0.0));

        auto c = potential_to_bitracial(DiracPotential::cubic(Rational(1), Rational(1, 10)));
        auto sc = solve_one_cut(c);
        CHECK(sc.u[2] == doctest::Approx(0.1 * sc.gamma_sq).epsilon(1e-11));
    }

    TEST_CASE("quartic gamma identity along solved couplings") {
        // one-cut solvability of the quartic Dirac ensemble ends at the fold
        // t4 = -3 t2^2 / 64; sampled points stay on the solvable side
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> r2(0.5, 2.0), u01(0.0, 1.0);
        for (int k = 0; k < 20; ++k) {
            double t2 = r2(rng);
            double t4_lo = std::max(-1.0 / 12.0 + 1e-3, -0.8 * 3.0 * t2 * t2 / 64.0);
            double t4 = t4_lo + (0.2 - t4_lo) * u01(rng);
            auto p = potential_to_bitracial(DiracPotential::quartic(Rational(t2), Rational(t4)));
            auto sol = solve_one_cut(p);
            double cc = sol.gamma_sq;
            double res = 3 * t4 * t4 * cc * cc * cc * cc + 6 * t4 * cc * cc + t2 * cc - 1;
            CHECK(std::fabs(res) <= 1e-11);
            // T2 = gamma^2 + t4 gamma^6 on the symmetric branch
            CHECK(sol.moments0.at(2) == doctest::Approx(cc + t4 * cc * cc * cc).epsilon(1e-11));
        }
    }

    TEST_CASE("cubic moments match the closed forms") {
        double t2 = 1.0, t3 = -0.12;
        auto p = potential_to_bitracial(DiracPotential::cubic(Rational(t2), Rational(t3)));
        auto sol = solve_one_cut(p);
        double a = sol.alpha, c = sol.gamma_sq;
        CHECK(sol.moments0.at(1) == doctest::Approx(a + t3 * c * c).epsilon(1e-11));
        CHECK(sol.moments0.at(2) == doctest::Approx(a * a + c + 2 * a * t3 * c * c).epsilon(1e-11));
        CHECK(sol.u[1] * sol.gamma == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("resolvent normalization at large x") {
        auto p = potential_to_bitracial(DiracPotential::quartic(Rational(1), Rational(1, 30)));
        auto sol = solve_one_cut(p);
        double x = 1e6;
        CHECK(x * resolvent(sol, x) == doctest::Approx(1.0).epsilon(1e-5));
        CHECK_THROWS_AS(resolvent(sol, 0.1), std::domain_error);
    }

    TEST_CASE("density normalization, moments and closed forms") {
        double t2 = 1.0, t4 = 0.08;
        auto p = potential_to_bitracial(DiracPotential::quartic(Rational(t2), Rational(t4)));
        auto sol = solve_one_cut(p, {.tol = 1e-12, .max_newton = 80, .initial_step = 0.5, .min_step = 1e-7,
                                     .moments_to = 6});
        Density d = density(sol);
        CHECK(d.moment(0) == doctest::Approx(1.0).epsilon(1e-10));
        for (int l = 1; l <= 6; ++l)
            CHECK(d.moment(l) == doctest::Approx(moment_from_solution(sol, l)).epsilon(1e-7));
        double g = sol.gamma;
        CHECK(d(0.0) == doctest::Approx((1 / (2 * M_PI)) * (1 / (g * g) - t4 * g * g) * 2 * g).epsilon(1e-10));

        // cubic density: (1/2pi)(1/gamma^2 + t3 (x - alpha)) sqrt((a-x)(x-b))
        double t3 = -0.1;
        auto pc = potential_to_bitracial(DiracPotential::cubic(Rational(1), Rational(t3)));
        auto sc = solve_one_cut(pc);
        Density dc = density(sc);
        for (double frac : {0.2, 0.5, 0.8}) {
            double x = sc.b() + frac * (sc.a() - sc.b());
            double expected = (1 / (2 * M_PI)) * (1 / sc.gamma_sq + t3 * (x - sc.alpha)) *
                              std::sqrt((sc.a() - x) * (x - sc.b()));
            CHECK(dc(x) == doctest::Approx(expected).epsilon(1e-10));
        }
        CHECK(dc.moment(0) == doctest::Approx(1.0).epsilon(1e-8));
    }

    TEST_CASE("discriminant factorization on a dense grid") {
        auto run = [&](const BitracialPotential& p) {
            auto sol = solve_one_cut(p);
            Poly<double> S = effective_derivative_poly(sol);
            Poly<double> P = p01_poly(sol);
            Poly<double> M = edge_poly(sol);
            double scale = 1.0 + S.max_abs_coeff() * S.max_abs_coeff();
            for (int i = 0; i <= 60; ++i) {
                double x = -4.0 + 8.0 * i / 60.0;
                double lhs = S.eval(x) * S.eval(x) - 4 * P.eval(x);
                double rhs = M.eval(x) * M.eval(x) * (x - sol.a()) * (x - sol.b());
                CHECK(std::fabs(lhs - rhs) <= 1e-9 * scale * std::max(1.0, std::fabs(rhs)));
            }
        };
        run(potential_to_bitracial(DiracPotential::quartic(Rational(1), Rational(1, 15))));
        run(potential_to_bitracial(DiracPotential::cubic(Rational(1), Rational(-1, 9))));
        run(potential_to_bitracial(DiracPotential::hexic(Rational(1), Rational(1, 40), Rational(1, 300))));
    }

    TEST_CASE("self-consistency closure of the effective derivative") {
        auto p = potential_to_bitracial(DiracPotential::quartic(Rational(4, 3), Rational(-1, 20)));
        auto sol = solve_one_cut(p);
        std::map<int, double> mom = moments_from_solution(sol, p.degree() - 1);
        auto eff = fold_effective_derivative(p, mom);
        for (const auto& [m, v] : eff.tilde)
            CHECK(v == doctest::Approx(sol.tilde.at(m)).epsilon(1e-12));
    }

    TEST_CASE("continuation failure reports the last good fraction") {
        auto p = potential_to_bitracial(DiracPotential::quartic(Rational(1), Rational(-1, 5)));
        try {
            solve_one_cut(p);
            CHECK(false);
        } catch (const SolveError& e) {
            CHECK(e.last_good_fraction > 0.0);
            CHECK(e.last_good_fraction < 1.0);
        }
    }

    TEST_CASE("even potentials impose the symmetric phase") {
        auto p = potential_to_bitracial(DiracPotential::quartic(Rational(1), Rational(1, 25)));
        auto sol = solve_one_cut(p);
        CHECK(sol.symmetric);
        CHECK(moment_from_solution(sol, 1) == doctest::Approx(0.0));
        CHECK(moment_from_solution(sol, 3) == doctest::Approx(0.0));
        CHECK(moment_from_solution(sol, 5) == doctest::Approx(0.0));
    }
}

TEST_SUITE("spectral-formal") {
    TEST_CASE("Gaussian t-series moments are Catalan monomials") {
        auto fs = solve_one_cut_formal_t(BitracialPotential::gaussian(), 6);
        CHECK(fs.gamma_sq[1] == Rational(1));
        CHECK(fs.alpha.is_zero());
        auto check_mono = [&](int l, size_t v, long value) {
            const QSeries& s = fs.moments0.at(l);
            for (size_t k = 0; k <= s.order(); ++k)
                CHECK(s[k] == (k == v ? Rational(value) : Rational(0)));
        };
        check_mono(2, 2, 1);
        check_mono(4, 3, 2);
        check_mono(6, 4, 5);
        // evaluated at t = 1: 1, 2, 5 exactly
        CHECK(fs.moments0.at(2).eval(Rational(1)) == Rational(1));
        CHECK(fs.moments0.at(4).eval(Rational(1)) == Rational(2));
        CHECK(fs.moments0.at(6).eval(Rational(1)) == Rational(5));
    }

    TEST_CASE("single-trace quartic coupling series") {
        CouplingFamily fam;
        fam.base = BitracialPotential::gaussian();
        fam.direction = BitracialPotential::single_trace_model({{4, Rational(1)}});
        fam.direction.gaussian_coeff = Rational(0);
        auto sol = solve_one_cut_family(fam, 4);
        // gamma^2 = 1 - 3l + 18l^2 - 135l^3 + ...
        CHECK(sol.gamma_sq[0] == Rational(1));
        CHECK(sol.gamma_sq[1] == Rational(-3));
        CHECK(sol.gamma_sq[2] == Rational(18));
        CHECK(sol.gamma_sq[3] == Rational(-135));
        // T2 = 1 - 2l + 9l^2 - 54l^3 + ...
        auto m2 = moment_from_solution(sol, 2);
        CHECK(m2[0] == Rational(1));
        CHECK(m2[1] == Rational(-2));
        CHECK(m2[2] == Rational(9));
        CHECK(m2[3] == Rational(-54));
    }

    TEST_CASE("floating and exact solves agree") {
        CouplingFamily fam;
        fam.base = potential_to_bitracial(DiracPotential::quartic(Rational(1), Rational(0)));
        fam.direction = potential_to_bitracial(DiracPotential::quartic(Rational(0), Rational(1)));
        auto series_sol = solve_one_cut_family(fam, 30);
        double lam = 0.02;
        auto numeric = solve_one_cut(fam.at(lam));
        auto eval = [&](const QSeries& s) {
            double acc = 0, pw = 1;
            for (size_t k = 0; k <= s.order(); ++k, pw *= lam) acc += to_double(s[k]) * pw;
            return acc;
        };
        CHECK(eval(series_sol.gamma_sq) == doctest::Approx(numeric.gamma_sq).epsilon(1e-10));
        CHECK(eval(moment_from_solution(series_sol, 2)) ==
              doctest::Approx(numeric.moments0.at(2)).epsilon(1e-10));
        CHECK(eval(moment_from_solution(series_sol, 4)) ==
              doctest::Approx(moment_from_solution(numeric, 4)).epsilon(1e-10));
    }

    TEST_CASE("formal-t mode of the quartic Dirac ensemble is self-consistent") {
        auto p = potential_to_bitracial(DiracPotential::quartic(Rational(1), Rational(1, 10)));
        auto fs = solve_one_cut_formal_t(p, 5);
        CHECK(fs.gamma_sq[0] == Rational(0));
        CHECK(fs.gamma_sq[1] == Rational(1));  // Brown's lemma branch
        CHECK(fs.moments0.at(1).is_zero());
    }
}
