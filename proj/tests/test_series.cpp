#include <doctest.h>

#include <random>

#include "diracens/laurent.hpp"
#include "diracens/newton.hpp"
#include "diracens/poly.hpp"
#include "diracens/series.hpp"

using namespace diracens;

namespace {

QSeries rand_series(std::mt19937& rng, size_t order) {
    std::uniform_int_distribution<int> num(-6, 6), den(1, 4);
    QSeries s(order);
    for (size_t k = 0; k <= order; ++k) s.set(k, Rational(num(rng), den(rng)));
    return s;
}

LaurentPoly<Rational> rand_laurent(std::mt19937& rng) {
    std::uniform_int_distribution<int> num(-5, 5), exp(-4, 4);
    LaurentPoly<Rational> f;
    for (int i = 0; i < 6; ++i) f.add_term(exp(rng), Rational(num(rng)));
    return f;
}

}  // namespace

TEST_SUITE("series") {
    TEST_CASE("product truncates to min order") {
        QSeries a({Rational(1), Rational(1)}, 2, 'x');   // 1 + x
        QSeries b({Rational(1), Rational(-1)}, 2, 'x');  // 1 - x
        QSeries p = a * b;
        CHECK(p[0] == Rational(1));
        CHECK(p[1] == Rational(0));
        CHECK(p[2] == Rational(-1));
        CHECK(p.order() == 2);
    }

    TEST_CASE("geometric series by division") {
        QSeries one = QSeries::constant(Rational(1), 3, 'x');
        QSeries den({Rational(1), Rational(-1)}, 3, 'x');
        QSeries q = one / den;
        for (size_t k = 0; k <= 3; ++k) CHECK(q[k] == Rational(1));
    }

    TEST_CASE("binomial composition: sqrt(1 - 6 t4 x) to second order") {
        // sqrt(1+u) composed with u = -6 t4 x at t4 = 1: 1 - 3x - 9/2 x^2
        QSeries u = QSeries::variable(Rational(1), 2, 'u');
        QSeries root = sqrt(u);
        QSeries inner({Rational(0), Rational(-6)}, 2, 'u');
        QSeries c = compose(root, inner);
        CHECK(c[0] == Rational(1));
        CHECK(c[1] == Rational(-3));
        CHECK(c[2] == Rational(-9, 2));
    }

    TEST_CASE("division by zero constant term and bad composition throw") {
        QSeries a = QSeries::constant(Rational(1), 2, 'x');
        QSeries zero_const({Rational(0), Rational(1)}, 2, 'x');
        CHECK_THROWS_AS(a / zero_const, std::domain_error);
        QSeries nonzero_const = QSeries::constant(Rational(2), 2, 'x');
        CHECK_THROWS_AS(compose(a, nonzero_const), std::domain_error);
    }

    TEST_CASE("exact arithmetic is associative and distributive") {
        std::mt19937 rng(7);
        for (int it = 0; it < 40; ++it) {
            QSeries a = rand_series(rng, 5), b = rand_series(rng, 5), c = rand_series(rng, 5);
            CHECK((a * b) * c == a * (b * c));
            CHECK((a + b) * c == a * c + b * c);
            CHECK((a + b) + c == a + (b + c));
        }
    }

    TEST_CASE("floating and exact modes agree") {
        std::mt19937 rng(11);
        for (int it = 0; it < 10; ++it) {
            QSeries a = rand_series(rng, 6), b = rand_series(rng, 6);
            if (b[0] == Rational(0)) continue;
            QSeries q = a / b;
            DSeries af(size_t(6)), bf(size_t(6));
            for (size_t k = 0; k <= 6; ++k) {
                af.set(k, to_double(a[k]));
                bf.set(k, to_double(b[k]));
            }
            DSeries qf = af / bf;
            for (size_t k = 0; k <= 6; ++k)
                CHECK(std::fabs(qf[k] - to_double(q[k])) <= 1e-10 * (1.0 + std::fabs(qf[k])));
        }
    }

    TEST_CASE("scalar-like constants do not collapse orders") {
        std::mt19937 rng(3);
        QSeries a = rand_series(rng, 5);
        QSeries two = scalar_from_int<QSeries>(2);
        CHECK((a * two).order() == 5);
        CHECK((a + two).order() == 5);
    }

    TEST_CASE("derivative and integral invert") {
        std::mt19937 rng(5);
        QSeries a = rand_series(rng, 6);
        QSeries b = a.derivative().integral();
        for (size_t k = 1; k <= 5; ++k) CHECK(b[k] == a[k]);
    }
}

TEST_SUITE("laurent") {
    TEST_CASE("residues of simple forms") {
        LaurentPoly<Rational> f;
        f.add_term(2, Rational(1));
        f.add_term(-1, Rational(3));
        CHECK(laurent_residue(f) == Rational(3));
        LaurentPoly<Rational> c = LaurentPoly<Rational>::monomial(Rational(5), 0);
        CHECK(laurent_residue(c) == Rational(0));
        // (z + 1/z)^2 / z = z + 2/z + 1/z^3
        LaurentPoly<Rational> x;
        x.add_term(1, Rational(1));
        x.add_term(-1, Rational(1));
        LaurentPoly<Rational> g = x * x * LaurentPoly<Rational>::monomial(Rational(1), -1);
        CHECK(laurent_residue(g) == Rational(2));
    }

    TEST_CASE("total derivatives have zero residue") {
        std::mt19937 rng(13);
        for (int it = 0; it < 30; ++it) {
            auto f = rand_laurent(rng);
            CHECK(laurent_residue(f.derivative()) == Rational(0));
        }
    }

    TEST_CASE("evaluation matches expansion") {
        LaurentPoly<double> f;
        f.add_term(2, 1.0);
        f.add_term(-3, 0.5);
        f.add_term(0, -2.0);
        double z = 1.7;
        CHECK(f.eval(z) == doctest::Approx(z * z + 0.5 / (z * z * z) - 2.0).epsilon(1e-14));
    }
}

TEST_SUITE("roots-newton") {
    TEST_CASE("sqrt2 via poly_real_roots") {
        Poly<double> p({-2.0, 0.0, 1.0});
        auto r = poly_real_roots(p, 0.0, 2.0);
        REQUIRE(r.size() == 1);
        CHECK(r[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    }

    TEST_CASE("gamma polynomial at the Gaussian point and the matched point") {
        // 3 t4^2 c^4 + 6 t4 c^2 + t2 c - 1 in c = gamma^2
        auto gamma_poly = [](double t2, double t4) {
            return Poly<double>({-1.0, t2, 6.0 * t4, 0.0, 3.0 * t4 * t4});
        };
        auto r = poly_real_roots(gamma_poly(1.0, 0.0), 0.0, 2.0);
        REQUIRE(r.size() == 1);
        CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-12));
        auto r2 = poly_real_roots(gamma_poly(4.0 / 3.0, -1.0 / 12.0), 0.0, 4.0);
        bool has2 = false;
        for (double x : r2) has2 = has2 || std::fabs(x - 2.0) < 1e-8;
        CHECK(has2);
    }

    TEST_CASE("root residuals bounded by tolerance") {
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> uni(-2.0, 2.0);
        for (int it = 0; it < 20; ++it) {
            double a = uni(rng), b = uni(rng), c = uni(rng);
            Poly<double> p = Poly<double>({-a, 1.0}) * Poly<double>({-b, 1.0}) * Poly<double>({-c, 1.0});
            auto roots = poly_real_roots(p, -3.0, 3.0);
            double scale = 1.0 + p.max_abs_coeff();
            CHECK(roots.size() >= 1);
            for (double r : roots) CHECK(std::fabs(p.eval(r)) <= 1e-9 * scale);
        }
    }

    TEST_CASE("newton_system scalar and 2d") {
        auto f1 = [](const std::vector<double>& x) { return std::vector<double>{x[0] * x[0] - 4.0}; };
        NewtonOptions o1;
        o1.tol = 1e-12;
        auto r1 = newton_system(f1, {3.0}, o1);
        CHECK(r1.converged);
        CHECK(r1.x[0] == doctest::Approx(2.0).epsilon(1e-12));

        auto f2 = [](const std::vector<double>& x) {
            return std::vector<double>{x[0] + x[1] - 3.0, x[0] - x[1] - 1.0};
        };
        auto r2 = newton_system(f2, {0.0, 0.0});
        CHECK(r2.x[0] == doctest::Approx(2.0));
        CHECK(r2.x[1] == doctest::Approx(1.0));
    }

    TEST_CASE("newton cross-checks poly_real_roots on the quartic self-consistency") {
        // gamma^2 at (t2, t4) = (1, 0.01)
        double t2 = 1.0, t4 = 0.01;
        Poly<double> p({-1.0, t2, 6.0 * t4, 0.0, 3.0 * t4 * t4});
        auto roots = poly_real_roots(p, 0.0, 2.0);
        REQUIRE(roots.size() == 1);
        auto f = [&](const std::vector<double>& x) { return std::vector<double>{p.eval(x[0])}; };
        NewtonOptions on;
        on.tol = 1e-13;
        auto nr = newton_system(f, {1.0}, on);
        CHECK(nr.x[0] == doctest::Approx(roots[0]).epsilon(1e-10));
    }

    TEST_CASE("newton failure carries diagnostics") {
        auto f = [](const std::vector<double>& x) { return std::vector<double>{x[0] * x[0] + 1.0}; };
        NewtonOptions o;
        o.tol = 1e-12;
        o.max_iter = 10;
        auto res = newton_system(f, {1.0}, o, /*nothrow=*/true);
        CHECK(!res.converged);
        CHECK(!res.message.empty());
        CHECK(res.x.size() == 1);  // last iterate retained
    }
}
