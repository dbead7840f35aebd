#include <doctest.h>

#include "diracens/wick.hpp"

using namespace diracens;

namespace {

CouplingFamily single_quartic_family() {
    CouplingFamily fam;
    fam.base = BitracialPotential::gaussian();
    fam.direction = BitracialPotential::single_trace_model({{4, Rational(1)}});
    fam.direction.gaussian_coeff = Rational(0);
    return fam;
}

CouplingFamily dirac_quartic_family() {
    CouplingFamily fam;
    fam.base = potential_to_bitracial(DiracPotential::quartic(Rational(1), Rational(0)));
    fam.direction = potential_to_bitracial(DiracPotential::quartic(Rational(0), Rational(1)));
    return fam;
}

}  // namespace

TEST_SUITE("wick") {
    TEST_CASE("Gaussian moments by genus and t-grading") {
        auto g = BitracialPotential::gaussian();
        auto t4_g0 = wick_moment_t_series(g, {4}, 0, 4);
        auto t4_g1 = wick_moment_t_series(g, {4}, 1, 4);
        // <(1/N) tr H^4> = 2 + 1/N^2 at t = 1: T^0_4 = 2 t^3, T^1_4 = t
        for (size_t k = 0; k <= 4; ++k) {
            CHECK(t4_g0[k] == (k == 3 ? Rational(2) : Rational(0)));
            CHECK(t4_g1[k] == (k == 1 ? Rational(1) : Rational(0)));
        }
        auto t2_g0 = wick_moment_t_series(g, {2}, 0, 3);
        CHECK(t2_g0[2] == Rational(1));
        auto t6_g0 = wick_moment_t_series(g, {6}, 0, 4);
        CHECK(t6_g0[4] == Rational(5));
    }

    TEST_CASE("Gaussian connected two-trace moments") {
        auto g = BitracialPotential::gaussian();
        auto t22 = wick_moment_t_series(g, {2, 2}, 0, 3);
        CHECK(t22[2] == Rational(2));  // T^0_{2,2} = 2 t^2
        auto t11 = wick_moment_t_series(g, {1, 1}, 0, 2);
        CHECK(t11[1] == Rational(1));  // T^0_{1,1} = t
        auto t24 = wick_moment_t_series(g, {2, 4}, 0, 4);
        CHECK(t24[3] == Rational(8));  // two-boundary planar gluings
    }

    TEST_CASE("single-trace quartic series: the order-t4 coefficient of T2 is -2") {
        auto fam = single_quartic_family();
        auto s = wick_moment_series(fam, {2}, 0, 3, 16);
        CHECK(s[0] == Rational(1));
        CHECK(s[1] == Rational(-2));
        CHECK(s[2] == Rational(9));
        CHECK(s[3] == Rational(-54));
    }

    TEST_CASE("free energy coefficients count planar quadrangulation insertions") {
        auto fam = single_quartic_family();
        auto f0 = wick_free_energy_series(fam, 0, 3, 14);
        CHECK(f0[1] == Rational(-1, 2));  // -(1/4) <tr H^4>_{g0} at order 0
        CHECK(f0[2] == Rational(9, 8));   // (1/2!) (1/16) T^0_{4,4} = 36/32
        // genus-1 reference: F1' = -(1/4) T^1_4
        auto f1 = wick_free_energy_series(fam, 1, 2, 14);
        CHECK(f1[1] == Rational(-1, 4));
    }

    TEST_CASE("degree guard raises for infeasible queries") {
        auto fam = single_quartic_family();
        WickQuery q;
        q.observable = {2};
        q.lambda_order = 4;  // needs degree 18 > 14
        q.degree_guard = 14;
        CHECK_THROWS_WITH_AS(static_cast<void>(wick_parts(fam, q)),
                             doctest::Contains("degree guard"), std::runtime_error);
    }

    TEST_CASE("parity makes odd observables vanish") {
        auto fam = dirac_quartic_family();
        auto s = wick_moment_series(fam, {3}, 0, 2, 14);
        for (size_t k = 0; k <= 2; ++k) CHECK(s[k] == Rational(0));
    }

    TEST_CASE("(1,1) cylinder insertions do not contribute at genus zero") {
        // the order-lambda^0 value of T2 in the Dirac family includes (trH)^2
        // insertion multisets; at genus 0 they must all cancel to the pure
        // Gaussian value
        auto fam = dirac_quartic_family();
        WickQuery q;
        q.observable = {2};
        q.lambda_order = 0;
        q.degree_guard = 12;  // allows up to five (1,1) cells
        auto parts = wick_parts(fam, q);
        CHECK(wick_genus_coefficient(parts, 1, 0) == Rational(1));
    }
}
