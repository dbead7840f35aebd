#include <doctest.h>

#include <complex>

#include "diracens/criticality.hpp"
#include "diracens/recursion.hpp"
#include "diracens/wick.hpp"

using namespace diracens;

TEST_SUITE("cylinder") {
    TEST_CASE("universal form: symmetry and decay") {
        ZhukovskyMap map{0.3, 0.8};
        std::complex<double> z1(1.7, 0.4), z2(-2.2, 1.1);
        auto v12 = w2_universal_value(map, z1, z2);
        auto v21 = w2_universal_value(map, z2, z1);
        CHECK(std::abs(v12 - v21) < 1e-14 * std::abs(v12));
        // decay at rate 1/z2^2
        for (double R : {1e3, 1e4}) {
            auto v = w2_universal_value(map, z1, std::complex<double>(R, R));
            CHECK(std::abs(v) < 10.0 / (R * R));
        }
        // only (alpha, gamma) enter: same values whatever potential produced the map
        ZhukovskyMap same{0.3, 0.8};
        CHECK(w2_universal_value(same, z1, z2) == v12);
    }

    TEST_CASE("Gaussian mixed moments") {
        Rational a(0), g(1);
        CHECK(mixed_moment_universal(a, g, 1, 1) == Rational(1));
        CHECK(mixed_moment_universal(a, g, 2, 2) == Rational(2));
        CHECK(mixed_moment_universal(a, g, 2, 4) == Rational(8));
        CHECK(mixed_moment_universal(a, g, 1, 2) == Rational(0));  // parity
        CHECK(mixed_moment_universal(a, g, 3, 0) == Rational(0));  // constant insertion
        CHECK(mixed_moment_universal(a, g, 0, 0) == Rational(0));
    }

    TEST_CASE("mixed moments against the pairing oracle off the Gaussian point") {
        double t4 = 0.005;
        auto p = potential_to_bitracial(DiracPotential::quartic(Rational(1), Rational(t4)));
        auto sol = solve_one_cut(p);
        // lambda-series of T^0_{2,2} from the oracle, evaluated at t4
        CouplingFamily fam;
        fam.base = potential_to_bitracial(DiracPotential::quartic(Rational(1), Rational(0)));
        fam.direction = potential_to_bitracial(DiracPotential::quartic(Rational(0), Rational(1)));
        auto s = wick_moment_series(fam, {2, 2}, 0, 3, 16);
        double expect = 0, pw = 1;
        for (size_t k = 0; k <= 3; ++k, pw *= t4) expect += to_double(s[k]) * pw;
        CHECK(mixed_moment(sol, 2, 2) == doctest::Approx(expect).epsilon(1e-4));
    }
}

TEST_SUITE("recursion") {
    TEST_CASE("Gaussian genus one in exact arithmetic") {
        RecursionEngine<Rational> eng(Rational(0), Rational(1), {Rational(0), Rational(1)});
        CHECK(eng.moment(1, {0}) == Rational(0));
        CHECK(eng.moment(1, {2}) == Rational(0));
        CHECK(eng.moment(1, {4}) == Rational(1));
        CHECK(eng.moment(1, {6}) == Rational(10));
        // omega_{1,1} itself: W^1_1(x(z)) x'(z) = z^3/(z^2-1)^4
        const auto& w11 = eng.omega(1, 1);
        for (std::complex<double> z : {std::complex<double>(1.4, 0.3), std::complex<double>(-2.0, 0.7)}) {
            std::complex<double> closed = z * z * z / std::pow(z * z - 1.0, 4);
            std::complex<double> val = w11.eval<std::complex<double>>({z});
            CHECK(std::abs(val - closed) < 1e-12 * std::abs(closed));
        }
    }

    TEST_CASE("Gaussian planar three-boundary correlators match the oracle") {
        RecursionEngine<Rational> eng(Rational(0), Rational(1), {Rational(0), Rational(1)});
        CHECK(eng.moment(0, {2, 2, 2}) == Rational(8));
        CHECK(eng.moment(0, {2, 1, 1}) == Rational(2));
        CHECK(eng.moment(0, {1, 1, 2}) == Rational(2));  // argument order irrelevant
        auto g = BitracialPotential::gaussian();
        auto o222 = wick_moment_t_series(g, {2, 2, 2}, 0, 4);
        // T^0_{2,2,2} = 8 t^3: vertex grading v = t_power + (2 - 2g - q) = 3 + (-1) ... fixed by map identity
        Rational at1(0);
        for (size_t k = 0; k <= 4; ++k) at1 += o222[k];
        CHECK(at1 == Rational(8));
        auto o211 = wick_moment_t_series(g, {2, 1, 1}, 0, 4);
        Rational at1b(0);
        for (size_t k = 0; k <= 4; ++k) at1b += o211[k];
        CHECK(at1b == Rational(2));
    }

    TEST_CASE("pole structure respects the branch points and parity") {
        RecursionEngine<Rational> eng(Rational(0), Rational(1), {Rational(0), Rational(1)});
        const auto& w03 = eng.omega(0, 3);
        for (const auto& [key, coeff] : w03.terms) {
            for (auto [b, k] : key) {
                CHECK((b == 1 || b == -1));
                CHECK(k >= 1);
            }
        }
        // symmetry under argument permutation on a numeric grid
        std::vector<std::complex<double>> zs{{1.5, 0.2}, {-1.8, 0.5}, {2.3, -0.9}};
        auto v0 = w03.eval<std::complex<double>>({zs[0], zs[1], zs[2]});
        auto v1 = w03.eval<std::complex<double>>({zs[2], zs[0], zs[1]});
        auto v2 = w03.eval<std::complex<double>>({zs[1], zs[2], zs[0]});
        CHECK(std::abs(v0 - v1) < 1e-10 * std::abs(v0));
        CHECK(std::abs(v0 - v2) < 1e-10 * std::abs(v0));
    }

    TEST_CASE("single-trace quartic genus-1 moments certify against the loop equations") {
        auto p = BitracialPotential::single_trace_model({{4, Rational(-1, 20)}});
        auto sol = solve_one_cut(p);
        auto table = build_correlator_table(sol, 1, 8);
        for (int g = 0; g <= 1; ++g)
            for (int l1 = 0; l1 <= 8; ++l1)
                CHECK(std::fabs(sde_residual(p, table, g, l1, {})) <= 1e-10);
    }

    TEST_CASE("matching curve: Dirac and single-trace forms coincide") {
        double t4 = -0.05;
        MatchingResult m = matching_tuning_quartic(t4);
        auto sd = solve_one_cut(m.dirac);
        auto ss = solve_one_cut(m.single);
        CHECK(sd.gamma_sq == doctest::Approx(ss.gamma_sq).epsilon(1e-12));
        RecursionEngine<double> ed = RecursionEngine<double>::from_solution(sd);
        RecursionEngine<double> es = RecursionEngine<double>::from_solution(ss);
        CHECK(ed.moment(1, {4}) == doctest::Approx(es.moment(1, {4})).epsilon(1e-9));
        CHECK(ed.moment(0, {2, 2, 2}) == doctest::Approx(es.moment(0, {2, 2, 2})).epsilon(1e-9));
        CHECK(ed.moment(1, {2}) == doctest::Approx(es.moment(1, {2})).epsilon(1e-9));
    }

    TEST_CASE("euler bound is enforced") {
        RecursionEngine<Rational> eng(Rational(0), Rational(1), {Rational(0), Rational(1)});
        CHECK_THROWS_AS(eng.omega(2, 1), std::invalid_argument);
        CHECK_THROWS_AS(eng.omega(0, 2), std::invalid_argument);
    }

    TEST_CASE("omega_{1,2} extraction stays within the certified loop equations") {
        // single-trace: genus-1 two-boundary moments close the (g=1, n=2) SDE rows
        auto p = BitracialPotential::single_trace_model({{4, Rational(1, 30)}});
        auto sol = solve_one_cut(p);
        RecursionEngine<double> eng = RecursionEngine<double>::from_solution(sol);
        auto table = build_correlator_table(sol, 1, 8);
        for (int a = 0; a <= 9; ++a)
            for (int b = 0; b <= 5; ++b) table.set(1, {a, b}, eng.moment(1, {a, b}));
        // also need genus-0 triples for the (g=1, n=2) equation
        for (int a = 0; a <= 9; ++a)
            for (int b = 0; b <= 5; ++b)
                for (int c = 0; c <= 5; ++c) {
                    std::vector<int> key{a, b, c};
                    table.set(0, key, eng.moment(0, key));
                }
        for (int l1 = 0; l1 <= 4; ++l1)
            for (int l2 = 1; l2 <= 3; ++l2)
                CHECK(std::fabs(sde_residual(p, table, 1, l1, {l2})) <= 1e-9);
    }

    TEST_CASE("cubic Dirac two-boundary loop equations certify the corrected cylinder") {
        // the (g=0, n=2) equations are non-vacuous for odd potentials and fix
        // the bi-trace correction to the mixed moments
        auto p = potential_to_bitracial(DiracPotential::cubic(Rational(1), Rational(-1, 8)));
        auto sol = solve_one_cut(p);
        CorrelatorTable<double> table;
        for (int l = 0; l <= 14; ++l) table.set(0, {l}, moment_from_solution(sol, l));
        for (int a = 0; a <= 12; ++a)
            for (int b = 0; b <= std::min(a, 8); ++b) table.set(0, {a, b}, mixed_moment(sol, a, b));
        for (int l1 = 0; l1 <= 6; ++l1)
            for (int l2 = 1; l2 <= 4; ++l2)
                CHECK(std::fabs(sde_residual(p, table, 0, l1, {l2})) <= 1e-9);
    }

    TEST_CASE("free energy series: oracle equivalence at low order") {
        CouplingFamily fam;
        fam.base = BitracialPotential::gaussian();
        fam.direction = BitracialPotential::single_trace_model({{4, Rational(1)}});
        fam.direction.gaussian_coeff = Rational(0);
        QSeries F0 = free_energy_series(fam, 0, 3);
        QSeries F0_oracle = wick_free_energy_series(fam, 0, 3, 14);
        for (size_t k = 0; k <= 3; ++k) CHECK(F0[k] == F0_oracle[k]);
        QSeries F1 = free_energy_series(fam, 1, 2);
        QSeries F1_oracle = wick_free_energy_series(fam, 1, 2, 14);
        for (size_t k = 0; k <= 2; ++k) CHECK(F1[k] == F1_oracle[k]);
    }
}
