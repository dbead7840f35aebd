#include "diracens/recursion.hpp"

namespace diracens {

CorrelatorTable<double> build_correlator_table(const SpectralSolution& sol, int gmax, int l1max) {
    CorrelatorTable<double> table;
    const int d = sol.potential.degree();
    const int L0 = l1max + d;

    for (int l = 0; l <= L0; ++l) table.set(0, {l}, moment_from_solution(sol, l));

    // genus-0 two-boundary moments (universal cylinder)
    const int bmax = std::max(d - 1, l1max);
    for (int a = 0; a <= L0; ++a)
        for (int b = 0; b <= std::min(a, bmax); ++b) table.set(0, {a, b}, mixed_moment(sol, a, b));

    if (gmax >= 1) {
        RecursionEngine<double> eng = RecursionEngine<double>::from_solution(sol);
        for (int l = 0; l <= L0; ++l) table.set(1, {l}, eng.moment(1, {l}));
    }
    return table;
}

QSeries free_energy_series(const CouplingFamily& fam, int genus, size_t order) {
    if (genus != 0 && genus != 1)
        throw std::invalid_argument("free_energy_series: genus must be 0 or 1");
    SpectralSolutionSeries sol = solve_one_cut_family(fam, order);
    const BitracialPotential& dir = fam.direction;

    auto T0 = [&](int l) { return moment_from_solution(sol, l); };

    QSeries dF = QSeries(order, 'g');
    if (genus == 0) {
        if (dir.gaussian_coeff != 0)
            dF = dF - scalar_from_rational<QSeries>(dir.gaussian_coeff / 2) * T0(2);
        for (const auto& [i, c] : dir.single_trace)
            if (c != 0) dF = dF - scalar_from_rational<QSeries>(c / i) * T0(i);
        for (const auto& [ij, c] : dir.bi_trace) {
            if (c == 0) continue;
            auto [i, j] = ij;
            Rational w = c / (i + j);
            if (i != j) w *= 2;
            dF = dF - scalar_from_rational<QSeries>(w) * T0(i) * T0(j);
        }
    } else {
        RecursionEngine<QSeries> eng = RecursionEngine<QSeries>::from_solution(sol);
        auto T1 = [&](int l) { return eng.moment(1, {l}); };
        if (dir.gaussian_coeff != 0)
            dF = dF - scalar_from_rational<QSeries>(dir.gaussian_coeff / 2) * T1(2);
        for (const auto& [i, c] : dir.single_trace)
            if (c != 0) dF = dF - scalar_from_rational<QSeries>(c / i) * T1(i);
        for (const auto& [ij, c] : dir.bi_trace) {
            if (c == 0) continue;
            auto [i, j] = ij;
            Rational w = c / (i + j);
            if (i != j) w *= 2;
            QSeries bracket = mixed_moment(sol, i, j) + T0(i) * T1(j) + T0(j) * T1(i);
            dF = dF - scalar_from_rational<QSeries>(w) * bracket;
        }
    }
    return dF.integral();
}

}  // namespace diracens
