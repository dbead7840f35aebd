#pragma once

#include <map>
#include <utility>
#include <vector>

#include "diracens/dirac.hpp"
#include "diracens/series.hpp"
#include "diracens/spectral.hpp"

namespace diracens {

// Exact Wick-pairing enumeration for connected correlators of the formal
// bi-tracial integral.  The non-Gaussian action terms (single-trace vertices,
// bi-trace cells, and any Gaussian increment along the family direction) are
// expanded as insertions; the remaining pure Gaussian weight (N/2t) g2 trH^2
// supplies the propagator.
//
// A labeled pairing with P propagators, L index loops and n1 (N/t)-weighted
// insertions contributes N^{L + n1 - P} t^{P - n1} (1/g2)^P times the product
// of insertion coefficients.  Connected q-trace correlators collect into
// sum_g (N/t)^{2-2g-q} T^g with T^g graded by t^{P-n1}, so each pairing lands
// at a definite genus and t-order.
//
// Note: coupling-series coefficients evaluated at t = 1 are finite sums only
// when the t-grading of contributing diagrams is bounded; for genus 0 this
// always holds within the degree guard, but genus >= 1 coefficients of models
// with (1,1) bi-trace cells receive arbitrarily long cylinder chains and must
// be queried through the t-graded interface instead.
struct WickQuery {
    std::vector<int> observable;  // trace powers of the connected correlator (may be empty: log Z)
    int lambda_order = 0;         // order in the family parameter
    int t_power_max = 1 << 20;    // prune multisets with a higher t-grade
    int degree_guard = 14;        // max total H-degree per Gaussian integral
};

// (N_power, t_power) -> exact coefficient; N_power = 2 - 2g - q at genus g.
using WickParts = std::map<std::pair<int, int>, Rational>;

WickParts wick_parts(const CouplingFamily& fam, const WickQuery& q);

// Sum of all t-powers at genus g (the coupling series evaluated at t = 1).
Rational wick_genus_coefficient(const WickParts& parts, int n_traces, int genus);
// Single (genus, t_power) entry.
Rational wick_genus_t_coefficient(const WickParts& parts, int n_traces, int genus, int t_power);

// Coupling series of T^g_{observable}(lambda) at t = 1 through the given order.
QSeries wick_moment_series(const CouplingFamily& fam, const std::vector<int>& observable, int genus,
                           size_t order, int degree_guard = 14);

// 't Hooft series of T^g_{observable} at fixed couplings (lambda_order = 0
// with an empty direction) through t^{t_order}.
QSeries wick_moment_t_series(const BitracialPotential& p, const std::vector<int>& observable, int genus,
                             size_t t_order, int degree_guard = 14);

// Coupling series of F_g(lambda) = genus-g part of log Z at t = 1 (constant
// term dropped; the Gaussian reference normalizes it away).
QSeries wick_free_energy_series(const CouplingFamily& fam, int genus, size_t order, int degree_guard = 14);

}  // namespace diracens
