#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diracens/recursion.hpp"
#include "diracens/spectral.hpp"

namespace diracens {

// Spectral-curve cusp: coupling values where the edge factor M vanishes at
// the cut endpoint (plus M'(a) = 0 for the hexic multicritical point).
struct CriticalPoint {
    std::string family;
    std::map<std::string, double> couplings;
    double alpha_c = 0;
    double gamma_sq_c = 1;
    std::pair<int, int> minimal_model{3, 2};
};

// family: "quartic-single", "hexic-single", "cubic-single",
// or "cubic-dirac" (fixed t3, cusp in t2; couplings carry both).
CriticalPoint find_critical(const std::string& family);
// cusp of the cubic Dirac ensemble along t2 at fixed t3
CriticalPoint find_critical_cubic_dirac(double t3);

// Matched Dirac-ensemble couplings whose effective derivative equals the
// named single-trace model's derivative.  For the cubic the match holds
// after recentering x -> x - shift (the two even models have shift = 0).
struct MatchingResult {
    BitracialPotential dirac;
    BitracialPotential single;
    std::map<std::string, double> couplings;
    double shift = 0;
};

MatchingResult matching_tuning_quartic(double t4);
MatchingResult matching_tuning_hexic(double t4, double t6);
MatchingResult matching_tuning_cubic(double t3);

// max |W_dirac(x) - W_single(x - shift)| over off-cut sample points
double matching_resolvent_mismatch(const MatchingResult& m, int npoints = 50);

struct PhaseDiagramRow {
    double t4 = 0;
    double t2_transition = std::numeric_limits<double>::quiet_NaN();         // rho(0) = 0 on the continued branch
    double t2_transition_closed = std::numeric_limits<double>::quiet_NaN();  // -(5 t4 + 3)/sqrt(t4)
    double transition_deviation = std::numeric_limits<double>::quiet_NaN();
    double t2_matching = std::numeric_limits<double>::quiet_NaN();           // t2 = 1 - 3 T2 t4
    double t2_matching_closed = std::numeric_limits<double>::quiet_NaN();
    std::string region_at_matching;    // formal / convergent / both / neither
    std::string region_at_transition;
};

// Quadrant classification of the quartic coupling plane:
// t4 > 0 => convergent model, t2 > 0 => formal model.
std::string region_label(double t2, double t4);

std::vector<PhaseDiagramRow> quartic_phase_diagram(double t4_lo, double t4_hi, int n);

// Formal solution v(y) = sqrt(y) sum_k a_k y^{-5k/2}, a_0 = 1, of the
// Painleve I equation y = v^2 - v''/3.
struct PainleveSeries {
    std::vector<Rational> a;
    // y - (v^2 - v''/3) order by order on the exponent lattice (1 - 5m/2)
    std::vector<Rational> substitution_residual() const;
};
PainleveSeries painleve_series(size_t order);

// Domb-Sykes ratio analysis of a coefficient sequence f_k ~ C k^{-p-1} tc^{-k}:
// fit f_k/f_{k-1} = A + B/k => tc = 1/A, exponent p = -B/A - 1.
struct RatioAnalysis {
    bool singular = false;   // false: no singularity detected (entire/constant series)
    double t_c = 0;
    double exponent = 0;
    int points_used = 0;
    int stride = 1;          // 2 when only every other coefficient is nonzero
};
RatioAnalysis singular_exponent(const std::vector<double>& coeffs, int min_points = 8);

// (2m+1, 2) labels: quartic and cubic map to (3,2), hexic to (5,2),
// even degree 2m+2 to (2m+1, 2).
std::pair<int, int> minimal_model_label(const DiracPotential& p);

// Log-log slope of rho(a - eps) over a decade ladder of eps values;
// 0.5 on a regular edge, 1.5 at a (3,2) cusp, 2.5 at the hexic (5,2) cusp.
double edge_exponent(const Density& d, const std::vector<double>& eps_ladder);
double edge_exponent(const Density& d);

}  // namespace diracens
