#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "diracens/rational.hpp"

namespace diracens {

// S(D) = sum_l c_l tr D^l for the type (1,0) triple, D = H (x) I + I (x) H.
struct DiracPotential {
    std::vector<std::pair<int, Rational>> terms;  // (power l, coupling c_l), powers distinct

    static DiracPotential quartic(const Rational& t2, const Rational& t4) {
        return {{{2, t2 / 4}, {4, t4 / 8}}};
    }
    static DiracPotential cubic(const Rational& t2, const Rational& t3) {
        return {{{2, t2 / 4}, {3, t3 / 6}}};
    }
    static DiracPotential hexic(const Rational& t2, const Rational& t4, const Rational& t6) {
        return {{{2, t2 / 4}, {4, t4 / 8}, {6, t6 / 12}}};
    }
};

// One term of the binomial expansion of tr D^l: weight * trH^{l-k} trH^k.
struct TraceExpansionTerm {
    int left;   // l - k
    int right;  // k
    BigInt weight;
};

// tr D^l = sum_k C(l,k) trH^{l-k} trH^k, with trH^0 read as the symbol N.
std::vector<TraceExpansionTerm> dirac_trace_expand(int l);

// Bi-tracial Hermitian potential
//   S(H) = (N/2t) g2 trH^2 + sum_i (N/t)(t_i/i) trH^i
//        + sum_{i,j} (t_{i,j}/(i+j)) trH^i trH^j        (ordered sum, t symmetric)
// Couplings are kept exact; numeric paths convert on demand.
class BitracialPotential {
  public:
    BitracialPotential() = default;

    Rational hooft_t = Rational(1);
    Rational gaussian_coeff = Rational(1);
    std::map<int, Rational> single_trace;                 // i >= 1, i != 2
    std::map<std::pair<int, int>, Rational> bi_trace;     // keyed i <= j, symmetric value

    void add_single(int i, const Rational& v);
    void add_bi(int i, int j, const Rational& v);
    Rational bi(int i, int j) const;

    // Highest power of H appearing in any term.
    int degree() const;
    bool has_bi_trace() const { return !bi_trace.empty(); }
    // Invariant under H -> -H (every term of even total degree)?
    bool is_even() const;

    static BitracialPotential gaussian(const Rational& t = Rational(1));
    // Single-trace reference models, unit Gaussian normalization.
    static BitracialPotential single_trace_model(const std::map<int, Rational>& couplings,
                                                 const Rational& t = Rational(1));
};

// Expands a Dirac potential into its bi-tracial Hermitian form via the
// binomial trace identity.  All terms are kept, including the odd bi-trace
// products that drop out of the symmetric phase.
BitracialPotential potential_to_bitracial(const DiracPotential& p, const Rational& hooft_t = Rational(1));

// Named presets for config/CLI use: "gaussian", "quartic", "cubic", "hexic"
// (Dirac ensembles) and "quartic-single", "cubic-single", "hexic-single"
// (their single-trace counterparts).  `couplings` supplies t2.., keyed by name.
BitracialPotential preset_potential(const std::string& name, const std::map<std::string, Rational>& couplings);

// S(H) evaluated on an eigenvalue configuration, tr H^k = sum_i lambda_i^k.
double action_value(const BitracialPotential& p, const std::vector<double>& eigenvalues, int N);

// Same action from precomputed power sums p_k = tr H^k, k = 0..degree.
double action_from_power_sums(const BitracialPotential& p, const std::vector<double>& power_sums, int N);

}  // namespace diracens
