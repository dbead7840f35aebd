#include "diracens/dirac.hpp"

#include <cmath>
#include <stdexcept>

namespace diracens {

std::vector<TraceExpansionTerm> dirac_trace_expand(int l) {
    if (l < 1) throw std::invalid_argument("dirac_trace_expand: power must be >= 1");
    std::vector<TraceExpansionTerm> out;
    out.reserve(l + 1);
    for (int k = 0; k <= l; ++k) out.push_back({l - k, k, binomial_big(l, k)});
    return out;
}

void BitracialPotential::add_single(int i, const Rational& v) {
    if (v == 0) return;
    if (i == 2) {
        gaussian_coeff += v;  // callers fold quadratic pieces into the Gaussian weight explicitly
        return;
    }
    single_trace[i] += v;
    if (single_trace[i] == 0) single_trace.erase(i);
}

void BitracialPotential::add_bi(int i, int j, const Rational& v) {
    if (v == 0) return;
    auto key = std::minmax(i, j);
    bi_trace[{key.first, key.second}] += v;
    if (bi_trace[{key.first, key.second}] == 0) bi_trace.erase({key.first, key.second});
}

Rational BitracialPotential::bi(int i, int j) const {
    auto key = std::minmax(i, j);
    auto it = bi_trace.find({key.first, key.second});
    return it == bi_trace.end() ? Rational(0) : it->second;
}

int BitracialPotential::degree() const {
    int d = 2;
    for (const auto& [i, v] : single_trace) d = std::max(d, i);
    for (const auto& [ij, v] : bi_trace) d = std::max(d, std::max(ij.first, ij.second));
    return d;
}

bool BitracialPotential::is_even() const {
    for (const auto& [i, v] : single_trace)
        if (i % 2 != 0) return false;
    for (const auto& [ij, v] : bi_trace)
        if ((ij.first + ij.second) % 2 != 0) return false;
    return true;
}

BitracialPotential BitracialPotential::gaussian(const Rational& t) {
    BitracialPotential p;
    p.hooft_t = t;
    return p;
}

BitracialPotential BitracialPotential::single_trace_model(const std::map<int, Rational>& couplings,
                                                          const Rational& t) {
    BitracialPotential p;
    p.hooft_t = t;
    for (const auto& [i, v] : couplings) {
        if (i == 2)
            p.gaussian_coeff += v;
        else
            p.single_trace[i] = v;
    }
    return p;
}

BitracialPotential potential_to_bitracial(const DiracPotential& p, const Rational& hooft_t) {
    BitracialPotential out;
    out.hooft_t = hooft_t;
    out.gaussian_coeff = Rational(0);
    for (const auto& [l, c] : p.terms) {
        if (c == 0) continue;
        for (const auto& term : dirac_trace_expand(l)) {
            Rational w = c * Rational(term.weight);
            if (term.left == 0 || term.right == 0) {
                // trH^0 = N: single-trace piece N * w * trH^l.
                int i = std::max(term.left, term.right);
                if (i == 0) continue;  // the constant N^2 term shifts log Z only
                if (i == 2)
                    out.gaussian_coeff += 2 * hooft_t * w;  // (N/2t) g pattern
                else
                    out.add_single(i, hooft_t * Rational(i) * w);  // (N/t)(t_i/i) pattern
            } else if (term.right <= term.left) {
                // trH^i trH^j with i,j >= 1: (t_{i,j}/(i+j)) pattern.  The k and
                // l-k binomial terms are the two orderings of one symmetric pair,
                // so the coupling is assigned once.
                out.add_bi(term.left, term.right, w * Rational(term.left + term.right));
            }
        }
    }
    return out;
}

BitracialPotential preset_potential(const std::string& name, const std::map<std::string, Rational>& c) {
    auto get = [&](const std::string& key, const Rational& dflt) {
        auto it = c.find(key);
        return it == c.end() ? dflt : it->second;
    };
    Rational t = get("t", Rational(1));
    if (name == "gaussian") return BitracialPotential::gaussian(t);
    if (name == "quartic")
        return potential_to_bitracial(DiracPotential::quartic(get("t2", 1), get("t4", 0)), t);
    if (name == "cubic")
        return potential_to_bitracial(DiracPotential::cubic(get("t2", 1), get("t3", 0)), t);
    if (name == "hexic")
        return potential_to_bitracial(DiracPotential::hexic(get("t2", 1), get("t4", 0), get("t6", 0)), t);
    if (name == "quartic-single")
        return BitracialPotential::single_trace_model({{4, get("t4", 0)}}, t);
    if (name == "cubic-single")
        return BitracialPotential::single_trace_model({{3, get("t3", 0)}}, t);
    if (name == "hexic-single")
        return BitracialPotential::single_trace_model({{4, get("t4", 0)}, {6, get("t6", 0)}}, t);
    throw std::invalid_argument("unknown potential preset: " + name);
}

double action_from_power_sums(const BitracialPotential& p, const std::vector<double>& ps, int N) {
    const int d = p.degree();
    if (static_cast<int>(ps.size()) < d + 1) throw std::invalid_argument("action: power sums too short");
    const double t = to_double(p.hooft_t);
    double s = (N / (2.0 * t)) * to_double(p.gaussian_coeff) * ps[2];
    for (const auto& [i, v] : p.single_trace) s += (N / t) * (to_double(v) / i) * ps[i];
    for (const auto& [ij, v] : p.bi_trace) {
        auto [i, j] = ij;
        double w = to_double(v) / (i + j);
        // ordered sum over (i,j) and (j,i)
        s += (i == j ? 1.0 : 2.0) * w * ps[i] * ps[j];
    }
    return s;
}

double action_value(const BitracialPotential& p, const std::vector<double>& eigenvalues, int N) {
    if (static_cast<int>(eigenvalues.size()) != N)
        throw std::invalid_argument("action_value: eigenvalue count != N");
    const int d = p.degree();
    std::vector<double> ps(d + 1, 0.0);
    ps[0] = N;
    for (double lam : eigenvalues) {
        double pw = 1.0;
        for (int k = 1; k <= d; ++k) {
            pw *= lam;
            ps[k] += pw;
        }
    }
    return action_from_power_sums(p, ps, N);
}

}  // namespace diracens
