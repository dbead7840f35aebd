#include "diracens/wick.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace diracens {

namespace {

int thread_count() {
    if (const char* env = std::getenv("DIRACENS_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// one expansion term of exp(-S_int)
struct InsertionType {
    std::vector<int> lengths;  // one or two trace factors
    Rational coeff;            // action coefficient (sign applied during assembly)
    int n_prefactor;           // number of (N/t) weights carried
    int lambda_pow;            // 0 or 1
    int degree() const {
        int d = 0;
        for (int l : lengths) d += l;
        return d;
    }
};

std::vector<InsertionType> insertion_types(const BitracialPotential& pot, int lambda_pow,
                                           bool include_gaussian) {
    std::vector<InsertionType> out;
    if (include_gaussian && pot.gaussian_coeff != 0)
        out.push_back({{2}, pot.gaussian_coeff / 2, 1, lambda_pow});
    for (const auto& [i, c] : pot.single_trace)
        if (c != 0) out.push_back({{i}, c / i, 1, lambda_pow});
    for (const auto& [ij, c] : pot.bi_trace) {
        if (c == 0) continue;
        auto [i, j] = ij;
        Rational w = c / (i + j);
        if (i != j) w *= 2;
        out.push_back({{i, j}, w, 0, lambda_pow});
    }
    return out;
}

// loops -> number of pairings connecting all units, enumerated over labeled
// pairings of the slot set.
struct PairingCounter {
    std::vector<int> succ;       // cyclic successor within each trace
    std::vector<int> unit;       // connectivity unit per slot
    int nunits = 0;
    int nslots = 0;

    std::map<int, long long> count(int threads) const {
        std::map<int, long long> total;
        if (nslots == 0) return total;
        if (nslots % 2) return total;
        // split work on the first slot's partner
        std::vector<std::map<int, long long>> partial(nslots, std::map<int, long long>{});
        std::atomic<int> next(1);
        auto worker = [&]() {
            for (;;) {
                int p = next.fetch_add(1);
                if (p >= nslots) return;
                std::vector<int> partner(nslots, -1);
                partner[0] = p;
                partner[p] = 0;
                partial[p] = std::map<int, long long>{};
                recurse(partner, partial[p]);
            }
        };
        int nt = std::min(threads, nslots - 1);
        std::vector<std::thread> pool;
        for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        for (int p = 1; p < nslots; ++p)
            for (auto [loops, n] : partial[p]) total[loops] += n;
        return total;
    }

  private:
    void recurse(std::vector<int>& partner, std::map<int, long long>& acc) const {
        int first = -1;
        for (int s = 0; s < nslots; ++s)
            if (partner[s] < 0) {
                first = s;
                break;
            }
        if (first < 0) {
            finish(partner, acc);
            return;
        }
        for (int s = first + 1; s < nslots; ++s) {
            if (partner[s] >= 0) continue;
            partner[first] = s;
            partner[s] = first;
            recurse(partner, acc);
            partner[first] = -1;
            partner[s] = -1;
        }
    }

    void finish(const std::vector<int>& partner, std::map<int, long long>& acc) const {
        // connectivity over units
        std::vector<int> root(nunits);
        for (int i = 0; i < nunits; ++i) root[i] = i;
        auto find = [&](int a) {
            while (root[a] != a) a = root[a] = root[root[a]];
            return a;
        };
        for (int s = 0; s < nslots; ++s) {
            int a = find(unit[s]), b = find(unit[partner[s]]);
            if (a != b) root[a] = b;
        }
        int comps = 0;
        for (int i = 0; i < nunits; ++i)
            if (find(i) == i) ++comps;
        if (comps != 1) return;
        // index loops: cycles of s -> succ[partner[s]]
        int loops = 0;
        unsigned visited = 0;
        static_assert(sizeof(unsigned) * 8 >= 20, "slot bitmask");
        for (int s = 0; s < nslots; ++s) {
            if (visited & (1u << s)) continue;
            ++loops;
            int cur = s;
            do {
                visited |= 1u << cur;
                cur = succ[partner[cur]];
            } while (cur != s);
        }
        acc[loops] += 1;
    }
};

struct MultisetContext {
    const std::vector<InsertionType>* types;
    const WickQuery* query;
    Rational inv_g2;
    WickParts parts;
    int threads = 1;

    void process(const std::vector<int>& counts) {
        // assemble trace list
        std::vector<std::vector<int>> traces;  // grouped by unit
        int q = 0;
        for (int l : (*query).observable) {
            traces.push_back({l});
            ++q;
        }
        Rational weight(1);
        int n1 = 0, deg = 0;
        for (size_t t = 0; t < counts.size(); ++t) {
            const InsertionType& ty = (*types)[t];
            for (int k = 0; k < counts[t]; ++k) {
                traces.push_back(ty.lengths);
                weight *= -ty.coeff;
                weight /= (k + 1);  // 1/k! of the exponential expansion
                n1 += ty.n_prefactor;
                deg += ty.degree();
            }
        }
        for (int l : (*query).observable) deg += l;
        if (deg % 2) return;
        int P = deg / 2;
        int t_power = P - n1;
        if (t_power > (*query).t_power_max) return;
        if (deg == 0) return;

        PairingCounter pc;
        pc.nunits = static_cast<int>(traces.size());
        for (int u = 0; u < pc.nunits; ++u) {
            for (int l : traces[u]) {
                int start = pc.nslots;
                for (int i = 0; i < l; ++i) {
                    pc.succ.push_back(i + 1 < l ? start + i + 1 : start);
                    pc.unit.push_back(u);
                }
                pc.nslots += l;
            }
        }
        if (pc.nslots > 20) throw std::runtime_error("wick: slot budget exceeded");
        auto by_loops = pc.count(threads);
        for (auto [loops, n] : by_loops) {
            int n_power = loops + n1 - P;
            Rational contrib = weight * Rational(n) * rational_pow(inv_g2, P);
            auto key = std::make_pair(n_power, t_power);
            parts[key] += contrib;
            if (parts[key] == 0) parts.erase(key);
        }
        (void)q;
    }

    int min_lambda_degree() const {
        int md = 1 << 20;
        for (const auto& ty : *types)
            if (ty.lambda_pow > 0) md = std::min(md, ty.degree());
        return md;
    }
};

void enumerate_multisets(MultisetContext& ctx, std::vector<int>& counts, size_t at, int lambda_left,
                         int degree_left) {
    const auto& types = *ctx.types;
    if (at == types.size()) {
        if (lambda_left == 0) ctx.process(counts);
        return;
    }
    const InsertionType& ty = types[at];
    int max_k = degree_left / std::max(1, ty.degree());
    if (ty.lambda_pow > 0) max_k = std::min(max_k, lambda_left / ty.lambda_pow);
    for (int k = 0; k <= max_k; ++k) {
        counts[at] = k;
        enumerate_multisets(ctx, counts, at + 1, lambda_left - k * ty.lambda_pow,
                            degree_left - k * ty.degree());
    }
    counts[at] = 0;
}

}  // namespace

WickParts wick_parts(const CouplingFamily& fam, const WickQuery& q) {
    if (fam.base.gaussian_coeff <= 0)
        throw std::invalid_argument("wick_parts: base Gaussian coefficient must be positive");
    std::vector<InsertionType> types = insertion_types(fam.base, 0, /*include_gaussian=*/false);
    auto dir_types = insertion_types(fam.direction, 1, /*include_gaussian=*/true);
    types.insert(types.end(), dir_types.begin(), dir_types.end());

    MultisetContext ctx;
    ctx.types = &types;
    ctx.query = &q;
    ctx.inv_g2 = Rational(1) / fam.base.gaussian_coeff;
    ctx.threads = thread_count();

    int obs_deg = 0;
    for (int l : q.observable) obs_deg += l;
    if (q.lambda_order > 0) {
        int need = obs_deg + q.lambda_order * ctx.min_lambda_degree();
        if (need > q.degree_guard)
            throw std::runtime_error("wick: degree guard exceeded (query needs degree >= " +
                                     std::to_string(need) + ")");
    } else if (obs_deg > q.degree_guard) {
        throw std::runtime_error("wick: degree guard exceeded by the observable alone");
    }
    std::vector<int> counts(types.size(), 0);
    enumerate_multisets(ctx, counts, 0, q.lambda_order, q.degree_guard - obs_deg);
    return ctx.parts;
}

Rational wick_genus_coefficient(const WickParts& parts, int n_traces, int genus) {
    int target = 2 - 2 * genus - n_traces;
    Rational acc(0);
    for (const auto& [key, v] : parts)
        if (key.first == target) acc += v;
    return acc;
}

Rational wick_genus_t_coefficient(const WickParts& parts, int n_traces, int genus, int t_power) {
    int target = 2 - 2 * genus - n_traces;
    auto it = parts.find({target, t_power});
    return it == parts.end() ? Rational(0) : it->second;
}

QSeries wick_moment_series(const CouplingFamily& fam, const std::vector<int>& observable, int genus,
                           size_t order, int degree_guard) {
    QSeries out(order, 'g');
    for (size_t k = 0; k <= order; ++k) {
        WickQuery q;
        q.observable = observable;
        q.lambda_order = static_cast<int>(k);
        q.degree_guard = degree_guard;
        auto parts = wick_parts(fam, q);
        out.set(k, wick_genus_coefficient(parts, static_cast<int>(observable.size()), genus));
    }
    return out;
}

QSeries wick_moment_t_series(const BitracialPotential& p, const std::vector<int>& observable, int genus,
                             size_t t_order, int degree_guard) {
    CouplingFamily fam{p, BitracialPotential::gaussian(p.hooft_t)};
    fam.direction.gaussian_coeff = Rational(0);
    QSeries out(t_order, 't');
    // stuffed-map vertex grading: t^v with v = (P - n1) + (2 - 2g - q)
    const int euler = 2 - 2 * genus - static_cast<int>(observable.size());
    WickQuery q;
    q.observable = observable;
    q.lambda_order = 0;
    q.t_power_max = static_cast<int>(t_order) - euler;
    q.degree_guard = degree_guard;
    auto parts = wick_parts(fam, q);
    for (size_t v = 0; v <= t_order; ++v) {
        int t_power = static_cast<int>(v) - euler;
        if (t_power < 0) continue;
        out.set(v, wick_genus_t_coefficient(parts, static_cast<int>(observable.size()), genus, t_power));
    }
    return out;
}

QSeries wick_free_energy_series(const CouplingFamily& fam, int genus, size_t order, int degree_guard) {
    QSeries out(order, 'g');
    for (size_t k = 1; k <= order; ++k) {
        WickQuery q;
        q.observable = {};
        q.lambda_order = static_cast<int>(k);
        q.degree_guard = degree_guard;
        auto parts = wick_parts(fam, q);
        out.set(k, wick_genus_coefficient(parts, 0, genus));
    }
    return out;
}

}  // namespace diracens
