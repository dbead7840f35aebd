#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "diracens/dirac.hpp"
#include "diracens/spectral.hpp"

namespace diracens {

struct MCRun {
    int N = 32;
    long sweeps = 200000;       // one sweep = N^2 single-entry proposals
    long burn_in = 20000;       // sweeps with step autotuning
    double step_scale = 0.5;    // initial proposal half-width
    std::uint64_t seed = 12345;
    int chains = 4;
    int sample_every = 5;       // sweeps between eigenvalue samples
    double guard_radius = 40;   // abort when an eigenvalue estimate leaves the box
};

struct Histogram {
    double lo = -8, hi = 8;
    std::vector<long long> counts;
    long long total = 0;

    explicit Histogram(int bins = 4000, double lo_ = -8, double hi_ = 8)
        : lo(lo_), hi(hi_), counts(bins, 0) {}
    void add(double x) {
        int b = static_cast<int>((x - lo) / (hi - lo) * counts.size());
        b = std::max(0, std::min(static_cast<int>(counts.size()) - 1, b));
        ++counts[b];
        ++total;
    }
    double edge(size_t b) const { return lo + (hi - lo) * b / counts.size(); }
};

struct MCResult {
    MCRun run;
    std::map<int, double> H_moment;     // (1/N) tr H^k estimates
    std::map<int, double> H_moment_se;
    std::map<int, double> D_moment;     // (1/N^2) tr D^k estimates
    std::map<int, double> D_moment_se;
    Histogram H_hist{4000, -8, 8};
    Histogram D_hist{4000, -16, 16};
    double acceptance_rate = 0;
    double step_final = 0;
    long long samples = 0;
    // worst per-sample relative deviation of tr D^k from the binomial
    // combination of H traces (an identity per configuration)
    double dirac_identity_max_dev = 0;
    std::vector<std::map<int, double>> chain_H_moment;  // per chain, for SEs
};

// Single-entry Metropolis over Hermitian H (real/imaginary parts and the
// diagonal separately), action evaluated through incrementally maintained
// power sums.  Supports potentials of degree <= 4.
MCResult metropolis_sample(const BitracialPotential& p, const MCRun& run);

struct DensityComparison {
    double ks = 0;                     // Kolmogorov-Smirnov distance to the analytic density
    std::map<int, double> moment_z;    // (estimate - analytic) / combined tolerance
    double finite_n_allowance = 0;     // 2/N^2 genus-1 bias budget
    bool pass(double ks_threshold = 0.03, double z_threshold = 3.0) const {
        if (ks > ks_threshold) return false;
        for (const auto& [k, z] : moment_z)
            if (std::fabs(z) > z_threshold) return false;
        return true;
    }
};

DensityComparison compare_density(const MCResult& result, const Density& d);

}  // namespace diracens
