#include "diracens/mc.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <thread>

namespace diracens {

namespace {

using CMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;

// Bounded-below check for the sampled region: the top-degree single-trace
// coupling must be positive (even degree) or the model purely Gaussian.
void check_region(const BitracialPotential& p) {
    int d = p.degree();
    if (d == 2) {
        if (p.gaussian_coeff <= 0)
            throw std::domain_error("metropolis_sample: Gaussian coefficient must be positive");
        return;
    }
    auto it = p.single_trace.find(d);
    Rational lead = it != p.single_trace.end() ? it->second : Rational(0);
    if (d % 2 != 0 || lead < 0)
        throw std::domain_error(
            "metropolis_sample: action unbounded below at these couplings "
            "(neither-formal-nor-convergent region); sampling refused");
}

struct ChainState {
    int N;
    int degree;
    CMat H;
    CMat H2;            // maintained when degree >= 3
    std::vector<double> ps;  // power sums tr H^k, k = 0..degree

    void refresh() {
        if (degree >= 3) H2 = H * H;
        ps.assign(degree + 1, 0.0);
        ps[0] = N;
        ps[1] = H.trace().real();
        ps[2] = degree >= 3 ? H2.trace().real() : H.squaredNorm();
        if (degree >= 3) ps[3] = (H2 * H).trace().real();
        if (degree >= 4) ps[4] = H2.squaredNorm();
    }
};

struct ChainResult {
    std::map<int, std::vector<double>> h_samples;  // k -> per-sample (1/N) tr H^k
    std::map<int, std::vector<double>> d_samples;
    Histogram h_hist{4000, -8, 8};
    Histogram d_hist{4000, -16, 16};
    long long proposals = 0, accepts = 0, samples = 0;
    double step_final = 0;
    double identity_dev = 0;
};

ChainResult run_chain(const BitracialPotential& pot, const MCRun& run, int chain_index) {
    const int N = run.N;
    const int d = pot.degree();
    ChainState st;
    st.N = N;
    st.degree = std::max(2, d);
    st.H = CMat::Zero(N, N);
    st.refresh();

    std::mt19937_64 rng(run.seed + 0x9E3779B97F4A7C15ull * (chain_index + 1));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    const double t = to_double(pot.hooft_t);
    const double g2 = to_double(pot.gaussian_coeff);
    struct SingleTerm { int i; double w; };
    struct BiTerm { int i, j; double w; };
    std::vector<SingleTerm> singles;
    std::vector<BiTerm> bis;
    for (const auto& [i, c] : pot.single_trace)
        if (c != 0) singles.push_back({i, (N / t) * to_double(c) / i});
    for (const auto& [ij, c] : pot.bi_trace)
        if (c != 0)
            bis.push_back({ij.first, ij.second,
                           (ij.first == ij.second ? 1.0 : 2.0) * to_double(c) / (ij.first + ij.second)});
    auto action = [&](const std::vector<double>& ps) {
        double s = (N / (2.0 * t)) * g2 * ps[2];
        for (const auto& [i, w] : singles) s += w * ps[i];
        for (const auto& bt : bis) s += bt.w * ps[bt.i] * ps[bt.j];
        return s;
    };

    double step = run.step_scale;
    long long accepts_window = 0, window = 0;
    ChainResult out;

    const long total_sweeps = run.burn_in + run.sweeps;
    std::vector<double> ps_new(st.degree + 1, 0.0);
    Eigen::SelfAdjointEigenSolver<CMat> eig;
    double S_cur = action(st.ps);

    for (long sweep = 0; sweep < total_sweeps; ++sweep) {
        for (int i = 0; i < N; ++i) {
            for (int j = i; j < N; ++j) {
                int reps = (i == j) ? 1 : 2;
                for (int part = 0; part < reps; ++part) {
                    ++out.proposals;
                    ++window;
                    const double eps = step * uni(rng);
                    // exact trace increments for H' = H + Delta
                    double a1, a2 = 0, a3 = 0, q = 0, s2, hii = 0, hjj = 0, h2ii = 0, h2jj = 0;
                    if (i == j) {
                        a1 = eps * st.H(i, i).real();
                        s2 = eps * eps;
                        if (d >= 3) {
                            a2 = eps * st.H2(i, i).real();
                            hii = st.H(i, i).real();
                        }
                        if (d >= 4) {
                            a3 = eps * (st.H2.row(i) * st.H.col(i))(0, 0).real();
                            h2ii = st.H2(i, i).real();
                            q = eps * eps * hii * hii;
                        }
                    } else {
                        std::complex<double> hij = st.H(i, j);
                        if (part == 0)
                            a1 = 2 * eps * hij.real();
                        else
                            a1 = 2 * eps * hij.imag();
                        s2 = 2 * eps * eps;
                        if (d >= 3) {
                            std::complex<double> h2ij = st.H2(i, j);
                            a2 = 2 * eps * (part == 0 ? h2ij.real() : h2ij.imag());
                            hii = st.H(i, i).real();
                            hjj = st.H(j, j).real();
                        }
                        if (d >= 4) {
                            std::complex<double> h3ij = (st.H2.row(i) * st.H.col(j))(0, 0);
                            a3 = 2 * eps * (part == 0 ? h3ij.real() : h3ij.imag());
                            h2ii = st.H2(i, i).real();
                            h2jj = st.H2(j, j).real();
                            double re2 = (hij * hij).real();
                            q = (part == 0) ? 2 * eps * eps * (re2 + hii * hjj)
                                            : -2 * eps * eps * (re2 - hii * hjj);
                        }
                    }
                    for (int k = 0; k <= st.degree; ++k) ps_new[k] = st.ps[k];
                    if (i == j) ps_new[1] += eps;
                    ps_new[2] += 2 * a1 + s2;
                    if (d >= 3) {
                        double trHD2 = (i == j) ? eps * eps * hii : eps * eps * (hii + hjj);
                        double trD3 = (i == j) ? eps * eps * eps : 0.0;
                        ps_new[3] += 3 * a2 + 3 * trHD2 + trD3;
                    }
                    if (d >= 4) {
                        double trH2D2 = (i == j) ? eps * eps * h2ii : eps * eps * (h2ii + h2jj);
                        double trD4 = (i == j) ? std::pow(eps, 4) : 2 * std::pow(eps, 4);
                        ps_new[4] += 4 * a3 + 4 * trH2D2 + 2 * q + 4 * eps * eps * a1 + trD4;
                    }
                    double S_new = action(ps_new);
                    if (S_new - S_cur < 0 || u01(rng) < std::exp(-(S_new - S_cur))) {
                        ++out.accepts;
                        ++accepts_window;
                        // apply the update to H (and H2 rows/columns)
                        std::complex<double> delta;
                        if (i == j)
                            delta = std::complex<double>(eps, 0);
                        else
                            delta = (part == 0) ? std::complex<double>(eps, 0)
                                                : std::complex<double>(0, eps);
                        if (d >= 3) {
                            // H2' = H2 + H Delta + Delta H + Delta^2 touches rows/cols i, j
                            for (int k = 0; k < N; ++k) {
                                std::complex<double> hki = st.H(k, i), hkj = st.H(k, j);
                                // (H Delta): column j += H(:,i) delta ; column i += H(:,j) conj(delta)
                                st.H2(k, j) += hki * delta;
                                if (i != j) st.H2(k, i) += hkj * std::conj(delta);
                                // (Delta H): row i += conj... (Delta H)(i,k) = delta H(j,k)
                                st.H2(i, k) += delta * st.H(j, k);
                                if (i != j) st.H2(j, k) += std::conj(delta) * st.H(i, k);
                            }
                            st.H2(i, i) += std::norm(delta);
                            if (i != j) st.H2(j, j) += std::norm(delta);
                        }
                        st.H(i, j) += delta;
                        if (i != j) st.H(j, i) += std::conj(delta);
                        std::swap(st.ps, ps_new);
                        S_cur = S_new;
                    }
                }
            }
        }
        // periodic exact refresh against drift
        if ((sweep & 0x3) == 0x3) {
            st.refresh();
            S_cur = action(st.ps);
        }
        if (sweep < run.burn_in) {
            if (window >= 512) {
                double rate = double(accepts_window) / window;
                if (rate > 0.6)
                    step *= 1.15;
                else if (rate < 0.3)
                    step /= 1.15;
                accepts_window = 0;
                window = 0;
            }
            continue;
        }
        if ((sweep - run.burn_in) % run.sample_every == 0) {
            st.refresh();
            S_cur = action(st.ps);
            eig.compute(st.H, Eigen::EigenvaluesOnly);
            Eigen::VectorXd lam = eig.eigenvalues();
            double lam_max = lam.cwiseAbs().maxCoeff();
            if (lam_max > run.guard_radius)
                throw std::domain_error(
                    "metropolis_sample: divergent action trajectory (unbounded direction); "
                    "couplings fall outside the sampleable (formal/convergent) region");
            // power sums from eigenvalues for the Dirac identity check
            std::vector<double> lp(2 * d + 1, 0.0);
            lp[0] = N;
            for (int k = 0; k < N; ++k) {
                double pw = 1;
                for (int m = 1; m <= 2 * d; ++m) {
                    pw *= lam[k];
                    lp[m] += pw;
                }
            }
            for (int k = 1; k <= st.degree; ++k)
                out.h_samples[k].push_back(lp[k] / N);
            for (int k = 0; k < N; ++k) out.h_hist.add(lam[k]);
            // Dirac spectrum: lambda_i + lambda_j over ordered pairs
            for (int ell = 1; ell <= std::min(4, 2 * d); ++ell) {
                double tr_binom = 0;
                for (int kk = 0; kk <= ell; ++kk)
                    tr_binom += to_double(Rational(binomial_big(ell, kk))) * lp[ell - kk] * lp[kk];
                out.d_samples[ell].push_back(tr_binom / (double(N) * N));
            }
            double direct[5] = {0, 0, 0, 0, 0};
            for (int a = 0; a < N; ++a)
                for (int b = 0; b < N; ++b) {
                    double v = lam[a] + lam[b];
                    out.d_hist.add(v);
                    double pw = 1;
                    for (int ell = 1; ell <= 4; ++ell) {
                        pw *= v;
                        direct[ell] += pw;
                    }
                }
            for (int ell = 1; ell <= std::min(4, 2 * d); ++ell) {
                double binom = 0;
                for (int kk = 0; kk <= ell; ++kk)
                    binom += to_double(Rational(binomial_big(ell, kk))) * lp[ell - kk] * lp[kk];
                double dev = std::fabs(direct[ell] - binom) / std::max(1.0, std::fabs(binom));
                out.identity_dev = std::max(out.identity_dev, dev);
            }
            ++out.samples;
        }
    }
    out.step_final = step;
    return out;
}

}  // namespace

MCResult metropolis_sample(const BitracialPotential& p, const MCRun& run) {
    if (p.degree() > 4)
        throw std::invalid_argument(
            "metropolis_sample: potentials of degree > 4 are not supported by the incremental sampler");
    check_region(p);

    std::vector<ChainResult> chains(run.chains);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(run.chains);
    for (int c = 0; c < run.chains; ++c)
        pool.emplace_back([&, c]() {
            try {
                chains[c] = run_chain(p, run, c);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    MCResult out;
    out.run = run;
    long long props = 0, accs = 0;
    for (const auto& ch : chains) {
        props += ch.proposals;
        accs += ch.accepts;
        out.samples += ch.samples;
        out.dirac_identity_max_dev = std::max(out.dirac_identity_max_dev, ch.identity_dev);
    }
    out.acceptance_rate = props ? double(accs) / props : 0;
    out.step_final = chains.empty() ? run.step_scale : chains[0].step_final;

    // merge histograms (deterministic chain order)
    for (const auto& ch : chains) {
        for (size_t b = 0; b < ch.h_hist.counts.size(); ++b) out.H_hist.counts[b] += ch.h_hist.counts[b];
        out.H_hist.total += ch.h_hist.total;
        for (size_t b = 0; b < ch.d_hist.counts.size(); ++b) out.D_hist.counts[b] += ch.d_hist.counts[b];
        out.D_hist.total += ch.d_hist.total;
    }

    // chain means and cross-chain standard errors
    auto reduce = [&](auto member, std::map<int, double>& mean_out, std::map<int, double>& se_out,
                      std::vector<std::map<int, double>>* per_chain) {
        std::map<int, std::vector<double>> chain_means;
        for (const auto& ch : chains) {
            std::map<int, double> cm;
            for (const auto& [k, v] : ch.*member) {
                double m = 0;
                for (double x : v) m += x;
                m /= std::max<size_t>(1, v.size());
                chain_means[k].push_back(m);
                cm[k] = m;
            }
            if (per_chain) per_chain->push_back(cm);
        }
        for (const auto& [k, means] : chain_means) {
            double m = 0;
            for (double x : means) m += x;
            m /= means.size();
            double var = 0;
            for (double x : means) var += (x - m) * (x - m);
            var = means.size() > 1 ? var / (means.size() - 1) : 0.0;
            mean_out[k] = m;
            se_out[k] = std::sqrt(var / means.size());
        }
    };
    reduce(&ChainResult::h_samples, out.H_moment, out.H_moment_se, &out.chain_H_moment);
    reduce(&ChainResult::d_samples, out.D_moment, out.D_moment_se, nullptr);
    return out;
}

DensityComparison compare_density(const MCResult& result, const Density& d) {
    DensityComparison cmp;
    if (result.H_hist.total == 0) throw std::invalid_argument("compare_density: empty histogram");
    cmp.finite_n_allowance = 2.0 / (double(result.run.N) * result.run.N);

    long long cum = 0;
    double ks = 0;
    const auto& h = result.H_hist;
    for (size_t b = 0; b < h.counts.size(); ++b) {
        cum += h.counts[b];
        double edge = h.edge(b + 1);
        double analytic = d.cdf(edge);
        ks = std::max(ks, std::fabs(double(cum) / h.total - analytic));
    }
    cmp.ks = ks;

    for (const auto& [k, est] : result.H_moment) {
        if (k > 6) continue;
        double analytic = d.moment(k);
        double se = result.H_moment_se.count(k) ? result.H_moment_se.at(k) : 0.0;
        double tol = 3.0 * se + cmp.finite_n_allowance;
        cmp.moment_z[k] = tol > 0 ? (est - analytic) / (tol / 3.0) : 0.0;
    }
    return cmp;
}

}  // namespace diracens
