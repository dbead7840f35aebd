#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "diracens/criticality.hpp"
#include "diracens/io.hpp"
#include "diracens/mc.hpp"
#include "diracens/recursion.hpp"
#include "diracens/version.hpp"
#include "diracens/wick.hpp"

using namespace diracens;

namespace {

struct GlobalOpts {
    std::string out = "out";
    double tol = 1e-10;
    int threads = 0;
    std::string mode = "numeric";  // or formal:<order>
    bool check = false;
};

struct ModelOpts {
    std::string model = "quartic";
    std::string t2 = "1", t3 = "0", t4 = "0", t6 = "0", t = "1";

    BitracialPotential build() const {
        std::map<std::string, Rational> c;
        c["t2"] = rational_from_string(t2);
        c["t3"] = rational_from_string(t3);
        c["t4"] = rational_from_string(t4);
        c["t6"] = rational_from_string(t6);
        c["t"] = rational_from_string(t);
        return preset_potential(model, c);
    }
    Json config() const {
        return Json{{"model", model}, {"t2", t2}, {"t3", t3}, {"t4", t4}, {"t6", t6}, {"t", t}};
    }
};

void add_model_flags(CLI::App* cmd, ModelOpts& m) {
    cmd->add_option("--model", m.model,
                    "potential preset: gaussian|quartic|cubic|hexic|quartic-single|cubic-single|hexic-single");
    cmd->add_option("--t2", m.t2, "coupling t2 (rational or decimal string)");
    cmd->add_option("--t3", m.t3, "coupling t3");
    cmd->add_option("--t4", m.t4, "coupling t4");
    cmd->add_option("--t6", m.t6, "coupling t6");
    cmd->add_option("--t", m.t, "'t Hooft parameter");
}

std::string out_path(const GlobalOpts& g, const std::string& name) {
    std::filesystem::create_directories(g.out);
    return (std::filesystem::path(g.out) / name).string();
}

int formal_order(const std::string& mode) {
    if (mode.rfind("formal:", 0) == 0) return std::stoi(mode.substr(7));
    return -1;
}

// max |residual| over all fully-covered SDE rows with genus <= gmax, l1 <= lmax
struct SdeReport {
    double max_residual = 0;
    int rows_checked = 0;
    int rows_skipped = 0;  // insufficient table coverage
};

SdeReport sde_sweep(const BitracialPotential& p, const CorrelatorTable<double>& table, int gmax, int lmax) {
    SdeReport rep;
    for (int g = 0; g <= gmax; ++g)
        for (int l1 = 0; l1 <= lmax; ++l1) {
            try {
                double r = sde_residual(p, table, g, l1, {});
                rep.max_residual = std::max(rep.max_residual, std::fabs(r));
                ++rep.rows_checked;
            } catch (const MissingCorrelator&) {
                ++rep.rows_skipped;
            }
        }
    return rep;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"diracens: one-cut solver, topological recursion, criticality and Monte Carlo for "
                 "type (1,0) Dirac ensembles (bi-tracial Hermitian matrix models)"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--tol", g.tol, "check tolerance")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (overrides DIRACENS_THREADS)");
    app.add_option("--mode", g.mode, "numeric | formal:<order>")->capture_default_str();
    app.add_flag("--check", g.check, "exit nonzero when a verification gate fails");

    // ---- solve ----
    auto* solve_cmd = app.add_subcommand("solve", "one-cut genus-0 solution and density");
    ModelOpts solve_model;
    add_model_flags(solve_cmd, solve_model);
    int grid_n = 1000;
    solve_cmd->add_option("--grid-n", grid_n, "density CSV grid points")->capture_default_str();

    // ---- correlators ----
    auto* corr_cmd = app.add_subcommand("correlators", "correlator table with SDE certification");
    ModelOpts corr_model;
    add_model_flags(corr_cmd, corr_model);
    int corr_gmax = 0, corr_lmax = 8;
    corr_cmd->add_option("--gmax", corr_gmax, "max genus")->capture_default_str();
    corr_cmd->add_option("--lmax", corr_lmax, "max first boundary length")->capture_default_str();

    // ---- free-energy ----
    auto* fe_cmd = app.add_subcommand("free-energy", "F_g coupling series for a one-parameter family");
    std::string fe_family = "quartic-single";
    int fe_genus = 0;
    size_t fe_order = 40;
    fe_cmd->add_option("--family", fe_family, "quartic-single | cubic-single | quartic-dirac | hexic-ray");
    fe_cmd->add_option("--genus", fe_genus, "0 or 1")->capture_default_str();
    fe_cmd->add_option("--order", fe_order, "series truncation order")->capture_default_str();

    // ---- critical ----
    auto* crit_cmd = app.add_subcommand("critical", "critical couplings and matched Dirac couplings");
    std::string crit_model = "quartic";
    crit_cmd->add_option("--model", crit_model, "quartic | cubic | hexic");

    // ---- phase-diagram ----
    auto* pd_cmd = app.add_subcommand("phase-diagram", "quartic phase diagram CSV");
    std::string pd_grid = "-0.08:0.5:100";
    pd_cmd->add_option("--t4-grid", pd_grid, "lo:hi:n")->capture_default_str();

    // ---- painleve ----
    auto* pain_cmd = app.add_subcommand("painleve", "Painleve I formal series");
    size_t pain_order = 6;
    pain_cmd->add_option("--order", pain_order, "series order")->capture_default_str();

    // ---- mc ----
    auto* mc_cmd = app.add_subcommand("mc", "finite-N Metropolis sampler");
    ModelOpts mc_model;
    add_model_flags(mc_cmd, mc_model);
    MCRun run;
    mc_cmd->add_option("--N", run.N)->capture_default_str();
    mc_cmd->add_option("--sweeps", run.sweeps)->capture_default_str();
    mc_cmd->add_option("--burn-in", run.burn_in)->capture_default_str();
    mc_cmd->add_option("--chains", run.chains)->capture_default_str();
    mc_cmd->add_option("--seed", run.seed)->capture_default_str();
    mc_cmd->add_option("--step", run.step_scale)->capture_default_str();
    mc_cmd->add_option("--sample-every", run.sample_every)->capture_default_str();

    // ---- oracle ----
    auto* oracle_cmd = app.add_subcommand("oracle", "exact Wick-pairing coefficients");
    ModelOpts oracle_model;
    add_model_flags(oracle_cmd, oracle_model);
    std::string oracle_obs = "2";
    int oracle_order = 1, oracle_genus = 0, oracle_guard = 14;
    bool oracle_tseries = false;
    oracle_cmd->add_option("--observable", oracle_obs, "comma-separated trace powers; empty for log Z");
    oracle_cmd->add_option("--order", oracle_order, "coupling (or t) order")->capture_default_str();
    oracle_cmd->add_option("--genus", oracle_genus)->capture_default_str();
    oracle_cmd->add_option("--guard", oracle_guard, "degree guard")->capture_default_str();
    oracle_cmd->add_flag("--t-series", oracle_tseries, "grade by 't Hooft t at fixed couplings");

    // ---- sde-check ----
    auto* sde_cmd = app.add_subcommand("sde-check", "re-verify an emitted table/solution artifact");
    std::string sde_file;
    int sde_gmax = 0, sde_lmax = 8;
    sde_cmd->add_option("--table", sde_file, "solution or table JSON")->required();
    sde_cmd->add_option("--gmax", sde_gmax)->capture_default_str();
    sde_cmd->add_option("--lmax", sde_lmax)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (g.threads > 0) setenv("DIRACENS_THREADS", std::to_string(g.threads).c_str(), 1);

    try {
        if (*solve_cmd) {
            int fo = formal_order(g.mode);
            if (fo >= 0) {
                auto p = solve_model.build();
                FormalTSolution fs = solve_one_cut_formal_t(p, static_cast<size_t>(fo));
                Json j;
                j["schema"] = "diracens/formal-solution";
                j["version"] = kVersion;
                j["config"] = solve_model.config();
                j["order"] = fo;
                auto dump = [&](const QSeries& s) {
                    Json arr = Json::array();
                    for (size_t k = 0; k <= s.order(); ++k) arr.push_back(rational_to_string(s[k]));
                    return arr;
                };
                j["alpha"] = dump(fs.alpha);
                j["gamma_sq"] = dump(fs.gamma_sq);
                Json mom = Json::object();
                for (const auto& [l, s] : fs.moments0) mom[std::to_string(l)] = dump(s);
                j["moments0"] = mom;
                write_file(out_path(g, "formal_solution.json"), j.dump(2));
                std::cout << "formal t-series solution written to " << out_path(g, "formal_solution.json")
                          << "\n";
                return 0;
            }
            auto p = solve_model.build();
            SolveOptions so;
            so.moments_to = 8;
            SpectralSolution sol = solve_one_cut(p, so);
            Json j = solution_to_json(sol, solve_model.config());
            write_file(out_path(g, "solution.json"), j.dump(2));
            write_file(out_path(g, "density.csv"), density_csv(density(sol), grid_n));
            std::cout << "alpha = " << sol.alpha << ", gamma^2 = " << sol.gamma_sq
                      << ", support = [" << sol.b() << ", " << sol.a() << "]\n"
                      << "solution.json and density.csv written to " << g.out << "\n";
            return 0;
        }

        if (*corr_cmd) {
            auto p = corr_model.build();
            SpectralSolution sol = solve_one_cut(p);
            CorrelatorTable<double> table = build_correlator_table(sol, corr_gmax, corr_lmax);
            SdeReport rep = sde_sweep(p, table, corr_gmax, corr_lmax);
            std::string validity = (!p.has_bi_trace() || corr_gmax == 0 || rep.max_residual <= g.tol)
                                       ? "exact-single-trace-reduction"
                                       : "general-coupling-unverified";
            Json config = corr_model.config();
            config["gmax"] = corr_gmax;
            config["lmax"] = corr_lmax;
            config["validity"] = validity;
            config["sde_max_residual"] = rep.max_residual;
            Json j = table_to_json(p, table, config);
            write_file(out_path(g, "correlators.json"), j.dump(2));
            std::cout << "SDE certification: max |residual| = " << rep.max_residual << " over "
                      << rep.rows_checked << " rows (tag: " << validity << ")\n"
                      << "correlators.json written to " << g.out << "\n";
            if (g.check && rep.max_residual > g.tol) return 4;
            return 0;
        }

        if (*fe_cmd) {
            CouplingFamily fam;
            if (fe_family == "quartic-single") {
                fam.base = BitracialPotential::gaussian();
                fam.direction = BitracialPotential::single_trace_model({{4, Rational(1)}});
                fam.direction.gaussian_coeff = Rational(0);
            } else if (fe_family == "cubic-single") {
                fam.base = BitracialPotential::gaussian();
                fam.direction = BitracialPotential::single_trace_model({{3, Rational(1)}});
                fam.direction.gaussian_coeff = Rational(0);
            } else if (fe_family == "quartic-dirac") {
                fam.base = potential_to_bitracial(DiracPotential::quartic(Rational(1), Rational(0)));
                fam.direction = potential_to_bitracial(DiracPotential::quartic(Rational(0), Rational(1)));
            } else if (fe_family == "hexic-ray") {
                fam.base = BitracialPotential::gaussian();
                fam.direction =
                    BitracialPotential::single_trace_model({{4, Rational(-1, 9)}, {6, Rational(1, 270)}});
                fam.direction.gaussian_coeff = Rational(0);
            } else {
                std::cerr << "unknown family " << fe_family << "\n";
                return 2;
            }
            QSeries F = free_energy_series(fam, fe_genus, fe_order);
            write_file(out_path(g, "free_energy.csv"), series_csv(F, "F" + std::to_string(fe_genus)));
            std::vector<double> coeffs;
            for (size_t k = 0; k <= F.order(); ++k) coeffs.push_back(to_double(F[k]));
            RatioAnalysis ra = singular_exponent(coeffs);
            Json j;
            j["schema"] = "diracens/free-energy";
            j["version"] = kVersion;
            j["family"] = fe_family;
            j["genus"] = fe_genus;
            j["order"] = fe_order;
            j["singular"] = ra.singular;
            if (ra.singular) {
                j["t_c_estimate"] = ra.t_c;
                j["exponent_estimate"] = ra.exponent;
            }
            write_file(out_path(g, "free_energy.json"), j.dump(2));
            std::cout << "free_energy.csv written; ratio analysis: "
                      << (ra.singular
                              ? "t_c ~ " + std::to_string(ra.t_c) + ", exponent ~ " + std::to_string(ra.exponent)
                              : std::string("no singularity detected (infinite radius)"))
                      << "\n";
            return 0;
        }

        if (*crit_cmd) {
            Json j;
            j["schema"] = "diracens/critical-point";
            j["version"] = kVersion;
            if (crit_model == "quartic") {
                CriticalPoint cp = find_critical("quartic-single");
                MatchingResult m = matching_tuning_quartic(cp.couplings["t4"]);
                j["single_trace"] = {{"t4", cp.couplings["t4"]}, {"gamma_sq", cp.gamma_sq_c}};
                j["matched_dirac"] = {{"t2", m.couplings["t2"]}, {"t4", m.couplings["t4"]}};
                j["minimal_model"] = {cp.minimal_model.first, cp.minimal_model.second};
            } else if (crit_model == "hexic") {
                CriticalPoint cp = find_critical("hexic-single");
                MatchingResult m = matching_tuning_hexic(cp.couplings["t4"], cp.couplings["t6"]);
                j["single_trace"] = {{"t4", cp.couplings["t4"]},
                                     {"t6", cp.couplings["t6"]},
                                     {"gamma_sq", cp.gamma_sq_c}};
                j["matched_dirac"] = {
                    {"t2", m.couplings["t2"]}, {"t4", m.couplings["t4"]}, {"t6", m.couplings["t6"]}};
                j["minimal_model"] = {cp.minimal_model.first, cp.minimal_model.second};
            } else if (crit_model == "cubic") {
                CriticalPoint cp = find_critical("cubic-single");
                MatchingResult m = matching_tuning_cubic(cp.couplings["t3"]);
                CriticalPoint cd = find_critical_cubic_dirac(cp.couplings["t3"]);
                j["single_trace"] = {{"t3", cp.couplings["t3"]},
                                     {"gamma_sq", cp.gamma_sq_c},
                                     {"alpha", cp.alpha_c}};
                j["matched_dirac"] = {{"t2", m.couplings["t2"]},
                                      {"t3", m.couplings["t3"]},
                                      {"recentring_shift", m.shift}};
                j["dirac_cusp_at_t3c"] = {{"t2", cd.couplings["t2"]}};
                j["minimal_model"] = {cp.minimal_model.first, cp.minimal_model.second};
            } else {
                std::cerr << "unknown model " << crit_model << "\n";
                return 2;
            }
            write_file(out_path(g, "critical.json"), j.dump(2));
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (*pd_cmd) {
            double lo, hi;
            int n;
            if (std::sscanf(pd_grid.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3) {
                std::cerr << "bad --t4-grid, expected lo:hi:n\n";
                return 2;
            }
            auto rows = quartic_phase_diagram(lo, hi, n);
            write_file(out_path(g, "phase_diagram.csv"), phase_diagram_csv(rows));
            std::cout << "phase_diagram.csv written to " << g.out << " (" << rows.size() << " rows)\n";
            return 0;
        }

        if (*pain_cmd) {
            PainleveSeries ps = painleve_series(pain_order);
            auto res = ps.substitution_residual();
            bool exact = true;
            for (const auto& r : res) exact = exact && (r == 0);
            Json j;
            j["schema"] = "diracens/painleve";
            j["version"] = kVersion;
            j["order"] = pain_order;
            Json arr = Json::array();
            for (const auto& a : ps.a) arr.push_back(rational_to_string(a));
            j["a"] = arr;
            j["substitution_residual_zero"] = exact;
            write_file(out_path(g, "painleve.json"), j.dump(2));
            std::cout << j.dump(2) << "\n";
            if (g.check && !exact) return 4;
            return 0;
        }

        if (*mc_cmd) {
            auto p = mc_model.build();
            MCResult r = metropolis_sample(p, run);
            SpectralSolution sol = solve_one_cut(p);
            Density d = density(sol);
            DensityComparison cmp = compare_density(r, d);
            Json config = mc_model.config();
            config["N"] = run.N;
            config["sweeps"] = run.sweeps;
            config["burn_in"] = run.burn_in;
            config["chains"] = run.chains;
            config["seed"] = run.seed;
            Json j = mc_result_to_json(r, &cmp, config);
            write_file(out_path(g, "mc_report.json"), j.dump(2));
            write_file(out_path(g, "mc_hist_H.csv"), histogram_csv(r.H_hist));
            write_file(out_path(g, "mc_hist_D.csv"), histogram_csv(r.D_hist));
            std::cout << "acceptance " << r.acceptance_rate << ", samples " << r.samples << ", KS "
                      << cmp.ks << ", T2 = " << r.H_moment[2] << " +- " << r.H_moment_se[2] << "\n";
            if (g.check && !cmp.pass()) return 4;
            return 0;
        }

        if (*oracle_cmd) {
            std::vector<int> obs;
            if (!oracle_obs.empty()) {
                std::stringstream ss(oracle_obs);
                std::string tok;
                while (std::getline(ss, tok, ','))
                    if (!tok.empty()) obs.push_back(std::stoi(tok));
            }
            auto base = oracle_model.build();
            Json j;
            j["schema"] = "diracens/oracle";
            j["version"] = kVersion;
            j["observable"] = obs;
            j["genus"] = oracle_genus;
            if (oracle_tseries) {
                QSeries s = wick_moment_t_series(base, obs, oracle_genus, oracle_order, oracle_guard);
                Json arr = Json::array();
                for (size_t k = 0; k <= s.order(); ++k) arr.push_back(rational_to_string(s[k]));
                j["t_series"] = arr;
            } else {
                // base keeps the Gaussian sector; the direction scales every
                // non-Gaussian coupling jointly (lambda = 1 is the given model)
                CouplingFamily fam;
                fam.base = BitracialPotential::gaussian(base.hooft_t);
                fam.base.gaussian_coeff = base.gaussian_coeff;
                for (const auto& [ij, c] : base.bi_trace)
                    if (ij.first == 1 && ij.second == 1) fam.base.bi_trace[ij] = c;
                fam.direction = base;
                fam.direction.gaussian_coeff = Rational(0);
                fam.direction.bi_trace.erase({1, 1});
                QSeries s = obs.empty()
                                ? wick_free_energy_series(fam, oracle_genus, oracle_order, oracle_guard)
                                : wick_moment_series(fam, obs, oracle_genus, oracle_order, oracle_guard);
                Json arr = Json::array();
                for (size_t k = 0; k <= s.order(); ++k) arr.push_back(rational_to_string(s[k]));
                j["coupling_series"] = arr;
            }
            std::cout << j.dump(2) << "\n";
            write_file(out_path(g, "oracle.json"), j.dump(2));
            return 0;
        }

        if (*sde_cmd) {
            std::ifstream f(sde_file);
            if (!f) {
                std::cerr << "cannot open " << sde_file << "\n";
                return 2;
            }
            Json j = Json::parse(f);
            BitracialPotential p;
            CorrelatorTable<double> table;
            if (j.at("schema") == "diracens/spectral-solution") {
                LoadedSolution ls = solution_from_json(j);
                p = ls.potential;
                table = ls.table;
            } else {
                std::tie(p, table) = table_from_json(j);
            }
            SdeReport rep = sde_sweep(p, table, sde_gmax, sde_lmax);
            std::cout << "max |residual| = " << rep.max_residual << " over " << rep.rows_checked
                      << " rows (" << rep.rows_skipped << " rows skipped for coverage)\n";
            if (rep.max_residual > g.tol) {
                std::cout << "FAIL (tol " << g.tol << ")\n";
                return 4;
            }
            std::cout << "PASS (tol " << g.tol << ")\n";
            return 0;
        }
    } catch (const SolveError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
