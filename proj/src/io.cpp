#include "diracens/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "diracens/version.hpp"

namespace diracens {

Json potential_to_json(const BitracialPotential& p) {
    Json j;
    j["hooft_t"] = rational_to_string(p.hooft_t);
    j["gaussian"] = rational_to_string(p.gaussian_coeff);
    Json single = Json::object();
    for (const auto& [i, c] : p.single_trace) single[std::to_string(i)] = rational_to_string(c);
    j["single"] = single;
    Json bi = Json::array();
    for (const auto& [ij, c] : p.bi_trace)
        bi.push_back(Json::array({ij.first, ij.second, rational_to_string(c)}));
    j["bi"] = bi;
    return j;
}

BitracialPotential potential_from_json(const Json& j) {
    BitracialPotential p;
    p.hooft_t = rational_from_string(j.at("hooft_t").get<std::string>());
    p.gaussian_coeff = rational_from_string(j.at("gaussian").get<std::string>());
    for (const auto& [k, v] : j.at("single").items())
        p.single_trace[std::stoi(k)] = rational_from_string(v.get<std::string>());
    for (const auto& e : j.at("bi"))
        p.bi_trace[{e.at(0).get<int>(), e.at(1).get<int>()}] =
            rational_from_string(e.at(2).get<std::string>());
    return p;
}

Json solution_to_json(const SpectralSolution& sol, const Json& config) {
    Json j;
    j["schema"] = "diracens/spectral-solution";
    j["version"] = kVersion;
    j["config"] = config;
    j["potential"] = potential_to_json(sol.potential);
    j["hooft"] = sol.hooft;
    j["alpha"] = sol.alpha;
    j["gamma"] = sol.gamma;
    j["gamma_sq"] = sol.gamma_sq;
    j["symmetric"] = sol.symmetric;
    j["support"] = Json::array({sol.b(), sol.a()});
    j["u"] = sol.u;
    Json tilde = Json::object();
    for (const auto& [m, v] : sol.tilde) tilde[std::to_string(m)] = v;
    j["tilde"] = tilde;
    Json mom = Json::object();
    for (const auto& [l, v] : sol.moments0) mom[std::to_string(l)] = v;
    j["moments0"] = mom;
    return j;
}

LoadedSolution solution_from_json(const Json& j) {
    LoadedSolution out;
    out.potential = potential_from_json(j.at("potential"));
    out.alpha = j.at("alpha").get<double>();
    out.gamma = j.at("gamma").get<double>();
    for (const auto& [k, v] : j.at("moments0").items())
        out.table.set(0, {std::stoi(k)}, v.get<double>());
    return out;
}

Json table_to_json(const BitracialPotential& p, const CorrelatorTable<double>& t, const Json& config) {
    Json j;
    j["schema"] = "diracens/correlator-table";
    j["version"] = kVersion;
    j["config"] = config;
    j["potential"] = potential_to_json(p);
    j["hooft"] = to_double(p.hooft_t);
    Json entries = Json::array();
    for (const auto& [key, v] : t.entries()) {
        Json e;
        e["g"] = key.g;
        e["lengths"] = key.lengths;
        e["value"] = v;
        entries.push_back(e);
    }
    j["entries"] = entries;
    return j;
}

std::pair<BitracialPotential, CorrelatorTable<double>> table_from_json(const Json& j) {
    BitracialPotential p = potential_from_json(j.at("potential"));
    CorrelatorTable<double> t;
    for (const auto& e : j.at("entries"))
        t.set(e.at("g").get<int>(), e.at("lengths").get<std::vector<int>>(), e.at("value").get<double>());
    return {p, t};
}

Json mc_result_to_json(const MCResult& r, const DensityComparison* cmp, const Json& config) {
    Json j;
    j["schema"] = "diracens/mc-report";
    j["version"] = kVersion;
    j["config"] = config;
    j["N"] = r.run.N;
    j["sweeps"] = r.run.sweeps;
    j["burn_in"] = r.run.burn_in;
    j["chains"] = r.run.chains;
    j["seed"] = r.run.seed;
    j["acceptance_rate"] = r.acceptance_rate;
    j["step_final"] = r.step_final;
    j["samples"] = r.samples;
    j["dirac_identity_max_dev"] = r.dirac_identity_max_dev;
    auto moments = Json::object();
    for (const auto& [k, v] : r.H_moment) {
        Json m;
        m["estimate"] = v;
        m["se"] = r.H_moment_se.count(k) ? r.H_moment_se.at(k) : 0.0;
        moments[std::to_string(k)] = m;
    }
    j["H_moments"] = moments;
    auto dmoments = Json::object();
    for (const auto& [k, v] : r.D_moment) {
        Json m;
        m["estimate"] = v;
        m["se"] = r.D_moment_se.count(k) ? r.D_moment_se.at(k) : 0.0;
        dmoments[std::to_string(k)] = m;
    }
    j["D_moments"] = dmoments;
    if (cmp) {
        Json c;
        c["ks"] = cmp->ks;
        c["finite_n_allowance"] = cmp->finite_n_allowance;
        Json z = Json::object();
        for (const auto& [k, v] : cmp->moment_z) z[std::to_string(k)] = v;
        c["moment_z"] = z;
        c["pass"] = cmp->pass();
        j["density_comparison"] = c;
    }
    return j;
}

std::string density_csv(const Density& d, int grid_n) {
    std::ostringstream os;
    os.precision(17);
    os << "x,rho\n";
    for (int i = 0; i <= grid_n; ++i) {
        double x = d.b + (d.a - d.b) * i / grid_n;
        os << x << "," << d(x) << "\n";
    }
    return os.str();
}

std::string histogram_csv(const Histogram& h) {
    std::ostringstream os;
    os.precision(17);
    os << "bin_left,bin_right,count,density\n";
    double width = (h.hi - h.lo) / h.counts.size();
    for (size_t b = 0; b < h.counts.size(); ++b) {
        double dens = h.total ? h.counts[b] / (width * h.total) : 0.0;
        os << h.edge(b) << "," << h.edge(b + 1) << "," << h.counts[b] << "," << dens << "\n";
    }
    return os.str();
}

std::string phase_diagram_csv(const std::vector<PhaseDiagramRow>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "t4,t2_transition,t2_transition_closed,transition_deviation,"
          "t2_matching,t2_matching_closed,region_at_matching,region_at_transition\n";
    auto cell = [&](double v) {
        std::ostringstream c;
        c.precision(17);
        if (std::isnan(v))
            c << "";
        else
            c << v;
        return c.str();
    };
    for (const auto& r : rows)
        os << r.t4 << "," << cell(r.t2_transition) << "," << cell(r.t2_transition_closed) << ","
           << cell(r.transition_deviation) << "," << cell(r.t2_matching) << ","
           << cell(r.t2_matching_closed) << "," << r.region_at_matching << ","
           << r.region_at_transition << "\n";
    return os.str();
}

std::string series_csv(const QSeries& s, const std::string& value_label) {
    std::ostringstream os;
    os.precision(17);
    os << "order," << value_label << "," << value_label << "_exact\n";
    for (size_t k = 0; k <= s.order(); ++k)
        os << k << "," << to_double(s[k]) << "," << rational_to_string(s[k]) << "\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << content;
}

}  // namespace diracens
