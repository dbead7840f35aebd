#pragma once

#include <string>

#include <json.hpp>

#include "diracens/criticality.hpp"
#include "diracens/loop.hpp"
#include "diracens/mc.hpp"
#include "diracens/spectral.hpp"

namespace diracens {

using Json = nlohmann::json;

// Potentials serialize losslessly (rational strings).
Json potential_to_json(const BitracialPotential& p);
BitracialPotential potential_from_json(const Json& j);

Json solution_to_json(const SpectralSolution& sol, const Json& config);
// Reload enough of a solution artifact to re-verify it without re-solving:
// the potential plus a correlator table built from the stored moments.
struct LoadedSolution {
    BitracialPotential potential;
    CorrelatorTable<double> table;
    double alpha = 0, gamma = 1;
};
LoadedSolution solution_from_json(const Json& j);

Json table_to_json(const BitracialPotential& p, const CorrelatorTable<double>& t, const Json& config);
std::pair<BitracialPotential, CorrelatorTable<double>> table_from_json(const Json& j);

Json mc_result_to_json(const MCResult& r, const DensityComparison* cmp, const Json& config);

std::string density_csv(const Density& d, int grid_n);
std::string histogram_csv(const Histogram& h);
std::string phase_diagram_csv(const std::vector<PhaseDiagramRow>& rows);
std::string series_csv(const QSeries& s, const std::string& value_label);

void write_file(const std::string& path, const std::string& content);

}  // namespace diracens
