#pragma once

#include <string>
#include <vector>

#include "chains/nahm.hpp"
#include "chains/spectral.hpp"

namespace chains {

// CSV with header y1,y2,y3,phihat_norm2,energy,quality; one row per lattice
// point ordered by (i1,i2,i3); floats at 17 significant digits, undefined
// energies as nan
void export_csv(const MonopoleGrid& grid, const std::string& path);

// legacy ASCII structured-points file with point-data scalars `energy` and
// `phihat_norm2` (x fastest: i1, then i2, then i3); layout documented in the
// README
void export_vtk(const MonopoleGrid& grid, const std::string& path);

struct EnergyMaximum {
    int i3 = 0;
    double y3 = 0;
    double value = 0;
    double y1 = 0, y2 = 0;  // location of the slab maximum
};

struct EnergySummary {
    double energy_min = 0, energy_max = 0;
    double norm2_min = 0, norm2_max = 0;
    int maxima_per_period = 0;
    std::vector<EnergyMaximum> maxima;
};

// slab profile P(i3) = max energy over the (y1,y2) plane; maxima are cyclic
// local maxima of P with relative prominence above 5% of the profile range
EnergySummary summarize_energy(const MonopoleGrid& grid);

void export_summary_json(const MonopoleGrid& grid, const ChainParams& params,
                         double periodicity_residual, const std::string& path);

void export_classification_json(const ClassificationReport& report, const std::string& path);

}  // namespace chains
