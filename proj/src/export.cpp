#include "chains/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace chains {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw ChainError(ErrorKind::io_error, "cannot open for writing: " + path);
    return out;
}

}  // namespace

void export_csv(const MonopoleGrid& grid, const std::string& path) {
    auto out = open_out(path);
    const YLattice& lat = grid.lattice;
    out << "y1,y2,y3,phihat_norm2,energy,quality\n";
    for (int i1 = 0; i1 < lat.n_xy; ++i1)
        for (int i2 = 0; i2 < lat.n_xy; ++i2)
            for (int i3 = 0; i3 < lat.n_y3; ++i3) {
                const int id = lat.index(i1, i2, i3);
                out << fmt17(lat.y1(i1)) << "," << fmt17(lat.y2(i2)) << ","
                    << fmt17(lat.y3(i3)) << "," << fmt17(grid.norm2[id]) << ","
                    << fmt17(grid.energy[id]) << "," << int(grid.quality[id]) << "\n";
            }
    if (!out)
        throw ChainError(ErrorKind::io_error, "write failure: " + path);
}

void export_vtk(const MonopoleGrid& grid, const std::string& path) {
    auto out = open_out(path);
    const YLattice& lat = grid.lattice;
    out << "# vtk DataFile Version 3.0\n";
    out << "monopole chain energy density\n";
    out << "ASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << lat.n_xy << " " << lat.n_xy << " " << lat.n_y3 << "\n";
    out << "ORIGIN " << fmt17(-lat.extent) << " " << fmt17(-lat.extent) << " "
        << fmt17(lat.y3_min) << "\n";
    out << "SPACING " << fmt17(lat.step_xy()) << " " << fmt17(lat.step_xy()) << " "
        << fmt17(lat.step_y3()) << "\n";
    out << "POINT_DATA " << lat.points() << "\n";
    auto dump = [&](const std::vector<double>& v, const char* name) {
        out << "SCALARS " << name << " double 1\n";
        out << "LOOKUP_TABLE default\n";
        for (int i3 = 0; i3 < lat.n_y3; ++i3)
            for (int i2 = 0; i2 < lat.n_xy; ++i2)
                for (int i1 = 0; i1 < lat.n_xy; ++i1)
                    out << fmt17(v[lat.index(i1, i2, i3)]) << "\n";
    };
    dump(grid.energy, "energy");
    dump(grid.norm2, "phihat_norm2");
    if (!out)
        throw ChainError(ErrorKind::io_error, "write failure: " + path);
}

EnergySummary summarize_energy(const MonopoleGrid& grid) {
    const YLattice& lat = grid.lattice;
    EnergySummary s;
    s.norm2_min = s.norm2_max = grid.norm2.empty() ? 0 : grid.norm2[0];
    for (double v : grid.norm2) {
        s.norm2_min = std::min(s.norm2_min, v);
        s.norm2_max = std::max(s.norm2_max, v);
    }

    // slab-max profile over y3
    std::vector<double> prof(lat.n_y3, std::nan(""));
    std::vector<EnergyMaximum> at(lat.n_y3);
    bool any = false;
    for (int i3 = 0; i3 < lat.n_y3; ++i3) {
        for (int i1 = 0; i1 < lat.n_xy; ++i1)
            for (int i2 = 0; i2 < lat.n_xy; ++i2) {
                const double e = grid.energy[lat.index(i1, i2, i3)];
                if (std::isnan(e))
                    continue;
                if (!any) {
                    s.energy_min = s.energy_max = e;
                    any = true;
                } else {
                    s.energy_min = std::min(s.energy_min, e);
                    s.energy_max = std::max(s.energy_max, e);
                }
                if (std::isnan(prof[i3]) || e > prof[i3]) {
                    prof[i3] = e;
                    at[i3] = {i3, lat.y3(i3), e, lat.y1(i1), lat.y2(i2)};
                }
            }
    }
    if (!any || lat.n_y3 < 3)
        return s;

    double pmin = prof[0], pmax = prof[0];
    for (double v : prof) {
        pmin = std::min(pmin, v);
        pmax = std::max(pmax, v);
    }
    if (!(pmax > pmin))
        return s;

    // count energy lumps as cyclic connected components of the profile above
    // the mid-range level; shallow sampling dips inside one lump do not split
    // it, unlike raw local-maximum counting
    const double level = pmin + 0.5 * (pmax - pmin);
    std::vector<char> above(lat.n_y3);
    for (int i3 = 0; i3 < lat.n_y3; ++i3)
        above[i3] = prof[i3] > level;
    int start = 0;
    while (start < lat.n_y3 && above[start])
        ++start;
    if (start == lat.n_y3)
        return s;  // profile never crosses the level
    for (int q = 0; q < lat.n_y3; ++q) {
        const int i3 = (start + q) % lat.n_y3;
        if (!above[i3])
            continue;
        EnergyMaximum best = at[i3];
        while (q + 1 < lat.n_y3 && above[(start + q + 1) % lat.n_y3]) {
            ++q;
            const int j3 = (start + q) % lat.n_y3;
            if (at[j3].value > best.value)
                best = at[j3];
        }
        s.maxima.push_back(best);
    }
    s.maxima_per_period = static_cast<int>(s.maxima.size());
    return s;
}

void export_summary_json(const MonopoleGrid& grid, const ChainParams& params,
                         double periodicity_residual, const std::string& path) {
    EnergySummary s = summarize_energy(grid);
    nlohmann::ordered_json j;
    j["k"] = params.k;
    j["l"] = params.l;
    j["m"] = params.m;
    j["beta"] = params.beta;
    j["c_abs"] = params.c_abs;
    j["lattice"] = {{"extent", grid.lattice.extent},
                    {"n_xy", grid.lattice.n_xy},
                    {"y3_min", grid.lattice.y3_min},
                    {"y3_span", grid.lattice.y3_span},
                    {"n_y3", grid.lattice.n_y3}};
    j["energy_min"] = s.energy_min;
    j["energy_max"] = s.energy_max;
    j["phihat_norm2_min"] = s.norm2_min;
    j["phihat_norm2_max"] = s.norm2_max;
    j["maxima_per_period"] = s.maxima_per_period;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& m : s.maxima)
        arr.push_back({{"y3", m.y3}, {"energy", m.value}, {"y1", m.y1}, {"y2", m.y2}});
    j["maxima"] = arr;
    if (std::isfinite(periodicity_residual))
        j["periodicity_residual"] = periodicity_residual;
    else
        j["periodicity_residual"] = nullptr;
    j["gap_pass_fraction"] = grid.gap_pass_fraction();
    j["flagged_points"] = grid.flagged;
    open_out(path) << j.dump(2) << "\n";
}

void export_classification_json(const ClassificationReport& report,
                                const std::string& path) {
    nlohmann::ordered_json j;
    j["k"] = report.k;
    j["group_order"] = report.order;
    j["odd_groups_empty"] = report.odd_groups_empty;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : report.entries) {
        nlohmann::ordered_json je;
        je["l"] = e.l;
        je["m"] = e.m;
        je["group"] = e.group;
        auto fp = nlohmann::ordered_json::array();
        for (int i = 0; i < e.fixed_point.size(); ++i)
            fp.push_back({e.fixed_point(i).real(), e.fixed_point(i).imag()});
        je["fixed_point"] = fp;
        arr.push_back(je);
    }
    j["entries"] = arr;
    open_out(path) << j.dump(2) << "\n";
}

}  // namespace chains
