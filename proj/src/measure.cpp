#include "lqg/measure.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace lqg {

MeasureField build_measure(const Field& h_mollified, double epsilon, double gamma) {
    if (!(gamma > 0.0) || !(gamma < 2.0))
        throw std::invalid_argument("build_measure: gamma must be in (0,2)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("build_measure: epsilon must be > 0");
    MeasureField m;
    m.grid = h_mollified.grid;
    m.epsilon = epsilon;
    m.gamma = gamma;
    const double prefactor =
        std::pow(epsilon, gamma * gamma / 2.0) * h_mollified.grid.spacing * h_mollified.grid.spacing;
    m.cell_mass.resize(h_mollified.values.size());
    for (size_t k = 0; k < m.cell_mass.size(); ++k) {
        double mass = prefactor * std::exp(gamma * h_mollified.values[k]);
        if (!std::isfinite(mass) || !(mass > 0.0))
            throw std::runtime_error("build_measure: non-finite cell mass");
        m.cell_mass[k] = mass;
    }
    return m;
}

double measure_of(const MeasureField& m, const VertexSet& region) {
    if (!(region.grid == m.grid)) throw std::invalid_argument("measure_of: grid mismatch");
    double acc = 0.0;
    for (size_t k = 0; k < m.cell_mass.size(); ++k)
        if (region.member[k]) acc += m.cell_mass[k];
    return acc;
}

double measure_coordinate_change_ratio(const Field& h_raw, const MapDescriptor& map,
                                       const VertexSet& region, double epsilon,
                                       const LqgParams& params, const GridSpec& target_grid,
                                       Mollifier mollifier) {
    if (!(region.grid == h_raw.grid))
        throw std::invalid_argument("measure_coordinate_change_ratio: region grid mismatch");
    if (region.count() == 0)
        throw std::invalid_argument("measure_coordinate_change_ratio: empty region");

    Field h_eps = mollify(h_raw, epsilon, mollifier);
    VertexSet valid = window_mask(h_raw.grid, h_eps.valid_window());
    if (!region.subset_of(valid))
        throw std::invalid_argument(
            "measure_coordinate_change_ratio: region leaves the mollified valid window");
    MeasureField m_src = build_measure(h_eps, epsilon, params.gamma);
    double denom = measure_of(m_src, region);

    // Match the pullback's mollification scale at the region's centroid.
    Complex centroid{0.0, 0.0};
    for (int idx : region.indices()) centroid += region.grid.vertex(idx);
    centroid /= static_cast<double>(region.count());
    double eps_target = matched_epsilon(map, centroid, epsilon);

    PullbackField pb = pullback_field(h_raw, map, target_grid, params);
    Field pb_eps = mollify(pb.field, eps_target, mollifier);
    MeasureField m_tgt = build_measure(pb_eps, eps_target, params.gamma);
    VertexSet tvalid = window_mask(target_grid, pb_eps.valid_window());

    // A target cell belongs to phi(region) iff its center's preimage lies in
    // the footprint (cell) of a member source vertex.
    const GridSpec& sg = region.grid;
    double numer = 0.0;
    for (int idx = 0; idx < target_grid.size(); ++idx) {
        Complex w = target_grid.vertex(idx);
        if (!map.in_codomain(w)) continue;
        Complex z = map.inverse(w);
        int i = static_cast<int>(std::lround((z.real() - sg.xmin()) / sg.spacing));
        int j = static_cast<int>(std::lround((z.imag() - sg.ymin()) / sg.spacing));
        if (i < 0 || i >= sg.nx || j < 0 || j >= sg.ny) continue;
        if (!region.contains(sg.index(i, j))) continue;
        if (!tvalid.contains(idx))
            throw std::invalid_argument(
                "measure_coordinate_change_ratio: image cell outside target valid window");
        numer += m_tgt.cell_mass[static_cast<size_t>(idx)];
    }
    return numer / denom;
}

std::vector<std::pair<double, double>> ball_volume_profile(const MetricOracle& oracle,
                                                           const MeasureField& m,
                                                           Complex center,
                                                           const std::vector<double>& radii) {
    if (!(m.grid == oracle.field.grid))
        throw std::invalid_argument("ball_volume_profile: measure/oracle grid mismatch");
    if (radii.empty()) throw std::invalid_argument("ball_volume_profile: empty radius list");
    const GridSpec& g = m.grid;
    VertexSet src(g);
    src.set(g.nearest(center));
    std::vector<double> dist = distances_from(oracle, src);

    // Ball-escape check: the largest ball must not touch the mask boundary.
    double smax = 0.0;
    for (double s : radii) smax = std::max(smax, s);
    for (int idx = 0; idx < g.size(); ++idx) {
        if (!oracle.mask.contains(idx) || dist[static_cast<size_t>(idx)] > smax) continue;
        int i = g.ix(idx), j = g.iy(idx);
        bool edge = (i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1);
        if (!edge) {
            for (int dj = -1; dj <= 1 && !edge; ++dj)
                for (int di = -1; di <= 1 && !edge; ++di)
                    if (!oracle.mask.contains(g.index(i + di, j + dj))) edge = true;
        }
        if (edge) throw std::runtime_error("ball_volume_profile: metric ball escapes the window");
    }

    std::vector<std::pair<double, double>> out;
    out.reserve(radii.size());
    for (double s : radii) {
        double mass = 0.0;
        for (int idx = 0; idx < g.size(); ++idx)
            if (oracle.mask.contains(idx) && dist[static_cast<size_t>(idx)] <= s)
                mass += m.cell_mass[static_cast<size_t>(idx)];
        out.emplace_back(s, mass);
    }
    return out;
}

void write_profile_csv(const std::string& path,
                       const std::vector<std::pair<double, double>>& profile) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("write_profile_csv: cannot open " + path);
    os << "radius,mass\n";
    char buf[80];
    for (auto [r, mass] : profile) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", r, mass);
        os << buf;
    }
}

}  // namespace lqg
