#pragma once

#include <vector>

#include "lqg/conformal.hpp"
#include "lqg/field.hpp"
#include "lqg/metric.hpp"
#include "lqg/params.hpp"

namespace lqg {

/// Regularized gamma-LQG area measure: one cell per vertex with mass
/// eps^{gamma^2/2} e^{gamma h_eps(z)} spacing^2.
struct MeasureField {
    GridSpec grid;
    std::vector<double> cell_mass;
    double epsilon = 0.0;
    double gamma = 0.0;
};

/// Build from an already-mollified field (epsilon must match the mollification
/// actually applied; this is not checkable and is the caller's contract).
MeasureField build_measure(const Field& h_mollified, double epsilon, double gamma);

double measure_of(const MeasureField& m, const VertexSet& region);

/// mu_{h~}(phi(region)) / mu_h(region) with h~ the pullback field mollified at
/// the locally matched scale and phi(region) rasterized on target_grid (a cell
/// belongs iff its center's preimage lands in the region's cell footprint).
/// `mollifier` selects the regularization on both sides (heat kernel default).
double measure_coordinate_change_ratio(const Field& h_raw, const MapDescriptor& map,
                                       const VertexSet& region, double epsilon,
                                       const LqgParams& params, const GridSpec& target_grid,
                                       Mollifier mollifier = Mollifier::heat_kernel);

/// (s, mu(B_s^D(center))) for each metric radius s; the log-log slope over the
/// middle decade estimates the volume growth exponent.
std::vector<std::pair<double, double>> ball_volume_profile(const MetricOracle& oracle,
                                                           const MeasureField& m,
                                                           Complex center,
                                                           const std::vector<double>& radii);

/// Profile rows as CSV (radius, mass).
void write_profile_csv(const std::string& path,
                       const std::vector<std::pair<double, double>>& profile);

}  // namespace lqg
