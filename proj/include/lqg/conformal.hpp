#pragma once

#include <vector>

#include "lqg/averages.hpp"
#include "lqg/field.hpp"
#include "lqg/metric.hpp"
#include "lqg/params.hpp"
#include "lqg/rng.hpp"

namespace lqg {

enum class MapKind { affine, moebius, power2, exp_strip };

/// Closed-form conformal map with exact evaluation, inverse and derivative.
/// power2 is z -> z^2 on the right half-plane; exp_strip is z -> e^z on the
/// horizontal strip |Im z| < pi.  Both land in the slit plane C \ (-inf, 0].
struct MapDescriptor {
    MapKind kind = MapKind::affine;
    Complex a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};

    static MapDescriptor affine(Complex a, Complex b);
    static MapDescriptor moebius(Complex a, Complex b, Complex c, Complex d);
    static MapDescriptor power2();
    static MapDescriptor exp_strip();
    static MapDescriptor identity() { return affine({1.0, 0.0}, {0.0, 0.0}); }

    Complex evaluate(Complex z) const;
    Complex inverse(Complex w) const;
    Complex derivative(Complex z) const;  // phi'(z)
    /// log|(phi^{-1})'(w)|, computed through the chain rule -log|phi'(phi^{-1}(w))|.
    double inverse_derivative_log_abs(Complex w) const;

    bool in_domain(Complex z) const;
    bool in_codomain(Complex w) const;
};

/// h^phi = h o phi^{-1} + Q log|(phi^{-1})'| sampled on a target grid; the base
/// field is read off by bicubic interpolation, the log term is analytic.
struct PullbackField {
    Field field;  // values on the target grid, valid_margin inherited
    MapDescriptor map;
    LqgParams params;
};

PullbackField pullback_field(const Field& base, const MapDescriptor& map,
                             const GridSpec& target_grid, const LqgParams& params);

/// Local mollification scale matched to the map: eps * |phi'(z0)|.
double matched_epsilon(const MapDescriptor& map, Complex z0, double epsilon);

/// Lattice-aligned grid (given spacing) covering the image of B_R(z0) under
/// the map, padded by `margin` on all sides.
GridSpec target_grid_for(const MapDescriptor& map, Complex z0, double R, double spacing,
                         double margin);

/// Oracle for D_{h^phi} built by heat-mollifying the pullback at eps_target.
/// If `mask` is empty the valid window is used.
MetricOracle pullback_oracle(const PullbackField& pb, double eps_target,
                             NeighborScheme scheme = NeighborScheme::king8);

/// D_h^phi(z,w) = D_{h^phi}(phi(z), phi(w)), endpoints snapped to the nearest
/// target vertices.  `snap` (optional) receives the larger snap distance.
double pulled_back_distance(const MetricOracle& target_oracle, const MapDescriptor& map,
                            Complex z, Complex w, double* snap = nullptr);

/// One-shot version: builds the target oracle internally.
double pulled_back_distance(const Field& base, const MapDescriptor& map,
                            const GridSpec& target_grid, double epsilon,
                            const LqgParams& params, Complex z, Complex w);

/// Paired oracles for comparing D_h and D_h^phi around a ball B_r(z0):
/// both metrics are internal metrics of corresponding regions (a disk of
/// radius domain_factor*r and its image), mollified at matched scales.
struct ComparisonOracles {
    MetricOracle direct;   // D_h side, masked to the disk
    MetricOracle pulled;   // D_{h^phi} side, masked to the disk's image
    MapDescriptor map;
    double eps_direct = 0.0;
    double eps_target = 0.0;
};

ComparisonOracles make_comparison_oracles(const Field& h, const MapDescriptor& map,
                                          Complex z0, double r, double epsilon,
                                          const LqgParams& params,
                                          const GridSpec& target_grid,
                                          double domain_factor = 2.0);

/// A pair of vertex-snapped points in B_r(center) at separation >= min_sep.
/// Draws are sequential, so nested budgets sample nested pair sequences.
std::pair<Complex, Complex> draw_snapped_pair(CounterRng& rng, const GridSpec& g, Complex center,
                                              double r, double min_sep);

/// Ratios D_h^phi(u,v) / D_h(u,v) over `pair_budget` sampled pairs u,v in
/// B_r(center) with |u - v| >= b*r.
std::vector<double> covariance_ratio_sample(const Field& h, const MapDescriptor& map,
                                            Complex ball_center, double r, double epsilon,
                                            const LqgParams& params, int pair_budget, double b,
                                            const GridSpec& target_grid, CounterRng& rng,
                                            double domain_factor = 2.0);

/// max over sampled pairs of |D_h^phi(u,v) - D_h(u,v)| / (r^{xi Q} e^{xi h_{f,r}(z)}).
/// The closeness event F_r(z) at threshold delta is {statistic <= delta}.
double sup_difference_statistic(const Field& h, const MapDescriptor& map, Complex z, double r,
                                double epsilon, const LqgParams& params,
                                const BumpKernel& kernel, int pair_budget,
                                const GridSpec& target_grid, CounterRng& rng,
                                double domain_factor = 2.0);

}  // namespace lqg
