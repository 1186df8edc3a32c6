#pragma once

#include <functional>
#include <optional>
#include <string>

#include "lqg/conformal.hpp"
#include "lqg/metric.hpp"

namespace lqg {

/// Parameters of the good-annulus events E_r(z): alpha in (1/2,1) sets the
/// narrow annulus A_{alpha r, r}(z), big_a > 1 bounds the separating circuit,
/// delta in (0,1) is the closeness tolerance.  Universally quantified
/// conditions are checked on pair_budget sampled pairs; epsilon is the
/// mollification scale of the underlying LFPP metrics.
struct AnnulusEventParams {
    double alpha = 0.75;
    double big_a = 25.0;
    double delta = 0.5;
    int pair_budget = 8;
    double epsilon = 0.0;

    void validate() const;
};

struct EventReport {
    std::string event;
    bool verdict = false;
    int sampled = 0;     // pairs examined
    int qualifying = 0;  // pairs that met the condition's hypothesis
    double value = 0.0;  // op-specific measurement (e.g. circuit length)
    double threshold = 0.0;
    std::optional<LatticePath> witness;
};

std::string to_json_row(const EventReport& rep, Complex z, double r,
                        const AnnulusEventParams& ep);

/// Condition 1 of E_r(z): every sampled pair (u on the alpha r circle, v on
/// the r circle) whose D_h-geodesic stays inside the closed narrow annulus
/// satisfies D_h^phi(u,v) <= (1+delta) D_h(u,v).  Pairs whose geodesic leaves
/// the annulus are skipped.
EventReport check_condition1(const Field& h, const MapDescriptor& map, Complex z, double r,
                             const LqgParams& params, const AnnulusEventParams& ep,
                             const GridSpec& target_grid, CounterRng& rng);

/// Condition 2: for sampled pairs that are "far apart" (D(u,v) exceeds the
/// distance from u to the wide-annulus boundary, for D_h or D_h^phi), paths
/// confined to the narrow annulus are strictly longer than the wide-annulus
/// internal distance.
EventReport check_condition2(const Field& h, const MapDescriptor& map, Complex z, double r,
                             const LqgParams& params, const AnnulusEventParams& ep,
                             const GridSpec& target_grid, CounterRng& rng);

/// Condition 3: a circuit in A_{alpha r, r}(z) separating its boundaries with
/// D_h-length at most big_a * D_h(circle alpha r, circle r).  The circuit is
/// returned as witness; `value` and `threshold` carry the two sides.
EventReport check_condition3(const Field& h, Complex z, double r, const LqgParams& params,
                             const AnnulusEventParams& ep);

/// Empirical probability, over an ensemble of fields, that
///   sup_{u,v on circle r} D_h^phi(u,v; A_{r/2,2r}(z)) <= C * D_h(circle r/2, circle r),
/// the sup approximated over pair_budget boundary pairs.
double bilip_hypothesis_probability(const std::function<Field(int)>& h_at, int sample_count,
                                    const MapDescriptor& map, Complex z, double r, double big_c,
                                    const LqgParams& params, const AnnulusEventParams& ep,
                                    const GridSpec& target_grid, std::uint64_t pair_seed);

/// Lemma-3.7-style event: all sampled pairs u,v in the open annulus with
/// D_h(u,v) >= s * r^{xi Q} e^{xi h_r(z)} have narrow-annulus internal distance
/// >= big_s * r^{xi Q} e^{xi h_r(z)}  (h_r = circle average).
EventReport narrow_annulus_length_event(const Field& h, Complex z, double r, double alpha,
                                        double s, double big_s, const LqgParams& params,
                                        double epsilon, int pair_budget, CounterRng& rng);

}  // namespace lqg
