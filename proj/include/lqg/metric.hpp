#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "lqg/field.hpp"
#include "lqg/params.hpp"

namespace lqg {

enum class NeighborScheme { axis4, king8 };

/// Path on the lattice graph; consecutive vertices are adjacent under the
/// oracle's neighbor scheme and weighted_length is the sum of its edge weights.
struct LatticePath {
    std::vector<int> vertices;
    double weighted_length = 0.0;
};

struct DistanceResult {
    double value = std::numeric_limits<double>::infinity();
    std::optional<LatticePath> geodesic;

    bool finite() const { return std::isfinite(value); }
};

/// Immutable bundle (mollified field, xi, mask, scheme) answering LFPP
/// shortest-path queries.  Edge weights are len(u,v) * (e^{xi h(u)} + e^{xi h(v)})/2
/// with len = spacing for axis edges and sqrt(2)*spacing for diagonals.
/// Queries use private working memory, so any number may run concurrently.
struct MetricOracle {
    Field field;
    LqgParams params;
    VertexSet mask;
    NeighborScheme scheme = NeighborScheme::king8;
    std::vector<double> weight_factor;  // cached e^{xi * field(v)}
};

/// Build an oracle; the mask must live on the field's grid and all field
/// values under the mask must be finite.
MetricOracle make_oracle(Field field, const LqgParams& params, VertexSet mask,
                         NeighborScheme scheme = NeighborScheme::king8);

/// Convenience: mask = the field's valid window (margin-shrunk).
MetricOracle make_oracle(Field field, const LqgParams& params,
                         NeighborScheme scheme = NeighborScheme::king8);

/// Weight of the edge between adjacent in-mask vertices u, v.
double edge_weight(const MetricOracle& o, int u, int v);

/// Exact multi-source/multi-target shortest-path distance over the masked
/// graph.  Infinite iff the sets lie in different mask components.
DistanceResult distance(const MetricOracle& o, const VertexSet& from, const VertexSet& to,
                        bool want_geodesic = true);
DistanceResult distance(const MetricOracle& o, int from, int to, bool want_geodesic = true);

/// Shortest path constrained to `sub` (the discrete internal metric D(.,.;sub)).
DistanceResult internal_distance(const MetricOracle& o, const VertexSet& sub,
                                 const VertexSet& from, const VertexSet& to,
                                 bool want_geodesic = true);
DistanceResult internal_distance(const MetricOracle& o, const VertexSet& sub, int from, int to,
                                 bool want_geodesic = true);

/// Distances from a source set to every vertex (full sweep, no early exit).
/// Unreachable or masked-out vertices get +infinity.
std::vector<double> distances_from(const MetricOracle& o, const VertexSet& sources);

/// New oracle for the field + f (Weyl scaling).  For constant f = c every
/// distance is scaled by exactly e^{xi c}.
MetricOracle weyl_scale(const MetricOracle& o, const Field& f);
MetricOracle weyl_shift(const MetricOracle& o, double c);

/// Minimum-weight closed lattice path inside the annulus separating its inner
/// and outer boundaries, via the cut-and-duplicate construction (cut the ring
/// along one ray, run shortest paths between the two copies of each cut
/// vertex).  Throws if the annulus ring is disconnected in the masked graph.
LatticePath disconnecting_circuit(const MetricOracle& o, const Annulus& a);

/// Maximal index intervals [entry, exit] during which the path's vertices lie
/// in the closed annulus; ordered and disjoint.  Empty if no crossing.
std::vector<std::pair<int, int>> geodesic_crossing_times(const GridSpec& grid,
                                                         const LatticePath& path,
                                                         const Annulus& a);

/// Re-sum the path's edge weights (for validating returned geodesics).
double recompute_length(const MetricOracle& o, const LatticePath& path);

/// Geodesic as CSV rows (index, x, y).
void write_geodesic_csv(const std::string& path, const GridSpec& grid, const LatticePath& p);

/// Distances between every pair of the given vertices, written as a CSV
/// matrix with a position header row/column.
void write_distance_matrix_csv(const std::string& path, const MetricOracle& o,
                               const std::vector<int>& vertices);

}  // namespace lqg
