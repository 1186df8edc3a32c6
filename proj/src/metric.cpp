#include "lqg/metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>

namespace lqg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NeighborTable {
    int di[8];
    int dj[8];
    double len[8];  // in units of spacing
    int count;
};

NeighborTable neighbors_for(NeighborScheme scheme) {
    NeighborTable t{};
    const int axi[4] = {1, -1, 0, 0};
    const int axj[4] = {0, 0, 1, -1};
    t.count = 4;
    for (int k = 0; k < 4; ++k) {
        t.di[k] = axi[k];
        t.dj[k] = axj[k];
        t.len[k] = 1.0;
    }
    if (scheme == NeighborScheme::king8) {
        const int dgi[4] = {1, 1, -1, -1};
        const int dgj[4] = {1, -1, 1, -1};
        for (int k = 0; k < 4; ++k) {
            t.di[4 + k] = dgi[k];
            t.dj[4 + k] = dgj[k];
            t.len[4 + k] = M_SQRT2;
        }
        t.count = 8;
    }
    return t;
}

// min-heap on (distance, vertex); the vertex index breaks ties, which makes
// pop order (and thus returned geodesics) reproducible
using HeapEntry = std::pair<double, int>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>>;

struct SearchResult {
    double value = kInf;
    int hit = -1;
    std::vector<double> dist;
    std::vector<int> parent;
};

// Multi-source Dijkstra over the masked grid graph.  If `targets` is non-null,
// stops as soon as a target is settled; `extra_mask` further restricts the
// graph (internal metrics).  `full_sweep` settles everything.
SearchResult dijkstra(const MetricOracle& o, const std::vector<int>& sources,
                      const std::vector<std::uint8_t>* targets,
                      const std::vector<std::uint8_t>* extra_mask, bool full_sweep) {
    const GridSpec& g = o.field.grid;
    const int n = g.size();
    const NeighborTable nb = neighbors_for(o.scheme);
    SearchResult res;
    res.dist.assign(static_cast<size_t>(n), kInf);
    res.parent.assign(static_cast<size_t>(n), -1);

    auto usable = [&](int idx) {
        return o.mask.member[static_cast<size_t>(idx)] &&
               (!extra_mask || (*extra_mask)[static_cast<size_t>(idx)]);
    };

    MinHeap heap;
    for (int s : sources) {
        if (!usable(s)) continue;
        res.dist[static_cast<size_t>(s)] = 0.0;
        heap.emplace(0.0, s);
    }

    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > res.dist[static_cast<size_t>(u)]) continue;  // stale entry
        if (targets && (*targets)[static_cast<size_t>(u)]) {
            res.value = d;
            res.hit = u;
            if (!full_sweep) return res;
        }
        const int ui = g.ix(u), uj = g.iy(u);
        const double wu = o.weight_factor[static_cast<size_t>(u)];
        for (int k = 0; k < nb.count; ++k) {
            int vi = ui + nb.di[k], vj = uj + nb.dj[k];
            if (vi < 0 || vi >= g.nx || vj < 0 || vj >= g.ny) continue;
            int v = g.index(vi, vj);
            if (!usable(v)) continue;
            double w = nb.len[k] * g.spacing * 0.5 *
                       (wu + o.weight_factor[static_cast<size_t>(v)]);
            double cand = d + w;
            if (cand < res.dist[static_cast<size_t>(v)]) {
                res.dist[static_cast<size_t>(v)] = cand;
                res.parent[static_cast<size_t>(v)] = u;
                heap.emplace(cand, v);
            }
        }
    }
    return res;
}

LatticePath extract_path(const SearchResult& sr, int hit) {
    LatticePath p;
    for (int v = hit; v != -1; v = sr.parent[static_cast<size_t>(v)]) p.vertices.push_back(v);
    std::reverse(p.vertices.begin(), p.vertices.end());
    p.weighted_length = sr.value;
    return p;
}

DistanceResult run_query(const MetricOracle& o, const VertexSet& from, const VertexSet& to,
                         const std::vector<std::uint8_t>* extra_mask, bool want_geodesic) {
    if (!(from.grid == o.field.grid) || !(to.grid == o.field.grid))
        throw std::invalid_argument("distance: vertex set grid mismatch");
    if (from.count() == 0) throw std::invalid_argument("distance: empty source set");
    if (to.count() == 0) throw std::invalid_argument("distance: empty target set");
    auto usable = [&](int idx) {
        return o.mask.contains(idx) && (!extra_mask || (*extra_mask)[static_cast<size_t>(idx)]);
    };
    std::vector<int> sources;
    for (int s : from.indices())
        if (usable(s)) sources.push_back(s);
    if (sources.empty()) throw std::invalid_argument("distance: source set lies outside mask");
    bool any_target = false;
    for (int t : to.indices())
        if (usable(t)) any_target = true;
    if (!any_target) throw std::invalid_argument("distance: target set lies outside mask");
    SearchResult sr = dijkstra(o, sources, &to.member, extra_mask, false);
    DistanceResult out;
    out.value = sr.value;
    if (sr.hit >= 0 && want_geodesic) out.geodesic = extract_path(sr, sr.hit);
    return out;
}

}  // namespace

MetricOracle make_oracle(Field field, const LqgParams& params, VertexSet mask,
                         NeighborScheme scheme) {
    if (!(mask.grid == field.grid)) throw std::invalid_argument("make_oracle: mask grid mismatch");
    MetricOracle o;
    o.params = params;
    o.scheme = scheme;
    o.weight_factor.resize(field.values.size());
    for (size_t k = 0; k < field.values.size(); ++k) {
        double w = std::exp(params.xi * field.values[k]);
        if (mask.member[k] && (!std::isfinite(w) || w <= 0.0))
            throw std::invalid_argument("make_oracle: non-finite edge weight under mask");
        o.weight_factor[k] = w;
    }
    o.field = std::move(field);
    o.mask = std::move(mask);
    return o;
}

MetricOracle make_oracle(Field field, const LqgParams& params, NeighborScheme scheme) {
    VertexSet mask = window_mask(field.grid, field.valid_window());
    return make_oracle(std::move(field), params, std::move(mask), scheme);
}

double edge_weight(const MetricOracle& o, int u, int v) {
    const GridSpec& g = o.field.grid;
    if (!o.mask.contains(u) || !o.mask.contains(v))
        throw std::invalid_argument("edge_weight: vertex outside mask");
    int di = std::abs(g.ix(u) - g.ix(v));
    int dj = std::abs(g.iy(u) - g.iy(v));
    bool axis = (di + dj == 1);
    bool diag = (di == 1 && dj == 1 && o.scheme == NeighborScheme::king8);
    if (!axis && !diag) throw std::invalid_argument("edge_weight: vertices not adjacent");
    double len = axis ? g.spacing : M_SQRT2 * g.spacing;
    return len * 0.5 *
           (o.weight_factor[static_cast<size_t>(u)] + o.weight_factor[static_cast<size_t>(v)]);
}

DistanceResult distance(const MetricOracle& o, const VertexSet& from, const VertexSet& to,
                        bool want_geodesic) {
    return run_query(o, from, to, nullptr, want_geodesic);
}

DistanceResult distance(const MetricOracle& o, int from, int to, bool want_geodesic) {
    VertexSet f(o.field.grid), t(o.field.grid);
    f.set(from);
    t.set(to);
    return run_query(o, f, t, nullptr, want_geodesic);
}

DistanceResult internal_distance(const MetricOracle& o, const VertexSet& sub,
                                 const VertexSet& from, const VertexSet& to,
                                 bool want_geodesic) {
    if (!from.subset_of(sub) || !to.subset_of(sub))
        throw std::invalid_argument("internal_distance: endpoints must lie in sub");
    return run_query(o, from, to, &sub.member, want_geodesic);
}

DistanceResult internal_distance(const MetricOracle& o, const VertexSet& sub, int from, int to,
                                 bool want_geodesic) {
    VertexSet f(o.field.grid), t(o.field.grid);
    f.set(from);
    t.set(to);
    return internal_distance(o, sub, f, t, want_geodesic);
}

std::vector<double> distances_from(const MetricOracle& o, const VertexSet& sources) {
    std::vector<int> src = sources.indices();
    if (src.empty()) throw std::invalid_argument("distances_from: empty source set");
    SearchResult sr = dijkstra(o, src, nullptr, nullptr, true);
    return std::move(sr.dist);
}

MetricOracle weyl_scale(const MetricOracle& o, const Field& f) {
    if (!(f.grid == o.field.grid)) throw std::invalid_argument("weyl_scale: grid mismatch");
    return make_oracle(add(o.field, f), o.params, o.mask, o.scheme);
}

MetricOracle weyl_shift(const MetricOracle& o, double c) {
    return make_oracle(add_constant(o.field, c), o.params, o.mask, o.scheme);
}

LatticePath disconnecting_circuit(const MetricOracle& o, const Annulus& a) {
    const GridSpec& g = o.field.grid;
    VertexSet ring = vertices_in_annulus(g, a).intersect(o.mask);
    std::vector<int> ring_idx = ring.indices();
    if (ring_idx.empty()) throw std::runtime_error("disconnecting_circuit: empty annulus ring");

    // ring connectivity under the oracle's scheme
    const NeighborTable nb = neighbors_for(o.scheme);
    {
        std::vector<std::uint8_t> seen(static_cast<size_t>(g.size()), 0);
        std::vector<int> stack{ring_idx.front()};
        seen[static_cast<size_t>(ring_idx.front())] = 1;
        size_t reached = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            int ui = g.ix(u), uj = g.iy(u);
            for (int k = 0; k < nb.count; ++k) {
                int vi = ui + nb.di[k], vj = uj + nb.dj[k];
                if (vi < 0 || vi >= g.nx || vj < 0 || vj >= g.ny) continue;
                int v = g.index(vi, vj);
                if (!ring.contains(v) || seen[static_cast<size_t>(v)]) continue;
                seen[static_cast<size_t>(v)] = 1;
                ++reached;
                stack.push_back(v);
            }
        }
        if (reached != ring_idx.size())
            throw std::runtime_error("disconnecting_circuit: annulus ring disconnected");
    }

    // Cut the annulus along the ray {y = cy, x > cx}.  An edge crosses the cut
    // when its endpoints straddle the ray to the right of the center; vertices
    // exactly on the ray count as the upper side.
    const double cx = a.center.real(), cy = a.center.imag();
    auto upper = [&](int v) { return g.vertex(v).imag() >= cy; };
    auto crosses_cut = [&](int u, int v) {
        if (upper(u) == upper(v)) return false;
        Complex zu = g.vertex(u), zv = g.vertex(v);
        double t = (cy - zu.imag()) / (zv.imag() - zu.imag());
        double xstar = zu.real() + t * (zv.real() - zu.real());
        return xstar > cx;
    };

    // Vertices incident to a cut edge; candidate base points of the circuit.
    std::vector<int> cut_vertices;
    for (int u : ring_idx) {
        int ui = g.ix(u), uj = g.iy(u);
        bool incident = false;
        for (int k = 0; k < nb.count && !incident; ++k) {
            int vi = ui + nb.di[k], vj = uj + nb.dj[k];
            if (vi < 0 || vi >= g.nx || vj < 0 || vj >= g.ny) continue;
            int v = g.index(vi, vj);
            if (ring.contains(v) && crosses_cut(u, v)) incident = true;
        }
        if (incident) cut_vertices.push_back(u);
    }
    if (cut_vertices.empty())
        throw std::runtime_error("disconnecting_circuit: annulus does not encircle the hole");

    // Two-sheet cover: a shortest path from (v, sheet 0) to (v, sheet 1)
    // projects to the minimum-weight odd-winding (separating) closed walk
    // through v.  Minimize over cut-incident vertices.
    const int n = g.size();
    double best = kInf;
    std::vector<int> best_cycle;
    std::vector<double> dist(static_cast<size_t>(2 * n));
    std::vector<int> parent(static_cast<size_t>(2 * n));
    for (int s : cut_vertices) {
        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(parent.begin(), parent.end(), -1);
        MinHeap heap;
        dist[static_cast<size_t>(s)] = 0.0;
        heap.emplace(0.0, s);
        const int goal = s + n;
        while (!heap.empty()) {
            auto [d, x] = heap.top();
            heap.pop();
            if (d > dist[static_cast<size_t>(x)]) continue;
            if (d >= best) break;  // cannot improve on the current best circuit
            if (x == goal) break;
            int u = x % n, sheet = x / n;
            int ui = g.ix(u), uj = g.iy(u);
            double wu = o.weight_factor[static_cast<size_t>(u)];
            for (int k = 0; k < nb.count; ++k) {
                int vi = ui + nb.di[k], vj = uj + nb.dj[k];
                if (vi < 0 || vi >= g.nx || vj < 0 || vj >= g.ny) continue;
                int v = g.index(vi, vj);
                if (!ring.contains(v)) continue;
                int vsheet = crosses_cut(u, v) ? (1 - sheet) : sheet;
                int y = v + vsheet * n;
                double w = nb.len[k] * g.spacing * 0.5 *
                           (wu + o.weight_factor[static_cast<size_t>(v)]);
                double cand = d + w;
                if (cand < dist[static_cast<size_t>(y)]) {
                    dist[static_cast<size_t>(y)] = cand;
                    parent[static_cast<size_t>(y)] = x;
                    heap.emplace(cand, y);
                }
            }
        }
        if (dist[static_cast<size_t>(goal)] < best) {
            best = dist[static_cast<size_t>(goal)];
            best_cycle.clear();
            for (int x = goal; x != -1; x = parent[static_cast<size_t>(x)])
                best_cycle.push_back(x % n);
            std::reverse(best_cycle.begin(), best_cycle.end());
        }
    }
    if (!std::isfinite(best))
        throw std::runtime_error("disconnecting_circuit: no separating cycle found");
    LatticePath p;
    p.vertices = std::move(best_cycle);
    p.weighted_length = best;
    return p;
}

std::vector<std::pair<int, int>> geodesic_crossing_times(const GridSpec& grid,
                                                         const LatticePath& path,
                                                         const Annulus& a) {
    std::vector<std::pair<int, int>> out;
    int start = -1;
    for (int i = 0; i < static_cast<int>(path.vertices.size()); ++i) {
        bool inside = a.contains_closed(grid.vertex(path.vertices[static_cast<size_t>(i)]));
        if (inside && start < 0) start = i;
        if (!inside && start >= 0) {
            out.emplace_back(start, i - 1);
            start = -1;
        }
    }
    if (start >= 0) out.emplace_back(start, static_cast<int>(path.vertices.size()) - 1);
    return out;
}

double recompute_length(const MetricOracle& o, const LatticePath& path) {
    double acc = 0.0;
    for (size_t k = 1; k < path.vertices.size(); ++k)
        acc += edge_weight(o, path.vertices[k - 1], path.vertices[k]);
    return acc;
}

void write_geodesic_csv(const std::string& path, const GridSpec& grid, const LatticePath& p) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("write_geodesic_csv: cannot open " + path);
    os << "index,x,y\n";
    char buf[80];
    for (size_t k = 0; k < p.vertices.size(); ++k) {
        Complex z = grid.vertex(p.vertices[k]);
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", k, z.real(), z.imag());
        os << buf;
    }
}

void write_distance_matrix_csv(const std::string& path, const MetricOracle& o,
                               const std::vector<int>& vertices) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("write_distance_matrix_csv: cannot open " + path);
    const GridSpec& g = o.field.grid;
    os << "from_x,from_y";
    char buf[96];
    for (int v : vertices) {
        Complex z = g.vertex(v);
        std::snprintf(buf, sizeof(buf), ",(%.12g %.12g)", z.real(), z.imag());
        os << buf;
    }
    os << "\n";
    for (int u : vertices) {
        std::vector<double> dist = distances_from(o, singleton(g, u));
        Complex zu = g.vertex(u);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", zu.real(), zu.imag());
        os << buf;
        for (int v : vertices) {
            std::snprintf(buf, sizeof(buf), ",%.17g", dist[static_cast<size_t>(v)]);
            os << buf;
        }
        os << "\n";
    }
}

}  // namespace lqg
