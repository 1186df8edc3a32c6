#include "lqg/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace lqg {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

GridSpec::GridSpec(Complex origin_, double spacing_, int nx_, int ny_)
    : origin(origin_), spacing(spacing_), nx(nx_), ny(ny_) {
    if (!finite(origin_)) throw std::invalid_argument("GridSpec: origin must be finite");
    if (!(spacing_ > 0.0) || !std::isfinite(spacing_))
        throw std::invalid_argument("GridSpec: spacing must be positive");
    if (nx_ < 2 || ny_ < 2) throw std::invalid_argument("GridSpec: nx, ny must be >= 2");
}

int GridSpec::nearest(Complex z) const {
    int i = static_cast<int>(std::lround((z.real() - origin.real()) / spacing));
    int j = static_cast<int>(std::lround((z.imag() - origin.imag()) / spacing));
    i = std::clamp(i, 0, nx - 1);
    j = std::clamp(j, 0, ny - 1);
    return index(i, j);
}

Annulus::Annulus(Complex center_, double inner, double outer)
    : center(center_), inner_radius(inner), outer_radius(outer) {
    if (!finite(center_)) throw std::invalid_argument("Annulus: center must be finite");
    if (!(inner > 0.0) || !(outer > inner) || !std::isfinite(outer))
        throw std::invalid_argument("Annulus: need 0 < inner_radius < outer_radius");
}

int VertexSet::count() const {
    int n = 0;
    for (auto m : member) n += (m != 0);
    return n;
}

std::vector<int> VertexSet::indices() const {
    std::vector<int> out;
    for (int idx = 0; idx < static_cast<int>(member.size()); ++idx)
        if (member[static_cast<size_t>(idx)]) out.push_back(idx);
    return out;
}

bool VertexSet::subset_of(const VertexSet& other) const {
    if (!(grid == other.grid)) throw std::invalid_argument("VertexSet: grid mismatch");
    for (size_t k = 0; k < member.size(); ++k)
        if (member[k] && !other.member[k]) return false;
    return true;
}

VertexSet VertexSet::intersect(const VertexSet& other) const {
    if (!(grid == other.grid)) throw std::invalid_argument("VertexSet: grid mismatch");
    VertexSet out(grid);
    for (size_t k = 0; k < member.size(); ++k) out.member[k] = member[k] && other.member[k];
    return out;
}

VertexSet vertices_on_circle(const GridSpec& grid, Complex center, double radius) {
    if (radius < 2.0 * grid.spacing)
        throw std::invalid_argument("vertices_on_circle: radius < 2*spacing");
    if (center.real() - radius < grid.xmin() || center.real() + radius > grid.xmax() ||
        center.imag() - radius < grid.ymin() || center.imag() + radius > grid.ymax())
        throw std::invalid_argument("vertices_on_circle: circle not inside grid window");

    const double tol = grid.spacing / std::sqrt(2.0);
    VertexSet out(grid);
    // Only scan the band of rows/columns the ring can touch.
    int i0 = std::max(0, static_cast<int>(std::floor((center.real() - radius - tol - grid.xmin()) / grid.spacing)));
    int i1 = std::min(grid.nx - 1, static_cast<int>(std::ceil((center.real() + radius + tol - grid.xmin()) / grid.spacing)));
    int j0 = std::max(0, static_cast<int>(std::floor((center.imag() - radius - tol - grid.ymin()) / grid.spacing)));
    int j1 = std::min(grid.ny - 1, static_cast<int>(std::ceil((center.imag() + radius + tol - grid.ymin()) / grid.spacing)));
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            double d = std::abs(grid.vertex(i, j) - center);
            if (std::abs(d - radius) <= tol) out.set(grid.index(i, j));
        }
    if (out.empty()) throw std::runtime_error("vertices_on_circle: empty ring (unexpected)");
    return out;
}

VertexSet vertices_in_annulus(const GridSpec& grid, const Annulus& a) {
    VertexSet out(grid);
    for (int idx = 0; idx < grid.size(); ++idx)
        if (a.contains(grid.vertex(idx))) out.set(idx);
    return out;
}

VertexSet vertices_in_closed_annulus(const GridSpec& grid, Complex center,
                                     double r1, double r2, double tol) {
    if (!(r1 > 0.0) || !(r2 > r1)) throw std::invalid_argument("closed annulus: need 0 < r1 < r2");
    VertexSet out(grid);
    for (int idx = 0; idx < grid.size(); ++idx) {
        double d = std::abs(grid.vertex(idx) - center);
        if (d >= r1 - tol && d <= r2 + tol) out.set(idx);
    }
    return out;
}

VertexSet vertices_in_disk(const GridSpec& grid, Complex center, double radius) {
    VertexSet out(grid);
    for (int idx = 0; idx < grid.size(); ++idx)
        if (std::abs(grid.vertex(idx) - center) <= radius) out.set(idx);
    return out;
}

VertexSet singleton(const GridSpec& grid, int idx) {
    VertexSet out(grid);
    out.set(idx);
    return out;
}

GridSpec shrink_window(const GridSpec& grid, double margin) {
    if (margin < 0.0) throw std::invalid_argument("shrink_window: margin must be >= 0");
    if (margin == 0.0) return grid;
    // Smallest whole number of cells covering the margin.
    int k = static_cast<int>(std::ceil(margin / grid.spacing - 1e-12));
    int nx = grid.nx - 2 * k;
    int ny = grid.ny - 2 * k;
    if (nx < 2 || ny < 2) throw std::invalid_argument("shrink_window: margin leaves empty window");
    return GridSpec(grid.vertex(k, k), grid.spacing, nx, ny);
}

VertexSet window_mask(const GridSpec& grid, const GridSpec& sub) {
    if (sub.spacing != grid.spacing) throw std::invalid_argument("window_mask: spacing mismatch");
    double fx = (sub.origin.real() - grid.origin.real()) / grid.spacing;
    double fy = (sub.origin.imag() - grid.origin.imag()) / grid.spacing;
    int ox = static_cast<int>(std::lround(fx));
    int oy = static_cast<int>(std::lround(fy));
    if (std::abs(fx - ox) > 1e-9 || std::abs(fy - oy) > 1e-9)
        throw std::invalid_argument("window_mask: sub-window not lattice aligned");
    if (ox < 0 || oy < 0 || ox + sub.nx > grid.nx || oy + sub.ny > grid.ny)
        throw std::invalid_argument("window_mask: sub-window not contained in grid");
    VertexSet out(grid);
    for (int j = 0; j < sub.ny; ++j)
        for (int i = 0; i < sub.nx; ++i) out.set(grid.index(ox + i, oy + j));
    return out;
}

}  // namespace lqg
