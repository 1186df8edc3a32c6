#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lqg {

/// Points live in continuum plane coordinates throughout; lattice indices are
/// an implementation detail of GridSpec.
using Complex = std::complex<double>;

/// Uniform square lattice window.  vertex(i,j) = origin + (i*spacing, j*spacing),
/// 0 <= i < nx, 0 <= j < ny.  Values attached to vertices are stored row-major
/// with index j*nx + i.
struct GridSpec {
    Complex origin{0.0, 0.0};
    double spacing = 1.0;
    int nx = 2;
    int ny = 2;

    GridSpec() = default;
    GridSpec(Complex origin_, double spacing_, int nx_, int ny_);

    int size() const { return nx * ny; }
    int index(int i, int j) const { return j * nx + i; }
    int ix(int idx) const { return idx % nx; }
    int iy(int idx) const { return idx / nx; }

    Complex vertex(int i, int j) const {
        return {origin.real() + i * spacing, origin.imag() + j * spacing};
    }
    Complex vertex(int idx) const { return vertex(ix(idx), iy(idx)); }

    double xmin() const { return origin.real(); }
    double ymin() const { return origin.imag(); }
    double xmax() const { return origin.real() + (nx - 1) * spacing; }
    double ymax() const { return origin.imag() + (ny - 1) * spacing; }

    bool contains(Complex z) const {
        return z.real() >= xmin() && z.real() <= xmax() &&
               z.imag() >= ymin() && z.imag() <= ymax();
    }

    /// Index of the vertex closest to z (z need not be inside the window;
    /// the result is clamped to the grid).
    int nearest(Complex z) const;

    bool operator==(const GridSpec& o) const {
        return origin == o.origin && spacing == o.spacing && nx == o.nx && ny == o.ny;
    }
};

/// Open annulus A_{r1,r2}(center) = B_{r2} \ closure(B_{r1}).
struct Annulus {
    Complex center{0.0, 0.0};
    double inner_radius = 0.0;
    double outer_radius = 0.0;

    Annulus(Complex center_, double inner, double outer);

    bool contains(Complex z) const {
        double d = std::abs(z - center);
        return d > inner_radius && d < outer_radius;
    }
    bool contains_closed(Complex z) const {
        double d = std::abs(z - center);
        return d >= inner_radius && d <= outer_radius;
    }
};

/// Subset of a grid's vertices, one flag per vertex.
struct VertexSet {
    GridSpec grid;
    std::vector<std::uint8_t> member;

    VertexSet() = default;
    explicit VertexSet(const GridSpec& g, bool all = false)
        : grid(g), member(static_cast<size_t>(g.size()), all ? 1 : 0) {}

    bool contains(int idx) const { return member[static_cast<size_t>(idx)] != 0; }
    void set(int idx, bool v = true) { member[static_cast<size_t>(idx)] = v ? 1 : 0; }
    int count() const;
    bool empty() const { return count() == 0; }
    std::vector<int> indices() const;

    /// True if every member of this set is a member of `other` (same grid).
    bool subset_of(const VertexSet& other) const;

    VertexSet intersect(const VertexSet& other) const;
};

/// All vertices v with | |v - center| - radius | <= spacing/sqrt(2).
/// The tolerance makes the discrete circle a connected ring under 8-neighbor
/// adjacency.  Requires radius >= 2*spacing and the circle inside the window.
VertexSet vertices_on_circle(const GridSpec& grid, Complex center, double radius);

/// All vertices strictly inside the open annulus.  May be empty.
VertexSet vertices_in_annulus(const GridSpec& grid, const Annulus& a);

/// Vertices of the closed annulus fattened by `tol` on both radii:
/// r1 - tol <= |v - center| <= r2 + tol.  Used to host paths whose endpoints
/// come from the fattened circle rings.
VertexSet vertices_in_closed_annulus(const GridSpec& grid, Complex center,
                                     double r1, double r2, double tol);

/// Vertices inside the closed disk of radius r.
VertexSet vertices_in_disk(const GridSpec& grid, Complex center, double radius);

/// Single-vertex set.
VertexSet singleton(const GridSpec& grid, int idx);

/// Central sub-window whose vertices all lie at distance >= margin from the
/// boundary of the original window rectangle.
GridSpec shrink_window(const GridSpec& grid, double margin);

/// Mask (on `grid`) of the vertices belonging to a sub-window of the same
/// lattice.  Throws if `sub` is not aligned with `grid`.
VertexSet window_mask(const GridSpec& grid, const GridSpec& sub);

}  // namespace lqg
