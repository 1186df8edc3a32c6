#pragma once

#include <string>
#include <vector>

#include "lqg/lattice.hpp"

namespace lqg {

/// Real-valued function on a lattice window: the discrete stand-in for the GFF
/// and everything derived from it (mollified fields, pullbacks, sums).
/// `valid_margin` records a boundary band (in plane units) inside which values
/// are not trustworthy; mollification widens it.
struct Field {
    GridSpec grid;
    std::vector<double> values;
    double valid_margin = 0.0;

    Field() = default;
    explicit Field(const GridSpec& g, double fill = 0.0)
        : grid(g), values(static_cast<size_t>(g.size()), fill) {}

    double at(int i, int j) const { return values[static_cast<size_t>(grid.index(i, j))]; }
    double& at(int i, int j) { return values[static_cast<size_t>(grid.index(i, j))]; }
    double at(int idx) const { return values[static_cast<size_t>(idx)]; }

    /// Sub-window on which values are valid (grid shrunk by valid_margin).
    GridSpec valid_window() const;
};

Field constant_field(const GridSpec& g, double c);

/// Pointwise sum; grids must match.  The result keeps the larger valid_margin.
Field add(const Field& a, const Field& b);
Field add_constant(const Field& a, double c);

/// Apply f(x, y) at every vertex.
template <typename F>
Field field_from_function(const GridSpec& g, F&& f) {
    Field out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            Complex z = g.vertex(i, j);
            out.at(i, j) = f(z.real(), z.imag());
        }
    return out;
}

/// Bilinear interpolation at z; z must lie inside the window.
double interp_bilinear(const Field& f, Complex z);

/// Catmull-Rom bicubic interpolation at z; z must lie at least one cell away
/// from the window boundary (4x4 stencil).
double interp_bicubic(const Field& f, Complex z);

/// Margin (plane units) that interp_bicubic needs from the window boundary.
double bicubic_margin(const GridSpec& g);

/// Binary container: "LQGF" magic, version, nx, ny, then origin/spacing/
/// valid_margin and the row-major float64 payload, all little-endian.
void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path);

/// Lossy CSV (x,y,value) export for inspection.
void write_field_csv(const std::string& path, const Field& f);

}  // namespace lqg
