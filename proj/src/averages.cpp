#include "lqg/averages.hpp"

#include <cmath>

#include "fft_utils.hpp"

namespace lqg {

double circle_average(const Field& field, Complex center, double radius) {
    const GridSpec& g = field.grid;
    if (radius < 2.0 * g.spacing)
        throw std::invalid_argument("circle_average: radius < 2*spacing");
    if (center.real() - radius < g.xmin() || center.real() + radius > g.xmax() ||
        center.imag() - radius < g.ymin() || center.imag() + radius > g.ymax())
        throw std::invalid_argument("circle_average: circle not inside window");
    int n = std::max(16, static_cast<int>(std::ceil(2.0 * M_PI * radius / g.spacing)));
    double acc = 0.0;
    for (int t = 0; t < n; ++t) {
        double a = 2.0 * M_PI * t / n;
        acc += interp_bilinear(field, center + radius * Complex(std::cos(a), std::sin(a)));
    }
    return acc / n;
}

double smoothed_average(const Field& field, const BumpKernel& kernel, Complex center,
                        double radius) {
    const GridSpec& g = field.grid;
    if (!(radius > 0.0)) throw std::invalid_argument("smoothed_average: radius must be > 0");
    if (center.real() - radius < g.xmin() || center.real() + radius > g.xmax() ||
        center.imag() - radius < g.ymin() || center.imag() + radius > g.ymax())
        throw std::invalid_argument("smoothed_average: support disk not inside window");

    int i0 = std::max(0, static_cast<int>(std::floor((center.real() - radius - g.xmin()) / g.spacing)));
    int i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((center.real() + radius - g.xmin()) / g.spacing)));
    int j0 = std::max(0, static_cast<int>(std::floor((center.imag() - radius - g.ymin()) / g.spacing)));
    int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((center.imag() + radius - g.ymin()) / g.spacing)));
    double wsum = 0.0, acc = 0.0;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            double t = std::abs(g.vertex(i, j) - center) / radius;
            double w = kernel.profile(t);
            if (w > 0.0) {
                wsum += w;
                acc += w * field.at(i, j);
            }
        }
    if (wsum <= 0.0)
        throw std::invalid_argument("smoothed_average: no vertices under kernel support");
    return acc / wsum;
}

Field heat_mollify(const Field& field, double epsilon, double variance_scale) {
    const GridSpec& g = field.grid;
    if (epsilon < g.spacing)
        throw std::invalid_argument("heat_mollify: epsilon smaller than mesh spacing");
    if (!(variance_scale > 0.0))
        throw std::invalid_argument("heat_mollify: variance_scale must be > 0");
    const double cutoff = 4.0 * epsilon;
    const int reach = static_cast<int>(std::floor(cutoff / g.spacing));
    // Linear convolution via zero-padding to a smooth FFT size; values within
    // 4*eps of the window edge see the padding and are excluded by the margin.
    const int px = fft::next_smooth(g.nx + 2 * reach + 1);
    const int py = fft::next_smooth(g.ny + 2 * reach + 1);
    std::vector<double> data(static_cast<size_t>(px) * py, 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) data[static_cast<size_t>(j) * px + i] = field.at(i, j);

    std::vector<double> ker(static_cast<size_t>(px) * py, 0.0);
    const double inv_var = 1.0 / (variance_scale * epsilon * epsilon);
    double mass = 0.0;
    for (int dj = -reach; dj <= reach; ++dj)
        for (int di = -reach; di <= reach; ++di) {
            double r2 = (static_cast<double>(di) * di + static_cast<double>(dj) * dj) *
                        g.spacing * g.spacing;
            if (r2 > cutoff * cutoff) continue;
            double w = std::exp(-r2 * inv_var);
            ker[static_cast<size_t>((dj + py) % py) * px + ((di + px) % px)] = w;
            mass += w;
        }
    for (auto& w : ker) w /= mass;

    std::vector<double> conv = fft::convolve_cyclic_2d(px, py, data, ker);
    Field out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) out.at(i, j) = conv[static_cast<size_t>(j) * px + i];
    out.valid_margin = field.valid_margin + cutoff;
    // A margin that swallows the whole window means no vertex is usable.
    shrink_window(g, out.valid_margin);
    return out;
}

Field circle_mollify(const Field& field, double epsilon) {
    const GridSpec& g = field.grid;
    if (epsilon < 2.0 * g.spacing)
        throw std::invalid_argument("circle_mollify: epsilon must be >= 2*spacing");
    Field out = field;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            Complex z = g.vertex(i, j);
            if (z.real() - epsilon < g.xmin() || z.real() + epsilon > g.xmax() ||
                z.imag() - epsilon < g.ymin() || z.imag() + epsilon > g.ymax())
                continue;  // raw value retained; excluded by the margin below
            out.at(i, j) = circle_average(field, z, epsilon);
        }
    out.valid_margin = field.valid_margin + epsilon;
    shrink_window(g, out.valid_margin);
    return out;
}

Field mollify(const Field& field, double epsilon, Mollifier kind) {
    return (kind == Mollifier::heat_kernel) ? heat_mollify(field, epsilon)
                                            : circle_mollify(field, epsilon);
}

}  // namespace lqg
