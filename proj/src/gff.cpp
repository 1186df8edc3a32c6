#include "lqg/gff.hpp"

#include <cmath>

#include "fft_utils.hpp"
#include "lqg/averages.hpp"
#include "lqg/rng.hpp"

namespace lqg {

namespace {

// Dirichlet graph-Laplacian eigenvalue for interior mode (j,k) of an
// (mx x my)-vertex interior: 4 - 2cos(pi(j+1)/(mx+1)) - 2cos(pi(k+1)/(my+1)).
double dirichlet_eigenvalue(int j, int mx, int k, int my) {
    return 4.0 - 2.0 * std::cos(M_PI * (j + 1) / (mx + 1)) -
           2.0 * std::cos(M_PI * (k + 1) / (my + 1));
}

}  // namespace

Field sample_zero_boundary(const GridSpec& grid, std::uint64_t seed) {
    if (grid.nx < 3 || grid.ny < 3)
        throw std::invalid_argument("sample_zero_boundary: grid has no interior vertices");
    const int mx = grid.nx - 2;
    const int my = grid.ny - 2;
    CounterRng rng(seed, 0);

    // Independent N(0,1) per sine mode, scaled to give covariance 2*pi*L^{-1}.
    std::vector<double> coef(static_cast<size_t>(mx) * my);
    const double norm = 1.0 / (2.0 * std::sqrt(static_cast<double>(mx + 1) * (my + 1)));
    for (int k = 0; k < my; ++k)
        for (int j = 0; j < mx; ++j) {
            double lambda = dirichlet_eigenvalue(j, mx, k, my);
            coef[static_cast<size_t>(k) * mx + j] =
                rng.next_gaussian() * std::sqrt(2.0 * M_PI / lambda) * norm;
        }
    fft::dst1_2d(mx, my, coef);

    Field out(grid);
    for (int k = 0; k < my; ++k)
        for (int j = 0; j < mx; ++j)
            out.at(j + 1, k + 1) = coef[static_cast<size_t>(k) * mx + j];
    return out;
}

namespace {

// Zero-boundary sample on an enlarged concentric lattice, restricted to the window.
Field bigbox_restricted(const GridSpec& window, double expansion, std::uint64_t seed) {
    int big_n_x = static_cast<int>(std::ceil(expansion * (window.nx - 1))) + 1;
    int big_n_y = static_cast<int>(std::ceil(expansion * (window.ny - 1))) + 1;
    // (big_n - 1) smooth keeps the DST fast (internal FFT size 2*(big_n-1)).
    big_n_x = fft::next_smooth(big_n_x - 1) + 1;
    big_n_y = fft::next_smooth(big_n_y - 1) + 1;
    const int offx = (big_n_x - window.nx) / 2;
    const int offy = (big_n_y - window.ny) / 2;
    GridSpec big(Complex(window.xmin() - offx * window.spacing,
                         window.ymin() - offy * window.spacing),
                 window.spacing, big_n_x, big_n_y);
    Field bf = sample_zero_boundary(big, seed);
    Field out(window);
    for (int j = 0; j < window.ny; ++j)
        for (int i = 0; i < window.nx; ++i) out.at(i, j) = bf.at(i + offx, j + offy);
    return out;
}

// Mean-zero periodic-lattice GFF with covariance 2*pi*L^+, restricted to the window.
Field torus_restricted(const GridSpec& window, double expansion, std::uint64_t seed) {
    int pnx = fft::next_smooth(static_cast<int>(std::ceil(expansion * (window.nx - 1))));
    int pny = fft::next_smooth(static_cast<int>(std::ceil(expansion * (window.ny - 1))));
    CounterRng rng(seed, 1);

    std::vector<std::complex<double>> coef(static_cast<size_t>(pnx) * pny, {0.0, 0.0});
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(pnx) * pny);
    for (int ky = 0; ky < pny; ++ky)
        for (int kx = 0; kx < pnx; ++kx) {
            if (kx == 0 && ky == 0) continue;  // zero mode dropped: field defined mean-free
            int px = (pnx - kx) % pnx;
            int py = (pny - ky) % pny;
            bool self_paired = (px == kx && py == ky);
            // fill each Hermitian pair once, in lexicographic order
            if (!self_paired && (ky > py || (ky == py && kx > px))) continue;
            double lambda = 4.0 - 2.0 * std::cos(2.0 * M_PI * kx / pnx) -
                            2.0 * std::cos(2.0 * M_PI * ky / pny);
            double sigma = std::sqrt(2.0 * M_PI / lambda);
            if (self_paired) {
                coef[static_cast<size_t>(ky) * pnx + kx] = sigma * rng.next_gaussian();
            } else {
                double a = rng.next_gaussian();
                double b = rng.next_gaussian();
                std::complex<double> z(a * M_SQRT1_2, b * M_SQRT1_2);
                coef[static_cast<size_t>(ky) * pnx + kx] = sigma * z;
                coef[static_cast<size_t>(py) * pnx + px] = sigma * std::conj(z);
            }
        }
    fft::idft_2d(pnx, pny, coef);

    const int offx = (pnx - window.nx) / 2;
    const int offy = (pny - window.ny) / 2;
    Field out(window);
    for (int j = 0; j < window.ny; ++j)
        for (int i = 0; i < window.nx; ++i)
            out.at(i, j) =
                coef[static_cast<size_t>((j + offy) % pny) * pnx + (i + offx) % pnx].real() *
                inv_sqrt_n;
    return out;
}

}  // namespace

Field sample_whole_plane_proxy(const GridSpec& window, const SamplerKind& kind,
                               std::uint64_t seed) {
    if (kind.tag == SamplerTag::zero_boundary_spectral)
        throw std::invalid_argument(
            "sample_whole_plane_proxy: kind must be a whole-plane proxy tag");
    if (kind.tag == SamplerTag::whole_plane_bigbox && kind.expansion_factor < 2.0)
        throw std::invalid_argument("sample_whole_plane_proxy: expansion_factor must be >= 2");

    Field f = (kind.tag == SamplerTag::whole_plane_bigbox)
                  ? bigbox_restricted(window, kind.expansion_factor, seed)
                  : torus_restricted(window, std::max(2.0, kind.expansion_factor), seed);

    double stat = 0.0;
    switch (kind.normalization) {
        case Normalization::mean_zero: {
            double acc = 0.0;
            for (double v : f.values) acc += v;
            stat = acc / static_cast<double>(f.values.size());
            break;
        }
        case Normalization::circle_average_at_origin:
            stat = circle_average(f, Complex(0.0, 0.0), kind.normalization_radius);
            break;
        case Normalization::smoothed_average_at_origin:
            stat = smoothed_average(f, BumpKernel::standard(), Complex(0.0, 0.0),
                                    kind.normalization_radius);
            break;
    }
    for (auto& v : f.values) v -= stat;
    return f;
}

}  // namespace lqg
