#include "fft_utils.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace lqg::fft {

namespace {
// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

void dst1_2d(int nx, int ny, std::vector<double>& data) {
    if (static_cast<int>(data.size()) != nx * ny)
        throw std::invalid_argument("dst1_2d: size mismatch");
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_r2r_2d(ny, nx, data.data(), data.data(), FFTW_RODFT00, FFTW_RODFT00,
                                FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("dst1_2d: fftw plan failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
}

void idft_2d(int nx, int ny, std::vector<std::complex<double>>& data) {
    if (static_cast<int>(data.size()) != nx * ny)
        throw std::invalid_argument("idft_2d: size mismatch");
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft_2d(ny, nx, ptr, ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("idft_2d: fftw plan failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
}

std::vector<double> convolve_cyclic_2d(int nx, int ny, const std::vector<double>& a,
                                       const std::vector<double>& b) {
    if (static_cast<int>(a.size()) != nx * ny || a.size() != b.size())
        throw std::invalid_argument("convolve_cyclic_2d: size mismatch");
    const int nc = nx / 2 + 1;
    std::vector<double> abuf = a, bbuf = b, out(a.size());
    std::vector<std::complex<double>> fa(static_cast<size_t>(ny) * nc),
        fb(static_cast<size_t>(ny) * nc);

    fftw_plan pa, pb, pinv;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        pa = fftw_plan_dft_r2c_2d(ny, nx, abuf.data(), reinterpret_cast<fftw_complex*>(fa.data()),
                                  FFTW_ESTIMATE);
        pb = fftw_plan_dft_r2c_2d(ny, nx, bbuf.data(), reinterpret_cast<fftw_complex*>(fb.data()),
                                  FFTW_ESTIMATE);
        pinv = fftw_plan_dft_c2r_2d(ny, nx, reinterpret_cast<fftw_complex*>(fa.data()), out.data(),
                                    FFTW_ESTIMATE);
    }
    if (!pa || !pb || !pinv) throw std::runtime_error("convolve_cyclic_2d: fftw plan failed");
    fftw_execute(pa);
    fftw_execute(pb);
    const double scale = 1.0 / (static_cast<double>(nx) * ny);
    for (size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k] * scale;
    fftw_execute(pinv);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(pa);
        fftw_destroy_plan(pb);
        fftw_destroy_plan(pinv);
    }
    return out;
}

int next_smooth(int n) {
    auto smooth = [](int m) {
        for (int p : {2, 3, 5, 7})
            while (m % p == 0) m /= p;
        return m == 1;
    };
    while (!smooth(n)) ++n;
    return n;
}

}  // namespace lqg::fft
