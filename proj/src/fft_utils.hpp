#pragma once

#include <complex>
#include <vector>

namespace lqg::fft {

/// In-place 2D DST-I (FFTW RODFT00 along both axes) of an ny-by-nx row-major
/// array:  out[l,i] = 4 * sum_{k,j} in[k,j] sin(pi(j+1)(i+1)/(nx+1)) sin(pi(k+1)(l+1)/(ny+1)).
/// Plan creation is serialized internally, execution is thread-safe.
void dst1_2d(int nx, int ny, std::vector<double>& data);

/// In-place unnormalized inverse DFT (FFTW_BACKWARD) of an ny-by-nx array.
void idft_2d(int nx, int ny, std::vector<std::complex<double>>& data);

/// Cyclic 2D convolution of two same-shape real arrays (row-major ny x nx):
/// out[v] = sum_u a[u] * b[v - u mod n].
std::vector<double> convolve_cyclic_2d(int nx, int ny, const std::vector<double>& a,
                                       const std::vector<double>& b);

/// Smallest integer >= n whose prime factors are all in {2,3,5,7}.
int next_smooth(int n);

}  // namespace lqg::fft
