#pragma once

#include <cstdint>

#include "lqg/field.hpp"

namespace lqg {

enum class SamplerTag { zero_boundary_spectral, whole_plane_bigbox, whole_plane_torus };

enum class Normalization { circle_average_at_origin, smoothed_average_at_origin, mean_zero };

/// How to emulate a whole-plane GFF on a finite window.  The big-box proxy
/// samples a zero-boundary field on an expansion_factor-times-larger lattice
/// and keeps the central window, where the missing harmonic part is small;
/// the torus proxy is the periodic-lattice analog, kept as a cross-check.
struct SamplerKind {
    SamplerTag tag = SamplerTag::whole_plane_bigbox;
    double expansion_factor = 4.0;
    Normalization normalization = Normalization::smoothed_average_at_origin;
    double normalization_radius = 1.0;
};

/// Discrete zero-boundary GFF: Gaussian vector with covariance 2*pi times the
/// inverse Dirichlet graph Laplacian (the 2*pi matches the Dirichlet inner
/// product (1/2pi) int |grad g|^2), boundary vertices exactly zero.  Spectral
/// synthesis in the sine eigenbasis, deterministic in the seed.
Field sample_zero_boundary(const GridSpec& grid, std::uint64_t seed);

/// Whole-plane proxy restricted to `window` and re-centered so the requested
/// normalization statistic vanishes exactly.
Field sample_whole_plane_proxy(const GridSpec& window, const SamplerKind& kind,
                               std::uint64_t seed);

}  // namespace lqg
