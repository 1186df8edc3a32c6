#pragma once

#include "lqg/field.hpp"

namespace lqg {

/// Radially symmetric smooth bump, compactly supported in the unit disk.
/// profile(t) on t in [0,1) is exp(-1/(1-t^2)); the overall constant is
/// irrelevant because discrete placements renormalize to unit total weight.
struct BumpKernel {
    double profile(double t) const {
        if (t >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - t * t));
    }
    static BumpKernel standard() { return BumpKernel{}; }
};

/// Mean of the (bilinearly interpolated) field over max(16, ceil(2*pi*r/spacing))
/// equally spaced points of the circle |z - center| = r.
double circle_average(const Field& field, Complex center, double radius);

/// h_{f,r}(z): pairing of the field with the bump rescaled to radius r at z,
/// discrete weights renormalized so constants are reproduced exactly.
double smoothed_average(const Field& field, const BumpKernel& kernel, Complex center,
                        double radius);

/// Convolution with the heat kernel p_{eps^2/2}(w) ~ exp(-|w|^2/eps^2),
/// truncated at radius 4*eps and renormalized to unit mass.  The returned
/// field lives on the same grid with valid_margin grown by 4*eps.
/// `variance_scale` rescales the kernel variance (1.0 = the default eps^2/2
/// convention); the choice only moves finite-eps constants.
Field heat_mollify(const Field& field, double epsilon, double variance_scale = 1.0);

/// Circle-average regularization h_eps(z) = mean of the field on the circle
/// of radius eps: the measure's classical mollifier, kept as a switch since
/// fixed-eps constants differ from the heat kernel's.  Requires eps >= 2*spacing;
/// vertices whose circle leaves the window keep their raw values and fall
/// inside the grown valid_margin.
Field circle_mollify(const Field& field, double epsilon);

enum class Mollifier { heat_kernel, circle_average };

Field mollify(const Field& field, double epsilon, Mollifier kind);

}  // namespace lqg
