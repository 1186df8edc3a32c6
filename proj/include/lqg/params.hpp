#pragma once

#include <cmath>
#include <stdexcept>

namespace lqg {

/// Coupling constants of the gamma-LQG geometry.  xi = gamma/d_gamma weights
/// distances, q = 2/gamma + gamma/2 enters coordinate changes; both are derived
/// once at construction and never recomputed.
struct LqgParams {
    double gamma = 0.0;
    double d_gamma = 0.0;
    double xi = 0.0;
    double q = 0.0;

    static LqgParams make(double gamma, double d_gamma) {
        if (!(gamma > 0.0) || !(gamma < 2.0))
            throw std::invalid_argument("LqgParams: gamma must be in (0,2)");
        if (!(d_gamma > 2.0)) throw std::invalid_argument("LqgParams: d_gamma must be > 2");
        LqgParams p;
        p.gamma = gamma;
        p.d_gamma = d_gamma;
        p.xi = gamma / d_gamma;
        p.q = 2.0 / gamma + gamma / 2.0;
        return p;
    }

    /// gamma = sqrt(8/3), the one value with a known dimension d = 4.
    static LqgParams sqrt83() { return make(std::sqrt(8.0 / 3.0), 4.0); }
};

}  // namespace lqg
