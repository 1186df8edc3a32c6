#include "lqg/conformal.hpp"

#include <cmath>

namespace lqg {

namespace {

bool on_slit(Complex w) { return w.imag() == 0.0 && w.real() <= 0.0; }

}  // namespace

MapDescriptor MapDescriptor::affine(Complex a, Complex b) {
    if (std::abs(a) == 0.0) throw std::invalid_argument("affine map: a must be nonzero");
    MapDescriptor m;
    m.kind = MapKind::affine;
    m.a = a;
    m.b = b;
    return m;
}

MapDescriptor MapDescriptor::moebius(Complex a, Complex b, Complex c, Complex d) {
    if (std::abs(a * d - b * c) == 0.0)
        throw std::invalid_argument("moebius map: ad - bc must be nonzero");
    MapDescriptor m;
    m.kind = MapKind::moebius;
    m.a = a;
    m.b = b;
    m.c = c;
    m.d = d;
    return m;
}

MapDescriptor MapDescriptor::power2() {
    MapDescriptor m;
    m.kind = MapKind::power2;
    return m;
}

MapDescriptor MapDescriptor::exp_strip() {
    MapDescriptor m;
    m.kind = MapKind::exp_strip;
    return m;
}

bool MapDescriptor::in_domain(Complex z) const {
    switch (kind) {
        case MapKind::affine: return true;
        case MapKind::moebius: return std::abs(c * z + d) > 1e-14 * (std::abs(c * z) + std::abs(d) + 1.0);
        case MapKind::power2: return z.real() > 0.0;
        case MapKind::exp_strip: return std::abs(z.imag()) < M_PI;
    }
    return false;
}

bool MapDescriptor::in_codomain(Complex w) const {
    switch (kind) {
        case MapKind::affine: return true;
        case MapKind::moebius: return std::abs(-c * w + a) > 1e-14 * (std::abs(c * w) + std::abs(a) + 1.0);
        case MapKind::power2: return !on_slit(w);
        case MapKind::exp_strip: return !on_slit(w) && std::abs(w) > 0.0;
    }
    return false;
}

Complex MapDescriptor::evaluate(Complex z) const {
    if (!in_domain(z)) throw std::invalid_argument("map evaluate: point outside declared domain");
    switch (kind) {
        case MapKind::affine: return a * z + b;
        case MapKind::moebius: return (a * z + b) / (c * z + d);
        case MapKind::power2: return z * z;
        case MapKind::exp_strip: return std::exp(z);
    }
    return {};
}

Complex MapDescriptor::inverse(Complex w) const {
    if (!in_codomain(w)) throw std::invalid_argument("map inverse: point outside codomain");
    switch (kind) {
        case MapKind::affine: return (w - b) / a;
        case MapKind::moebius: return (d * w - b) / (-c * w + a);
        case MapKind::power2: return std::sqrt(w);  // principal branch, Re > 0 off the slit
        case MapKind::exp_strip: return std::log(w);
    }
    return {};
}

Complex MapDescriptor::derivative(Complex z) const {
    if (!in_domain(z)) throw std::invalid_argument("map derivative: point outside declared domain");
    switch (kind) {
        case MapKind::affine: return a;
        case MapKind::moebius: {
            Complex den = c * z + d;
            return (a * d - b * c) / (den * den);
        }
        case MapKind::power2: return 2.0 * z;
        case MapKind::exp_strip: return std::exp(z);
    }
    return {};
}

double MapDescriptor::inverse_derivative_log_abs(Complex w) const {
    Complex z = inverse(w);
    double mod = std::abs(derivative(z));
    if (!(mod > 0.0) || !std::isfinite(mod))
        throw std::invalid_argument("map: derivative vanishes at preimage (critical point)");
    return -std::log(mod);
}

PullbackField pullback_field(const Field& base, const MapDescriptor& map,
                             const GridSpec& target_grid, const LqgParams& params) {
    const double margin = std::max(bicubic_margin(base.grid), base.valid_margin);
    const GridSpec safe = shrink_window(base.grid, margin);
    PullbackField out;
    out.map = map;
    out.params = params;
    out.field = Field(target_grid);
    for (int idx = 0; idx < target_grid.size(); ++idx) {
        Complex w = target_grid.vertex(idx);
        if (!map.in_codomain(w))
            throw std::invalid_argument("pullback_field: target vertex outside map codomain");
        Complex z = map.inverse(w);
        if (!safe.contains(z))
            throw std::invalid_argument("pullback_field: preimage escapes source window");
        out.field.values[static_cast<size_t>(idx)] =
            interp_bicubic(base, z) + params.q * map.inverse_derivative_log_abs(w);
    }
    return out;
}

double matched_epsilon(const MapDescriptor& map, Complex z0, double epsilon) {
    return epsilon * std::abs(map.derivative(z0));
}

GridSpec target_grid_for(const MapDescriptor& map, Complex z0, double R, double spacing,
                         double margin) {
    // The image of a disk under an injective conformal map is bounded by the
    // image of its boundary circle, so dense boundary samples give the bbox.
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    const int n = 720;
    for (int k = 0; k < n; ++k) {
        double th = 2.0 * M_PI * k / n;
        Complex w = map.evaluate(z0 + R * Complex(std::cos(th), std::sin(th)));
        xmin = std::min(xmin, w.real());
        xmax = std::max(xmax, w.real());
        ymin = std::min(ymin, w.imag());
        ymax = std::max(ymax, w.imag());
    }
    xmin -= margin;
    ymin -= margin;
    xmax += margin;
    ymax += margin;
    double ox = std::floor(xmin / spacing) * spacing;
    double oy = std::floor(ymin / spacing) * spacing;
    // slit-plane codomains: keep vertex rows off the branch cut at Im w = 0
    if (map.kind == MapKind::power2 || map.kind == MapKind::exp_strip) oy += spacing / 2.0;
    int nx = static_cast<int>(std::ceil((xmax - ox) / spacing)) + 1;
    int ny = static_cast<int>(std::ceil((ymax - oy) / spacing)) + 1;
    return GridSpec({ox, oy}, spacing, nx, ny);
}

MetricOracle pullback_oracle(const PullbackField& pb, double eps_target, NeighborScheme scheme) {
    return make_oracle(heat_mollify(pb.field, eps_target), pb.params, scheme);
}

double pulled_back_distance(const MetricOracle& target_oracle, const MapDescriptor& map,
                            Complex z, Complex w, double* snap) {
    const GridSpec& g = target_oracle.field.grid;
    Complex fz = map.evaluate(z), fw = map.evaluate(w);
    int u = g.nearest(fz), v = g.nearest(fw);
    if (!target_oracle.mask.contains(u) || !target_oracle.mask.contains(v))
        throw std::invalid_argument("pulled_back_distance: image point outside valid window");
    if (snap) *snap = std::max(std::abs(g.vertex(u) - fz), std::abs(g.vertex(v) - fw));
    DistanceResult res = distance(target_oracle, u, v, true);
    if (!res.finite() || !res.geodesic || res.geodesic->vertices.size() < 2) return res.value;
    // First-order endpoint correction: the snapped endpoints sit up to half a
    // cell away from phi(z), phi(w); moving an endpoint by delta changes the
    // distance by -e^{xi h(endpoint)} (delta . geodesic direction) + O(|delta|^2).
    // Without this, endpoint jitter of order spacing/|u-v| drowns the
    // small-scale comparison statistics.
    const auto& path = res.geodesic->vertices;
    auto endpoint_term = [&](int at, int next, Complex exact) {
        Complex tangent = g.vertex(next) - g.vertex(at);
        tangent /= std::abs(tangent);
        Complex delta = exact - g.vertex(at);
        double proj = delta.real() * tangent.real() + delta.imag() * tangent.imag();
        return -target_oracle.weight_factor[static_cast<size_t>(at)] * proj;
    };
    double corrected = res.value + endpoint_term(path.front(), path[1], fz) +
                       endpoint_term(path.back(), path[path.size() - 2], fw);
    return std::max(corrected, 0.0);
}

double pulled_back_distance(const Field& base, const MapDescriptor& map,
                            const GridSpec& target_grid, double epsilon,
                            const LqgParams& params, Complex z, Complex w) {
    PullbackField pb = pullback_field(base, map, target_grid, params);
    MetricOracle oracle = pullback_oracle(pb, epsilon);
    return pulled_back_distance(oracle, map, z, w);
}

ComparisonOracles make_comparison_oracles(const Field& h, const MapDescriptor& map,
                                          Complex z0, double r, double epsilon,
                                          const LqgParams& params,
                                          const GridSpec& target_grid, double domain_factor) {
    ComparisonOracles out;
    out.map = map;
    out.eps_direct = epsilon;
    out.eps_target = matched_epsilon(map, z0, epsilon);
    const double R = domain_factor * r;

    Field h_eps = heat_mollify(h, epsilon);
    VertexSet disk = vertices_in_disk(h.grid, z0, R);
    VertexSet valid = window_mask(h.grid, h_eps.valid_window());
    out.direct = make_oracle(std::move(h_eps), params, disk.intersect(valid));

    PullbackField pb = pullback_field(h, map, target_grid, params);
    Field pb_eps = heat_mollify(pb.field, out.eps_target);
    VertexSet image(target_grid);
    for (int idx = 0; idx < target_grid.size(); ++idx) {
        Complex w = target_grid.vertex(idx);
        if (map.in_codomain(w) && std::abs(map.inverse(w) - z0) <= R) image.set(idx);
    }
    VertexSet tvalid = window_mask(target_grid, pb_eps.valid_window());
    out.pulled = make_oracle(std::move(pb_eps), params, image.intersect(tvalid));
    return out;
}

namespace {

Complex draw_in_ball(CounterRng& rng, Complex center, double r) {
    double rho = r * std::sqrt(rng.next_double());
    double th = 2.0 * M_PI * rng.next_double();
    return center + rho * Complex(std::cos(th), std::sin(th));
}

}  // namespace

std::pair<Complex, Complex> draw_snapped_pair(CounterRng& rng, const GridSpec& g, Complex center,
                                              double r, double min_sep) {
    for (int tries = 0; tries < 10000; ++tries) {
        Complex u = g.vertex(g.nearest(draw_in_ball(rng, center, r)));
        Complex v = g.vertex(g.nearest(draw_in_ball(rng, center, r)));
        if (std::abs(u - v) >= min_sep) return {u, v};
    }
    throw std::runtime_error("pair sampling: separation constraint unsatisfiable");
}

std::vector<double> covariance_ratio_sample(const Field& h, const MapDescriptor& map,
                                            Complex ball_center, double r, double epsilon,
                                            const LqgParams& params, int pair_budget, double b,
                                            const GridSpec& target_grid, CounterRng& rng,
                                            double domain_factor) {
    if (!(b > 0.0) || !(b < 1.0))
        throw std::invalid_argument("covariance_ratio_sample: need 0 < b < 1");
    std::vector<double> ratios;
    if (pair_budget <= 0) return ratios;
    ComparisonOracles co = make_comparison_oracles(h, map, ball_center, r, epsilon, params,
                                                   target_grid, domain_factor);
    const GridSpec& g = h.grid;
    for (int k = 0; k < pair_budget; ++k) {
        auto [u, v] = draw_snapped_pair(rng, g, ball_center, r, b * r);
        double dh = distance(co.direct, g.nearest(u), g.nearest(v), false).value;
        double dphi = pulled_back_distance(co.pulled, map, u, v);
        ratios.push_back(dphi / dh);
    }
    return ratios;
}

double sup_difference_statistic(const Field& h, const MapDescriptor& map, Complex z, double r,
                                double epsilon, const LqgParams& params,
                                const BumpKernel& kernel, int pair_budget,
                                const GridSpec& target_grid, CounterRng& rng,
                                double domain_factor) {
    ComparisonOracles co =
        make_comparison_oracles(h, map, z, r, epsilon, params, target_grid, domain_factor);
    const GridSpec& g = h.grid;
    double sup = 0.0;
    for (int k = 0; k < pair_budget; ++k) {
        // a mild separation keeps the snapped endpoints distinct
        auto [u, v] = draw_snapped_pair(rng, g, z, r, 2.0 * g.spacing);
        double dh = distance(co.direct, g.nearest(u), g.nearest(v), false).value;
        double dphi = pulled_back_distance(co.pulled, map, u, v);
        sup = std::max(sup, std::abs(dphi - dh));
    }
    double normalizer =
        std::pow(r, params.xi * params.q) * std::exp(params.xi * smoothed_average(h, kernel, z, r));
    return sup / normalizer;
}

}  // namespace lqg
