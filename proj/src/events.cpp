#include "lqg/events.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace lqg {

void AnnulusEventParams::validate() const {
    if (!(alpha > 0.5) || !(alpha < 1.0))
        throw std::invalid_argument("AnnulusEventParams: alpha must be in (1/2,1)");
    if (!(big_a > 1.0)) throw std::invalid_argument("AnnulusEventParams: big_a must be > 1");
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("AnnulusEventParams: delta must be in (0,1)");
    if (pair_budget < 1) throw std::invalid_argument("AnnulusEventParams: pair_budget must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("AnnulusEventParams: epsilon must be > 0");
}

std::string to_json_row(const EventReport& rep, Complex z, double r,
                        const AnnulusEventParams& ep) {
    nlohmann::ordered_json j;
    j["event"] = rep.event;
    j["z"] = {z.real(), z.imag()};
    j["r"] = r;
    j["params"] = {{"alpha", ep.alpha}, {"big_a", ep.big_a}, {"delta", ep.delta},
                   {"pair_budget", ep.pair_budget}, {"epsilon", ep.epsilon}};
    j["verdict"] = rep.verdict;
    j["budgets"] = {{"sampled", rep.sampled}, {"qualifying", rep.qualifying}};
    j["value"] = rep.value;
    j["threshold"] = rep.threshold;
    j["witness_vertices"] = rep.witness ? static_cast<int>(rep.witness->vertices.size()) : 0;
    return j.dump();
}

namespace {

// Uniform member of a vertex set (by sorted index order, so draws are stable).
int draw_member(const std::vector<int>& indices, CounterRng& rng) {
    return indices[static_cast<size_t>(rng.next_below(indices.size()))];
}

double ring_tol(const GridSpec& g) { return g.spacing / std::sqrt(2.0); }

// Vertex set of the target grid whose preimages satisfy a source predicate.
VertexSet preimage_set(const GridSpec& target, const MapDescriptor& map,
                       const std::function<bool(Complex)>& pred) {
    VertexSet out(target);
    for (int idx = 0; idx < target.size(); ++idx) {
        Complex w = target.vertex(idx);
        if (map.in_codomain(w) && pred(map.inverse(w))) out.set(idx);
    }
    return out;
}

}  // namespace

EventReport check_condition1(const Field& h, const MapDescriptor& map, Complex z, double r,
                             const LqgParams& params, const AnnulusEventParams& ep,
                             const GridSpec& target_grid, CounterRng& rng) {
    ep.validate();
    EventReport rep;
    rep.event = "condition1";
    ComparisonOracles co =
        make_comparison_oracles(h, map, z, r, ep.epsilon, params, target_grid, 2.5);
    const GridSpec& g = h.grid;
    const double tol = ring_tol(g);
    std::vector<int> inner = vertices_on_circle(g, z, ep.alpha * r).intersect(co.direct.mask).indices();
    std::vector<int> outer = vertices_on_circle(g, z, r).intersect(co.direct.mask).indices();
    if (inner.empty() || outer.empty())
        throw std::runtime_error("check_condition1: boundary rings outside oracle mask");

    bool ok = true;
    for (int k = 0; k < ep.pair_budget; ++k) {
        int u = draw_member(inner, rng);
        int v = draw_member(outer, rng);
        ++rep.sampled;
        DistanceResult dr = distance(co.direct, u, v, true);
        if (!dr.finite() || !dr.geodesic) continue;
        bool confined = true;
        for (int pv : dr.geodesic->vertices) {
            double d = std::abs(g.vertex(pv) - z);
            if (d < ep.alpha * r - tol || d > r + tol) {
                confined = false;
                break;
            }
        }
        if (!confined) continue;  // condition quantifies only over confined geodesics
        ++rep.qualifying;
        double dphi = pulled_back_distance(co.pulled, map, g.vertex(u), g.vertex(v));
        if (!(dphi <= (1.0 + ep.delta) * dr.value)) ok = false;
    }
    rep.verdict = ok;
    return rep;
}

EventReport check_condition2(const Field& h, const MapDescriptor& map, Complex z, double r,
                             const LqgParams& params, const AnnulusEventParams& ep,
                             const GridSpec& target_grid, CounterRng& rng) {
    ep.validate();
    EventReport rep;
    rep.event = "condition2";
    ComparisonOracles co =
        make_comparison_oracles(h, map, z, r, ep.epsilon, params, target_grid, 2.5);
    const GridSpec& g = h.grid;
    const double tol = ring_tol(g);

    std::vector<int> inner = vertices_on_circle(g, z, ep.alpha * r).intersect(co.direct.mask).indices();
    std::vector<int> outer = vertices_on_circle(g, z, r).intersect(co.direct.mask).indices();
    if (inner.empty() || outer.empty())
        throw std::runtime_error("check_condition2: boundary rings outside oracle mask");

    VertexSet wide = vertices_in_annulus(g, Annulus(z, r / 2.0, 2.0 * r)).intersect(co.direct.mask);
    VertexSet narrow =
        vertices_in_closed_annulus(g, z, ep.alpha * r, r, tol).intersect(co.direct.mask);
    VertexSet wide_boundary = vertices_on_circle(g, z, r / 2.0);
    for (int idx : vertices_on_circle(g, z, 2.0 * r).indices()) wide_boundary.set(idx);
    wide_boundary = wide_boundary.intersect(co.direct.mask);

    // Image-side analog sets for the D_h^phi trigger.
    const GridSpec& tg = target_grid;
    VertexSet wide_boundary_img = preimage_set(tg, map, [&](Complex p) {
        double d = std::abs(p - z);
        return std::abs(d - r / 2.0) <= tol || std::abs(d - 2.0 * r) <= tol;
    }).intersect(co.pulled.mask);

    bool ok = true;
    for (int k = 0; k < ep.pair_budget; ++k) {
        int u = draw_member(inner, rng);
        int v = draw_member(outer, rng);
        ++rep.sampled;
        double dh = distance(co.direct, u, v, false).value;
        double dh_to_bdy = distance(co.direct, singleton(g, u), wide_boundary, false).value;
        bool trig = dh > dh_to_bdy;
        if (!trig) {
            double snap = 0.0;
            double dphi = pulled_back_distance(co.pulled, map, g.vertex(u), g.vertex(v), &snap);
            int ui = tg.nearest(map.evaluate(g.vertex(u)));
            double dphi_to_bdy =
                distance(co.pulled, singleton(tg, ui), wide_boundary_img, false).value;
            trig = dphi > dphi_to_bdy;
        }
        if (!trig) continue;
        ++rep.qualifying;
        double narrow_d = internal_distance(co.direct, narrow, u, v, false).value;
        double wide_d = internal_distance(co.direct, wide, u, v, false).value;
        bool holds = !std::isfinite(narrow_d) || narrow_d > wide_d;
        if (!holds) ok = false;
    }
    rep.verdict = ok;
    return rep;
}

EventReport check_condition3(const Field& h, Complex z, double r, const LqgParams& params,
                             const AnnulusEventParams& ep) {
    ep.validate();
    EventReport rep;
    rep.event = "condition3";
    Field h_eps = heat_mollify(h, ep.epsilon);
    MetricOracle oracle = make_oracle(std::move(h_eps), params);
    const GridSpec& g = h.grid;
    LatticePath circuit = disconnecting_circuit(oracle, Annulus(z, ep.alpha * r, r));
    double crossing = distance(oracle, vertices_on_circle(g, z, ep.alpha * r),
                               vertices_on_circle(g, z, r), false)
                          .value;
    rep.value = circuit.weighted_length;
    rep.threshold = ep.big_a * crossing;
    rep.verdict = rep.value <= rep.threshold;
    rep.witness = std::move(circuit);
    return rep;
}

double bilip_hypothesis_probability(const std::function<Field(int)>& h_at, int sample_count,
                                    const MapDescriptor& map, Complex z, double r, double big_c,
                                    const LqgParams& params, const AnnulusEventParams& ep,
                                    const GridSpec& target_grid, std::uint64_t pair_seed) {
    ep.validate();
    if (sample_count < 1)
        throw std::invalid_argument("bilip_hypothesis_probability: need sample_count >= 1");
    int hits = 0;
    for (int i = 0; i < sample_count; ++i) {
        Field h = h_at(i);
        CounterRng rng(pair_seed, static_cast<std::uint64_t>(i) + 101);
        ComparisonOracles co =
            make_comparison_oracles(h, map, z, r, ep.epsilon, params, target_grid, 2.5);
        const GridSpec& g = h.grid;
        std::vector<int> ring_r = vertices_on_circle(g, z, r).intersect(co.direct.mask).indices();
        double denom = distance(co.direct, vertices_on_circle(g, z, r / 2.0),
                                vertices_on_circle(g, z, r), false)
                           .value;
        VertexSet wide_img = preimage_set(target_grid, map, [&](Complex p) {
            double d = std::abs(p - z);
            return d > r / 2.0 && d < 2.0 * r;
        }).intersect(co.pulled.mask);
        double sup = 0.0;
        for (int k = 0; k < ep.pair_budget; ++k) {
            int u = draw_member(ring_r, rng);
            int v = draw_member(ring_r, rng);
            if (u == v) continue;
            int ui = target_grid.nearest(map.evaluate(g.vertex(u)));
            int vi = target_grid.nearest(map.evaluate(g.vertex(v)));
            double d = internal_distance(co.pulled, wide_img, ui, vi, false).value;
            if (std::isfinite(d)) sup = std::max(sup, d);
        }
        if (sup <= big_c * denom) ++hits;
    }
    return static_cast<double>(hits) / sample_count;
}

EventReport narrow_annulus_length_event(const Field& h, Complex z, double r, double alpha,
                                        double s, double big_s, const LqgParams& params,
                                        double epsilon, int pair_budget, CounterRng& rng) {
    if (!(alpha > 0.5) || !(alpha < 1.0))
        throw std::invalid_argument("narrow_annulus_length_event: alpha must be in (1/2,1)");
    EventReport rep;
    rep.event = "narrow_annulus_length";
    Field h_eps = heat_mollify(h, epsilon);
    MetricOracle oracle = make_oracle(std::move(h_eps), params);
    const GridSpec& g = h.grid;
    VertexSet annulus = vertices_in_annulus(g, Annulus(z, alpha * r, r)).intersect(oracle.mask);
    std::vector<int> members = annulus.indices();
    if (members.size() < 2)
        throw std::runtime_error("narrow_annulus_length_event: annulus too coarse");

    double base = std::pow(r, params.xi * params.q) *
                  std::exp(params.xi * circle_average(h, z, r));
    rep.value = s * base;
    rep.threshold = big_s * base;

    bool ok = true;
    for (int k = 0; k < pair_budget; ++k) {
        int u = draw_member(members, rng);
        int v = draw_member(members, rng);
        ++rep.sampled;
        if (u == v) continue;
        double dh = distance(oracle, u, v, false).value;
        if (!(dh >= s * base)) continue;
        ++rep.qualifying;
        double din = internal_distance(oracle, annulus, u, v, false).value;
        if (!(din >= big_s * base)) ok = false;
    }
    rep.verdict = ok;
    return rep;
}

}  // namespace lqg
