#include "lqg/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "lqg/stats.hpp"

namespace lqg {

namespace {

std::string join(const std::vector<std::string>& msgs) {
    std::string out;
    for (const auto& m : msgs) {
        if (!out.empty()) out += "; ";
        out += m;
    }
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> msgs)
    : std::runtime_error(join(msgs)), messages(std::move(msgs)) {}

std::string kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::covariance_check: return "covariance_check";
        case ExperimentKind::weyl_check: return "weyl_check";
        case ExperimentKind::affine_covariance: return "affine_covariance";
        case ExperimentKind::conformal_covariance: return "conformal_covariance";
        case ExperimentKind::measure_covariance: return "measure_covariance";
        case ExperimentKind::annulus_events: return "annulus_events";
        case ExperimentKind::ball_volume: return "ball_volume";
    }
    return "?";
}

ExperimentKind kind_from_name(const std::string& name) {
    for (auto k : {ExperimentKind::covariance_check, ExperimentKind::weyl_check,
                   ExperimentKind::affine_covariance, ExperimentKind::conformal_covariance,
                   ExperimentKind::measure_covariance, ExperimentKind::annulus_events,
                   ExperimentKind::ball_volume})
        if (kind_name(k) == name) return k;
    throw ConfigError({"kind: unknown experiment kind '" + name + "'"});
}

// ---------------------------------------------------------------------------
// config (de)serialization
// ---------------------------------------------------------------------------

namespace {

Complex complex_from(const Json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError({field + ": complex numbers are [x, y] pairs"});
    return {j[0].get<double>(), j[1].get<double>()};
}

Json complex_to(Complex z) { return Json::array({z.real(), z.imag()}); }

std::string sampler_tag_name(SamplerTag t) {
    switch (t) {
        case SamplerTag::zero_boundary_spectral: return "zero_boundary_spectral";
        case SamplerTag::whole_plane_bigbox: return "whole_plane_bigbox";
        case SamplerTag::whole_plane_torus: return "whole_plane_torus";
    }
    return "?";
}

std::string normalization_name(Normalization n) {
    switch (n) {
        case Normalization::circle_average_at_origin: return "circle_average_at_origin";
        case Normalization::smoothed_average_at_origin: return "smoothed_average_at_origin";
        case Normalization::mean_zero: return "mean_zero";
    }
    return "?";
}

std::string map_kind_name(MapKind k) {
    switch (k) {
        case MapKind::affine: return "affine";
        case MapKind::moebius: return "moebius";
        case MapKind::power2: return "power2";
        case MapKind::exp_strip: return "exp_strip";
    }
    return "?";
}

MapDescriptor map_from_json(const Json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "affine")
        return MapDescriptor::affine(complex_from(j.at("a"), "map.a"),
                                     complex_from(j.at("b"), "map.b"));
    if (kind == "moebius")
        return MapDescriptor::moebius(
            complex_from(j.at("a"), "map.a"), complex_from(j.at("b"), "map.b"),
            complex_from(j.at("c"), "map.c"), complex_from(j.at("d"), "map.d"));
    if (kind == "power2") return MapDescriptor::power2();
    if (kind == "exp_strip") return MapDescriptor::exp_strip();
    throw ConfigError({"map.kind: unknown map kind '" + kind + "'"});
}

Json map_to_json(const MapDescriptor& m) {
    Json j;
    j["kind"] = map_kind_name(m.kind);
    j["a"] = complex_to(m.a);
    j["b"] = complex_to(m.b);
    j["c"] = complex_to(m.c);
    j["d"] = complex_to(m.d);
    return j;
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
    ExperimentConfig c;
    try {
        c.kind = kind_from_name(j.at("kind").get<std::string>());
        c.gamma = j.at("gamma").get<double>();
        c.d_gamma = j.value("d_gamma", 4.0);
        const Json& g = j.at("grid");
        c.grid = GridSpec(complex_from(g.at("origin"), "grid.origin"),
                          g.at("spacing").get<double>(), g.at("nx").get<int>(),
                          g.at("ny").get<int>());
        if (j.contains("sampler")) {
            const Json& s = j.at("sampler");
            std::string tag = s.value("tag", "whole_plane_bigbox");
            if (tag == "zero_boundary_spectral")
                c.sampler.tag = SamplerTag::zero_boundary_spectral;
            else if (tag == "whole_plane_bigbox")
                c.sampler.tag = SamplerTag::whole_plane_bigbox;
            else if (tag == "whole_plane_torus")
                c.sampler.tag = SamplerTag::whole_plane_torus;
            else
                throw ConfigError({"sampler.tag: unknown tag '" + tag + "'"});
            c.sampler.expansion_factor = s.value("expansion_factor", 4.0);
            std::string norm = s.value("normalization", "smoothed_average_at_origin");
            if (norm == "circle_average_at_origin")
                c.sampler.normalization = Normalization::circle_average_at_origin;
            else if (norm == "smoothed_average_at_origin")
                c.sampler.normalization = Normalization::smoothed_average_at_origin;
            else if (norm == "mean_zero")
                c.sampler.normalization = Normalization::mean_zero;
            else
                throw ConfigError({"sampler.normalization: unknown value '" + norm + "'"});
            c.sampler.normalization_radius = s.value("normalization_radius", 1.0);
        }
        if (j.contains("map") && !j.at("map").is_null()) c.map = map_from_json(j.at("map"));
        c.eps_schedule = j.at("eps_schedule").get<std::vector<double>>();
        c.r_schedule = j.value("r_schedule", std::vector<double>{});
        c.mesh_schedule = j.value("mesh_schedule", std::vector<int>{});
        c.sample_count = j.at("sample_count").get<int>();
        c.base_seed = j.at("base_seed").get<std::uint64_t>();
        c.pair_budget = j.value("pair_budget", 8);
        c.shift_c = j.value("shift_c", 1.0);
        if (j.contains("probe_center"))
            c.probe_center = complex_from(j.at("probe_center"), "probe_center");
        c.b_fraction = j.value("b_fraction", 0.25);
        c.domain_factor = j.value("domain_factor", 2.0);
        std::string mol = j.value("measure_mollifier", "heat_kernel");
        if (mol == "heat_kernel")
            c.measure_mollifier = Mollifier::heat_kernel;
        else if (mol == "circle_average")
            c.measure_mollifier = Mollifier::circle_average;
        else
            throw ConfigError({"measure_mollifier: unknown value '" + mol + "'"});
        if (j.contains("event_params")) {
            const Json& e = j.at("event_params");
            c.event_params.alpha = e.value("alpha", 0.75);
            c.event_params.big_a = e.value("big_a", 25.0);
            c.event_params.delta = e.value("delta", 0.5);
        }
        c.out_dir = j.value("out_dir", std::string("out"));
    } catch (const Json::exception& e) {
        throw ConfigError({std::string("config: ") + e.what()});
    }
    return c;
}

ExperimentConfig config_from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError({"config: cannot open file " + path});
    Json j;
    try {
        is >> j;
    } catch (const Json::exception& e) {
        throw ConfigError({std::string("config: JSON parse error: ") + e.what()});
    }
    return config_from_json(j);
}

Json config_to_json(const ExperimentConfig& c) {
    Json j;
    j["kind"] = kind_name(c.kind);
    j["gamma"] = c.gamma;
    j["d_gamma"] = c.d_gamma;
    j["grid"] = {{"origin", complex_to(c.grid.origin)},
                 {"spacing", c.grid.spacing},
                 {"nx", c.grid.nx},
                 {"ny", c.grid.ny}};
    j["sampler"] = {{"tag", sampler_tag_name(c.sampler.tag)},
                    {"expansion_factor", c.sampler.expansion_factor},
                    {"normalization", normalization_name(c.sampler.normalization)},
                    {"normalization_radius", c.sampler.normalization_radius}};
    if (c.map) j["map"] = map_to_json(*c.map);
    j["eps_schedule"] = c.eps_schedule;
    j["r_schedule"] = c.r_schedule;
    j["mesh_schedule"] = c.mesh_schedule;
    j["sample_count"] = c.sample_count;
    j["base_seed"] = c.base_seed;
    j["pair_budget"] = c.pair_budget;
    j["shift_c"] = c.shift_c;
    j["probe_center"] = complex_to(c.probe_center);
    j["b_fraction"] = c.b_fraction;
    j["domain_factor"] = c.domain_factor;
    j["measure_mollifier"] =
        (c.measure_mollifier == Mollifier::heat_kernel) ? "heat_kernel" : "circle_average";
    j["event_params"] = {{"alpha", c.event_params.alpha},
                         {"big_a", c.event_params.big_a},
                         {"delta", c.event_params.delta}};
    j["out_dir"] = c.out_dir;
    return j;
}

std::vector<std::string> ExperimentConfig::validate() const {
    std::vector<std::string> errs;
    if (!(gamma > 0.0) || !(gamma < 2.0)) errs.push_back("gamma: must be in (0,2)");
    if (!(d_gamma > 2.0)) errs.push_back("d_gamma: must be > 2");
    if (sample_count < 1) errs.push_back("sample_count: must be >= 1");
    if (pair_budget < 1) errs.push_back("pair_budget: must be >= 1");
    if (eps_schedule.empty()) errs.push_back("eps_schedule: must be nonempty");
    for (size_t k = 0; k < eps_schedule.size(); ++k) {
        if (eps_schedule[k] < grid.spacing)
            errs.push_back("eps_schedule[" + std::to_string(k) + "]: smaller than grid spacing");
        if (k > 0 && eps_schedule[k] > eps_schedule[k - 1])
            errs.push_back("eps_schedule: must be non-increasing");
    }
    for (size_t k = 1; k < r_schedule.size(); ++k)
        if (r_schedule[k] > r_schedule[k - 1]) {
            errs.push_back("r_schedule: must be non-increasing");
            break;
        }
    if (!(b_fraction > 0.0) || !(b_fraction < 1.0)) errs.push_back("b_fraction: must be in (0,1)");
    if (!(domain_factor > 1.0) || !(domain_factor <= 5.0))
        errs.push_back("domain_factor: must be in (1,5]");
    switch (kind) {
        case ExperimentKind::affine_covariance:
            if (!map || map->kind != MapKind::affine)
                errs.push_back("map: affine_covariance requires an affine map");
            if (r_schedule.empty()) errs.push_back("r_schedule: required (probe ball radius)");
            break;
        case ExperimentKind::conformal_covariance:
        case ExperimentKind::annulus_events:
            if (!map) errs.push_back("map: required for this experiment kind");
            if (r_schedule.empty()) errs.push_back("r_schedule: must be nonempty");
            if (kind == ExperimentKind::conformal_covariance &&
                eps_schedule.size() != r_schedule.size())
                errs.push_back("eps_schedule: must pair one epsilon with each r");
            break;
        case ExperimentKind::measure_covariance:
            if (!map) errs.push_back("map: required for measure_covariance");
            if (r_schedule.empty()) errs.push_back("r_schedule: required (region radius)");
            if (mesh_schedule.empty()) errs.push_back("mesh_schedule: must be nonempty");
            for (int m : mesh_schedule)
                if (m < 16) errs.push_back("mesh_schedule: window sizes must be >= 16");
            break;
        case ExperimentKind::ball_volume:
            if (r_schedule.empty()) errs.push_back("r_schedule: must be nonempty (metric radii)");
            break;
        case ExperimentKind::covariance_check:
            if (sampler.tag != SamplerTag::zero_boundary_spectral && r_schedule.empty())
                errs.push_back("r_schedule: whole-plane covariance check needs dyadic radii");
            break;
        case ExperimentKind::weyl_check: break;
    }
    if (sampler.tag == SamplerTag::whole_plane_bigbox && sampler.expansion_factor < 2.0)
        errs.push_back("sampler.expansion_factor: must be >= 2");
    return errs;
}

// ---------------------------------------------------------------------------
// per-kind sample runners
// ---------------------------------------------------------------------------

namespace {

Field sample_field(const ExperimentConfig& c, const GridSpec& grid, std::uint64_t seed) {
    if (c.sampler.tag == SamplerTag::zero_boundary_spectral)
        return sample_zero_boundary(grid, seed);
    return sample_whole_plane_proxy(grid, c.sampler, seed);
}

std::vector<std::pair<int, int>> covariance_probe_pairs(const ExperimentConfig& c, int count) {
    CounterRng rng(c.base_seed, 0xC0FFEE);
    std::vector<std::pair<int, int>> pairs;
    const GridSpec& g = c.grid;
    while (static_cast<int>(pairs.size()) < count) {
        int i1 = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(g.nx - 2)));
        int j1 = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(g.ny - 2)));
        int i2 = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(g.nx - 2)));
        int j2 = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(g.ny - 2)));
        pairs.emplace_back(g.index(i1, j1), g.index(i2, j2));
    }
    return pairs;
}

Json run_covariance_sample(const ExperimentConfig& c, int i, std::uint64_t seed) {
    Json rec;
    rec["sample"] = i;
    rec["seed"] = seed;
    if (c.sampler.tag == SamplerTag::zero_boundary_spectral) {
        Field h = sample_zero_boundary(c.grid, seed);
        auto pairs = covariance_probe_pairs(c, 20);
        Json vals = Json::array();
        for (auto [u, v] : pairs) vals.push_back(Json::array({h.at(u), h.at(v)}));
        rec["pair_values"] = std::move(vals);
    } else {
        Field h = sample_whole_plane_proxy(c.grid, c.sampler, seed);
        Json avgs = Json::array();
        for (double r : c.r_schedule) avgs.push_back(circle_average(h, {0.0, 0.0}, r));
        rec["circle_averages"] = std::move(avgs);
    }
    return rec;
}

Json run_weyl_sample(const ExperimentConfig& c, int i, std::uint64_t seed) {
    Json rec;
    rec["sample"] = i;
    rec["seed"] = seed;
    LqgParams p = c.lqg_params();
    Field h = sample_field(c, c.grid, seed);
    Field h_eps = heat_mollify(h, c.eps_schedule.front());
    MetricOracle base = make_oracle(h_eps, p);
    MetricOracle shifted = weyl_shift(base, c.shift_c);
    std::vector<int> mask_idx = base.mask.indices();
    CounterRng rng(seed, 7);
    const double expected = std::exp(p.xi * c.shift_c);
    double max_dev = 0.0;
    for (int k = 0; k < c.pair_budget; ++k) {
        int u = mask_idx[static_cast<size_t>(rng.next_below(mask_idx.size()))];
        int v = mask_idx[static_cast<size_t>(rng.next_below(mask_idx.size()))];
        if (u == v) continue;
        double d0 = distance(base, u, v, false).value;
        double d1 = distance(shifted, u, v, false).value;
        max_dev = std::max(max_dev, std::abs(d1 / (expected * d0) - 1.0));
    }
    rec["max_rel_dev_distance"] = max_dev;

    MeasureField m0 = build_measure(h_eps, c.eps_schedule.front(), p.gamma);
    MeasureField m1 = build_measure(add_constant(h_eps, c.shift_c), c.eps_schedule.front(), p.gamma);
    VertexSet all(c.grid, true);
    double mass_ratio = measure_of(m1, all) / measure_of(m0, all);
    rec["rel_dev_measure"] = std::abs(mass_ratio / std::exp(p.gamma * c.shift_c) - 1.0);
    return rec;
}

enum class AffineMode { translation, rotation90, subsample2, interpolated };

AffineMode classify_affine(const MapDescriptor& m, const GridSpec& g) {
    auto lattice_vector = [&](Complex b) {
        double fx = b.real() / g.spacing, fy = b.imag() / g.spacing;
        return std::abs(fx - std::lround(fx)) < 1e-9 && std::abs(fy - std::lround(fy)) < 1e-9;
    };
    if (m.a == Complex(1.0, 0.0) && lattice_vector(m.b)) return AffineMode::translation;
    if (m.a == Complex(0.0, 1.0) && m.b == Complex(0.0, 0.0)) return AffineMode::rotation90;
    if (m.a == Complex(2.0, 0.0) && m.b == Complex(0.0, 0.0)) return AffineMode::subsample2;
    return AffineMode::interpolated;
}

// Field reinterpreted with positions shifted by -b: D_new(z,w) = D_old(z+b, w+b).
Field reindex_translate(const Field& f, Complex b) {
    Field out = f;
    out.grid.origin -= b;
    return out;
}

// The composed field h(i .): value'(i,j) = value at i * vertex(i,j), i.e. at
// (-y, x); needs a square window centered at the origin.
Field reindex_rotate90(const Field& f) {
    const GridSpec& g = f.grid;
    if (g.nx != g.ny || std::abs(g.xmin() + g.xmax()) > 1e-12 ||
        std::abs(g.ymin() + g.ymax()) > 1e-12 || !(g.origin.real() == g.origin.imag()))
        throw std::invalid_argument("reindex_rotate90: window must be square and origin-centered");
    Field out(g);
    out.valid_margin = f.valid_margin;
    const int n = g.nx;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int ip = n - 1 - j;
            int jp = i;
            out.at(i, j) = f.at(ip, jp);
        }
    return out;
}

// value'(i,j) = value(2 * position) + Q log 2 on the half window, spacing kept.
Field reindex_halve(const Field& f, double qlog2) {
    const GridSpec& g = f.grid;
    if (g.nx % 2 == 0 || g.ny % 2 == 0)
        throw std::invalid_argument("reindex_halve: window sizes must be odd");
    GridSpec half(g.origin / 2.0, g.spacing, (g.nx + 1) / 2, (g.ny + 1) / 2);
    Field out(half);
    out.valid_margin = f.valid_margin / 2.0;
    for (int j = 0; j < half.ny; ++j)
        for (int i = 0; i < half.nx; ++i) out.at(i, j) = f.at(2 * i, 2 * j) + qlog2;
    return out;
}

Json run_affine_sample(const ExperimentConfig& c, int i, std::uint64_t seed) {
    Json rec;
    rec["sample"] = i;
    rec["seed"] = seed;
    LqgParams p = c.lqg_params();
    const MapDescriptor& map = *c.map;
    AffineMode mode = classify_affine(map, c.grid);
    Field h = sample_field(c, c.grid, seed);
    Field h_eps = heat_mollify(h, c.eps_schedule.front());
    MetricOracle left = make_oracle(h_eps, p);

    const double r0 = c.r_schedule.front();
    CounterRng rng(seed, 11);
    auto draw_point = [&](double radius) {
        double rho = radius * std::sqrt(rng.next_double());
        double th = 2.0 * M_PI * rng.next_double();
        return c.probe_center + rho * Complex(std::cos(th), std::sin(th));
    };

    Json ratios = Json::array();
    Json double_ratios = Json::array();
    if (mode == AffineMode::translation || mode == AffineMode::rotation90) {
        Field right_field = (mode == AffineMode::translation) ? reindex_translate(h_eps, map.b)
                                                              : reindex_rotate90(h_eps);
        MetricOracle right = make_oracle(right_field, p);
        for (int k = 0; k < c.pair_budget; ++k) {
            Complex z = draw_point(r0), w = draw_point(r0);
            if (std::abs(z - w) < c.b_fraction * r0) {
                --k;
                continue;
            }
            Complex fz = map.evaluate(z), fw = map.evaluate(w);
            double dl = distance(left, left.field.grid.nearest(fz), left.field.grid.nearest(fw),
                                 false)
                            .value;
            double dr = distance(right, right.field.grid.nearest(z), right.field.grid.nearest(w),
                                 false)
                            .value;
            ratios.push_back(dr / dl);
        }
        rec["mode"] = (mode == AffineMode::translation) ? "translation" : "rotation90";
    } else if (mode == AffineMode::subsample2) {
        Field right_field = reindex_halve(h_eps, p.q * std::log(2.0));
        MetricOracle right = make_oracle(right_field, p);
        const GridSpec& rg = right.field.grid;
        // reference pair for the normalization-free double ratio
        Complex zr = c.probe_center + Complex(-0.5 * r0, 0.0);
        Complex wr = c.probe_center + Complex(0.5 * r0, 0.0);
        auto query = [&](Complex z, Complex w) {
            Complex zs = rg.vertex(rg.nearest(z));
            Complex ws = rg.vertex(rg.nearest(w));
            double dr = distance(right, rg.nearest(z), rg.nearest(w), false).value;
            double dl = distance(left, left.field.grid.nearest(2.0 * zs),
                                 left.field.grid.nearest(2.0 * ws), false)
                            .value;
            return std::make_pair(dr, dl);
        };
        auto [dr_ref, dl_ref] = query(zr, wr);
        double ref_ratio = dr_ref / dl_ref;
        rec["reference_ratio"] = ref_ratio;
        for (int k = 0; k < c.pair_budget; ++k) {
            Complex z = draw_point(r0), w = draw_point(r0);
            if (std::abs(z - w) < c.b_fraction * r0) {
                --k;
                continue;
            }
            auto [dr, dl] = query(z, w);
            ratios.push_back(dr / dl);
            double_ratios.push_back((dr / dl) / ref_ratio);
        }
        rec["mode"] = "subsample2";
    } else {
        // generic interpolation fallback, flagged in the record
        GridSpec target = target_grid_for(map, c.probe_center, 2.0 * r0, c.grid.spacing,
                                          4.0 * matched_epsilon(map, c.probe_center,
                                                                c.eps_schedule.front()) +
                                              6.0 * c.grid.spacing);
        std::vector<double> rs =
            covariance_ratio_sample(h, map, c.probe_center, r0, c.eps_schedule.front(), p,
                                    c.pair_budget, c.b_fraction, target, rng);
        for (double v : rs) ratios.push_back(v);
        rec["mode"] = "interpolated";
    }
    rec["ratios"] = std::move(ratios);
    if (!double_ratios.empty()) rec["double_ratios"] = std::move(double_ratios);
    return rec;
}

Json run_conformal_sample(const ExperimentConfig& c, int i, std::uint64_t seed) {
    Json rec;
    rec["sample"] = i;
    rec["seed"] = seed;
    LqgParams p = c.lqg_params();
    const MapDescriptor& map = *c.map;
    Field h = sample_field(c, c.grid, seed);
    Json scales = Json::array();
    for (size_t k = 0; k < c.r_schedule.size(); ++k) {
        double r = c.r_schedule[k];
        double eps = c.eps_schedule[k];
        double eps_t = matched_epsilon(map, c.probe_center, eps);
        GridSpec target = target_grid_for(map, c.probe_center, c.domain_factor * r,
                                          c.grid.spacing, 4.0 * eps_t + 6.0 * c.grid.spacing);
        CounterRng rng(seed, 100 + static_cast<std::uint64_t>(k));
        ComparisonOracles co = make_comparison_oracles(h, map, c.probe_center, r, eps, p, target,
                                                       c.domain_factor);
        const GridSpec& g = h.grid;
        double sup = 0.0;
        for (int q = 0; q < c.pair_budget; ++q) {
            auto [u, v] = draw_snapped_pair(rng, g, c.probe_center, r, 2.0 * g.spacing);
            double dh = distance(co.direct, g.nearest(u), g.nearest(v), false).value;
            double dphi = pulled_back_distance(co.pulled, map, u, v);
            sup = std::max(sup, std::abs(dphi - dh));
        }
        double stat = sup / (std::pow(r, p.xi * p.q) *
                             std::exp(p.xi * smoothed_average(h, BumpKernel::standard(),
                                                              c.probe_center, r)));
        std::vector<double> ratios;
        for (int q = 0; q < c.pair_budget; ++q) {
            auto [u, v] = draw_snapped_pair(rng, g, c.probe_center, r, c.b_fraction * r);
            double dh = distance(co.direct, g.nearest(u), g.nearest(v), false).value;
            double dphi = pulled_back_distance(co.pulled, map, u, v);
            ratios.push_back(dphi / dh);
        }
        Json sj;
        sj["r"] = r;
        sj["eps"] = eps;
        sj["sup_statistic"] = stat;
        sj["event"] = (stat <= c.event_params.delta);
        sj["ratios"] = ratios;
        scales.push_back(std::move(sj));
    }
    rec["scales"] = std::move(scales);
    return rec;
}

Json run_measure_sample(const ExperimentConfig& c, int i, std::uint64_t seed) {
    Json rec;
    rec["sample"] = i;
    rec["seed"] = seed;
    LqgParams p = c.lqg_params();
    const MapDescriptor& map = *c.map;
    const double r0 = c.r_schedule.front();
    const double eps = c.eps_schedule.front();
    Json meshes = Json::array();
    double extent_x = (c.grid.nx - 1) * c.grid.spacing;
    double extent_y = (c.grid.ny - 1) * c.grid.spacing;
    for (int m : c.mesh_schedule) {
        GridSpec grid(c.grid.origin, extent_x / (m - 1), m,
                      1 + static_cast<int>(std::lround(extent_y / (extent_x / (m - 1)))));
        Field h = sample_field(c, grid, seed);
        VertexSet region = vertices_in_disk(grid, c.probe_center, r0);
        double eps_t = matched_epsilon(map, c.probe_center, eps);
        GridSpec target = target_grid_for(map, c.probe_center, r0, grid.spacing,
                                          4.0 * eps_t + 6.0 * grid.spacing);
        double ratio = measure_coordinate_change_ratio(h, map, region, eps, p, target,
                                                       c.measure_mollifier);
        Json mj;
        mj["mesh"] = m;
        mj["ratio"] = ratio;
        meshes.push_back(std::move(mj));
    }
    rec["meshes"] = std::move(meshes);
    return rec;
}

Json run_annulus_sample(const ExperimentConfig& c, int i, std::uint64_t seed) {
    Json rec;
    rec["sample"] = i;
    rec["seed"] = seed;
    LqgParams p = c.lqg_params();
    const MapDescriptor& map = *c.map;
    const double r = c.r_schedule.front();
    AnnulusEventParams ep = c.event_params;
    ep.epsilon = c.eps_schedule.front();
    ep.pair_budget = c.pair_budget;
    Field h = sample_field(c, c.grid, seed);
    double eps_t = matched_epsilon(map, c.probe_center, ep.epsilon);
    GridSpec target = target_grid_for(map, c.probe_center, 2.5 * r, c.grid.spacing,
                                      4.0 * eps_t + 6.0 * c.grid.spacing);
    CounterRng rng(seed, 31);
    EventReport r1 = check_condition1(h, map, c.probe_center, r, p, ep, target, rng);
    EventReport r2 = check_condition2(h, map, c.probe_center, r, p, ep, target, rng);
    EventReport r3 = check_condition3(h, c.probe_center, r, p, ep);
    rec["condition1"] = r1.verdict;
    rec["condition2"] = r2.verdict;
    rec["condition3"] = r3.verdict;
    rec["circuit_length"] = r3.value;
    rec["circuit_threshold"] = r3.threshold;
    rec["all"] = (r1.verdict && r2.verdict && r3.verdict);
    return rec;
}

Json run_ball_volume_sample(const ExperimentConfig& c, int i, std::uint64_t seed) {
    Json rec;
    rec["sample"] = i;
    rec["seed"] = seed;
    LqgParams p = c.lqg_params();
    Field h = sample_field(c, c.grid, seed);
    Field h_eps = heat_mollify(h, c.eps_schedule.front());
    MeasureField m = build_measure(h_eps, c.eps_schedule.front(), p.gamma);
    MetricOracle oracle = make_oracle(h_eps, p);
    std::vector<double> radii = c.r_schedule;
    std::sort(radii.begin(), radii.end());
    auto profile = ball_volume_profile(oracle, m, c.probe_center, radii);
    std::vector<double> lx, ly;
    Json prof = Json::array();
    for (auto [s, mass] : profile) {
        prof.push_back(Json::array({s, mass}));
        if (mass > 0.0) {
            lx.push_back(std::log(s));
            ly.push_back(std::log(mass));
        }
    }
    rec["profile"] = std::move(prof);
    rec["slope"] = (lx.size() >= 2) ? stats::ls_slope(lx, ly)
                                    : std::numeric_limits<double>::quiet_NaN();
    return rec;
}

Json run_sample(const ExperimentConfig& c, int i) {
    std::uint64_t seed = c.base_seed + static_cast<std::uint64_t>(i);
    switch (c.kind) {
        case ExperimentKind::covariance_check: return run_covariance_sample(c, i, seed);
        case ExperimentKind::weyl_check: return run_weyl_sample(c, i, seed);
        case ExperimentKind::affine_covariance: return run_affine_sample(c, i, seed);
        case ExperimentKind::conformal_covariance: return run_conformal_sample(c, i, seed);
        case ExperimentKind::measure_covariance: return run_measure_sample(c, i, seed);
        case ExperimentKind::annulus_events: return run_annulus_sample(c, i, seed);
        case ExperimentKind::ball_volume: return run_ball_volume_sample(c, i, seed);
    }
    throw std::logic_error("run_sample: unhandled kind");
}

// ---------------------------------------------------------------------------
// pooling
// ---------------------------------------------------------------------------

// Dirichlet Green's function column via conjugate gradients on the graph
// Laplacian (reference values for the covariance check's pooled table).
std::vector<double> dirichlet_green_column(const GridSpec& g, int v) {
    const int mx = g.nx - 2, my = g.ny - 2;
    auto interior = [&](int idx) {
        int i = g.ix(idx), j = g.iy(idx);
        return i >= 1 && i <= mx && j >= 1 && j <= my;
    };
    auto to_k = [&](int idx) { return (g.iy(idx) - 1) * mx + (g.ix(idx) - 1); };
    const int n = mx * my;
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (int j = 0; j < my; ++j)
            for (int i = 0; i < mx; ++i) {
                double acc = 4.0 * x[static_cast<size_t>(j * mx + i)];
                if (i > 0) acc -= x[static_cast<size_t>(j * mx + i - 1)];
                if (i < mx - 1) acc -= x[static_cast<size_t>(j * mx + i + 1)];
                if (j > 0) acc -= x[static_cast<size_t>((j - 1) * mx + i)];
                if (j < my - 1) acc -= x[static_cast<size_t>((j + 1) * mx + i)];
                y[static_cast<size_t>(j * mx + i)] = acc;
            }
    };
    if (!interior(v)) throw std::invalid_argument("green column: boundary vertex");
    std::vector<double> b(static_cast<size_t>(n), 0.0), x(static_cast<size_t>(n), 0.0);
    b[static_cast<size_t>(to_k(v))] = 1.0;
    std::vector<double> r = b, p = b, ap(static_cast<size_t>(n));
    double rs = 0.0;
    for (double t : r) rs += t * t;
    for (int it = 0; it < 10 * n && rs > 1e-24; ++it) {
        apply(p, ap);
        double pap = 0.0;
        for (int k = 0; k < n; ++k) pap += p[static_cast<size_t>(k)] * ap[static_cast<size_t>(k)];
        double alpha = rs / pap;
        double rs_new = 0.0;
        for (int k = 0; k < n; ++k) {
            x[static_cast<size_t>(k)] += alpha * p[static_cast<size_t>(k)];
            r[static_cast<size_t>(k)] -= alpha * ap[static_cast<size_t>(k)];
            rs_new += r[static_cast<size_t>(k)] * r[static_cast<size_t>(k)];
        }
        for (int k = 0; k < n; ++k)
            p[static_cast<size_t>(k)] = r[static_cast<size_t>(k)] + (rs_new / rs) * p[static_cast<size_t>(k)];
        rs = rs_new;
    }
    std::vector<double> full(static_cast<size_t>(g.size()), 0.0);
    for (int idx = 0; idx < g.size(); ++idx)
        if (interior(idx)) full[static_cast<size_t>(idx)] = x[static_cast<size_t>(to_k(idx))];
    return full;
}

Json pool_covariance(const ExperimentConfig& c, const std::vector<Json>& samples) {
    Json pooled;
    Json groups = Json::array();
    if (c.sampler.tag == SamplerTag::zero_boundary_spectral) {
        auto pairs = covariance_probe_pairs(c, 20);
        Json rows = Json::array();
        double max_abs_z = 0.0;
        for (size_t pi = 0; pi < pairs.size(); ++pi) {
            std::vector<double> prod;
            prod.reserve(samples.size());
            for (const auto& s : samples) {
                const auto& pv = s.at("pair_values").at(pi);
                prod.push_back(pv.at(0).get<double>() * pv.at(1).get<double>());
            }
            double emp = stats::mean(prod);
            double se = std::sqrt(stats::sample_variance(prod) / static_cast<double>(prod.size()));
            auto [u, v] = pairs[pi];
            double exact = 2.0 * M_PI * dirichlet_green_column(c.grid, v)[static_cast<size_t>(u)];
            double z = (emp - exact) / se;
            max_abs_z = std::max(max_abs_z, std::abs(z));
            rows.push_back({{"u", u}, {"v", v}, {"empirical", emp}, {"exact", exact},
                            {"se", se}, {"z", z}});
        }
        pooled["pairs"] = std::move(rows);
        pooled["max_abs_z"] = max_abs_z;
        groups.push_back({{"eps", nullptr}, {"r", nullptr}, {"mesh", nullptr},
                          {"n", samples.size()}, {"statistic", max_abs_z}});
    } else {
        Json vars = Json::array();
        std::vector<double> ks, vs;
        for (size_t ri = 0; ri < c.r_schedule.size(); ++ri) {
            std::vector<double> xs;
            for (const auto& s : samples) xs.push_back(s.at("circle_averages").at(ri).get<double>());
            double var = stats::sample_variance(xs);
            vars.push_back({{"r", c.r_schedule[ri]}, {"var", var}});
            ks.push_back(static_cast<double>(ri));
            vs.push_back(var);
            groups.push_back({{"eps", nullptr}, {"r", c.r_schedule[ri]}, {"mesh", nullptr},
                              {"n", samples.size()}, {"statistic", var}});
        }
        double slope = (ks.size() >= 2) ? stats::ls_slope(ks, vs)
                                        : std::numeric_limits<double>::quiet_NaN();
        pooled["variances"] = std::move(vars);
        pooled["slope_per_dyadic"] = slope;
        pooled["slope_target"] = std::log(2.0);
    }
    pooled["groups"] = std::move(groups);
    return pooled;
}

Json pool_simple_max(const std::vector<Json>& samples, const char* field) {
    double worst = 0.0;
    for (const auto& s : samples) worst = std::max(worst, s.at(field).get<double>());
    return worst;
}

Json pool_generic(const ExperimentConfig& c, const std::vector<Json>& samples) {
    Json pooled;
    Json groups = Json::array();
    switch (c.kind) {
        case ExperimentKind::weyl_check: {
            double worst_d = pool_simple_max(samples, "max_rel_dev_distance").get<double>();
            double worst_m = pool_simple_max(samples, "rel_dev_measure").get<double>();
            pooled["max_rel_dev_distance"] = worst_d;
            pooled["max_rel_dev_measure"] = worst_m;
            groups.push_back({{"eps", c.eps_schedule.front()}, {"r", nullptr}, {"mesh", nullptr},
                              {"n", samples.size()}, {"statistic", worst_d}});
            break;
        }
        case ExperimentKind::affine_covariance: {
            std::vector<double> all, alld;
            for (const auto& s : samples) {
                for (const auto& v : s.at("ratios")) all.push_back(v.get<double>());
                if (s.contains("double_ratios"))
                    for (const auto& v : s.at("double_ratios")) alld.push_back(v.get<double>());
            }
            const std::vector<double>& primary = alld.empty() ? all : alld;
            pooled["ratio_median"] = stats::median(all);
            pooled["ratio_iqr"] = stats::iqr(all);
            if (!alld.empty()) {
                pooled["double_ratio_median"] = stats::median(alld);
                pooled["double_ratio_iqr"] = stats::iqr(alld);
            }
            pooled["mode"] = samples.front().at("mode");
            groups.push_back({{"eps", c.eps_schedule.front()},
                              {"r", c.r_schedule.front()},
                              {"mesh", nullptr},
                              {"n", primary.size()},
                              {"statistic", stats::median(primary)}});
            break;
        }
        case ExperimentKind::conformal_covariance: {
            Json rows = Json::array();
            for (size_t k = 0; k < c.r_schedule.size(); ++k) {
                int hits = 0;
                std::vector<double> ratios;
                for (const auto& s : samples) {
                    const auto& sc = s.at("scales").at(k);
                    hits += sc.at("event").get<bool>() ? 1 : 0;
                    for (const auto& v : sc.at("ratios")) ratios.push_back(v.get<double>());
                }
                double n = static_cast<double>(samples.size());
                double phat = hits / n;
                auto wi = stats::wilson(hits, n);
                Json row;
                row["r"] = c.r_schedule[k];
                row["eps"] = c.eps_schedule[k];
                row["event_probability"] = phat;
                row["wilson_lower"] = wi.lower;
                row["wilson_upper"] = wi.upper;
                row["n"] = samples.size();
                row["low_n"] = (samples.size() < 10);
                row["ratio_iqr"] = stats::iqr(ratios);
                row["ratio_median"] = stats::median(ratios);
                rows.push_back(row);
                groups.push_back({{"eps", c.eps_schedule[k]}, {"r", c.r_schedule[k]},
                                  {"mesh", nullptr}, {"n", samples.size()},
                                  {"statistic", phat}, {"wilson_lower", wi.lower},
                                  {"wilson_upper", wi.upper}, {"iqr", stats::iqr(ratios)}});
            }
            pooled["scales"] = std::move(rows);
            break;
        }
        case ExperimentKind::measure_covariance: {
            for (size_t mi = 0; mi < c.mesh_schedule.size(); ++mi) {
                std::vector<double> rs;
                for (const auto& s : samples)
                    rs.push_back(s.at("meshes").at(mi).at("ratio").get<double>());
                double mean = stats::mean(rs);
                groups.push_back({{"eps", c.eps_schedule.front()}, {"r", c.r_schedule.front()},
                                  {"mesh", c.mesh_schedule[mi]}, {"n", rs.size()},
                                  {"statistic", mean}, {"abs_dev", std::abs(mean - 1.0)},
                                  {"median", stats::median(rs)}});
            }
            break;
        }
        case ExperimentKind::annulus_events: {
            for (const char* cond : {"condition1", "condition2", "condition3", "all"}) {
                int hits = 0;
                for (const auto& s : samples) hits += s.at(cond).get<bool>() ? 1 : 0;
                double n = static_cast<double>(samples.size());
                auto wi = stats::wilson(hits, n);
                pooled[cond] = {{"probability", hits / n}, {"wilson_lower", wi.lower},
                                {"wilson_upper", wi.upper}, {"n", samples.size()},
                                {"low_n", samples.size() < 10}};
            }
            int hits = 0;
            for (const auto& s : samples) hits += s.at("all").get<bool>() ? 1 : 0;
            groups.push_back({{"eps", c.eps_schedule.front()}, {"r", c.r_schedule.front()},
                              {"mesh", nullptr}, {"n", samples.size()},
                              {"statistic", hits / static_cast<double>(samples.size())}});
            break;
        }
        case ExperimentKind::ball_volume: {
            std::vector<double> slopes;
            for (const auto& s : samples)
                if (s.at("slope").is_number()) slopes.push_back(s.at("slope").get<double>());
            pooled["slope_mean"] = stats::mean(slopes);
            pooled["slope_median"] = stats::median(slopes);
            pooled["slope_iqr"] = stats::iqr(slopes);
            groups.push_back({{"eps", c.eps_schedule.front()}, {"r", nullptr}, {"mesh", nullptr},
                              {"n", slopes.size()}, {"statistic", stats::mean(slopes)}});
            break;
        }
        default: break;
    }
    pooled["groups"] = std::move(groups);
    return pooled;
}

}  // namespace

// ---------------------------------------------------------------------------
// orchestration
// ---------------------------------------------------------------------------

RunReport run(const ExperimentConfig& config, int workers) {
    auto errs = config.validate();
    if (!errs.empty()) throw ConfigError(errs);
    if (workers < 1) workers = 1;

    auto t0 = std::chrono::steady_clock::now();
    const int n = config.sample_count;
    std::vector<Json> records(static_cast<size_t>(n));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                records[static_cast<size_t>(i)] = run_sample(config, i);
            } catch (const std::exception& e) {
                Json err;
                err["sample"] = i;
                err["seed"] = config.base_seed + static_cast<std::uint64_t>(i);
                err["error"] = std::string(e.what());
                records[static_cast<size_t>(i)] = std::move(err);
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    RunReport rep;
    rep.config_echo = config_to_json(config);
    rep.per_sample = std::move(records);
    std::vector<Json> ok;
    for (const auto& r : rep.per_sample) {
        if (r.contains("error"))
            ++rep.failed_samples;
        else
            ok.push_back(r);
    }
    if (!ok.empty()) {
        rep.pooled = (config.kind == ExperimentKind::covariance_check)
                         ? pool_covariance(config, ok)
                         : pool_generic(config, ok);
        rep.pooled["pooled_n"] = ok.size();
        rep.pooled["low_n"] = (ok.size() < 10);
    }
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

Json RunReport::to_json() const {
    Json j;
    j["version"] = version;
    j["config"] = config_echo;
    j["samples"] = per_sample;
    j["pooled"] = pooled;
    j["failed_samples"] = failed_samples;
    j["wall_seconds"] = wall_seconds;
    return j;
}

std::string RunReport::records_bytes() const {
    Json arr = per_sample;
    return arr.dump();
}

RunReport report_from_json(const Json& j) {
    RunReport rep;
    rep.version = j.value("version", std::string());
    rep.config_echo = j.at("config");
    for (const auto& s : j.at("samples")) rep.per_sample.push_back(s);
    rep.pooled = j.value("pooled", Json::object());
    rep.failed_samples = j.value("failed_samples", 0);
    rep.wall_seconds = j.value("wall_seconds", 0.0);
    return rep;
}

void write_report_atomic(const RunReport& report, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw std::runtime_error("write_report_atomic: cannot open " + tmp);
        os << report.to_json().dump(2) << "\n";
        if (!os) throw std::runtime_error("write_report_atomic: write failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("write_report_atomic: rename failed for " + path);
}

std::string summarize_csv(const std::vector<RunReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("summarize: no reports");
    std::string kind = reports.front().config_echo.at("kind").get<std::string>();
    for (const auto& r : reports)
        if (r.config_echo.at("kind").get<std::string>() != kind)
            throw std::invalid_argument("summarize: reports mix experiment kinds");

    struct Row {
        double eps = std::numeric_limits<double>::quiet_NaN();
        double r = std::numeric_limits<double>::quiet_NaN();
        double mesh = std::numeric_limits<double>::quiet_NaN();
        Json g;
    };
    std::vector<Row> rows;
    for (const auto& rep : reports) {
        if (!rep.pooled.contains("groups")) continue;
        for (const auto& g : rep.pooled.at("groups")) {
            Row row;
            if (g.contains("eps") && g.at("eps").is_number()) row.eps = g.at("eps").get<double>();
            if (g.contains("r") && g.at("r").is_number()) row.r = g.at("r").get<double>();
            if (g.contains("mesh") && g.at("mesh").is_number())
                row.mesh = g.at("mesh").get<double>();
            row.g = g;
            rows.push_back(std::move(row));
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        auto nan_low = [](double x) {
            return std::isnan(x) ? -std::numeric_limits<double>::infinity() : x;
        };
        if (nan_low(a.eps) != nan_low(b.eps)) return nan_low(a.eps) > nan_low(b.eps);
        if (nan_low(a.r) != nan_low(b.r)) return nan_low(a.r) > nan_low(b.r);
        return nan_low(a.mesh) < nan_low(b.mesh);
    });

    std::ostringstream os;
    os << "# lqglab summary: one row per (eps, r, mesh) pooled group\n";
    os << "# columns: kind, eps, r, mesh, n, statistic, wilson_lower, wilson_upper, iqr\n";
    os << "kind,eps,r,mesh,n,statistic,wilson_lower,wilson_upper,iqr\n";
    auto cell = [](const Json& g, const char* key) {
        if (!g.contains(key) || g.at(key).is_null()) return std::string();
        std::ostringstream s;
        s.precision(17);
        s << g.at(key).get<double>();
        return s.str();
    };
    std::vector<double> primaries;
    for (const auto& row : rows) {
        os << kind << ',';
        os << (std::isnan(row.eps) ? "" : std::to_string(row.eps)) << ',';
        os << (std::isnan(row.r) ? "" : std::to_string(row.r)) << ',';
        os << (std::isnan(row.mesh) ? "" : std::to_string(static_cast<long>(row.mesh))) << ',';
        os << row.g.value("n", 0) << ',';
        os << cell(row.g, "statistic") << ',';
        os << cell(row.g, "wilson_lower") << ',';
        os << cell(row.g, "wilson_upper") << ',';
        os << cell(row.g, "iqr") << '\n';
        if (row.g.contains("statistic") && row.g.at("statistic").is_number())
            primaries.push_back(row.g.at("statistic").get<double>());
    }
    bool mono_up = true, mono_down = true;
    for (size_t k = 1; k < primaries.size(); ++k) {
        if (primaries[k] < primaries[k - 1]) mono_up = false;
        if (primaries[k] > primaries[k - 1]) mono_down = false;
    }
    bool monotone = primaries.size() >= 2 && (mono_up || mono_down);
    os << "# trend statistic monotone: " << (monotone ? "pass" : "fail") << "\n";
    return os.str();
}

}  // namespace lqg
