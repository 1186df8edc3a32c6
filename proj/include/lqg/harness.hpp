#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lqg/conformal.hpp"
#include "lqg/events.hpp"
#include "lqg/gff.hpp"
#include "lqg/measure.hpp"

namespace lqg {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersionStamp = "lqglab 0.1.0";

enum class ExperimentKind {
    covariance_check,
    weyl_check,
    affine_covariance,
    conformal_covariance,
    measure_covariance,
    annulus_events,
    ball_volume,
};

std::string kind_name(ExperimentKind k);
ExperimentKind kind_from_name(const std::string& name);

/// Invalid campaign description; `messages` carries field-level diagnostics.
struct ConfigError : std::runtime_error {
    std::vector<std::string> messages;
    explicit ConfigError(std::vector<std::string> msgs);
};

/// Declarative description of a Monte Carlo campaign.  Parsed from a JSON file
/// (complex numbers as [x, y] pairs, all physical quantities in plane units).
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::weyl_check;
    double gamma = 1.0;
    double d_gamma = 4.0;
    GridSpec grid;
    SamplerKind sampler;
    std::optional<MapDescriptor> map;
    std::vector<double> eps_schedule;  // non-increasing, every entry >= spacing
    std::vector<double> r_schedule;    // non-increasing
    std::vector<int> mesh_schedule;    // optional window sizes for mesh refinements
    int sample_count = 1;
    std::uint64_t base_seed = 1;
    int pair_budget = 8;
    double shift_c = 1.0;       // weyl_check: the constant added to the field
    Complex probe_center{0.0, 0.0};
    double b_fraction = 0.25;   // minimum pair separation as a fraction of r
    double domain_factor = 2.0; // comparison-region radius as a multiple of r
    Mollifier measure_mollifier = Mollifier::heat_kernel;
    AnnulusEventParams event_params;
    std::string out_dir = "out";

    LqgParams lqg_params() const { return LqgParams::make(gamma, d_gamma); }

    /// Field-level validation messages; empty means valid.
    std::vector<std::string> validate() const;
};

ExperimentConfig config_from_json(const Json& j);
ExperimentConfig config_from_file(const std::string& path);
Json config_to_json(const ExperimentConfig& c);

struct RunReport {
    Json config_echo;
    std::vector<Json> per_sample;  // one record per sample, ordered by index
    Json pooled;
    int failed_samples = 0;
    double wall_seconds = 0.0;
    std::string version = kVersionStamp;

    Json to_json() const;
    /// Canonical serialization of the per-sample records (determinism contract).
    std::string records_bytes() const;
};

RunReport run(const ExperimentConfig& config, int workers = 1);

/// Writes report JSON via a temp file + rename.
void write_report_atomic(const RunReport& report, const std::string& path);

RunReport report_from_json(const Json& j);

/// Aggregate CSV across reports of one experiment kind: one row per
/// (eps, r, mesh) group, a trend flag on the primary statistic at the end.
std::string summarize_csv(const std::vector<RunReport>& reports);

}  // namespace lqg
