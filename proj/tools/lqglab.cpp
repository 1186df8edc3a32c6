#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lqg/harness.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitPartialFailure = 3;

std::string default_out_dir() {
    const char* env = std::getenv("LQGLAB_OUT_DIR");
    return env ? std::string(env) : std::string();
}

int cmd_run(const std::string& config_path, long seed, int workers, std::string out_dir,
            const std::string& format) {
    lqg::ExperimentConfig config;
    try {
        config = lqg::config_from_file(config_path);
        if (seed >= 0) config.base_seed = static_cast<std::uint64_t>(seed);
        if (!out_dir.empty()) config.out_dir = out_dir;
        auto errs = config.validate();
        if (!errs.empty()) {
            for (const auto& e : errs) std::cerr << "config error: " << e << "\n";
            return kExitConfigError;
        }
    } catch (const lqg::ConfigError& e) {
        for (const auto& m : e.messages) std::cerr << "config error: " << m << "\n";
        return kExitConfigError;
    }

    lqg::RunReport report = lqg::run(config, workers);
    fs::create_directories(config.out_dir);
    std::string base = fs::path(config_path).stem().string();
    std::string report_path = (fs::path(config.out_dir) / (base + ".report.json")).string();
    lqg::write_report_atomic(report, report_path);
    std::cout << "report: " << report_path << "\n";
    if (format == "csv") {
        std::string csv_path = (fs::path(config.out_dir) / (base + ".summary.csv")).string();
        std::ofstream os(csv_path, std::ios::trunc);
        os << lqg::summarize_csv({report});
        std::cout << "summary: " << csv_path << "\n";
    }
    if (report.failed_samples > 0) {
        std::cerr << report.failed_samples << " sample(s) failed; see report\n";
        return kExitPartialFailure;
    }
    return kExitOk;
}

int cmd_summarize(const std::vector<std::string>& paths, const std::string& out) {
    std::vector<lqg::RunReport> reports;
    for (const auto& p : paths) {
        std::ifstream is(p);
        if (!is) {
            std::cerr << "cannot open report " << p << "\n";
            return kExitConfigError;
        }
        lqg::Json j;
        is >> j;
        reports.push_back(lqg::report_from_json(j));
    }
    std::string csv = lqg::summarize_csv(reports);
    if (out.empty()) {
        std::cout << csv;
    } else {
        std::ofstream os(out, std::ios::trunc);
        os << csv;
    }
    return kExitOk;
}

int cmd_validate(const std::string& config_path) {
    try {
        auto config = lqg::config_from_file(config_path);
        auto errs = config.validate();
        if (!errs.empty()) {
            for (const auto& e : errs) std::cerr << "config error: " << e << "\n";
            return kExitConfigError;
        }
    } catch (const lqg::ConfigError& e) {
        for (const auto& m : e.messages) std::cerr << "config error: " << m << "\n";
        return kExitConfigError;
    }
    std::cout << "config ok\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lqglab: lattice Liouville-quantum-gravity metric laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = default_out_dir(), format = "json", summary_out;
    std::vector<std::string> report_paths;
    long seed = -1;
    int workers = 1;

    auto* run_cmd = app.add_subcommand("run", "run an experiment campaign from a config file");
    run_cmd->add_option("config", config_path, "config JSON file")->required();
    run_cmd->add_option("--seed", seed, "override base_seed");
    run_cmd->add_option("--workers", workers, "worker thread count");
    run_cmd->add_option("--out-dir", out_dir, "output directory (or LQGLAB_OUT_DIR)");
    run_cmd->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

    auto* sum_cmd = app.add_subcommand("summarize", "aggregate reports into a CSV table");
    sum_cmd->add_option("reports", report_paths, "report JSON files")->required();
    sum_cmd->add_option("--out", summary_out, "output CSV file (stdout if omitted)");

    auto* val_cmd = app.add_subcommand("validate", "validate a config file");
    val_cmd->add_option("config", config_path, "config JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(config_path, seed, workers, out_dir, format);
        if (sum_cmd->parsed()) return cmd_summarize(report_paths, summary_out);
        if (val_cmd->parsed()) return cmd_validate(config_path);
    } catch (const lqg::ConfigError& e) {
        for (const auto& m : e.messages) std::cerr << "config error: " << m << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
