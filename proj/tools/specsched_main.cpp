#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "specsched/commands.hpp"
#include "specsched/config.hpp"

namespace fs = std::filesystem;
using specsched::ConfigError;
using specsched::RunConfig;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> iterations;
    std::optional<double> gamma;
    std::optional<double> ridge;
    std::optional<int> degree;
    std::optional<int> n_random;
    std::optional<std::string> output_dir;

    void apply(RunConfig& cfg) const {
        if (seed) cfg.seed = *seed;
        if (iterations) cfg.iterations = *iterations;
        if (gamma) cfg.gamma = *gamma;
        if (ridge) cfg.ridge = *ridge;
        if (degree) cfg.degree = *degree;
        if (n_random) cfg.design_n_random = *n_random;
        if (output_dir) cfg.output_dir = *output_dir;
    }
};

std::string in_outdir(const RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.output_dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive training-distribution scheduling over noise-specification spaces"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    app.add_option("-c,--config", config_path, "Run configuration JSON");
    app.add_option("--seed", ov.seed, "Override config seed");
    app.add_option("--iterations", ov.iterations, "Override ascent iterations");
    app.add_option("--gamma", ov.gamma, "Override dual-ascent step size");
    app.add_option("--ridge", ov.ridge, "Override fit ridge");
    app.add_option("--degree", ov.degree, "Override fit degree");
    app.add_option("--n-random", ov.n_random, "Override design random point count");
    app.add_option("--output-dir", ov.output_dir, "Override output directory");

    auto* c_landscape = app.add_subcommand("landscape", "Sample the ideal landscape");
    std::string landscape_out;
    c_landscape->add_option("--out", landscape_out, "Output CSV");

    auto* c_fit = app.add_subcommand("fit", "Fit a polynomial landscape model");
    std::string fit_samples, fit_out, fit_report;
    c_fit->add_option("--samples", fit_samples, "Landscape CSV");
    c_fit->add_option("--out", fit_out, "Model JSON output");
    c_fit->add_option("--report", fit_report, "Leave-one-out report JSON output");

    auto* c_adapt = app.add_subcommand("adapt", "Run the dual-ascent scheduler");
    std::string adapt_traj, adapt_summary, adapt_ideal;
    c_adapt->add_option("--ideal-model", adapt_ideal, "Ideal landscape model JSON");
    c_adapt->add_option("--trajectory", adapt_traj, "Trajectory CSV output");
    c_adapt->add_option("--summary", adapt_summary, "Gap summary JSON output");

    auto* c_baseline = app.add_subcommand("baseline", "Single uniform-sampling fit");
    std::string base_csv, base_summary, base_ideal;
    c_baseline->add_option("--ideal-model", base_ideal, "Ideal landscape model JSON");
    c_baseline->add_option("--out", base_csv, "Per-grid-point PSNR CSV output");
    c_baseline->add_option("--summary", base_summary, "Gap summary JSON output");

    auto* c_report = app.add_subcommand("report", "Compare adaptive and baseline summaries");
    std::string rep_adapt, rep_base, rep_out;
    c_report->add_option("--adapt", rep_adapt, "Adaptive gap summary JSON")->required();
    c_report->add_option("--baseline", rep_base, "Baseline gap summary JSON")->required();
    c_report->add_option("--out", rep_out, "Report JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;  // bad arguments share the config exit code
    }

    try {
        if (c_report->parsed()) {
            specsched::commands::report(rep_adapt, rep_base,
                                        rep_out.empty() ? "report.json" : rep_out);
            return 0;
        }
        RunConfig cfg = config_path.empty() ? RunConfig::defaults() : RunConfig::load(config_path);
        ov.apply(cfg);
        if (!adapt_ideal.empty() || !base_ideal.empty()) {
            cfg.ideal.kind = "model";
            cfg.ideal.model_path = adapt_ideal.empty() ? base_ideal : adapt_ideal;
        }

        if (c_landscape->parsed()) {
            specsched::commands::landscape(
                cfg, landscape_out.empty() ? in_outdir(cfg, "landscape.csv") : landscape_out);
        } else if (c_fit->parsed()) {
            specsched::commands::fit(
                cfg, fit_samples.empty() ? in_outdir(cfg, "landscape.csv") : fit_samples,
                fit_out.empty() ? in_outdir(cfg, "model.json") : fit_out,
                fit_report.empty() ? in_outdir(cfg, "fit_report.json") : fit_report);
        } else if (c_adapt->parsed()) {
            specsched::commands::adapt(
                cfg, adapt_traj.empty() ? in_outdir(cfg, "trajectory.csv") : adapt_traj,
                adapt_summary.empty() ? in_outdir(cfg, "adapt_summary.json") : adapt_summary);
        } else if (c_baseline->parsed()) {
            specsched::commands::baseline(
                cfg, base_csv.empty() ? in_outdir(cfg, "baseline.csv") : base_csv,
                base_summary.empty() ? in_outdir(cfg, "baseline_summary.json") : base_summary);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}
