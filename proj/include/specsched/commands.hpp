#pragma once

#include <string>
#include <vector>

#include "specsched/config.hpp"

namespace specsched::commands {

// Subcommand bodies shared by the CLI and the test suites. ConfigError means
// bad input (exit 1); any other exception is a runtime failure (exit 2).

// Ideal PSNR at each design point of the sparse design -> landscape CSV.
// Re-runs skip rows that are already present.
void landscape(const RunConfig& cfg, const std::string& out_csv);

// Landscape CSV -> fitted model JSON plus a leave-one-out error report.
void fit(const RunConfig& cfg, const std::string& samples_csv, const std::string& out_model,
         const std::string& out_report);

// Dual-ascent run -> lambda trajectory CSV + gap summary JSON.
void adapt(const RunConfig& cfg, const std::string& out_trajectory,
           const std::string& out_summary);

// Single uniform fit -> per-grid-point PSNR CSV + gap summary JSON.
void baseline(const RunConfig& cfg, const std::string& out_csv, const std::string& out_summary);

// Adaptive-vs-baseline comparison; refuses summaries whose config hashes
// disagree.
void report(const std::string& adapt_summary, const std::string& baseline_summary,
            const std::string& out_report);

// Per-grid-point ideal PSNR, either from the closed form or a fitted model.
std::vector<double> ideal_psnr_table(const RunConfig& cfg);

}  // namespace specsched::commands
