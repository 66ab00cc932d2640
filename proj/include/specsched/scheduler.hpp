#pragma once

#include <string>
#include <utility>
#include <vector>

#include "specsched/learners.hpp"
#include "specsched/sampling.hpp"
#include "specsched/space.hpp"

namespace specsched {

struct GammaSchedule {
    double gamma0 = 0.1;
    bool sqrt_decay = false;  // gamma0 / sqrt(t+1) when set

    double at(int t) const;
};

// One dual-ascent update on MSE-domain losses:
//   lambda + gamma * (L_f / L_ideal - 1), clamped at 0, renormalized.
// Returns the input unchanged when the model matches the ideal everywhere.
SamplingDistribution dual_step(const SamplingDistribution& lambda,
                               const std::vector<double>& loss_model,
                               const std::vector<double>& loss_ideal, double gamma);

struct GapSummary {
    std::vector<double> gap;  // ideal PSNR - achieved PSNR, per grid point
    double max_gap = 0.0;
    double mean_gap = 0.0;
    double std_gap = 0.0;
};

GapSummary gap_report(const std::vector<double>& achieved_psnr,
                      const std::vector<double>& ideal_psnr);

struct IterationRecord {
    SamplingDistribution lambda;        // distribution the fit used
    std::vector<double> model_psnr_db;  // per grid point, after the fit
    GapSummary gaps;
};

struct AscentState {
    int t = 0;
    SamplingDistribution lambda;  // current (post-update) distribution
    std::vector<IterationRecord> history;
};

// Dual-ascent loop: fit under lambda, evaluate per grid point, update lambda.
// lambda^0 is uniform. Returns the full history (length = iterations).
AscentState run_adaptive(const SpecificationSpace& space, Learner& learner,
                         const std::vector<double>& ideal_psnr, int iterations,
                         const GammaSchedule& gamma, int inner_budget, bool warm_start = true);

// Single fit under the uniform distribution; per-grid-point PSNR.
std::vector<double> uniform_baseline(const SpecificationSpace& space, Learner& learner,
                                     int inner_budget);

// Trajectory CSV: iteration, index, sigma, alpha, beta, weight,
// model_psnr_db, ideal_psnr_db.
void write_trajectory_csv(const std::string& path, const SpecificationSpace& space,
                          const AscentState& state, const std::vector<double>& ideal_psnr,
                          const std::vector<std::pair<std::string, std::string>>& metadata = {});

// Per-iteration max/mean/std gap plus final per-point gaps, as JSON.
std::string gap_summary_json(const AscentState& state,
                             const std::vector<std::pair<std::string, std::string>>& metadata = {});

}  // namespace specsched
