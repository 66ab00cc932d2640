#include "specsched/scheduler.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "specsched/noise.hpp"

namespace specsched {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

double GammaSchedule::at(int t) const {
    if (gamma0 <= 0.0) throw std::invalid_argument("GammaSchedule: gamma0 must be > 0");
    return sqrt_decay ? gamma0 / std::sqrt(static_cast<double>(t) + 1.0) : gamma0;
}

SamplingDistribution dual_step(const SamplingDistribution& lambda,
                               const std::vector<double>& loss_model,
                               const std::vector<double>& loss_ideal, double gamma) {
    lambda.validate();
    if (loss_model.size() != lambda.size() || loss_ideal.size() != lambda.size())
        throw std::invalid_argument("dual_step: loss vector length mismatch");
    if (!(gamma > 0.0)) throw std::invalid_argument("dual_step: gamma must be > 0");

    bool any_update = false;
    SamplingDistribution out;
    out.weights.resize(lambda.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        if (!(loss_ideal[i] > 0.0))
            throw std::invalid_argument("dual_step: non-positive ideal loss at index " +
                                        std::to_string(i));
        if (!std::isfinite(loss_model[i]) || loss_model[i] < 0.0)
            throw std::invalid_argument("dual_step: invalid model loss at index " +
                                        std::to_string(i));
        const double ratio = loss_model[i] / loss_ideal[i];
        double w = lambda.weights[i] + gamma * (ratio - 1.0);
        if (ratio != 1.0) any_update = true;
        if (w < 0.0) w = 0.0;  // dual feasibility
        out.weights[i] = w;
        sum += w;
    }
    if (!any_update) return lambda;  // exact fixed point, no renormalization drift
    if (sum <= 0.0)
        throw std::runtime_error("dual_step: all weights clamped to zero (step size too large)");
    for (auto& w : out.weights) w /= sum;
    return out;
}

GapSummary gap_report(const std::vector<double>& achieved_psnr,
                      const std::vector<double>& ideal_psnr) {
    if (achieved_psnr.size() != ideal_psnr.size())
        throw std::invalid_argument("gap_report: grid size mismatch");
    if (achieved_psnr.empty()) throw std::invalid_argument("gap_report: empty grids");
    GapSummary s;
    s.gap.resize(achieved_psnr.size());
    s.max_gap = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t i = 0; i < s.gap.size(); ++i) {
        s.gap[i] = ideal_psnr[i] - achieved_psnr[i];
        s.max_gap = std::max(s.max_gap, s.gap[i]);
        sum += s.gap[i];
    }
    s.mean_gap = sum / static_cast<double>(s.gap.size());
    double var = 0.0;
    for (double g : s.gap) {
        const double d = g - s.mean_gap;
        var += d * d;
    }
    s.std_gap = std::sqrt(var / static_cast<double>(s.gap.size()));
    return s;
}

AscentState run_adaptive(const SpecificationSpace& space, Learner& learner,
                         const std::vector<double>& ideal_psnr, int iterations,
                         const GammaSchedule& gamma, int inner_budget, bool warm_start) {
    if (iterations < 0) throw std::invalid_argument("run_adaptive: iterations must be >= 0");
    if (ideal_psnr.size() != space.grid_size())
        throw std::invalid_argument("run_adaptive: ideal table does not match grid");

    std::vector<double> loss_ideal(ideal_psnr.size());
    for (std::size_t i = 0; i < ideal_psnr.size(); ++i) {
        if (!std::isfinite(ideal_psnr[i]))
            throw std::invalid_argument("run_adaptive: non-finite ideal PSNR");
        loss_ideal[i] = loss_from_psnr(ideal_psnr[i]);
    }

    AscentState state;
    state.lambda = SamplingDistribution::uniform(space.grid_size());
    std::shared_ptr<const Model> prev;
    for (int t = 0; t < iterations; ++t) {
        const auto model = learner.fit(state.lambda, space, inner_budget,
                                       warm_start ? prev : std::shared_ptr<const Model>());
        if (!model) throw std::runtime_error("run_adaptive: learner returned no model");
        IterationRecord rec;
        rec.lambda = state.lambda;
        rec.model_psnr_db = model->psnr_grid(space);
        std::vector<double> loss_model(rec.model_psnr_db.size());
        for (std::size_t i = 0; i < rec.model_psnr_db.size(); ++i) {
            if (!std::isfinite(rec.model_psnr_db[i]))
                throw std::runtime_error("run_adaptive: non-finite model PSNR at iteration " +
                                         std::to_string(t));
            loss_model[i] = loss_from_psnr(rec.model_psnr_db[i]);
        }
        rec.gaps = gap_report(rec.model_psnr_db, ideal_psnr);
        state.lambda = dual_step(state.lambda, loss_model, loss_ideal, gamma.at(t));
        state.history.push_back(std::move(rec));
        state.t = t + 1;
        prev = model;
    }
    return state;
}

std::vector<double> uniform_baseline(const SpecificationSpace& space, Learner& learner,
                                     int inner_budget) {
    const auto lambda = SamplingDistribution::uniform(space.grid_size());
    const auto model = learner.fit(lambda, space, inner_budget, nullptr);
    if (!model) throw std::runtime_error("uniform_baseline: learner returned no model");
    auto psnr = model->psnr_grid(space);
    for (double v : psnr)
        if (!std::isfinite(v)) throw std::runtime_error("uniform_baseline: non-finite PSNR");
    return psnr;
}

void write_trajectory_csv(const std::string& path, const SpecificationSpace& space,
                          const AscentState& state, const std::vector<double>& ideal_psnr,
                          const std::vector<std::pair<std::string, std::string>>& metadata) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trajectory CSV: " + path);
    for (const auto& [k, v] : metadata) out << "# " << k << "=" << v << "\n";
    out << "iteration,index,sigma,alpha,beta,weight,model_psnr_db,ideal_psnr_db\n";
    for (std::size_t t = 0; t < state.history.size(); ++t) {
        const auto& rec = state.history[t];
        for (std::size_t i = 0; i < rec.lambda.size(); ++i) {
            const Specification s = space.spec_at(i);
            out << t << "," << i << "," << format_double(s.sigma) << ","
                << format_double(s.alpha) << "," << format_double(s.beta) << ","
                << format_double(rec.lambda.weights[i]) << ","
                << format_double(rec.model_psnr_db[i]) << "," << format_double(ideal_psnr[i])
                << "\n";
        }
    }
}

std::string gap_summary_json(const AscentState& state,
                             const std::vector<std::pair<std::string, std::string>>& metadata) {
    nlohmann::json j;
    for (const auto& [k, v] : metadata) j[k] = v;
    j["iterations"] = state.t;
    j["per_iteration"] = nlohmann::json::array();
    for (std::size_t t = 0; t < state.history.size(); ++t) {
        const auto& g = state.history[t].gaps;
        j["per_iteration"].push_back({{"iteration", t},
                                      {"max_gap", g.max_gap},
                                      {"mean_gap", g.mean_gap},
                                      {"std_gap", g.std_gap}});
    }
    if (!state.history.empty()) {
        const auto& g = state.history.back().gaps;
        j["final"] = {{"max_gap", g.max_gap},
                      {"mean_gap", g.mean_gap},
                      {"std_gap", g.std_gap},
                      {"gap", g.gap}};
    }
    return j.dump(2);
}

}  // namespace specsched
