#include "specsched/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "specsched/data.hpp"
#include "specsched/landscape.hpp"
#include "specsched/learners.hpp"
#include "specsched/scheduler.hpp"

namespace fs = std::filesystem;

namespace specsched::commands {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// (S2, m1) either straight from the config or measured on the data directory.
std::pair<double, double> resolve_moments(const RunConfig& cfg) {
    if (cfg.learner.data_dir.empty()) return {cfg.learner.s2, cfg.learner.m1};
    const ImageDataset ds = load_images(cfg.learner.data_dir);
    const Moments m = moments(ds.images);
    return {m.S2, m.m1};
}

void check_hash(const RunConfig& cfg,
                const std::vector<std::pair<std::string, std::string>>& metadata,
                const std::string& what) {
    for (const auto& [k, v] : metadata)
        if (k == "config" && v != cfg.hash())
            throw ConfigError(what + " was produced under a different config (hash " + v +
                              " vs " + cfg.hash() + ")");
}

void ensure_output_dir(const RunConfig& cfg) {
    if (!cfg.output_dir.empty()) fs::create_directories(cfg.output_dir);
}

std::unique_ptr<Learner> make_learner(const RunConfig& cfg) {
    if (cfg.learner.kind == "shrinkage") {
        const auto [s2, m1] = resolve_moments(cfg);
        return std::make_unique<ShrinkageLearner>(s2, m1, cfg.speckle());
    }
    if (cfg.learner.kind == "oracle")
        return std::make_unique<OracleLearner>(ideal_psnr_table(cfg));
    if (cfg.learner.kind == "external") {
        ExternalProtocolConfig pc;
        pc.workdir = cfg.learner.workdir;
        pc.timeout_s = cfg.learner.timeout_s;
        return std::make_unique<ExternalLearner>(pc);
    }
    throw ConfigError("unknown learner kind: " + cfg.learner.kind);
}

void check_model_grid(const RunConfig& cfg, const QuadraticModel& model) {
    const auto& md = model.dims();
    const auto& cd = cfg.dims;
    bool ok = md.size() == cd.size();
    for (std::size_t i = 0; ok && i < md.size(); ++i)
        ok = md[i].name == cd[i].name && md[i].lower == cd[i].lower &&
             md[i].upper == cd[i].upper && md[i].spacing == cd[i].spacing;
    if (!ok) throw ConfigError("ideal model dimensions do not match the configured space");
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace

std::vector<double> ideal_psnr_table(const RunConfig& cfg) {
    const SpecificationSpace space = cfg.space();
    std::vector<double> table(space.grid_size());
    if (cfg.ideal.kind == "closed_form") {
        const auto [s2, m1] = resolve_moments(cfg);
        const SpeckleConfig sc = cfg.speckle();
        for (std::size_t i = 0; i < table.size(); ++i)
            table[i] = psnr_from_loss(shrinkage_ideal(space.spec_at(i), s2, m1, sc).loss_star);
        return table;
    }
    const QuadraticModel model = QuadraticModel::load(cfg.ideal.model_path);
    check_model_grid(cfg, model);
    for (std::size_t i = 0; i < table.size(); ++i)
        table[i] = model.predict(space.point(i)).value;
    return table;
}

void landscape(const RunConfig& cfg, const std::string& out_csv) {
    cfg.validate();
    if (cfg.learner.kind != "shrinkage")
        throw ConfigError("cmd landscape needs an analytic learner (shrinkage) to define the "
                          "ideal per specification");
    ensure_output_dir(cfg);
    const SpecificationSpace space = cfg.space();
    const auto [s2, m1] = resolve_moments(cfg);
    const SpeckleConfig sc = cfg.speckle();

    RandomStream rng = RandomStream::derive(cfg.seed, 0xde51);
    const auto design = sparse_design(space, cfg.design_n_random, rng);

    // Idempotent re-runs: rows already in the file are kept as-is.
    std::map<std::string, LandscapeSample> existing;
    if (fs::exists(out_csv)) {
        check_hash(cfg, read_csv_metadata(out_csv), out_csv);
        for (auto& s : read_landscape_csv(out_csv)) {
            const std::string key = format_double(s.theta.sigma) + "|" +
                                    format_double(s.theta.alpha) + "|" +
                                    format_double(s.theta.beta);
            existing.emplace(key, std::move(s));
        }
    }

    std::vector<LandscapeSample> rows;
    int computed = 0;
    for (std::size_t idx : design) {
        const Specification theta = space.spec_at(idx);
        const std::string key = format_double(theta.sigma) + "|" + format_double(theta.alpha) +
                                "|" + format_double(theta.beta);
        if (auto it = existing.find(key); it != existing.end()) {
            rows.push_back(it->second);
            continue;
        }
        LandscapeSample s;
        s.theta = theta;
        s.psnr_db = psnr_from_loss(shrinkage_ideal(theta, s2, m1, sc).loss_star);
        s.n_eval = 1;  // closed form
        s.seed = cfg.seed;
        s.source = "ideal";
        rows.push_back(std::move(s));
        ++computed;
    }
    if (computed > 0 || !fs::exists(out_csv))
        write_landscape_csv(out_csv, rows, {{"config", cfg.hash()}});
    std::cout << "landscape: " << rows.size() << " design points (" << computed
              << " newly computed) -> " << out_csv << "\n";
}

void fit(const RunConfig& cfg, const std::string& samples_csv, const std::string& out_model,
         const std::string& out_report) {
    cfg.validate();
    ensure_output_dir(cfg);
    const SpecificationSpace space = cfg.space();
    check_hash(cfg, read_csv_metadata(samples_csv), samples_csv);
    const auto samples = read_landscape_csv(samples_csv);
    const int needed = min_samples(static_cast<int>(space.ndims()));
    if (static_cast<int>(samples.size()) < needed)
        throw ConfigError("fit: " + samples_csv + " has " + std::to_string(samples.size()) +
                          " rows, need >= " + std::to_string(needed));

    const QuadraticModel model = fit_quadratic(space, samples, cfg.ridge, cfg.degree);

    std::vector<std::vector<double>> points;
    std::vector<double> values;
    for (const auto& s : samples) {
        points.push_back(sample_coords(space, s));
        values.push_back(s.psnr_db);
    }
    double max_abs_residual = 0.0, max_rel_residual = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double r = std::fabs(model.predict(points[i]).value - values[i]);
        max_abs_residual = std::max(max_abs_residual, r);
        max_rel_residual = std::max(max_rel_residual, r / std::max(1e-300, std::fabs(values[i])));
    }
    const auto cv = cross_validate(space.dims(), points, values, {cfg.degree}, {cfg.ridge});

    auto mj = nlohmann::json::parse(model.to_json());
    mj["config_hash"] = cfg.hash();
    {
        std::ofstream out(out_model);
        if (!out) throw std::runtime_error("cannot write " + out_model);
        out << mj.dump(2) << "\n";
    }
    nlohmann::json rj = {{"config", cfg.hash()},
                         {"n_samples", samples.size()},
                         {"degree", cfg.degree},
                         {"ridge", cfg.ridge},
                         {"max_abs_residual", max_abs_residual},
                         {"max_rel_residual", max_rel_residual},
                         {"mean_loo_error", cv.mean_heldout_error}};
    {
        std::ofstream out(out_report);
        if (!out) throw std::runtime_error("cannot write " + out_report);
        out << rj.dump(2) << "\n";
    }
    std::cout << "fit: degree " << cfg.degree << ", ridge " << cfg.ridge
              << ", max rel residual " << max_rel_residual << " -> " << out_model << "\n";
}

void adapt(const RunConfig& cfg, const std::string& out_trajectory,
           const std::string& out_summary) {
    cfg.validate();
    ensure_output_dir(cfg);
    const SpecificationSpace space = cfg.space();
    const auto ideal = ideal_psnr_table(cfg);
    const auto learner = make_learner(cfg);
    const GammaSchedule gamma{cfg.gamma, cfg.gamma_decay};

    const AscentState state = run_adaptive(space, *learner, ideal, cfg.iterations, gamma,
                                           cfg.inner_budget, cfg.warm_start);

    write_trajectory_csv(out_trajectory, space, state, ideal, {{"config", cfg.hash()}});
    {
        std::ofstream out(out_summary);
        if (!out) throw std::runtime_error("cannot write " + out_summary);
        out << gap_summary_json(state, {{"config", cfg.hash()}}) << "\n";
    }
    if (!state.history.empty()) {
        const auto& g = state.history.back().gaps;
        std::cout << "adapt: " << state.t << " iterations, final max gap " << g.max_gap
                  << " dB, std " << g.std_gap << " dB -> " << out_summary << "\n";
    } else {
        std::cout << "adapt: 0 iterations requested; wrote empty history\n";
    }
}

void baseline(const RunConfig& cfg, const std::string& out_csv, const std::string& out_summary) {
    cfg.validate();
    ensure_output_dir(cfg);
    const SpecificationSpace space = cfg.space();
    const auto ideal = ideal_psnr_table(cfg);
    const auto learner = make_learner(cfg);
    const auto psnr = uniform_baseline(space, *learner, cfg.inner_budget);
    const GapSummary gaps = gap_report(psnr, ideal);

    std::ofstream out(out_csv);
    if (!out) throw std::runtime_error("cannot write " + out_csv);
    out << "# config=" << cfg.hash() << "\n";
    out << "index,sigma,alpha,beta,psnr_db,ideal_psnr_db,gap_db\n";
    for (std::size_t i = 0; i < psnr.size(); ++i) {
        const Specification s = space.spec_at(i);
        out << i << "," << format_double(s.sigma) << "," << format_double(s.alpha) << ","
            << format_double(s.beta) << "," << format_double(psnr[i]) << ","
            << format_double(ideal[i]) << "," << format_double(gaps.gap[i]) << "\n";
    }
    nlohmann::json j = {{"config", cfg.hash()},
                        {"final",
                         {{"max_gap", gaps.max_gap},
                          {"mean_gap", gaps.mean_gap},
                          {"std_gap", gaps.std_gap},
                          {"gap", gaps.gap}}}};
    std::ofstream sout(out_summary);
    if (!sout) throw std::runtime_error("cannot write " + out_summary);
    sout << j.dump(2) << "\n";
    std::cout << "baseline: max gap " << gaps.max_gap << " dB, std " << gaps.std_gap
              << " dB -> " << out_csv << "\n";
}

void report(const std::string& adapt_summary, const std::string& baseline_summary,
            const std::string& out_report) {
    const auto aj = read_json_file(adapt_summary);
    const auto bj = read_json_file(baseline_summary);
    const std::string ah = aj.value("config", std::string());
    const std::string bh = bj.value("config", std::string());
    if (ah.empty() || bh.empty() || ah != bh)
        throw ConfigError("report: config hashes disagree (" + ah + " vs " + bh + ")");
    const auto& af = aj.at("final");
    const auto& bf = bj.at("final");
    nlohmann::json j = {{"config", ah},
                        {"adaptive", af},
                        {"baseline", bf},
                        {"std_gap_ratio",
                         af.at("std_gap").get<double>() / bf.at("std_gap").get<double>()},
                        {"max_gap_ratio",
                         af.at("max_gap").get<double>() / bf.at("max_gap").get<double>()}};
    std::ofstream out(out_report);
    if (!out) throw std::runtime_error("cannot write " + out_report);
    out << j.dump(2) << "\n";
    std::cout << "report: std gap ratio " << j["std_gap_ratio"] << ", max gap ratio "
              << j["max_gap_ratio"] << " -> " << out_report << "\n";
}

}  // namespace specsched::commands
