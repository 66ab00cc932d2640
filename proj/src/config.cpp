#include "specsched/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "specsched/landscape.hpp"

namespace specsched {

RunConfig RunConfig::defaults() {
    RunConfig c;
    c.dims = {{"sigma", 0.02, 0.66, 10, Spacing::Geometric},
              {"alpha", 0.1, 41.0, 10, Spacing::Geometric},
              {"beta", 1.0, 1024.0, 10, Spacing::Geometric}};
    return c;
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.output_dir = j.value("output_dir", c.output_dir);
        if (j.contains("space")) {
            const auto& sj = j.at("space");
            c.speckle_B = sj.value("speckle_B", c.speckle_B);
            for (const auto& dj : sj.at("dims")) {
                Dimension d;
                d.name = dj.at("name").get<std::string>();
                d.lower = dj.at("lower").get<double>();
                d.upper = dj.at("upper").get<double>();
                d.bins = dj.value("bins", 10);
                d.spacing = spacing_from_string(dj.value("spacing", std::string("geometric")));
                c.dims.push_back(d);
            }
        } else {
            c.dims = defaults().dims;
        }
        if (j.contains("learner")) {
            const auto& lj = j.at("learner");
            c.learner.kind = lj.value("kind", c.learner.kind);
            c.learner.s2 = lj.value("s2", c.learner.s2);
            c.learner.m1 = lj.value("m1", c.learner.m1);
            c.learner.data_dir = lj.value("data_dir", c.learner.data_dir);
            c.learner.workdir = lj.value("workdir", c.learner.workdir);
            c.learner.timeout_s = lj.value("timeout_s", c.learner.timeout_s);
        }
        if (j.contains("ideal")) {
            const auto& ij = j.at("ideal");
            c.ideal.kind = ij.value("kind", c.ideal.kind);
            c.ideal.model_path = ij.value("model_path", c.ideal.model_path);
        }
        if (j.contains("design")) c.design_n_random = j.at("design").value("n_random", 10);
        if (j.contains("fit")) {
            c.ridge = j.at("fit").value("ridge", c.ridge);
            c.degree = j.at("fit").value("degree", c.degree);
        }
        if (j.contains("ascent")) {
            const auto& aj = j.at("ascent");
            c.iterations = aj.value("iterations", c.iterations);
            c.gamma = aj.value("gamma", c.gamma);
            c.gamma_decay = aj.value("gamma_decay", c.gamma_decay);
            c.inner_budget = aj.value("inner_budget", c.inner_budget);
            c.warm_start = aj.value("warm_start", c.warm_start);
        }
        if (j.contains("eval")) {
            const auto& ej = j.at("eval");
            c.eval_patch_count = ej.value("patch_count", c.eval_patch_count);
            c.eval_n_draws = ej.value("n_draws", c.eval_n_draws);
            c.patch_size = ej.value("patch_size", c.patch_size);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string RunConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["space"]["speckle_B"] = speckle_B;
    j["space"]["dims"] = nlohmann::json::array();
    for (const auto& d : dims)
        j["space"]["dims"].push_back({{"name", d.name},
                                      {"lower", d.lower},
                                      {"upper", d.upper},
                                      {"bins", d.bins},
                                      {"spacing", to_string(d.spacing)}});
    j["learner"] = {{"kind", learner.kind},     {"s2", learner.s2},
                    {"m1", learner.m1},         {"data_dir", learner.data_dir},
                    {"workdir", learner.workdir}, {"timeout_s", learner.timeout_s}};
    j["ideal"] = {{"kind", ideal.kind}, {"model_path", ideal.model_path}};
    j["design"] = {{"n_random", design_n_random}};
    j["fit"] = {{"ridge", ridge}, {"degree", degree}};
    j["ascent"] = {{"iterations", iterations},
                   {"gamma", gamma},
                   {"gamma_decay", gamma_decay},
                   {"inner_budget", inner_budget},
                   {"warm_start", warm_start}};
    j["eval"] = {{"patch_count", eval_patch_count},
                 {"n_draws", eval_n_draws},
                 {"patch_size", patch_size}};
    return j.dump(2);
}

std::vector<std::string> RunConfig::violations() const {
    std::vector<std::string> v;
    if (dims.empty()) v.push_back("space.dims: at least one dimension required");
    std::size_t ncorners = 1;
    for (const auto& d : dims) {
        if (!(d.lower < d.upper))
            v.push_back("space.dims." + d.name + ": lower must be < upper");
        if (d.bins < 2) v.push_back("space.dims." + d.name + ": bins must be >= 2");
        if (d.spacing == Spacing::Geometric && d.lower <= 0.0)
            v.push_back("space.dims." + d.name + ": geometric spacing needs lower > 0");
        if (d.name != "sigma" && d.name != "alpha" && d.name != "beta")
            v.push_back("space.dims." + d.name + ": name must be sigma, alpha, or beta");
        if (d.name == "sigma" && d.lower < 0.0)
            v.push_back("space.dims.sigma: lower must be >= 0");
        if (d.name == "alpha" && d.lower <= 0.0)
            v.push_back("space.dims.alpha: lower must be > 0");
        if (d.name == "beta" && (d.lower < 1.0 || d.upper > speckle_B))
            v.push_back("space.dims.beta: range must lie in [1, B]");
        ncorners *= 2;
    }
    if (speckle_B < 1.0) v.push_back("space.speckle_B: must be >= 1");
    if (!dims.empty()) {
        const int needed = min_samples(static_cast<int>(dims.size()));
        if (design_n_random < 0) v.push_back("design.n_random: must be >= 0");
        if (static_cast<int>(ncorners) + design_n_random < needed)
            v.push_back("design: corners + n_random = " +
                        std::to_string(ncorners + design_n_random) + " samples, need at least " +
                        std::to_string(needed));
    }
    if (learner.kind != "shrinkage" && learner.kind != "oracle" && learner.kind != "external")
        v.push_back("learner.kind: must be shrinkage, oracle, or external");
    if (learner.kind == "shrinkage" && learner.data_dir.empty() && !(learner.s2 > 0.0))
        v.push_back("learner.s2: must be > 0");
    if (learner.kind == "external" && learner.workdir.empty())
        v.push_back("learner.workdir: required for the external learner");
    if (learner.timeout_s <= 0.0) v.push_back("learner.timeout_s: must be > 0");
    if (ideal.kind != "closed_form" && ideal.kind != "model")
        v.push_back("ideal.kind: must be closed_form or model");
    if (ideal.kind == "model" && ideal.model_path.empty())
        v.push_back("ideal.model_path: required when ideal.kind is model");
    if (ideal.kind == "closed_form" && learner.kind == "external")
        v.push_back("ideal.kind: closed_form requires an analytic learner config (shrinkage)");
    if (ridge < 0.0) v.push_back("fit.ridge: must be >= 0");
    if (degree != 1 && degree != 2) v.push_back("fit.degree: must be 1 or 2");
    if (iterations < 0) v.push_back("ascent.iterations: must be >= 0");
    if (!(gamma > 0.0)) v.push_back("ascent.gamma: must be > 0");
    if (inner_budget < 1) v.push_back("ascent.inner_budget: must be >= 1");
    if (eval_patch_count < 1) v.push_back("eval.patch_count: must be >= 1");
    if (eval_n_draws < 1) v.push_back("eval.n_draws: must be >= 1");
    if (patch_size < 1) v.push_back("eval.patch_size: must be >= 1");
    return v;
}

void RunConfig::validate() const {
    const auto v = violations();
    if (v.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& s : v) msg += "\n  - " + s;
    throw ConfigError(msg);
}

SpecificationSpace RunConfig::space() const { return SpecificationSpace(dims); }

SpeckleConfig RunConfig::speckle() const { return SpeckleConfig{speckle_B}; }

std::string RunConfig::hash() const {
    const std::string text = to_json();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace specsched
