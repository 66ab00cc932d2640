#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "specsched/space.hpp"

namespace specsched {

// Invalid configuration or arguments; the CLI maps this to exit code 1
// (runtime/protocol failures exit 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LearnerConfig {
    std::string kind = "shrinkage";  // shrinkage | oracle | external
    double s2 = 0.25;
    double m1 = 0.5;
    std::string data_dir;   // when set, moments of the images override s2/m1
    std::string workdir;    // external protocol directory
    double timeout_s = 60.0;
};

struct IdealConfig {
    std::string kind = "closed_form";  // closed_form | model
    std::string model_path;
};

// One JSON document drives a whole run; flags only pick the subcommand and
// override scalar fields. All randomness flows from `seed`.
struct RunConfig {
    std::uint64_t seed = 1;
    std::string output_dir = ".";

    std::vector<Dimension> dims;
    double speckle_B = 1024.0;

    LearnerConfig learner;
    IdealConfig ideal;

    int design_n_random = 10;
    double ridge = 1e-5;
    int degree = 2;

    int iterations = 50;
    double gamma = 0.1;
    bool gamma_decay = false;
    int inner_budget = 10;
    bool warm_start = true;

    int eval_patch_count = 16;
    int eval_n_draws = 10;
    int patch_size = 40;

    // Standard box: sigma in [0.02,0.66], alpha in [0.1,41], beta in [1,1024],
    // 10 geometric bins each, B = 1024.
    static RunConfig defaults();

    static RunConfig from_json_text(const std::string& text);
    static RunConfig load(const std::string& path);
    std::string to_json() const;

    // Every cross-field constraint; empty means valid.
    std::vector<std::string> violations() const;
    void validate() const;  // throws ConfigError listing all violations

    SpecificationSpace space() const;
    SpeckleConfig speckle() const;

    // FNV-1a hash of the canonical JSON serialization, as hex.
    std::string hash() const;
};

}  // namespace specsched
