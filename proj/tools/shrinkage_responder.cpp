// Reference responder for the external-learner file protocol: serves each
// lambda_<t>.csv request with the shrinkage family's closed-form per-theta
// PSNRs. An out-of-process trainer replaces this with real training.

#include <CLI11.hpp>

#include <iostream>

#include "specsched/config.hpp"
#include "specsched/learners.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Shrinkage closed-form responder for the external-learner protocol"};
    std::string config_path, workdir;
    int iterations = 50;
    double timeout_s = 120.0;
    app.add_option("-c,--config", config_path, "Run configuration JSON (defines the grid)")
        ->required();
    app.add_option("--workdir", workdir, "Protocol work directory")->required();
    app.add_option("--iterations", iterations, "Number of requests to serve");
    app.add_option("--timeout", timeout_s, "Seconds to wait for each request");
    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = specsched::RunConfig::load(config_path);
        cfg.validate();
        specsched::ExternalProtocolConfig pc;
        pc.workdir = workdir;
        pc.timeout_s = timeout_s;
        specsched::run_shrinkage_responder(pc, cfg.space(), cfg.learner.s2, cfg.learner.m1,
                                           cfg.speckle(), iterations);
        return 0;
    } catch (const specsched::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}
