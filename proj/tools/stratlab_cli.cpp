#include <CLI11.hpp>

#include <iostream>

#include "stratlab/stratlab.hpp"

// Present when OpenBLAS is the BLAS in use.
extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace {

int list_experiments() {
    for (const auto& info : stratlab::experiment_catalog()) {
        std::cout << info.kind << "\n    " << info.summary << "\n    parameters:";
        if (info.params.empty()) std::cout << " (none)";
        for (const auto& p : info.params) std::cout << " " << p;
        std::cout << "\n";
    }
    std::cout << "every kind also accepts weight.kind, weight.alpha and family.* overrides\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stratlab: heat-semigroup and Sobolev-inequality experiments on stratified groups"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker threads for family members and BLAS")->check(CLI::PositiveNumber);

    std::string config_path;
    std::string output_dir;
    bool no_cache = false;
    auto* run_cmd = app.add_subcommand("run", "run every experiment in a config file");
    run_cmd->add_option("config", config_path, "config file")->required();
    run_cmd->add_option("--output-dir", output_dir, "directory for <id>.csv and <id>.summary.json");
    run_cmd->add_flag("--no-cache", no_cache, "ignore and do not write the eigendecomposition cache");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "check a config file without running it");
    validate_cmd->add_option("config", validate_path, "config file")->required();

    app.add_subcommand("list-experiments", "list experiment kinds and their parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    stratlab::worker_threads() = threads;
    if (openblas_set_num_threads) openblas_set_num_threads(threads);

    try {
        if (app.got_subcommand("list-experiments")) return list_experiments();
        if (app.got_subcommand("validate")) {
            const auto cfg = stratlab::load_config(validate_path);
            stratlab::validate_config(cfg);
            std::cout << validate_path << ": ok (" << cfg.experiments.size() << " experiments)\n";
            return 0;
        }
        const auto cfg = stratlab::load_config(config_path);
        stratlab::RunOptions opt;
        if (!output_dir.empty()) opt.output_dir = output_dir;
        opt.use_cache = !no_cache;
        opt.log = &std::cerr;
        const auto res = stratlab::run(cfg, opt);
        for (const auto& r : res.reports) std::cout << (r.pass() ? "PASS " : "FAIL ") << r.id << " (" << r.kind << ")\n";
        return res.all_pass() ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
