#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "tfi/config.hpp"
#include "tfi/experiment.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::string out;
    bool fast = false;
    bool emit_bounds = false;
};

void add_flags(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config, "experiment config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
    cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::Range(1U, 1024U));
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_flag("--fast", f.fast, "cap ensembles at 200 samples per size");
    cmd->add_flag("--emit-bounds", f.emit_bounds, "also write analytic bound overlays");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Disorder-averaged gaps and correlations of transverse-field Ising chains"};
    app.require_subcommand(1);
    Flags flags;
    for (auto kind : {tfi::ExperimentKind::gap_scaling, tfi::ExperimentKind::z_vs_s, tfi::ExperimentKind::correlation,
                      tfi::ExperimentKind::bounds_check, tfi::ExperimentKind::oracle_check})
        add_flags(app.add_subcommand(tfi::to_string(kind)), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : tfi::kExitUsage;
    }

    const auto kind = *tfi::parse_experiment_kind(app.get_subcommands().front()->get_name());
    try {
        tfi::ExperimentConfig config = flags.config.empty() ? tfi::ExperimentConfig{} : tfi::load_config(flags.config);
        if (flags.seed)
            config.seed = flags.seed;
        if (flags.workers)
            config.workers = *flags.workers;
        config.fast = config.fast || flags.fast;
        config.emit_bounds = config.emit_bounds || flags.emit_bounds;
        const std::string origin = flags.config.empty() ? "<defaults>" : flags.config;
        tfi::finalize_config(config, kind, origin);

        std::string out = "out";
        if (!config.out.empty())
            out = config.out;
        if (const char* env = std::getenv("TFI_OUT_DIR"); env && *env)
            out = env;
        if (!flags.out.empty())
            out = flags.out;

        const tfi::RunResult r = tfi::run_experiment(config, out, std::cerr);
        std::cout << tfi::to_string(kind) << ": " << r.message << " (" << r.artifacts.size() << " files in " << out
                  << ")\n";
        return r.exit_code;
    } catch (const tfi::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return tfi::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return tfi::kExitFailure;
    }
}
