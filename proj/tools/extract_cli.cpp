// extract_cli: solve | verify | simulate | sweep | oracle
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "extraction/commands.hpp"
#include "extraction/config.hpp"
#include "extraction/errors.hpp"

using namespace extraction;

int main(int argc, char** argv) {
    CLI::App app{"Finite-fuel extraction under price impact: boundary solver, checks and simulation"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string format;
    bool dump_config = false;
    app.add_option("--config", config_path, "INI configuration file (defaults apply when omitted)");
    app.add_option("--out", out_dir, "Output directory (overrides EXTRACT_OUT_DIR and [output] dir)");
    app.add_option("--seed", seed, "Base seed (overrides EXTRACT_SEED and [sim] seed)");
    app.add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--print-config", dump_config, "Print a configuration with every default and exit");

    auto* solve = app.add_subcommand("solve", "Critical prices, boundary table and value surface");
    auto* verify = app.add_subcommand("verify", "HJB, smooth-fit and invariant checks");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo payoff of a policy");
    auto* sweep = app.add_subcommand("sweep", "Boundary comparative statics");
    auto* oracle = app.add_subcommand("oracle", "Finite-difference cross-check");

    std::optional<double> x, y;
    bool dominance = false;
    simulate->add_option("--x", x, "Initial price");
    simulate->add_option("--y", y, "Initial reserve");
    simulate->add_flag("--dominance", dominance, "Compare against shifted boundaries and immediate depletion");

    std::string parameter;
    std::vector<double> values;
    sweep->add_option("--parameter", parameter, "a, sigma or b")->check(CLI::IsMember({"a", "sigma", "b"}));
    sweep->add_option("--values", values, "Parameter values")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kConfigError;
    }

    if (dump_config) {
        std::cout << config::default_config_text();
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return cli::kConfigError;
    }

    config::RunConfig cfg;
    try {
        if (config_path.empty()) {
            std::istringstream in(config::default_config_text());
            cfg = config::parse_config(in);
        } else {
            cfg = config::load_config(config_path);
        }
        config::apply_environment(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kConfigError;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::kConfigError;
    }
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    if (seed) cfg.sim.sim.base_seed = *seed;
    if (!format.empty()) cfg.output.format = format;
    if (x) cfg.sim.x = *x;
    if (y) cfg.sim.y = *y;
    if (dominance) cfg.sim.dominance = true;
    if (!parameter.empty()) cfg.sweep.parameter = parameter;
    if (!values.empty()) cfg.sweep.values = values;

    const std::string command = app.get_subcommands().front()->get_name();
    (void)solve;
    (void)verify;
    (void)oracle;
    return cli::run(command, cfg, std::cout, std::cerr);
}
