// optrace — command-line front end for the trace-formula verification lab.
//
//   optrace <command> --config <path> [--out <path>] [--format csv|json]
//                     [--allow-large-k]
//
// Commands: check, spectrum, theorem21, identities, remainder, verify.
// The config file is JSON; command-line flags override its out/format/
// allow_large_k fields. Exit codes: 0 success (warnings included), 1 config
// error, 2 numerical guard tripped, 3 anything else.

#include "optrace/optrace.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Operator trace-formula verification laboratory"};
    app.require_subcommand(1);

    const std::vector<std::string> commands = {"check",      "spectrum",  "theorem21",
                                               "identities", "remainder", "verify"};
    const std::map<std::string, std::string> blurbs = {
        {"check", "evaluate the potential hypothesis diagnostics"},
        {"spectrum", "emit clustered eigenvalues of the truncated operator"},
        {"theorem21", "compare the three coefficient routes per (p, j)"},
        {"identities", "exercise the integration-by-parts cascade and boundary sum"},
        {"remainder", "tabulate the order-N remainder against p"},
        {"verify", "run the full trace-formula convergence verification"}};

    std::map<std::string, std::string> config_paths;
    std::map<std::string, std::string> out_overrides;
    std::map<std::string, std::string> format_overrides;
    std::map<std::string, bool> large_k_flags;
    for (const std::string& name : commands) {
        CLI::App* sub = app.add_subcommand(name, blurbs.at(name));
        sub->add_option("--config", config_paths[name], "JSON run configuration")->required();
        sub->add_option("--out", out_overrides[name], "report destination (overrides config)");
        sub->add_option("--format", format_overrides[name], "csv or json (overrides config)")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_flag("--allow-large-k", large_k_flags[name], "permit k > 4");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string name = app.get_subcommands().front()->get_name();

    try {
        // --allow-large-k must be visible before validation, so patch the
        // parsed JSON rather than the finished config.
        nlohmann::json j;
        {
            std::ifstream in(config_paths[name]);
            if (!in) throw optrace::ConfigError("config: cannot open " + config_paths[name]);
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw optrace::ConfigError(std::string("config: invalid JSON: ") + e.what());
            }
        }
        if (j.is_object()) {
            if (!j.contains("command")) j["command"] = name;
            if (large_k_flags[name]) j["allow_large_k"] = true;
            if (!out_overrides[name].empty()) j["out"] = out_overrides[name];
            if (!format_overrides[name].empty()) j["format"] = format_overrides[name];
        }
        optrace::RunConfig config = optrace::parse_config(j);
        if (config.command != name)
            throw optrace::ConfigError("config: command: file says '" + config.command +
                                       "' but the CLI invoked '" + name + "'");
        optrace::run(config);
        return 0;
    } catch (const optrace::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const optrace::PoleProximityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const optrace::ClusteringError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const optrace::SymmetryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
