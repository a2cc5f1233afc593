// entrance: batch front end. One subcommand per run, config file positional,
// any other --a.b value pair is a dotted override of the config.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "entrance/cli.hpp"

namespace {

// Turns leftover "--key value" / "--key=value" tokens into overrides.
bool collect_overrides(const std::vector<std::string>& extras,
                       std::vector<std::pair<std::string, std::string>>& out) {
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& tok = extras[i];
        if (tok.rfind("--", 0) != 0 || tok.size() < 3) {
            std::cerr << "unexpected argument '" << tok << "'\n";
            return false;
        }
        const std::string body = tok.substr(2);
        if (const auto eq = body.find('='); eq != std::string::npos) {
            out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
            continue;
        }
        if (i + 1 >= extras.size()) {
            std::cerr << "override '" << tok << "' needs a value\n";
            return false;
        }
        out.emplace_back(body, extras[++i]);
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entrance-boundary experiments for nonlinear branching processes"};
    app.require_subcommand(1);

    entrance::cli::RunOptions options;
    std::uint64_t seed = 0;
    std::string out_dir;
    unsigned workers = 1;

    for (const auto& name : entrance::cli::kCommands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->allow_extras();
        sub->add_option("config", options.config_path, "experiment config (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed; overrides sim.seed");
        sub->add_option("--workers", workers, "worker threads; never changes results")
            ->check(CLI::Range(1u, 1024u));
        sub->add_option("--out", out_dir, "output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : entrance::cli::kExitValidation;
    }

    CLI::App* sub = app.get_subcommands().front();
    options.command = sub->get_name();
    options.workers = workers;
    if (sub->count("--seed") > 0) options.seed = seed;
    if (sub->count("--out") > 0) options.out_dir = out_dir;
    if (!collect_overrides(sub->remaining(), options.overrides)) {
        return entrance::cli::kExitValidation;
    }
    return entrance::cli::execute(options, std::cerr);
}
