#include <CLI11.hpp>
#include <iostream>
#include <map>

#include "cli/cli.hpp"
#include "ume/errors.hpp"

namespace ume::cli {
namespace {

struct Flags {
    int n_dim = 0;
    std::uint64_t replicas = 0, seed = 0;
    std::string out_dir, config;
    std::vector<std::string> formats, params;
    int workers = 0;
    std::map<std::string, CLI::Option*> opts;
};

const char* describe(const std::string& cmd) {
    static const std::map<std::string, const char*> d{
        {"moments", "sampled trace moments against exact values (kind=ume) or the GUE recurrence (kind=gue)"},
        {"density", "eigenvalue histogram with the mean density, semicircle and finite-N GUE curves"},
        {"formfactor", "spectral form factor of Ramanujan replicas against the GUE curve"},
        {"walks", "non-backtracking walk enumeration against operator traces and sampled means"},
        {"bass", "Bass identity residual sweep"},
        {"brownian", "drift, diffusion and remainder decay of the phase Brownian motion"},
        {"gaussianity", "moments and Wasserstein distances of centered Chebyshev traces"}};
    return d.at(cmd);
}

// key=value; the value is parsed as JSON when possible and kept as a string otherwise.
void apply_param(json& params, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + kv + "'");
    const auto key = kv.substr(0, eq), value = kv.substr(eq + 1);
    params[key] = json::parse(value, nullptr, false).is_discarded() ? json(value) : json::parse(value);
}

}  // namespace

int main_entry(int argc, char** argv) {
    CLI::App app{"ume-lab: experiments on the uni-modular random-matrix ensemble"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1, 1);
    std::map<std::string, Flags> flags;
    for (const auto& name : command_names()) {
        auto* sub = app.add_subcommand(name, describe(name));
        auto& f = flags[name];
        f.opts["n_dim"] = sub->add_option("--n-dim", f.n_dim, "matrix dimension N");
        f.opts["replicas"] = sub->add_option("--replicas", f.replicas, "number of replicas");
        f.opts["seed"] = sub->add_option("--seed", f.seed, "master seed");
        f.opts["out_dir"] = sub->add_option("--out-dir", f.out_dir, "output directory");
        f.opts["format"] = sub->add_option("--format", f.formats, "extra outputs: csv, svg (json is always written)")
                               ->delimiter(',')
                               ->check(CLI::IsMember({"csv", "json", "svg"}));
        f.opts["workers"] = sub->add_option("--workers", f.workers, "worker threads (0: UME_WORKERS or all cores)");
        sub->add_option("--config", f.config, "JSON config file or a previous result document");
        sub->add_option("--param", f.params, "command parameter key=value (repeatable)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        const auto command = sub->get_name();
        const auto& f = flags.at(command);
        json merged = command_defaults(command);
        if (!f.config.empty()) overlay(merged, read_config_file(f.config));
        json cli = json::object();
        if (f.opts.at("n_dim")->count()) cli["n_dim"] = f.n_dim;
        if (f.opts.at("replicas")->count()) cli["replicas"] = f.replicas;
        if (f.opts.at("seed")->count()) cli["seed"] = f.seed;
        if (f.opts.at("out_dir")->count()) cli["out_dir"] = f.out_dir;
        if (f.opts.at("format")->count()) cli["format"] = f.formats;
        if (f.opts.at("workers")->count()) cli["workers"] = f.workers;
        if (!f.params.empty()) {
            cli["params"] = json::object();
            for (const auto& kv : f.params) apply_param(cli["params"], kv);
        }
        overlay(merged, cli);
        const auto config = parse_config(command, merged);
        std::cout << "effective config: " << config.to_json().dump() << '\n';

        const auto result = run_command(config);
        for (const auto& c : result.checks)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": value " << format_number(c.value) << ", target "
                      << format_number(c.target) << ", tolerance " << format_number(c.tolerance) << " (" << c.rule
                      << ")\n";
        for (const auto& p : write_outputs(result, config)) std::cout << "wrote " << p.string() << '\n';
        std::cout << result.command << ": " << (result.pass() ? "pass" : "tolerance failure") << " in "
                  << result.seconds << " s\n";
        return result.pass() ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
    } catch (const InvalidDimension& e) {
        std::cerr << "invalid dimension: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return 1;
}

}  // namespace ume::cli
