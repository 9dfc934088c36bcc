#include "imdpv/error.hpp"
#include "imdpv/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace imdpv;

int main(int argc, char** argv) {
    CLI::App app{"Data-driven IMDP abstraction and verification of perception-based control"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    int threads = -1;
    CommandOptions opt;
    std::string data, delta, imdp, out;

    app.add_option("-c,--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "Override section.key=value (repeatable)");
    app.add_option("--threads", threads, "Worker threads, 0 = hardware concurrency")->check(CLI::NonNegativeNumber);

    auto* simulate = app.add_subcommand("simulate", "Generate a train or validation dataset");
    simulate->add_option("--which", opt.which, "train | validation")->check(CLI::IsMember({"train", "validation"}));
    simulate->add_option("--out", out, "Dataset path");

    auto* abstract = app.add_subcommand("abstract", "Build the IMDP from training data");
    abstract->add_option("--data", data, "Training dataset");
    abstract->add_option("--out", out, "IMDP path (delta is written next to it)");

    auto* verify = app.add_subcommand("verify", "Robust value iteration on the IMDP");
    verify->add_option("--imdp", imdp, "IMDP path");
    verify->add_option("--out", out, "CSV path");

    auto* validate = app.add_subcommand("validate", "Bayesian conformance of delta on validation data");
    validate->add_option("--delta", delta, "Interval transition function");
    validate->add_option("--data", data, "Validation dataset");
    validate->add_option("--out", out, "Report path");

    auto* sweep = app.add_subcommand("sweep", "Alpha, granularity or shift sweeps");
    sweep->add_option("--which", opt.which, "alpha | granularity | shift | all")
        ->check(CLI::IsMember({"alpha", "granularity", "shift", "all"}));

    auto* exp = app.add_subcommand("export", "Write the IMDP as a PRISM model");
    exp->add_option("--imdp", imdp, "IMDP path");
    exp->add_option("--out", out, "Model path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (threads >= 0)
            overrides.push_back("run.threads=" + std::to_string(threads));
        const Config cfg = Config::load(config_path, overrides);
        opt.data = data;
        opt.delta = delta;
        opt.imdp = imdp;
        opt.out = out;

        std::vector<std::filesystem::path> written;
        if (simulate->parsed())
            written = cmd_simulate(cfg, opt);
        else if (abstract->parsed())
            written = cmd_abstract(cfg, opt);
        else if (verify->parsed())
            written = cmd_verify(cfg, opt);
        else if (validate->parsed())
            written = cmd_validate(cfg, opt);
        else if (sweep->parsed())
            written = cmd_sweep(cfg, opt);
        else
            written = cmd_export(cfg, opt);
        for (const auto& p : written)
            std::cout << p.string() << '\n';
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
