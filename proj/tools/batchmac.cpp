// batchmac: evaluate batch-arrival CSMA/CA chain models against simulation.
//
//   batchmac run --config <path> [--out <path>] [--format csv|json]
//   batchmac profile --config <path>
//
// Exit codes: 0 success, 1 configuration error, 2 runtime or I/O error.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "batchmac/error.hpp"
#include "batchmac/experiment.hpp"

namespace {

namespace ex = batchmac::experiment;

int run_command(const std::string& config_path, const std::string& out_path,
                const std::string& format_flag) {
    ex::ExperimentConfig cfg = ex::load_config(config_path);
    if (!format_flag.empty()) cfg.format = *ex::parse_format(format_flag);
    if (!out_path.empty()) cfg.out = out_path;

    const ex::ComparisonReport report = ex::run_experiment(cfg);
    if (cfg.out) {
        ex::write_report(report, cfg.format, *cfg.out);
    } else {
        std::cout << ex::format_report(report, cfg.format);
        std::cout.flush();
        if (!std::cout) throw batchmac::IoError("failed writing report to stdout");
    }
    for (const std::string& line : ex::tracking_summary(report)) std::cerr << line << '\n';
    return 0;
}

int profile_command(const std::string& config_path) {
    const ex::ExperimentConfig cfg = ex::load_config(config_path);
    const auto profile = batchmac::attempt_profile(cfg.points().front(), cfg.semantics);
    std::cout << ex::profile_csv(profile);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch-arrival IEEE 802.15.4 CSMA/CA model evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string format_flag;

    auto* run = app.add_subcommand("run", "Evaluate chain models and the simulator over a sweep");
    run->add_option("--config", config_path, "Experiment config (key=value)")->required();
    run->add_option("--out", out_path, "Report path (default: stdout)");
    run->add_option("--format", format_flag, "Report format")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* profile = app.add_subcommand("profile", "Dump the attempt profile a(t), d_k(t) as CSV");
    profile->add_option("--config", config_path, "Experiment config (key=value)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return run_command(config_path, out_path, format_flag);
        return profile_command(config_path);
    } catch (const batchmac::InputError& e) {
        std::cerr << "batchmac: configuration error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "batchmac: error: " << e.what() << '\n';
        return 2;
    }
}
