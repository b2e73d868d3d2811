// Command line entry point. Two subcommands share the same flag set:
//   mbe run   --config <file> --out <dir> [--jobs N] [--resume]
//   mbe run1d --config <file> --out <dir> [--jobs N] [--resume]
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.
// MBE_LOG (error|info|debug) selects stderr verbosity.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mbe/experiment.hpp"

namespace {

int run_subcommand(const std::string& config_path, const std::string& out_dir, int jobs,
                   bool resume, bool one_dimensional) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "config error: cannot open '%s'\n", config_path.c_str());
        return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    mbe::ParsedConfig parsed = mbe::parse_config(buf.str(), one_dimensional);
    if (!parsed.ok()) {
        for (const mbe::ConfigIssue& issue : parsed.issues) {
            if (issue.line > 0)
                std::fprintf(stderr, "config error line %d: %s\n", issue.line,
                             issue.message.c_str());
            else
                std::fprintf(stderr, "config error: %s\n", issue.message.c_str());
        }
        return 2;
    }

    try {
        return mbe::run_experiment(parsed.config, out_dir, jobs, resume);
    } catch (const mbe::ValidationError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coarsening dynamics of a fourth-order thin-film model"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int jobs = 1;
    bool resume = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Run configuration file")->required();
        cmd->add_option("--out", out_dir, "Output directory")->required();
        cmd->add_option("--jobs", jobs, "Parallel sweep runs")->check(CLI::Range(1, 64));
        cmd->add_flag("--resume", resume, "Skip runs already recorded in the manifest");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "Integrate the 2D model");
    add_common(cmd_run);
    CLI::App* cmd_run1d = app.add_subcommand("run1d", "Integrate the 1D interval model");
    add_common(cmd_run1d);

    CLI11_PARSE(app, argc, argv);

    bool one_dimensional = cmd_run1d->parsed();
    return run_subcommand(config_path, out_dir, jobs, resume, one_dimensional);
}
