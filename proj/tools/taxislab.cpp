// taxislab: simulate, check and compare chemotaxis-haptotaxis scenarios.

#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "taxislab/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Chemotaxis-haptotaxis simulator with indirect signal production"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    double r_hi = 50.0;
    double r_lo = 10.0;
    std::vector<std::string> axes;
    unsigned jobs = 0;

    auto* run = app.add_subcommand("run", "Simulate one scenario");
    run->add_option("config", config, "Scenario JSON")->required();
    run->add_option("--out", out, "Output directory (default: output_dir from the config)");

    auto* check = app.add_subcommand("check", "Sample the kinetics growth conditions on a box");
    check->add_option("config", config, "Scenario JSON with a hypothesis_budget block")->required();

    auto* cmp = app.add_subcommand("compare", "Run indirect and direct signal production side by side");
    cmp->add_option("config", config, "CAF scenario JSON")->required();
    cmp->add_option("--out", out, "Output directory");
    cmp->add_option("--r-hi", r_hi, "Minimum direct growth ratio")->capture_default_str();
    cmp->add_option("--r-lo", r_lo, "Maximum indirect growth ratio")->capture_default_str();

    auto* sw = app.add_subcommand("sweep", "Cartesian parameter sweep");
    sw->add_option("config", config, "Base scenario JSON")->required();
    sw->add_option("--axis", axes, "path=v1,v2,... (repeatable)")->required();
    sw->add_option("--jobs", jobs, "Worker count (default: TAXISLAB_JOBS or hardware concurrency)");
    sw->add_option("--out", out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    const std::optional<std::filesystem::path> out_dir =
        out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out);
    if (*run) return taxislab::cmd_run(config, out_dir);
    if (*check) return taxislab::cmd_check(config);
    if (*cmp) return taxislab::cmd_compare(config, out_dir, r_hi, r_lo);
    if (*sw) {
        return taxislab::cmd_sweep(config, axes, jobs > 0 ? std::optional<unsigned>(jobs) : std::nullopt, out_dir);
    }
    return 1;
}
