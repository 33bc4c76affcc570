#include <CLI11.hpp>

#include "apfsim/app.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Shunt active power filter control-strategy simulator"};
    app.require_subcommand(1);

    apfsim::app::CommonOptions sim_opt, cmp_opt;
    std::uint64_t seed_sim = 0, seed_cmp = 0;

    auto* sim = app.add_subcommand("simulate", "run one scenario and write trace + metrics");
    sim->add_option("--config", sim_opt.config_path, "scenario JSON (omit for the default)");
    sim->add_option("--out", sim_opt.out_dir, "output directory")->capture_default_str();
    sim->add_flag("--plots", sim_opt.plots, "also write SVG plots");
    sim->add_flag("--dump-config", sim_opt.dump_config, "print the resolved config and exit");
    auto* ss = sim->add_option("--seed", seed_sim, "override the scenario seed");

    auto* cmp = app.add_subcommand("compare", "run both strategies on the same seeded scenario");
    cmp->add_option("--config", cmp_opt.config_path, "scenario JSON (omit for the default)");
    cmp->add_option("--out", cmp_opt.out_dir, "output directory")->capture_default_str();
    cmp->add_flag("--plots", cmp_opt.plots, "also write SVG plots");
    cmp->add_flag("--dump-config", cmp_opt.dump_config, "print the resolved config and exit");
    auto* cs = cmp->add_option("--seed", seed_cmp, "override the scenario seed");

    std::string emd_in, emd_out = "imfs.csv";
    double emd_rate = 50000.0;
    auto* emd = app.add_subcommand("emd", "decompose a single-column CSV signal into IMFs");
    emd->add_option("input", emd_in, "single-column CSV")->required();
    emd->add_option("--sample-rate", emd_rate, "Hz")->capture_default_str();
    emd->add_option("--out", emd_out, "output CSV")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) {
        if (ss->count() > 0) sim_opt.seed = seed_sim;
        return apfsim::app::cmd_simulate(sim_opt);
    }
    if (cmp->parsed()) {
        if (cs->count() > 0) cmp_opt.seed = seed_cmp;
        return apfsim::app::cmd_compare(cmp_opt);
    }
    return apfsim::app::cmd_emd(emd_in, emd_rate, emd_out);
}
