#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coalgene/commands.hpp"
#include "coalgene/config.hpp"

namespace {

coalgene::RunConfig load_run_config(const std::string& config_path,
                                    std::optional<uint64_t> seed_flag,
                                    std::optional<std::string> out_flag) {
    coalgene::RunConfig cfg;
    if (!config_path.empty()) cfg = coalgene::load_config_file(config_path);
    // flags override the file
    if (seed_flag) cfg.seed = *seed_flag;
    if (out_flag) cfg.out_path = *out_flag;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete-generation genealogy simulator and coalescent-limit checks"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<uint64_t> seed_flag;
    std::optional<std::string> out_flag;
    int threads = 0;
    app.add_option("--config", config_path, "JSON configuration file")
        ->envname("COALGENE_CONFIG");
    app.add_option("--seed", seed_flag, "seed override");
    app.add_option("--threads", threads, "worker threads (default: all cores)");
    app.add_option("--out", out_flag, "output path (default: stdout)");

    // rates
    auto* rates = app.add_subcommand("rates", "merger rate table of a limit measure");
    std::string measure;
    int rates_n = 10;
    rates->add_option("--measure", measure,
                      "kingman | beta:a,b[,m] | point:p:w[,..] | xi:w@r1/r2..[;..]")
        ->required();
    rates->add_option("--n", rates_n, "table size");

    // constants
    auto* consts = app.add_subcommand("constants", "closed-form constants of the power-weight model");
    double c_alpha = 0, c_theta = 0, c_gamma = 0;
    consts->add_option("--alpha", c_alpha)->required();
    consts->add_option("--theta", c_theta)->required();
    consts->add_option("--gamma", c_gamma)->required();

    // simulate / estimate-cn / transition
    app.add_subcommand("simulate", "genealogy trajectories to CSV");
    app.add_subcommand("estimate-cn", "pair-merge probability estimates");
    app.add_subcommand("transition", "one-step increment distribution");

    // pd
    auto* pd = app.add_subcommand("pd", "stick-breaking identity battery");
    double p_alpha = 0, p_theta = 0, p_gamma = 0;
    int p_n = 1000;
    long long p_reps = 10000;
    std::optional<uint64_t> p_seed;
    pd->add_option("--alpha", p_alpha)->required();
    pd->add_option("--theta", p_theta)->required();
    pd->add_option("--gamma", p_gamma)->required();
    pd->add_option("--N", p_n);
    pd->add_option("--reps", p_reps);
    pd->add_option("--seed", p_seed);

    // check / plotdata
    auto* check = app.add_subcommand("check", "run a named convergence check");
    std::string check_name;
    check->add_option("name", check_name,
                      "semigroup|lambda-criterion|kingman-criterion|xi-functionals|"
                      "replacement|bottleneck|pd-theorem|em-theorem|em-equivalence|"
                      "discrete-limit")
        ->required();
    auto* plotdata = app.add_subcommand("plotdata", "per-N CSV of a check's rows");
    std::string plot_name;
    plotdata->add_option("name", plot_name, "check name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (rates->parsed()) return coalgene::cmd_rates(measure, rates_n, out_flag);
        if (consts->parsed())
            return coalgene::cmd_constants(c_alpha, c_theta, c_gamma, out_flag);
        if (pd->parsed()) {
            uint64_t seed_val;
            if (p_seed) seed_val = *p_seed;
            else if (seed_flag) seed_val = *seed_flag;
            else throw std::invalid_argument("pd: a seed is mandatory");
            return coalgene::cmd_pd(p_alpha, p_theta, p_gamma, p_n, p_reps, seed_val,
                                    out_flag, threads);
        }
        const coalgene::RunConfig cfg =
            load_run_config(config_path, seed_flag, out_flag);
        if (app.got_subcommand("simulate")) return coalgene::cmd_simulate(cfg, threads);
        if (app.got_subcommand("estimate-cn"))
            return coalgene::cmd_estimate_cn(cfg, threads);
        if (app.got_subcommand("transition")) return coalgene::cmd_transition(cfg, threads);
        if (check->parsed()) return coalgene::cmd_check(check_name, cfg, threads);
        if (plotdata->parsed()) return coalgene::cmd_plotdata(plot_name, cfg, threads);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
