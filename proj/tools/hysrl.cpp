// Command-line front end: source collection, experiment runs, sweeps, plots and policy evaluation.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hysrl/csv.hpp"
#include "hysrl/dp.hpp"
#include "hysrl/experiment.hpp"
#include "hysrl/mdp_io.hpp"
#include "hysrl/svg_plot.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCapHit = 3;

struct GenSourceArgs {
    std::string env;
    long long episodes = 100'000;
    std::string out;
    std::uint64_t seed = 0;
    double delta = 0.1;
    double bonus_scale = 1e-6;
};

struct PlotArgs {
    std::vector<std::string> inputs;
    std::string kind = "gap";
    std::string out;
};

struct EvalArgs {
    std::string env;
    std::string policy;
    std::string mode = "exact";
    std::uint64_t seed = 0;
};

int gen_source(const GenSourceArgs& a) {
    const auto env = hysrl::parse_env_spec(a.env);
    hysrl::Rng rng = hysrl::make_rng(a.seed, 7);
    const auto ds = hysrl::gen_source_dataset(env.mdp, a.episodes, a.delta, a.bonus_scale, rng);
    hysrl::save_source(a.out, ds);
    std::cout << "wrote " << a.out << ": " << ds.model.total_transitions() << " transitions, min count "
              << hysrl::min_count(ds.model) << ", environment " << ds.meta.env_fingerprint << "\n";
    return kExitOk;
}

int run(const std::string& config_path, int threads) {
    auto cfg = hysrl::load_experiment_config(config_path);
    if (threads > 0) cfg.threads = threads;
    const auto outcome = hysrl::run_experiment(cfg);
    for (const auto& algo : outcome.algorithms) {
        std::cout << hysrl::to_string(algo.algorithm) << " -> " << algo.csv_path.generic_string() << "\n";
        for (const auto& r : algo.runs)
            std::cout << "  seed " << r.seed << ": " << r.result.total_samples << " samples, final gap "
                      << (r.final_gap.exact ? hysrl::format_double(*r.final_gap.exact) : std::string("-")) << "\n";
    }
    std::cout << "summary -> " << outcome.summary_path.generic_string() << "\n";
    if (outcome.cap_hit) {
        std::cerr << "warning: at least one run stopped on an episode cap; outputs are partial\n";
        return kExitCapHit;
    }
    return kExitOk;
}

int sweep(const std::string& config_path, int threads) {
    auto cfg = hysrl::load_experiment_config(config_path);
    if (threads > 0) cfg.threads = threads;
    const auto outcome = hysrl::sweep_beta(cfg);
    std::cout << outcome.records.size() << " runs -> " << outcome.csv_path.generic_string() << "\n";
    if (outcome.cap_hit) {
        std::cerr << "warning: at least one run stopped on an episode cap; outputs are partial\n";
        return kExitCapHit;
    }
    return kExitOk;
}

int plot(const PlotArgs& a) {
    std::vector<std::filesystem::path> inputs(a.inputs.begin(), a.inputs.end());
    hysrl::write_plot(inputs, hysrl::plot_kind_from_string(a.kind), a.out);
    std::cout << "wrote " << a.out << "\n";
    return kExitOk;
}

int eval(const EvalArgs& a) {
    const auto env = hysrl::parse_env_spec(a.env);
    const auto pi = hysrl::policy_from_json(hysrl::read_file(a.policy));
    hysrl::Rng rng = hysrl::make_rng(a.seed, 1);
    const auto gap = hysrl::evaluate_policy(env.mdp, pi, hysrl::eval_mode_from_string(a.mode), rng);
    nlohmann::json out{{"optimal_value", hysrl::optimal_values(env.mdp).values.initial_value(env.mdp.rho())}};
    if (gap.exact) out["exact_gap"] = *gap.exact;
    if (gap.mc) out["mc_gap"] = *gap.mc;
    std::cout << out.dump() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid transfer RL experiments"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: HYSRL_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    GenSourceArgs gs;
    auto* gen_cmd = app.add_subcommand("gen-source", "collect a source dataset by reward-free exploration");
    gen_cmd->add_option("--env", gs.env, "environment spec or MDP JSON file")->required();
    gen_cmd->add_option("--episodes", gs.episodes, "exploration episodes")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--out", gs.out, "output dataset file")->required();
    gen_cmd->add_option("--seed", gs.seed, "random seed");
    gen_cmd->add_option("--delta", gs.delta, "confidence parameter");
    gen_cmd->add_option("--bonus-scale", gs.bonus_scale, "exploration bonus scale");

    std::string run_config;
    auto* run_cmd = app.add_subcommand("run", "run an experiment described by a TOML file");
    run_cmd->add_option("--config", run_config, "experiment TOML")->required();

    std::string sweep_config;
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep the target success probability");
    sweep_cmd->add_option("--config", sweep_config, "experiment TOML")->required();

    PlotArgs pa;
    auto* plot_cmd = app.add_subcommand("plot", "render CSV results to SVG");
    plot_cmd->add_option("--input", pa.inputs, "metrics or sweep CSV files")->required();
    plot_cmd->add_option("--kind", pa.kind, "gap | percentage")->check(CLI::IsMember({"gap", "percentage"}));
    plot_cmd->add_option("--out", pa.out, "output SVG")->required();

    EvalArgs ea;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a policy against the optimal value");
    eval_cmd->add_option("--env", ea.env, "environment spec or MDP JSON file")->required();
    eval_cmd->add_option("--policy", ea.policy, "policy JSON")->required();
    eval_cmd->add_option("--mode", ea.mode, "exact | mc | both")->check(CLI::IsMember({"exact", "mc", "both"}));
    eval_cmd->add_option("--seed", ea.seed, "seed for Monte-Carlo rollouts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*gen_cmd) return gen_source(gs);
        if (*run_cmd) return run(run_config, threads);
        if (*sweep_cmd) return sweep(sweep_config, threads);
        if (*plot_cmd) return plot(pa);
        if (*eval_cmd) return eval(ea);
    } catch (const hysrl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const hysrl::FormatError& e) {
        std::cerr << "bad input file: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
