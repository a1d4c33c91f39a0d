#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hysrl/csv.hpp"
#include "hysrl/dp.hpp"
#include "hysrl/experiment.hpp"
#include "hysrl/mdp_io.hpp"
#include "oracles.hpp"

using namespace hysrl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hysrl_exp_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(dir);
    return dir;
}

ExperimentConfig hard_config(const fs::path& out) {
    return parse_experiment_config(R"(
[experiment]
env = "hard_instance"
seeds = [2, 1]
episodes = 3000
eval_interval = 500
output_dir = ")" + out.generic_string() + R"("

[source]
episodes = 400

[hard_instance]
bandit_states = 1
actions = 2
horizon = 3
gamma = 0.3
optimal_actions = [1]
)");
}

}  // namespace

TEST(ParseEnvSpec, BuiltInSelectors) {
    EXPECT_EQ(parse_env_spec("gridworld-source").mdp.num_states(), 17);
    const auto t = parse_env_spec("gridworld-target:0.7");
    EXPECT_DOUBLE_EQ(nlohmann::json::parse(t.descriptor)["success_prob"].get<double>(), 0.7);
    const auto h = parse_env_spec("hard:2,3,4,0.2:1;2");
    EXPECT_EQ(h.mdp.dims(), (Dims{4, 3, 4}));
    EXPECT_DOUBLE_EQ(h.mdp.p(1, 2, 2), (0.5 + 0.2) / 4);
    const auto ref = parse_env_spec("hard:2,3,4,0.2");
    EXPECT_DOUBLE_EQ(ref.mdp.p(1, 2, 2), 0.5 / 4);
}

TEST(ParseEnvSpec, MalformedSelectorsThrow) {
    for (const char* bad : {"", "gridworld-target:x", "gridworld-target:0.5:1", "hard:1,2,3", "hard:1,2,3,0.1:9",
                            "hard:a,2,3,0.1"})
        EXPECT_THROW(parse_env_spec(bad), InvalidInput) << bad;
    EXPECT_ANY_THROW(parse_env_spec("/nonexistent/env.json"));
}

TEST(ParseEnvSpec, JsonFileRoundTrip) {
    const auto dir = scratch("envfile");
    std::mt19937_64 gen(5);
    const auto m = oracle::random_mdp(gen, 3, 2, 4);
    save_mdp(dir / "m.json", m);
    const auto loaded = parse_env_spec((dir / "m.json").generic_string());
    EXPECT_EQ(fingerprint(loaded.mdp), fingerprint(m));
    EXPECT_EQ(nlohmann::json::parse(loaded.descriptor)["kind"], "file");
    fs::remove_all(dir);
}

TEST(EvaluatePolicy, OptimalPolicyHasZeroGap) {
    const auto m = build_gridworld(GridWorldSpec::target());
    const auto sol = optimal_values(m);
    Rng rng = make_rng(3, 1);
    const auto gap = evaluate_policy(m, sol.greedy, EvalMode::Exact, rng);
    ASSERT_TRUE(gap.exact.has_value());
    EXPECT_FALSE(gap.mc.has_value());
    EXPECT_NEAR(*gap.exact, 0.0, 1e-12);
}

TEST(EvaluatePolicy, ExactGapMatchesHandDynamicProgramming) {
    // one bandit state: V^pi = sum_k (1 - (1-1/H)^k) * P(good | pi)
    const int H = 4;
    const double gamma = 0.25;
    const auto m = build_hard_instance({1, 2, H, gamma, {1}});
    const auto pi = Policy::stochastic(m.dims(), std::vector<double>(static_cast<std::size_t>(m.num_states()) * 2 * H, 0.5));
    double reach = 0.0;
    for (int k = 1; k < H; ++k) reach += 1.0 - std::pow(1.0 - 1.0 / H, k);
    const double vstar = reach * (0.5 + gamma);
    const double vpi = reach * 0.5 * ((0.5 + gamma) + 0.5);
    Rng rng = make_rng(0, 1);
    EXPECT_NEAR(*evaluate_policy(m, pi, EvalMode::Exact, rng).exact, vstar - vpi, 1e-14);
    EXPECT_NEAR(*evaluate_policy(m, pi, EvalMode::Exact, rng, vstar).exact, vstar - vpi, 1e-14);
}

TEST(EvaluatePolicy, MonteCarloGapWithinSamplingError) {
    const auto m = build_gridworld(GridWorldSpec::target());
    const auto pi = Policy::uniform(m.dims());
    const double sd = std::sqrt(return_variance(m, pi).return_variance);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng = make_rng(seed, 1);
        const auto gap = evaluate_policy(m, pi, EvalMode::Both, rng);
        ASSERT_TRUE(gap.exact && gap.mc);
        EXPECT_LE(std::abs(*gap.mc - *gap.exact), 4.0 * sd / std::sqrt(double(kMonteCarloEpisodes)));
    }
}

TEST(EvaluatePolicy, MonteCarloIsExactOnDeterministicDynamics) {
    const auto m = build_gridworld(GridWorldSpec::target(1.0));
    const auto greedy = optimal_values(m).greedy;
    Rng rng = make_rng(9, 1);
    const auto gap = evaluate_policy(m, greedy, EvalMode::MonteCarlo, rng);
    EXPECT_FALSE(gap.exact.has_value());
    EXPECT_NEAR(*gap.mc, 0.0, 1e-12);
}

TEST(GenSourceDataset, OneEpisodeRecordsHorizonTransitions) {
    const auto m = build_gridworld(GridWorldSpec::source());
    Rng rng = make_rng(0, 7);
    const auto ds = gen_source_dataset(m, 1, 0.1, 1e-6, rng);
    EXPECT_EQ(ds.model.total_transitions(), m.horizon());
    EXPECT_EQ(ds.meta.episodes, 1);
    EXPECT_EQ(ds.meta.env_fingerprint, fingerprint(m));
    EXPECT_THROW(gen_source_dataset(m, 0, 0.1, 1e-6, rng), InvalidInput);
}

TEST(GenSourceDataset, DeterministicPerSeedAndCoversGridWorld) {
    const auto m = build_gridworld(GridWorldSpec::source());
    Rng a = make_rng(4, 7), b = make_rng(4, 7), c = make_rng(5, 7);
    const auto da = gen_source_dataset(m, 3000, 0.1, 1e-6, a);
    EXPECT_EQ(da, gen_source_dataset(m, 3000, 0.1, 1e-6, b));
    EXPECT_NE(da, gen_source_dataset(m, 3000, 0.1, 1e-6, c));
    EXPECT_EQ(da.model.total_transitions(), 3000 * m.horizon());
    // reward-free exploration reaches every pair
    EXPECT_GT(min_count(da.model), 0);
}

TEST(MetricsCsv, HeaderAndRoundTrip) {
    const std::vector<MetricsRow> rows{{3, "shift", 1000, 20000, 0.25, 0.5, std::nullopt},
                                       {3, "vi", 2000, 40000, 1e-17, 0.1 + 0.2, 0.125}};
    const auto text = metrics_csv(rows);
    EXPECT_EQ(text.substr(0, text.find('\n')), kMetricsHeader);
    const auto back = parse_metrics_csv(text);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].phase, "shift");
    EXPECT_FALSE(back[0].mc_gap.has_value());
    EXPECT_EQ(back[1].exact_gap, 0.1 + 0.2);
    EXPECT_EQ(back[1].stat, 1e-17);
    EXPECT_EQ(back[1].samples, 40000);
    EXPECT_EQ(metrics_csv(back), text);
}

TEST(MetricsCsv, MalformedInputIsAFormatError) {
    EXPECT_THROW(parse_metrics_csv("seed,phase,episode\n1,vi,3\n"), FormatError);
    EXPECT_THROW(parse_metrics_csv(std::string(kMetricsHeader) + "\n1,vi,x,3,0,,\n"), FormatError);
    EXPECT_THROW(parse_metrics_csv(std::string(kMetricsHeader) + "\n1,vi,2,3,0,0.5z,\n"), FormatError);
}

TEST(MeanCi, SampleStandardDeviation) {
    const auto ci = mean_ci95({1.0, 2.0, 3.0});
    EXPECT_DOUBLE_EQ(ci.mean, 2.0);
    EXPECT_NEAR(ci.half_width, 1.96 / std::sqrt(3.0), 1e-15);
    EXPECT_EQ(mean_ci95({4.0}).half_width, 0.0);
    EXPECT_TRUE(std::isnan(mean_ci95({}).mean));
}

TEST(AggregateCurve, CarriesEachSeedForward) {
    const std::vector<MetricsRow> rows{{0, "vi", 1, 10, 0, 1.0, {}}, {0, "vi", 3, 30, 0, 3.0, {}},
                                       {1, "vi", 2, 20, 0, 2.0, {}}};
    const auto curve = aggregate_curve(rows);
    ASSERT_EQ(curve.size(), 3u);
    EXPECT_EQ(curve[0].samples, 10);
    EXPECT_EQ(curve[0].n, 1);
    EXPECT_DOUBLE_EQ(curve[0].mean, 1.0);
    EXPECT_EQ(curve[0].lo, curve[0].hi);
    EXPECT_DOUBLE_EQ(curve[1].mean, 1.5);
    EXPECT_EQ(curve[1].n, 2);
    EXPECT_DOUBLE_EQ(curve[2].mean, 2.5);
    EXPECT_NEAR(curve[2].hi - curve[2].mean, 1.96 * std::sqrt(0.5) / std::sqrt(2.0), 1e-15);
    EXPECT_TRUE(aggregate_curve(rows, "mc_gap").empty());
    EXPECT_THROW(aggregate_curve(rows, "seed"), InvalidInput);
}

TEST(RunExperiment, OutputsAreIdenticalAcrossThreadCounts) {
    const auto one = scratch("threads1"), two = scratch("threads2");
    auto a = hard_config(one);
    a.threads = 1;
    auto b = hard_config(two);
    b.threads = 2;
    const auto oa = run_experiment(a);
    const auto ob = run_experiment(b);
    ASSERT_EQ(oa.algorithms.size(), 2u);
    for (const char* name : {"hysrl.csv", "bpi_ucbvi.csv", "summary.json"})
        EXPECT_EQ(read_file(one / name), read_file(two / name)) << name;
    EXPECT_TRUE(fs::exists(one / "source_dataset.txt"));
    fs::remove_all(one);
    fs::remove_all(two);
}

TEST(RunExperiment, RowsRespectBudgetAndSampleAccounting) {
    const auto dir = scratch("rows");
    const auto cfg = hard_config(dir);
    const auto out = run_experiment(cfg);
    const int H = cfg.hard.horizon;
    for (const auto& algo : out.algorithms) {
        const auto rows = parse_metrics_csv(read_file(algo.csv_path));
        ASSERT_FALSE(rows.empty());
        for (const auto& r : rows) {
            EXPECT_EQ(r.samples, r.episode * H);
            EXPECT_LE(r.episode, 3000);
            EXPECT_TRUE(r.exact_gap.has_value());
            EXPECT_GE(*r.exact_gap, -1e-12);
        }
        // seeds are written in ascending order
        EXPECT_EQ(rows.front().seed, 1u);
        for (const auto& run : algo.runs) {
            EXPECT_LE(run.result.total_episodes(), 3000);
            EXPECT_EQ(run.result.total_samples, run.result.total_episodes() * H);
        }
    }
    const auto summary = nlohmann::json::parse(read_file(out.summary_path));
    EXPECT_EQ(summary["horizon"], H);
    EXPECT_EQ(summary["algorithms"]["hysrl"]["seeds"].size(), 2u);
    EXPECT_NEAR(summary["optimal_value"].get<double>(), out.optimal_value, 0.0);
    fs::remove_all(dir);
}

TEST(ObtainSourceDataset, ReusesSavedDataAndChecksTheFingerprint) {
    const auto dir = scratch("source");
    auto cfg = parse_experiment_config("[source]\nepisodes = 50\npath = \"" + (dir / "src.txt").generic_string() +
                                       "\"\n");
    const auto envs = make_env_pair(cfg);
    const auto first = obtain_source_dataset(cfg, envs.source);
    EXPECT_TRUE(fs::exists(dir / "src.txt"));
    cfg.source_episodes = 7;
    EXPECT_EQ(obtain_source_dataset(cfg, envs.source), first);

    cfg.gridworld_source_success = 0.9;
    EXPECT_THROW(obtain_source_dataset(cfg, make_env_pair(cfg).source), ConfigError);
    fs::remove_all(dir);
}

TEST(SweepBeta, RecordsEveryGridPointAndSeed) {
    const auto dir = scratch("sweep");
    const auto cfg = parse_experiment_config(R"(
[experiment]
algorithms = ["bpi_ucbvi"]
seeds = [0, 1]
episodes = 200
output_dir = ")" + dir.generic_string() + R"("
[sweep]
target_success = [0.9, 0.8]
)");
    const auto out = sweep_beta(cfg);
    ASSERT_EQ(out.records.size(), 4u);
    const auto src = build_gridworld(GridWorldSpec::source());
    for (const auto& r : out.records) {
        const auto tar = build_gridworld(GridWorldSpec::target(r.target_success));
        EXPECT_NEAR(r.true_beta, 0.95 - r.target_success, 1e-15);
        EXPECT_EQ(r.effective_beta, true_shift_region(src, tar).effective_beta);
        EXPECT_NEAR(r.optimal_value, optimal_values(tar).values.initial_value(tar.rho()), 1e-12);
        EXPECT_NEAR(r.percentage_gap, 100.0 * r.final_gap / r.optimal_value, 1e-12);
        EXPECT_EQ(r.total_samples, 200 * 20);
    }
    const auto table = parse_csv(read_file(out.csv_path));
    EXPECT_EQ(table.rows.size(), 4u);
    EXPECT_EQ(table.column("percentage_gap"), 7);
    EXPECT_TRUE(fs::exists(dir / "sweep_summary.json"));
    EXPECT_FALSE(out.cap_hit);

    auto hard = hard_config(dir);
    EXPECT_THROW(sweep_beta(hard), ConfigError);
    fs::remove_all(dir);
}

TEST(ResolveThreadCount, ExplicitThenEnvironmentThenHardware) {
    EXPECT_EQ(resolve_thread_count(3), 3);
    ::setenv("HYSRL_THREADS", "5", 1);
    EXPECT_EQ(resolve_thread_count(0), 5);
    ::setenv("HYSRL_THREADS", "zero", 1);
    EXPECT_GE(resolve_thread_count(0), 1);
    ::unsetenv("HYSRL_THREADS");
    EXPECT_GE(resolve_thread_count(0), 1);
}
