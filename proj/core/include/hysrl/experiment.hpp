#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hysrl/envs.hpp"
#include "hysrl/hysrl.hpp"
#include "hysrl/toml_config.hpp"

namespace hysrl {

/// One environment with a JSON description of how it was produced.
struct NamedEnv {
    TabularMDP mdp;
    std::string descriptor;
};

/**
Environment selectors accepted on the command line:
  gridworld-source[:p]   gridworld-target[:p]   (p = success probability)
  hard:S,A,H,gamma[:a0;a1;...]                  (no action list = reference MDP)
  anything else is read as an MDP JSON file.
*/
NamedEnv parse_env_spec(std::string_view spec);

enum class EvalMode { Exact, MonteCarlo, Both };
std::string to_string(EvalMode mode);
EvalMode eval_mode_from_string(std::string_view name);

inline constexpr int kMonteCarloEpisodes = 100;

struct GapEvaluation {
    std::optional<double> exact;
    std::optional<double> mc;
};

/// V*_1(rho) - V^pi_1(rho) by DP and/or V*_1(rho) minus the mean return of 100 rollouts.
GapEvaluation evaluate_policy(const TabularMDP& env, const Policy& pi, EvalMode mode, Rng& rng,
                              std::optional<double> optimal_value = std::nullopt);

/// Counts from `episodes` reward-free exploration episodes, ignoring the stopping rule.
SourceDataset gen_source_dataset(const TabularMDP& env, long long episodes, double delta, double bonus_scale,
                                 Rng& rng);

enum class EnvKind { GridWorld, HardInstance, Files };

struct ExperimentConfig {
    EnvKind env = EnvKind::GridWorld;
    std::vector<Algorithm> algorithms{Algorithm::HySRL, Algorithm::BpiUcbvi};
    HySRLConfig hysrl;
    std::vector<std::uint64_t> seeds{0};
    /// Episodes per run (shift identification plus value iteration); none = algorithm caps only.
    std::optional<long long> episodes;
    long long eval_interval = 1000;
    EvalMode eval_mode = EvalMode::Exact;
    std::filesystem::path output_dir = "results";
    /// Worker threads; 0 = HYSRL_THREADS or the available cores.
    int threads = 0;

    long long source_episodes = 100'000;
    std::uint64_t source_seed = 0;
    std::optional<std::filesystem::path> source_path;

    double gridworld_source_success = 0.95;
    double gridworld_target_success = 0.95;
    bool gridworld_once_only = true;

    HardInstanceSpec hard;

    std::filesystem::path source_env_path;
    std::filesystem::path target_env_path;

    /// Target success probabilities swept by sweep_beta.
    std::vector<double> sweep_target_success{0.9, 0.85, 0.8, 0.75, 0.7, 0.65, 0.6, 0.55};

    void validate() const;
};

/// Relative paths are resolved against `base_dir`. Throws ConfigError.
ExperimentConfig parse_experiment_config(std::string_view toml_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct EnvPair {
    NamedEnv source;
    NamedEnv target;
};

/// Source and target environments selected by the config (target success overridable for sweeps).
EnvPair make_env_pair(const ExperimentConfig& cfg, std::optional<double> target_success = std::nullopt);

struct MetricsRow {
    std::uint64_t seed = 0;
    std::string phase;  // "shift" or "vi"
    long long episode = 0;
    long long samples = 0;
    double stat = 0.0;
    std::optional<double> exact_gap;
    std::optional<double> mc_gap;
};

inline constexpr std::string_view kMetricsHeader = "seed,phase,episode,samples,stat,exact_gap,mc_gap";

std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_metrics_csv(std::string_view text);

struct SeedRun {
    std::uint64_t seed = 0;
    RunResult result;
    std::vector<MetricsRow> rows;
    GapEvaluation final_gap;
};

/// Runs one algorithm for one seed, logging every eval_interval episodes and at the end.
SeedRun run_seed(const EnvPair& envs, const SourceDataset* source, const ExperimentConfig& cfg, Algorithm algo,
                 std::uint64_t seed, double optimal_value);

struct CurvePoint {
    long long samples;
    double mean;
    double lo;
    double hi;
    int n;
};

/**
Mean and 95% band (mean +- 1.96 std/sqrt(n), sample std) of `column` over seeds
on the union of logged sample counts; each seed contributes its most recent
row at or before the point.
*/
std::vector<CurvePoint> aggregate_curve(const std::vector<MetricsRow>& rows, std::string_view column = "exact_gap");

struct MeanCi {
    double mean;
    double half_width;
};
MeanCi mean_ci95(const std::vector<double>& xs);

struct AlgorithmOutcome {
    Algorithm algorithm;
    std::filesystem::path csv_path;
    std::vector<SeedRun> runs;
};

struct ExperimentOutcome {
    double optimal_value = 0.0;
    std::vector<AlgorithmOutcome> algorithms;
    std::filesystem::path summary_path;
    /// A run stopped on an algorithm cap rather than its own rule or the episode budget.
    bool cap_hit = false;
};

/// Loads (checking its fingerprint) or generates the source dataset named by the config.
SourceDataset obtain_source_dataset(const ExperimentConfig& cfg, const NamedEnv& source_env);

/// One CSV per algorithm (<output_dir>/<algorithm>.csv) plus summary.json.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

struct SweepRecord {
    double target_success;
    double true_beta;
    double effective_beta;
    Algorithm algorithm;
    std::uint64_t seed;
    double optimal_value;
    double final_gap;
    double percentage_gap;
    long long total_samples;
};

inline constexpr std::string_view kSweepHeader =
    "target_success,true_beta,effective_beta,algorithm,seed,optimal_value,final_gap,percentage_gap,total_samples";

std::string sweep_csv(const std::vector<SweepRecord>& records);

struct SweepOutcome {
    std::vector<SweepRecord> records;
    std::filesystem::path csv_path;
    bool cap_hit = false;
};

/// Every target success probability x algorithm x seed; writes <output_dir>/sweep.csv and sweep_summary.json.
SweepOutcome sweep_beta(const ExperimentConfig& cfg);

/// Pool size: explicit request, else HYSRL_THREADS, else hardware concurrency (at least 1).
int resolve_thread_count(int requested);

}  // namespace hysrl
