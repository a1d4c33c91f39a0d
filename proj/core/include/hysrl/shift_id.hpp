#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hysrl/estimation.hpp"
#include "hysrl/sampling.hpp"

namespace hysrl {

/// W_h(s,a) in [0,1] for h in [0,H]; row H is identically zero.
struct UncertaintyTable {
    Dims dims;
    std::vector<double> w;

    explicit UncertaintyTable(Dims d = {})
        : dims(d), w(static_cast<std::size_t>(d.H + 1) * d.S * d.A, 0.0) {}

    double& at(int h, StateId s, ActionId a) { return w[idx(h, s, a)]; }
    double at(int h, StateId s, ActionId a) const { return w[idx(h, s, a)]; }

private:
    std::size_t idx(int h, StateId s, ActionId a) const {
        return (static_cast<std::size_t>(h) * dims.S + static_cast<std::size_t>(s)) * dims.A +
               static_cast<std::size_t>(a);
    }
};

/// Pairs flagged as shifted plus the TV evidence behind every pair (index s*A + a).
struct ShiftRegion {
    PairSet members;
    std::vector<double> tv;
    /// Only meaningful for the exact region: min nonzero TV, 1 when no pair differs.
    double effective_beta = 1.0;

    double evidence(StateId s, ActionId a) const {
        return tv[static_cast<std::size_t>(s) * members.num_actions() + static_cast<std::size_t>(a)];
    }
};

struct ShiftIdConfig {
    double beta = 0.45;
    double sigma = 0.25;
    double delta = 0.1;
    double bonus_scale = 1e-6;
    long long max_episodes = 1'000'000;

    void validate() const;
    /// sigma * beta / 8
    double threshold() const { return sigma * beta / 8.0; }
};

struct UncertaintyBackup {
    UncertaintyTable W;
    Policy greedy;
};

/**
Backward recursion
  W_h(s,a) = min(1, 4H g1(n)/n + sum_s' p(s'|s,a) max_a' W_{h+1}(s',a'))
with W = 1 wherever n(s,a) = 0. The greedy policy maximizes W_h(s,.) with
lowest-index ties.
*/
UncertaintyBackup backup_W(const EmpiricalModel& target, int horizon, const BonusFunctions& bonus);

/// 3 sqrt(m) + m with m = sum_s rho(s) W_1(s, pi_1(s)).
double stopping_statistic(const UncertaintyTable& W, const Policy& pi, std::span<const double> rho);

/// {(s,a) : TV(p_src(.|s,a), p_tar(.|s,a)) > beta/2}, strict.
ShiftRegion estimate_shift_region(const EmpiricalModel& source, const EmpiricalModel& target,
                                  double beta);

/// Exact region {(s,a) : p_src(.|s,a) != p_tar(.|s,a)} with exact TV evidence.
ShiftRegion true_shift_region(const TabularMDP& src, const TabularMDP& tar);

struct ShiftIdStep {
    long long episode;
    long long samples;
    double statistic;
    double threshold;
};

struct ShiftIdIteration {
    long long episode;
    double statistic;
    const UncertaintyBackup& backup;
};
using ShiftIdObserver = std::function<void(const ShiftIdIteration&)>;

struct ShiftIdResult {
    long long episodes_used = 0;
    EmpiricalModel target;
    ShiftRegion region;
    double final_statistic = 0.0;
    bool cap_hit = false;
    std::vector<ShiftIdStep> trace;
};

struct ExplorationSettings {
    double delta = 0.1;
    double bonus_scale = 1e-6;
    long long max_episodes = 1'000'000;
    /// Stop once the statistic falls to this value; none means run the full budget.
    std::optional<double> stop_threshold;
};

struct ExplorationOutcome {
    long long episodes = 0;
    double final_statistic = 0.0;
    bool stopped = false;
    std::vector<ShiftIdStep> trace;
};

/// Reward-free exploration loop shared by shift identification and source collection.
ExplorationOutcome explore_reward_free(const TabularMDP& env, EmpiricalModel& counts,
                                       const ExplorationSettings& settings, Rng& rng,
                                       const ShiftIdObserver& observer = {});

ShiftIdResult run_shift_identification(const TabularMDP& target_env, const SourceDataset& source,
                                       const ShiftIdConfig& cfg, Rng& rng,
                                       const ShiftIdObserver& observer = {});

/// Shift-identification trace as CSV: episode,samples,stopping_statistic,threshold.
std::string shift_trace_csv(const std::vector<ShiftIdStep>& trace);

}  // namespace hysrl
