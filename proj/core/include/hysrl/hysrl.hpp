#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hysrl/hybrid_vi.hpp"
#include "hysrl/shift_id.hpp"

namespace hysrl {

enum class Algorithm { HySRL, BpiUcbvi };

std::string to_string(Algorithm algo);
Algorithm algorithm_from_string(std::string_view name);

struct HySRLConfig {
    double epsilon = 0.1;
    double delta = 0.1;
    double beta = 0.45;
    double sigma = 0.25;
    double shift_bonus_scale = 1e-6;
    double vi_bonus_scale = 2e-3;
    long long shift_max_episodes = 1'000'000;
    long long vi_max_episodes = 200'000;
    /// Caps shift-identification plus value-iteration episodes together when set.
    std::optional<long long> total_episode_budget;
    /// Source pairs below this count are insufficient; default ceil(H^3/eps^2).
    std::optional<Count> min_source_count;
    /// Add the insufficient-source set to the exploration region.
    bool augment_insufficient = false;
    /// Carry shift-identification target counts (inside the region) into value iteration.
    bool reuse_shift_counts = true;
    Algorithm algorithm = Algorithm::HySRL;

    void validate() const;
    Count source_gate(int horizon) const;
};

/// sigma*beta <= sqrt(S/H)*epsilon: identification would cost more than it saves.
bool should_abandon_source(const HySRLConfig& cfg, Dims dims);

/// {(s,a) : n_src(s,a) < gate}.
PairSet insufficient_source_set(const SourceDataset& source, Count gate);

struct MultiSourceRegion {
    PairSet region;                 // intersection of the per-source regions
    std::vector<int> chosen_source; // per pair (s*A + a): serving source, -1 inside the region
};

/// Outside the intersection, each pair is served by the lowest-index source that did not flag it.
MultiSourceRegion multi_source_region(std::span<const ShiftRegion> regions,
                                      std::span<const SourceDataset> sources);

struct RunObserver {
    ShiftIdObserver on_shift;
    VIObserver on_vi;
};

struct RunResult {
    Algorithm algorithm = Algorithm::HySRL;
    Policy policy;
    PairSet region;
    bool source_abandoned = false;
    long long shift_episodes = 0;
    long long vi_episodes = 0;
    long long total_samples = 0;
    bool shift_cap_hit = false;
    bool vi_cap_hit = false;
    bool vi_stopped = false;
    std::vector<ShiftIdStep> shift_trace;
    std::vector<VIStep> vi_trace;
    std::uint64_t seed = 0;

    long long total_episodes() const { return shift_episodes + vi_episodes; }
};

RunResult run_hysrl(const TabularMDP& target_env, const SourceDataset& source, const HySRLConfig& cfg,
                    Rng& rng, const RunObserver& observer = {});

/// One exploration phase, one estimated region per source, then value iteration on the intersection.
RunResult run_hysrl_multi(const TabularMDP& target_env, std::span<const SourceDataset> sources,
                          const HySRLConfig& cfg, Rng& rng, const RunObserver& observer = {});

/// Pure online baseline: value iteration over every pair with no source data.
RunResult run_baseline(const TabularMDP& target_env, const HySRLConfig& cfg, Rng& rng,
                       const RunObserver& observer = {});

}  // namespace hysrl
