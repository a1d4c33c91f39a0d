#include "hysrl/hysrl.hpp"

#include <algorithm>
#include <cmath>

namespace hysrl {

std::string to_string(Algorithm algo) {
    return algo == Algorithm::HySRL ? "hysrl" : "bpi_ucbvi";
}

Algorithm algorithm_from_string(std::string_view name) {
    if (name == "hysrl") return Algorithm::HySRL;
    if (name == "bpi_ucbvi" || name == "baseline") return Algorithm::BpiUcbvi;
    throw InvalidInput("unknown algorithm '" + std::string(name) + "' (expected hysrl or bpi_ucbvi)");
}

void HySRLConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidInput("config: epsilon must lie in (0,1]");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("config: delta must lie in (0,1)");
    if (!(beta > 0.0 && beta <= 1.0)) throw InvalidInput("config: beta must lie in (0,1]");
    if (!(sigma > 0.0 && sigma <= 1.0)) throw InvalidInput("config: sigma must lie in (0,1]");
    if (!(shift_bonus_scale >= 0.0) || !(vi_bonus_scale >= 0.0))
        throw InvalidInput("config: bonus scales must be nonnegative");
    if (shift_max_episodes < 1) throw InvalidInput("config: shift_max_episodes must be >= 1");
    if (vi_max_episodes < 0) throw InvalidInput("config: vi_max_episodes must be >= 0");
    if (total_episode_budget && *total_episode_budget < 0)
        throw InvalidInput("config: total_episode_budget must be >= 0");
    if (min_source_count && *min_source_count < 0) throw InvalidInput("config: min_source_count must be >= 0");
}

Count HySRLConfig::source_gate(int horizon) const {
    if (min_source_count) return *min_source_count;
    const double h = horizon;
    return static_cast<Count>(std::ceil(h * h * h / (epsilon * epsilon)));
}

bool should_abandon_source(const HySRLConfig& cfg, Dims dims) {
    return cfg.sigma * cfg.beta <= std::sqrt(static_cast<double>(dims.S) / dims.H) * cfg.epsilon;
}

PairSet insufficient_source_set(const SourceDataset& source, Count gate) {
    if (gate < 0) throw InvalidInput("insufficient_source_set: negative gate");
    const auto& d = source.model.dims();
    PairSet out(d.S, d.A);
    for (int s = 0; s < d.S; ++s)
        for (int a = 0; a < d.A; ++a)
            if (source.model.n(s, a) < gate) out.insert(s, a);
    return out;
}

MultiSourceRegion multi_source_region(std::span<const ShiftRegion> regions,
                                      std::span<const SourceDataset> sources) {
    if (regions.empty()) throw InvalidInput("multi_source_region: need at least one source");
    if (regions.size() != sources.size())
        throw DimensionError("multi_source_region: one region per source required");
    const int S = regions.front().members.num_states();
    const int A = regions.front().members.num_actions();
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const auto& m = regions[i].members;
        const auto& d = sources[i].model.dims();
        if (m.num_states() != S || m.num_actions() != A || d.S != S || d.A != A)
            throw DimensionError("multi_source_region: source " + std::to_string(i) + " has mismatched shape");
    }
    MultiSourceRegion out{regions.front().members, std::vector<int>(static_cast<std::size_t>(S) * A, -1)};
    for (std::size_t i = 1; i < regions.size(); ++i) out.region = out.region.intersected(regions[i].members);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            if (out.region.contains(s, a)) continue;
            for (std::size_t i = 0; i < regions.size(); ++i)
                if (!regions[i].members.contains(s, a)) {
                    out.chosen_source[static_cast<std::size_t>(s) * A + a] = static_cast<int>(i);
                    break;
                }
        }
    return out;
}

namespace {

VIConfig vi_config(const HySRLConfig& cfg, long long episodes_already_used) {
    long long cap = cfg.vi_max_episodes;
    if (cfg.total_episode_budget) cap = std::min(cap, std::max(0LL, *cfg.total_episode_budget - episodes_already_used));
    return VIConfig{cfg.epsilon, cfg.delta, cfg.vi_bonus_scale, cap};
}

ShiftIdConfig shift_config(const HySRLConfig& cfg) {
    long long cap = cfg.shift_max_episodes;
    if (cfg.total_episode_budget) cap = std::max(1LL, std::min(cap, *cfg.total_episode_budget));
    return ShiftIdConfig{cfg.beta, cfg.sigma, cfg.delta, cfg.shift_bonus_scale, cap};
}

void finish(RunResult& result, VIResult vi, int horizon) {
    result.policy = std::move(vi.policy);
    result.vi_episodes = vi.episodes;
    result.vi_cap_hit = vi.cap_hit;
    result.vi_stopped = vi.stopped;
    result.vi_trace = std::move(vi.trace);
    result.total_samples = static_cast<long long>(horizon) * result.total_episodes();
}

RunResult run_online(const TabularMDP& target_env, const HySRLConfig& cfg, Rng& rng,
                     const RunObserver& observer, Algorithm label) {
    RunResult result;
    result.algorithm = label;
    result.source_abandoned = true;
    const auto& d = target_env.dims();
    result.region = PairSet::all(d.S, d.A);
    HybridModel model = HybridModel::online_only(d);
    finish(result, run_hybrid_ucbvi(target_env, model, vi_config(cfg, 0), rng, observer.on_vi), d.H);
    return result;
}

}  // namespace

RunResult run_hysrl(const TabularMDP& target_env, const SourceDataset& source, const HySRLConfig& cfg,
                    Rng& rng, const RunObserver& observer) {
    cfg.validate();
    const Dims d = target_env.dims();
    if (source.model.dims().S != d.S || source.model.dims().A != d.A)
        throw DimensionError("run_hysrl: source " + to_string(source.model.dims()) + " does not match target " +
                             to_string(d));

    if (should_abandon_source(cfg, d)) return run_online(target_env, cfg, rng, observer, Algorithm::HySRL);

    RunResult result;
    result.algorithm = Algorithm::HySRL;
    auto shift = run_shift_identification(target_env, source, shift_config(cfg), rng, observer.on_shift);
    result.shift_episodes = shift.episodes_used;
    result.shift_cap_hit = shift.cap_hit;
    result.shift_trace = std::move(shift.trace);

    PairSet region = shift.region.members;
    if (cfg.augment_insufficient) region = region.united(insufficient_source_set(source, cfg.source_gate(d.H)));
    result.region = region;

    EmpiricalModel target = cfg.reuse_shift_counts ? std::move(shift.target) : EmpiricalModel(d);
    target.restrict_to(region);
    auto frozen = std::make_shared<const EmpiricalModel>(source.model);
    HybridModel model = HybridModel::with_source(std::move(region), std::move(target), std::move(frozen));
    finish(result, run_hybrid_ucbvi(target_env, model, vi_config(cfg, result.shift_episodes), rng, observer.on_vi),
           d.H);
    return result;
}

RunResult run_hysrl_multi(const TabularMDP& target_env, std::span<const SourceDataset> sources,
                          const HySRLConfig& cfg, Rng& rng, const RunObserver& observer) {
    cfg.validate();
    if (sources.empty()) throw InvalidInput("run_hysrl_multi: need at least one source");
    const Dims d = target_env.dims();
    for (const auto& src : sources)
        if (src.model.dims().S != d.S || src.model.dims().A != d.A)
            throw DimensionError("run_hysrl_multi: source " + to_string(src.model.dims()) +
                                 " does not match target " + to_string(d));

    if (should_abandon_source(cfg, d)) return run_online(target_env, cfg, rng, observer, Algorithm::HySRL);

    RunResult result;
    const auto scfg = shift_config(cfg);
    scfg.validate();
    EmpiricalModel target(d);
    ExplorationSettings settings{scfg.delta, scfg.bonus_scale, scfg.max_episodes, scfg.threshold()};
    auto outcome = explore_reward_free(target_env, target, settings, rng, observer.on_shift);
    result.shift_episodes = outcome.episodes;
    result.shift_cap_hit = !outcome.stopped;
    result.shift_trace = std::move(outcome.trace);

    std::vector<ShiftRegion> regions;
    std::vector<std::shared_ptr<const EmpiricalModel>> frozen;
    for (const auto& src : sources) {
        regions.push_back(estimate_shift_region(src.model, target, cfg.beta));
        frozen.push_back(std::make_shared<const EmpiricalModel>(src.model));
    }
    auto combined = multi_source_region(regions, sources);
    PairSet region = combined.region;
    if (cfg.augment_insufficient) {
        // a pair stays source-served only if its chosen source is sufficient there
        const Count gate = cfg.source_gate(d.H);
        for (int s = 0; s < d.S; ++s)
            for (int a = 0; a < d.A; ++a) {
                const int c = combined.chosen_source[static_cast<std::size_t>(s) * d.A + a];
                if (c >= 0 && sources[static_cast<std::size_t>(c)].model.n(s, a) < gate) region.insert(s, a);
            }
    }
    result.region = region;
    if (!cfg.reuse_shift_counts) target = EmpiricalModel(d);
    target.restrict_to(region);
    HybridModel model(region, std::move(target), std::move(frozen), std::move(combined.chosen_source));
    finish(result, run_hybrid_ucbvi(target_env, model, vi_config(cfg, result.shift_episodes), rng, observer.on_vi),
           d.H);
    return result;
}

RunResult run_baseline(const TabularMDP& target_env, const HySRLConfig& cfg, Rng& rng,
                       const RunObserver& observer) {
    cfg.validate();
    return run_online(target_env, cfg, rng, observer, Algorithm::BpiUcbvi);
}

}  // namespace hysrl
